"""scikit-learn style wrappers around the functional detectors.

``fit(H)`` takes the channel and precomputes the Gram matrix; ``predict(Y)``
detects one received vector per row of ``Y`` and returns the decided symbols
(one row of ``N`` constellation points per sample). Hyper-parameters follow
the ``get_params``/``set_params``/``clone`` contract.

>>> det = ProjectedJacobiDetector(order=4, T=5, init_rho="zf").fit(H)   # doctest: +SKIP
>>> X_hat = det.predict(Y)                                             # doctest: +SKIP
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_channel, check_received, check_symbols
from .detectors import (
    DEFAULT_MLD_CAP,
    PrecomputedSystem,
    SolverConfig,
    detect_mf,
    detect_mld,
    detect_pj,
    detect_rzf,
    resolve_rho,
)
from .errors import ConfigError
from .modem import make_qam
from .numerics import gram

__all__ = ["MatchedFilterDetector", "RZFDetector", "ProjectedJacobiDetector", "MLDetector"]


class _DetectorBase(BaseEstimator):
    noise_var = None

    def fit(self, H, y=None):
        H = check_channel(H)
        self.constellation_ = make_qam(self.order, self.sigma_x_sq)
        self.H_ = H
        self.gram_ = gram(H, 0.0)
        self.n_antennas_, self.n_streams_ = H.shape
        return self

    def _system(self, y, rho: float = 0.0) -> PrecomputedSystem:
        return PrecomputedSystem(self.H_, y, rho, _hh=self.gram_)

    def _rho(self, rho) -> float:
        return resolve_rho(rho, self.noise_var, self.sigma_x_sq)

    def _detect(self, y) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def predict(self, Y) -> np.ndarray:
        check_is_fitted(self, "gram_")
        Y, single = check_received(Y, self.n_antennas_)
        X = np.stack([self._detect(y) for y in Y])
        return X[0] if single else X

    def score(self, Y, X) -> float:
        """Fraction of correctly detected symbols (1 - SER)."""
        X_hat = np.atleast_2d(self.predict(Y))
        X = check_symbols(X, self.n_streams_, X_hat.shape[0])
        return float(np.mean(np.isclose(X_hat, X, atol=1e-9 * self.constellation_.d_min)))


class MatchedFilterDetector(_DetectorBase):
    """Per-stream normalised matched filter."""

    def __init__(self, order: int = 4, sigma_x_sq: float = 1.0):
        self.order = order
        self.sigma_x_sq = sigma_x_sq

    def transform(self, Y) -> np.ndarray:
        check_is_fitted(self, "gram_")
        Y, single = check_received(Y, self.n_antennas_)
        soft = (Y @ self.H_.conj()) / self.gram_.diagonal().real
        return soft[0] if single else soft

    def _detect(self, y):
        return detect_mf(self._system(y), self.constellation_).decision.values


class RZFDetector(_DetectorBase):
    """Regularised zero forcing; ``rho=0`` is ZF, ``rho="lmmse"`` uses ``noise_var``."""

    def __init__(self, order: int = 4, sigma_x_sq: float = 1.0, rho=0.0, noise_var=None,
                 solver: str = "direct", solver_iters=None, tol: float = 1e-8):
        self.order = order
        self.sigma_x_sq = sigma_x_sq
        self.rho = rho
        self.noise_var = noise_var
        self.solver = solver
        self.solver_iters = solver_iters
        self.tol = tol

    def _solver(self) -> SolverConfig:
        return SolverConfig(self.solver, self.solver_iters, self.tol)

    def transform(self, Y) -> np.ndarray:
        check_is_fitted(self, "gram_")
        Y, single = check_received(Y, self.n_antennas_)
        rho = self._rho(self.rho)
        soft = np.stack([detect_rzf(self._system(y, rho), self.constellation_, self._solver()).soft for y in Y])
        return soft[0] if single else soft

    def _detect(self, y):
        return detect_rzf(self._system(y, self._rho(self.rho)), self.constellation_, self._solver()).decision.values


class ProjectedJacobiDetector(_DetectorBase):
    """Projected Jacobi detector.

    Parameters
    ----------
    order : int
        QAM order J (a power of 4).
    sigma_x_sq : float
        Mean symbol energy.
    T : int
        Number of projected Jacobi iterations.
    init : {"rzf", "mf", "zero"}
        Initial decision. ``"rzf"`` slices the (regularised) zero-forcing
        estimate, ``"mf"`` the matched filter output.
    init_rho : float or {"zf", "lmmse"}
        Regularisation of the RZF initializer. ``"lmmse"`` needs ``noise_var``.
    rho : float
        Regularisation of the iteration's Gram matrix (0 by default).
    solver : {"cg", "jacobi", "direct"}
        How the RZF initializer is computed.
    solver_iters : int or None
        Iteration budget of an iterative initializer; ``None`` picks
        ``ceil(2 sqrt(N))`` for conjugate gradient.
    noise_var : float or None
        Noise variance, only needed for the LMMSE initializer.

    Attributes
    ----------
    t_star_ : ndarray
        Selected iteration index for every sample of the last ``predict`` call.
    """

    def __init__(self, order: int = 4, sigma_x_sq: float = 1.0, T: int = 5, init: str = "rzf",
                 init_rho="zf", rho: float = 0.0, solver: str = "cg", solver_iters=None, noise_var=None):
        self.order = order
        self.sigma_x_sq = sigma_x_sq
        self.T = T
        self.init = init
        self.init_rho = init_rho
        self.rho = rho
        self.solver = solver
        self.solver_iters = solver_iters
        self.noise_var = noise_var

    def fit(self, H, y=None):
        if int(self.T) < 1:
            raise ConfigError("T must be >= 1")
        if self.init not in ("rzf", "mf", "zero"):
            raise ConfigError(f"unknown initializer {self.init!r}")
        return super().fit(H, y)

    def predict(self, Y) -> np.ndarray:
        self._t_star = []
        out = super().predict(Y)
        self.t_star_ = np.asarray(self._t_star)
        return out

    def _detect(self, y):
        sys = self._system(y, self._rho(self.rho))
        init_sys = sys.with_rho(self._rho(self.init_rho))
        res = detect_pj(sys, self.constellation_, int(self.T), self.init, init_sys,
                        SolverConfig(self.solver, self.solver_iters))
        self._t_star.append(res.t_star)
        return res.decision.values


class MLDetector(_DetectorBase):
    """Exhaustive maximum-likelihood search (small systems only)."""

    def __init__(self, order: int = 4, sigma_x_sq: float = 1.0, cap: int = DEFAULT_MLD_CAP):
        self.order = order
        self.sigma_x_sq = sigma_x_sq
        self.cap = cap

    def _detect(self, y):
        return detect_mld(self.H_, y, self.constellation_, self.cap).decision.values
