"""Closed-form pairwise error probabilities and SER approximations.

Conditioned on one channel realization ``H`` and noise variance
``sigma_v_sq``:

* ``pep_mld``: exact PEP of maximum-likelihood detection for an error ``e``.
* ``pep_mfb``: exact PEP of the matched-filter bound.
* ``pep_pj_general`` / ``pep_pj_conditional``: PEP of one projected Jacobi
  update given an initializer error.
* ``ser_mfb`` / ``ser_pj``: nearest-neighbour SER approximations, clamped to
  ``[0, 1]``.

Average-SER curves come from averaging the per-realization values over
independent channel draws (:func:`theory_curves`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal, Sequence

import numpy as np
from scipy.special import erfc

from .channel import ChannelConfig, compute_weights, generate
from .errors import ConfigError, ShapeError, ZeroDiagonalError
from .modem import Constellation
from .numerics import SeededRng, as_complex_matrix, as_complex_vector, gram

__all__ = [
    "q_function",
    "PepContext",
    "TheoryCurve",
    "pep_mld",
    "pep_mld_single",
    "pep_mfb",
    "pep_pj_general",
    "pep_pj_conditional",
    "pj_gamma",
    "pep_zf_single",
    "pep_lmmse_single",
    "pep_mf_single",
    "init_peps",
    "ser_mfb",
    "ser_pj",
    "ser_pj_terms",
    "asymptotic_pep",
    "theory_curves",
    "snr_db_to_noise_var",
]

NN_DIRECTIONS = np.array([1.0, -1.0, 1j, -1j])


def q_function(x):
    """Gaussian tail probability ``Q(x) = erfc(x / sqrt 2) / 2``."""
    out = 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))
    return float(out) if np.ndim(out) == 0 else out


def snr_db_to_noise_var(snr_db: float, sigma_x_sq: float = 1.0, sigma_h_sq: float = 1.0) -> float:
    """Noise variance for Es/No (dB) ``= 10 log10(sigma_x^2 sigma_h^2 / sigma_v^2)``."""
    return sigma_x_sq * sigma_h_sq / 10.0 ** (snr_db / 10.0)


@dataclass(frozen=True, eq=False)
class PepContext:
    """One channel realization, a constellation and a noise level."""

    H: np.ndarray
    c: Constellation
    sigma_v_sq: float

    def __post_init__(self):
        object.__setattr__(self, "H", as_complex_matrix(self.H, "H"))
        if not self.sigma_v_sq > 0:
            raise ConfigError(f"sigma_v_sq must be positive, got {self.sigma_v_sq}")
        if np.any(self.col_norm_sq <= 0):
            raise ZeroDiagonalError("channel has an all-zero column")

    @property
    def N(self) -> int:
        return self.H.shape[1]

    @cached_property
    def col_norm_sq(self) -> np.ndarray:
        return np.einsum("mn,mn->n", self.H.conj(), self.H).real

    @cached_property
    def A(self) -> np.ndarray:
        """Unregularised Gram matrix ``H^H H``."""
        return gram(self.H, 0.0)

    @cached_property
    def F(self) -> np.ndarray:
        F = -self.A / self.col_norm_sq[:, None]
        F[np.diag_indices(self.N)] = 0.0
        return F

    def with_noise(self, sigma_v_sq: float) -> "PepContext":
        ctx = PepContext(self.H, self.c, sigma_v_sq)
        # channel-only quantities carry over
        for key in ("col_norm_sq", "A", "F"):
            if key in self.__dict__:
                ctx.__dict__[key] = self.__dict__[key]
        return ctx


@dataclass
class TheoryCurve:
    label: str
    snr_db: list[float]
    ser: list[float]
    kind: Literal["exact", "approximation", "union_bound"] = "approximation"
    extra: dict = field(default_factory=dict)


def _error_vector(ctx: PepContext, e) -> np.ndarray:
    e = as_complex_vector(e, "e")
    if e.shape[0] != ctx.N:
        raise ShapeError(f"error vector has length {e.shape[0]}, expected {ctx.N}")
    if not np.any(e):
        raise ConfigError("error vector must be non-zero")
    return e


def _check_stream(ctx: PepContext, *idx: int) -> None:
    for i in idx:
        if not 0 <= i < ctx.N:
            raise ConfigError(f"stream index {i} out of range for N={ctx.N}")


def pep_mld(ctx: PepContext, e) -> float:
    e = _error_vector(ctx, e)
    He = ctx.H @ e
    return q_function(np.sqrt(np.vdot(He, He).real / (2 * ctx.sigma_v_sq)))


def pep_mld_single(ctx: PepContext, n: int | None = None):
    """Single nearest-neighbour error on stream ``n``; all streams when ``n`` is None."""
    norms = ctx.col_norm_sq
    if n is not None:
        _check_stream(ctx, n)
        norms = norms[n]
    return q_function(np.sqrt(norms * ctx.c.d_min**2 / (2 * ctx.sigma_v_sq)))


def pep_mfb(ctx: PepContext, e) -> float:
    e = _error_vector(ctx, e)
    e_sq = np.vdot(e, e).real
    g = ctx.H @ (e / ctx.col_norm_sq)
    return q_function(np.sqrt(e_sq**2 / (2 * ctx.sigma_v_sq * np.vdot(g, g).real)))


def pep_pj_general(ctx: PepContext, e, e_bar) -> float:
    """PEP of one PJ update from an initializer with error ``e_bar = z_bar - x``.

    The numerator keeps its sign, so a strongly misleading initializer gives a
    probability above one half.
    """
    e = _error_vector(ctx, e)
    e_bar = as_complex_vector(e_bar, "e_bar")
    if e_bar.shape != e.shape:
        raise ShapeError("e and e_bar must have the same length")
    num = np.vdot(e, e).real + 2 * np.vdot(e, ctx.F @ e_bar).real
    g = ctx.H @ (e / ctx.col_norm_sq)
    return q_function(num / np.sqrt(2 * ctx.sigma_v_sq * np.vdot(g, g).real))


def pj_gamma(ctx: PepContext, n: int, k: int) -> np.ndarray:
    """``1 + 2 Re(u F[n, k])`` for the four nearest-neighbour directions ``u``."""
    return 1.0 + 2.0 * (NN_DIRECTIONS * ctx.F[n, k]).real


def pep_pj_conditional(ctx: PepContext, n: int, k: int) -> float:
    """PJ error on stream ``n`` given one nearest-neighbour initializer error on ``k``.

    Averages over the four relative directions of the two unit errors. ``Gamma``
    enters with its sign (identical to the squared form whenever it is
    non-negative, which is the regime where the approximation is used).
    """
    _check_stream(ctx, n, k)
    base = np.sqrt(ctx.col_norm_sq[n] * ctx.c.d_min**2 / (2 * ctx.sigma_v_sq))
    return float(np.mean(q_function(pj_gamma(ctx, n, k) * base)))


def _pep_pj_conditional_matrix(ctx: PepContext) -> np.ndarray:
    base = np.sqrt(ctx.col_norm_sq * ctx.c.d_min**2 / (2 * ctx.sigma_v_sq))
    gamma = 1.0 + 2.0 * (NN_DIRECTIONS[:, None, None] * ctx.F[None, :, :]).real
    return q_function(gamma * base[None, :, None]).mean(axis=0)


def pep_zf_single(ctx: PepContext, k: int | None = None):
    """Nearest-neighbour error of the zero-forcing decision on stream ``k``."""
    try:
        diag = np.linalg.inv(ctx.A).diagonal().real
    except np.linalg.LinAlgError as exc:
        raise ZeroDiagonalError("Gram matrix is singular") from exc
    if k is not None:
        _check_stream(ctx, k)
        diag = diag[k]
    return q_function(np.sqrt(ctx.c.d_min**2 / (2 * ctx.sigma_v_sq * diag)))


def pep_lmmse_single(ctx: PepContext, k: int | None = None):
    """Nearest-neighbour error of the LMMSE decision, Gaussian-interference model.

    Uses the unbiased post-detection SINR ``sigma_x^2 / mse_k - 1``; reduces to
    :func:`pep_zf_single` as the noise vanishes.
    """
    rho = ctx.sigma_v_sq / ctx.c.sigma_x_sq
    A = ctx.A.copy()
    A[np.diag_indices(ctx.N)] += rho
    mse = ctx.sigma_v_sq * np.linalg.inv(A).diagonal().real
    sinr = ctx.c.sigma_x_sq / mse - 1.0
    if k is not None:
        _check_stream(ctx, k)
        sinr = sinr[k]
    return q_function(np.sqrt(ctx.c.d_min**2 * np.maximum(sinr, 0.0) / (2 * ctx.c.sigma_x_sq)))


def pep_mf_single(ctx: PepContext, k: int | None = None):
    """Nearest-neighbour error of the normalised matched filter, Gaussian-interference model."""
    var = ctx.c.sigma_x_sq * np.sum(np.abs(ctx.F) ** 2, axis=1) + ctx.sigma_v_sq / ctx.col_norm_sq
    if k is not None:
        _check_stream(ctx, k)
        var = var[k]
    return q_function(np.sqrt(ctx.c.d_min**2 / (2 * var)))


def init_peps(ctx: PepContext, kind: str) -> np.ndarray:
    """Per-stream initializer PEPs for ``kind`` in ``{"zf", "lmmse", "mf"}``."""
    if kind == "zf":
        return np.atleast_1d(pep_zf_single(ctx))
    if kind == "lmmse":
        return np.atleast_1d(pep_lmmse_single(ctx))
    if kind == "mf":
        return np.atleast_1d(pep_mf_single(ctx))
    raise ConfigError(f"no initializer PEP model for {kind!r}")


def ser_mfb(ctx: PepContext) -> float:
    """Average over streams of ``K`` times the single-error PEP, clamped to ``[0, 1]``."""
    return float(np.clip(np.mean(ctx.c.K * pep_mld_single(ctx)), 0.0, 1.0))


def ser_pj_terms(ctx: PepContext, init_pep: Sequence[float]) -> dict[str, float]:
    """Components of the PJ SER approximation: ``e_in``, ``e_mfb`` and ``psi``."""
    init_pep = np.asarray(init_pep, dtype=float)
    if init_pep.shape != (ctx.N,):
        raise ShapeError(f"init_pep must have length {ctx.N}")
    K = ctx.c.K
    e_in_k = np.clip(K * init_pep, 0.0, 1.0)
    e_mfb = ser_mfb(ctx)
    e_cond = np.clip(K * _pep_pj_conditional_matrix(ctx), 0.0, 1.0)
    psi = e_mfb * np.prod(1.0 - e_in_k) + float(np.sum(e_cond @ e_in_k)) / ctx.N
    return {"e_in": float(e_in_k.mean()), "e_mfb": e_mfb, "psi": float(psi)}


def ser_pj(ctx: PepContext, init_pep: Sequence[float]) -> float:
    """``min(E_in, Psi)`` clamped to ``[0, 1]``.

    An initializer with zero error probability contributes no bound of its own,
    so the result is ``Psi`` (which then equals the MFB SER).
    """
    t = ser_pj_terms(ctx, init_pep)
    value = t["psi"] if t["e_in"] == 0.0 else min(t["e_in"], t["psi"])
    return float(np.clip(value, 0.0, 1.0))


def asymptotic_pep(e, c: Constellation, sigma_v_sq: float, sigma_h_sq: float = 1.0) -> float:
    """Large-array limit ``Q(sqrt(sigma_h^2 ||e||^2 / (2 sigma_v^2)))`` shared by MLD and MFB."""
    e = np.asarray(e, dtype=np.complex128)
    return q_function(np.sqrt(sigma_h_sq * np.vdot(e, e).real / (2 * sigma_v_sq)))


def theory_curves(
    channel: ChannelConfig,
    c: Constellation,
    snr_db: Sequence[float],
    realizations: int,
    rng: SeededRng,
    init: str | None = "zf",
) -> list[TheoryCurve]:
    """Channel-averaged MFB (and optionally PJ) SER approximations per SNR point.

    The same ``realizations`` channel draws are reused at every SNR so the
    curves are smooth and monotone.
    """
    if realizations < 1:
        raise ConfigError("need at least one channel realization")
    weights = compute_weights(channel.geometry, channel.M, channel.N, channel.subarrays) if channel.model == "ind" else None
    contexts = []
    for r in range(realizations):
        H = generate(channel, rng.child(r), weights).H
        contexts.append(PepContext(H, c, 1.0))
    mfb, pj = [], []
    for snr in snr_db:
        nv = snr_db_to_noise_var(snr, c.sigma_x_sq, channel.sigma_h_sq)
        ctxs = [ctx.with_noise(nv) for ctx in contexts]
        mfb.append(float(np.mean([ser_mfb(ctx) for ctx in ctxs])))
        if init is not None:
            pj.append(float(np.mean([ser_pj(ctx, init_peps(ctx, init)) for ctx in ctxs])))
    curves = [TheoryCurve("MFB", list(map(float, snr_db)), mfb, "approximation", {"realizations": realizations})]
    if init is not None:
        curves.append(TheoryCurve(f"PJ({init.upper()})", list(map(float, snr_db)), pj, "approximation",
                                  {"realizations": realizations}))
    return curves
