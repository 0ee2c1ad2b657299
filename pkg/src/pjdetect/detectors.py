"""MIMO detectors: MF, RZF (ZF/LMMSE), classical Jacobi, projected Jacobi,
the matched-filter bound and exhaustive maximum-likelihood search.

All detectors work on a :class:`PrecomputedSystem` (or raw ``H``/``y`` for the
genie and exhaustive detectors) and return a :class:`DetectorOutput`. Complex
multiply-accumulate (MAC) counts are tallied as the kernels execute. Shared
preprocessing (the Gram matrix and ``H^H y``) is counted on the system, not
on the individual detectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal, Union

import numpy as np

from .errors import ConfigError, EnumerationCapError, ShapeError, ZeroDiagonalError
from .modem import Constellation, SymbolVector, slice_indices, slice_symbols
from .numerics import as_complex_matrix, as_complex_vector, gram, residual_norm_sq, solve_hermitian

__all__ = [
    "SolverConfig",
    "DetectorConfig",
    "DetectorOutput",
    "PrecomputedSystem",
    "build_system",
    "resolve_rho",
    "cholesky_solve_macs",
    "jacobi_step",
    "detect_mf",
    "detect_rzf",
    "detect_jacobi",
    "detect_pj",
    "detect_mfb",
    "detect_mld",
    "run_detector",
    "DEFAULT_MLD_CAP",
]

DEFAULT_MLD_CAP = 2**24

Rho = Union[float, Literal["zf", "lmmse"]]


@dataclass(frozen=True)
class SolverConfig:
    """How the RZF estimate ``A^-1 b`` is obtained.

    ``iters=None`` selects ``ceil(2 sqrt(N))`` for conjugate gradient and 100
    sweeps for Jacobi.
    """

    kind: Literal["direct", "jacobi", "cg"] = "cg"
    iters: int | None = None
    tol: float = 1e-8

    def iterations(self, N: int) -> int:
        if self.iters is not None:
            return int(self.iters)
        return math.ceil(2 * math.sqrt(N)) if self.kind == "cg" else 100


@dataclass(frozen=True)
class DetectorConfig:
    """Detector selection.

    ``rho`` is the regularisation of the detector's own Gram matrix; the
    strings ``"zf"`` and ``"lmmse"`` resolve to ``0`` and ``sigma_v^2/sigma_x^2``.
    For PJ, ``rho`` applies to the iteration (0 keeps the iteration on the
    interference-cancelling form) and ``init_rho`` to the RZF initializer.
    """

    kind: Literal["mf", "rzf", "jacobi", "pj", "mfb", "mld"]
    rho: Rho = 0.0
    T: int = 5
    init: Literal["zero", "mf", "rzf"] = "rzf"
    init_rho: Rho = "lmmse"
    solver: SolverConfig = field(default_factory=SolverConfig)
    label: str | None = None
    mld_cap: int = DEFAULT_MLD_CAP

    def __post_init__(self):
        if self.kind not in ("mf", "rzf", "jacobi", "pj", "mfb", "mld"):
            raise ConfigError(f"unknown detector kind {self.kind!r}")
        if self.kind in ("pj", "jacobi") and self.T < 1:
            raise ConfigError("iterative detectors need T >= 1")
        if self.init not in ("zero", "mf", "rzf"):
            raise ConfigError(f"unknown initializer {self.init!r}")
        for r in (self.rho, self.init_rho):
            if isinstance(r, str):
                if r not in ("zf", "lmmse"):
                    raise ConfigError(f"rho must be a number, 'zf' or 'lmmse', got {r!r}")
            elif not r >= 0:
                raise ConfigError(f"rho must be non-negative, got {r}")

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.kind == "pj":
            if self.init == "rzf":
                return f"PJ({_rho_name(self.init_rho)})"
            return f"PJ({self.init.upper()})"
        if self.kind == "rzf":
            return _rho_name(self.rho)
        return self.kind.upper()

    @classmethod
    def from_dict(cls, d: dict) -> "DetectorConfig":
        d = dict(d)
        solver = d.pop("solver", None)
        if isinstance(solver, str):
            solver = {"kind": solver}
        try:
            return cls(solver=SolverConfig(**(solver or {})), **d)
        except TypeError as exc:
            raise ConfigError(f"bad detector config: {exc}") from exc


def _rho_name(rho: Rho) -> str:
    if rho == "lmmse":
        return "LMMSE"
    if rho == "zf" or rho == 0:
        return "ZF"
    return f"RZF(rho={rho:g})"


def resolve_rho(rho: Rho, sigma_v_sq: float | None, sigma_x_sq: float = 1.0) -> float:
    if rho == "zf":
        return 0.0
    if rho == "lmmse":
        if sigma_v_sq is None:
            raise ConfigError("LMMSE regularisation needs the noise variance")
        return float(sigma_v_sq) / sigma_x_sq
    return float(rho)


@dataclass
class DetectorOutput:
    decision: SymbolVector
    soft: np.ndarray
    t_star: int = 0
    residual_history: list[float] = field(default_factory=list)
    op_count: int = 0
    ops: dict[str, int] = field(default_factory=dict)
    info: dict[str, float] = field(default_factory=dict)


class PrecomputedSystem:
    """Gram-domain view of ``y = H x + v``.

    Holds ``A = H^H H + rho I``, its diagonal ``D``, ``b = H^H y`` and the
    hollow iteration matrix ``F = I - D^-1 A`` (built on first access).
    Treat instances as immutable.
    """

    def __init__(self, H, y, rho: float = 0.0, *, _hh: np.ndarray | None = None, _b: np.ndarray | None = None):
        self.H = as_complex_matrix(H, "H")
        M, N = self.H.shape
        self.y = as_complex_vector(y, "y")
        if self.y.shape[0] != M:
            raise ShapeError(f"y has length {self.y.shape[0]}, expected {M}")
        self.rho = float(rho)
        self._hh = gram(self.H, 0.0) if _hh is None else _hh
        self.A = self._hh.copy()
        self.A[np.diag_indices(N)] += self.rho
        self.D = self.A.diagonal().real.copy()
        if np.any(self.D <= 0):
            raise ZeroDiagonalError("Gram matrix has a zero diagonal entry")
        self.D_inv = 1.0 / self.D
        self.b = self.H.conj().T @ self.y if _b is None else _b
        # shared preprocessing, reported once per system
        self.preprocess_macs = M * N * N + M * N

    @property
    def shape(self) -> tuple[int, int]:
        return self.H.shape

    @property
    def N(self) -> int:
        return self.H.shape[1]

    @cached_property
    def F(self) -> np.ndarray:
        F = -self.D_inv[:, None] * self.A
        F[np.diag_indices(self.N)] = 0.0
        return F

    def with_rho(self, rho: float) -> "PrecomputedSystem":
        """Same channel and observation, different regularisation (no new Gram)."""
        if float(rho) == self.rho:
            return self
        return PrecomputedSystem(self.H, self.y, rho, _hh=self._hh, _b=self.b)


def build_system(H, y, rho: float = 0.0) -> PrecomputedSystem:
    return PrecomputedSystem(H, y, rho)


def cholesky_solve_macs(N: int) -> int:
    """MACs of a dense Cholesky factorisation plus two triangular solves."""
    return (N**3 - N) // 6 + N * (N + 1)


def _check_iterate(sys: PrecomputedSystem, z: np.ndarray) -> None:
    if z.shape != (sys.N,):
        raise ShapeError(f"iterate has shape {z.shape}, expected ({sys.N},)")


def jacobi_step(sys: PrecomputedSystem, z, ops: dict | None = None) -> np.ndarray:
    """One Jacobi update ``z + D^-1 (b - A z)``; costs ``N**2 + N`` MACs."""
    z = np.asarray(z, dtype=np.complex128)
    _check_iterate(sys, z)
    x, _ = _step(sys, z, ops)
    return x


def _step(sys: PrecomputedSystem, z: np.ndarray, ops: dict | None) -> tuple[np.ndarray, np.ndarray]:
    r = sys.b - sys.A @ z
    x = z + sys.D_inv * r
    if ops is not None:
        ops["step"] = ops.get("step", 0) + sys.N * sys.N + sys.N
    return x, r


def detect_mf(sys: PrecomputedSystem, c: Constellation) -> DetectorOutput:
    """Per-stream normalised matched filter, ``slice(D^-1 H^H y)``."""
    soft = sys.D_inv * sys.b
    return DetectorOutput(decision=slice_symbols(c, soft), soft=soft, op_count=sys.N, ops={"mf": sys.N})


def _rzf_soft(sys: PrecomputedSystem, solver: SolverConfig) -> tuple[np.ndarray, dict, dict, list[float]]:
    N = sys.N
    b_norm = math.sqrt(residual_norm_sq(sys.b)) or 1.0
    info: dict[str, float] = {}
    history: list[float] = []
    if solver.kind == "direct":
        x = solve_hermitian(sys.A, sys.b)
        ops = {"solve": cholesky_solve_macs(N)}
    elif solver.kind == "jacobi":
        x = np.zeros(N, dtype=np.complex128)
        ops = {}
        for _ in range(solver.iterations(N)):
            x, r = _step(sys, x, ops)
            rel = math.sqrt(residual_norm_sq(r)) / b_norm
            history.append(rel)
            if rel <= solver.tol:
                break
        ops = {"solve": ops["step"]}
    elif solver.kind == "cg":
        x, history, macs = _conjugate_gradient(sys.A, sys.b, solver.iterations(N), solver.tol)
        ops = {"solve": macs}
    else:
        raise ConfigError(f"unknown RZF solver {solver.kind!r}")
    info["relative_residual"] = math.sqrt(residual_norm_sq(sys.b - sys.A @ x)) / b_norm
    return x, ops, info, history


def _conjugate_gradient(A: np.ndarray, b: np.ndarray, iters: int, tol: float):
    N = b.shape[0]
    x = np.zeros(N, dtype=np.complex128)
    r = b.copy()
    p = r.copy()
    rs = residual_norm_sq(r)
    b_norm = math.sqrt(rs) or 1.0
    history = []
    macs = 0
    for _ in range(iters):
        if math.sqrt(rs) / b_norm <= tol:
            break
        Ap = A @ p
        alpha = rs / np.vdot(p, Ap).real
        x += alpha * p
        r -= alpha * Ap
        rs_new = residual_norm_sq(r)
        p = r + (rs_new / rs) * p
        rs = rs_new
        # matvec, two inner products, three axpys
        macs += N * N + 5 * N
        history.append(math.sqrt(rs) / b_norm)
    return x, history, macs


def detect_rzf(sys: PrecomputedSystem, c: Constellation, solver: SolverConfig = SolverConfig("direct")) -> DetectorOutput:
    """Regularised zero forcing ``slice(A^-1 b)`` with ``A`` taken from ``sys``.

    Iterative solvers stop at ``solver.tol`` relative residual; the achieved
    value is reported in ``info["relative_residual"]`` either way.
    """
    soft, ops, info, history = _rzf_soft(sys, solver)
    return DetectorOutput(
        decision=slice_symbols(c, soft),
        soft=soft,
        residual_history=history,
        op_count=sum(ops.values()),
        ops=ops,
        info=info,
    )


def detect_jacobi(sys: PrecomputedSystem, c: Constellation, T: int) -> DetectorOutput:
    """Classical Jacobi from zero, ``T`` sweeps, sliced once at the end."""
    if T < 1:
        raise ConfigError("T must be >= 1")
    ops: dict[str, int] = {}
    x = np.zeros(sys.N, dtype=np.complex128)
    history = []
    for _ in range(T):
        x, r = _step(sys, x, ops)
        history.append(residual_norm_sq(r))
    return DetectorOutput(decision=slice_symbols(c, x), soft=x, residual_history=history,
                          op_count=ops["step"], ops=ops)


def detect_pj(
    sys: PrecomputedSystem,
    c: Constellation,
    T: int = 5,
    init: str = "rzf",
    init_system: PrecomputedSystem | None = None,
    init_solver: SolverConfig = SolverConfig(),
) -> DetectorOutput:
    """Projected Jacobi.

    Each iteration applies one Jacobi update to the current symbol vector and
    slices the result back onto the constellation. The output is the iterate
    with the smallest residual ``||b - A z_t||^2``; the initializer's own
    decision ``z_0`` competes too unless ``init="zero"``.

    ``init_system`` supplies the Gram matrix of the RZF initializer (for an
    LMMSE start it carries ``rho = sigma_v^2/sigma_x^2``); it defaults to
    ``sys`` itself, i.e. a zero-forcing start when ``sys.rho == 0``.
    """
    if T < 1:
        raise ConfigError("T must be >= 1")
    N = sys.N
    ops: dict[str, int] = {}
    init_soft = None
    if init == "zero":
        z = np.zeros(N, dtype=np.complex128)
        idx = None
    elif init == "mf":
        init_soft = sys.D_inv * sys.b
        ops["init"] = N
    elif init == "rzf":
        init_soft, init_ops, _, _ = _rzf_soft(init_system if init_system is not None else sys, init_solver)
        ops["init"] = sum(init_ops.values())
    else:
        raise ConfigError(f"unknown initializer {init!r}")
    if init_soft is not None:
        idx = slice_indices(c, init_soft)
        z = c.points[idx]

    iterates_idx = [idx]
    softs = [init_soft]
    history = []
    for _ in range(T):
        x, r = _step(sys, z, ops)
        history.append(residual_norm_sq(r))
        idx = slice_indices(c, x)
        z = c.points[idx]
        iterates_idx.append(idx)
        softs.append(x)
    r_last = sys.b - sys.A @ z
    history.append(residual_norm_sq(r_last))

    first = 1 if init == "zero" else 0
    n_candidates = T + 1 - first
    ops["residual"] = N * N + n_candidates * N
    t_star = first + int(np.argmin(history[first:]))
    chosen = iterates_idx[t_star]
    return DetectorOutput(
        decision=SymbolVector(indices=chosen, values=c.points[chosen]),
        soft=softs[t_star],
        t_star=t_star,
        residual_history=history,
        op_count=sum(ops.values()),
        ops=ops,
        info={"step_macs_per_iteration": ops["step"] / T},
    )


def detect_mfb(H, x: SymbolVector, v, c: Constellation) -> DetectorOutput:
    """Genie matched-filter bound ``slice(x + D^-1 H^H v)``; interference removed."""
    H = as_complex_matrix(H, "H")
    v = as_complex_vector(v, "v")
    D = np.einsum("mn,mn->n", H.conj(), H).real
    if np.any(D <= 0):
        raise ZeroDiagonalError("channel has an all-zero column")
    soft = x.values + (H.conj().T @ v) / D
    M, N = H.shape
    return DetectorOutput(decision=slice_symbols(c, soft), soft=soft, op_count=M * N + N, ops={"mfb": M * N + N})


def _mld_candidates(J: int, N: int, start: int, stop: int) -> np.ndarray:
    # base-J digits, stream 0 most significant, so linear order is lexicographic
    lin = np.arange(start, stop, dtype=np.int64)
    digits = np.empty((lin.size, N), dtype=np.int64)
    for n in range(N - 1, -1, -1):
        digits[:, n] = lin % J
        lin //= J
    return digits


def detect_mld(H, y, c: Constellation, cap: int = DEFAULT_MLD_CAP, chunk: int = 1 << 15) -> DetectorOutput:
    """Exhaustive ``argmin ||y - H x||^2`` over the full lattice.

    Ties go to the lexicographically smallest index vector.
    """
    H = as_complex_matrix(H, "H")
    y = as_complex_vector(y, "y")
    M, N = H.shape
    if y.shape[0] != M:
        raise ShapeError(f"y has length {y.shape[0]}, expected {M}")
    total = c.order**N
    if total > cap:
        raise EnumerationCapError(f"J**N = {total} exceeds the enumeration cap {cap}")
    best_val = np.inf
    best = None
    Ht = H.T
    for start in range(0, total, chunk):
        digits = _mld_candidates(c.order, N, start, min(start + chunk, total))
        resid = y[None, :] - c.points[digits] @ Ht
        metric = np.einsum("km,km->k", resid.conj(), resid).real
        k = int(np.argmin(metric))
        if metric[k] < best_val:
            best_val = metric[k]
            best = digits[k]
    return DetectorOutput(
        decision=SymbolVector(indices=best, values=c.points[best]),
        soft=c.points[best],
        residual_history=[float(best_val)],
        op_count=total * (M * N + M),
        ops={"candidates": total, "metric": total * (M * N + M)},
    )


def run_detector(
    cfg: DetectorConfig,
    sys: PrecomputedSystem,
    c: Constellation,
    *,
    x: SymbolVector | None = None,
    v: np.ndarray | None = None,
    sigma_v_sq: float | None = None,
) -> DetectorOutput:
    """Dispatch one configured detector on a prepared system.

    ``sys`` must carry ``rho = 0``; regularised variants derive their own
    Gram matrix from it. ``x`` and ``v`` are needed only by the genie bound.
    """
    rho = resolve_rho(cfg.rho, sigma_v_sq, c.sigma_x_sq)
    if cfg.kind == "mf":
        return detect_mf(sys, c)
    if cfg.kind == "rzf":
        return detect_rzf(sys.with_rho(rho), c, cfg.solver)
    if cfg.kind == "jacobi":
        return detect_jacobi(sys.with_rho(rho), c, cfg.T)
    if cfg.kind == "pj":
        init_rho = resolve_rho(cfg.init_rho, sigma_v_sq, c.sigma_x_sq)
        return detect_pj(sys.with_rho(rho), c, cfg.T, cfg.init, sys.with_rho(init_rho), cfg.solver)
    if cfg.kind == "mfb":
        if x is None or v is None:
            raise ConfigError("the matched-filter bound needs the true symbols and noise")
        return detect_mfb(sys.H, x, v, c)
    if cfg.kind == "mld":
        return detect_mld(sys.H, sys.y, c, cfg.mld_cap)
    raise ConfigError(f"unknown detector kind {cfg.kind!r}")
