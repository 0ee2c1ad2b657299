"""Dense complex linear-algebra kernels and seeded random generation.

Everything here is double precision and dense. Matrices are plain
``numpy.ndarray`` objects of dtype ``complex128``; functions never mutate
their inputs.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy import linalg

from .errors import ConfigError, NotPositiveDefiniteError, ShapeError

__all__ = [
    "SeededRng",
    "as_complex_matrix",
    "as_complex_vector",
    "gram",
    "solve_hermitian",
    "matvec",
    "adjoint_matvec",
    "residual_norm_sq",
    "draw_complex_gaussian",
]


def as_complex_matrix(H, name: str = "matrix") -> np.ndarray:
    H = np.asarray(H, dtype=np.complex128)
    if H.ndim != 2 or H.shape[0] < 1 or H.shape[1] < 1:
        raise ShapeError(f"{name} must be a non-empty 2-D array, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise ConfigError(f"{name} contains non-finite entries")
    return H


def as_complex_vector(v, name: str = "vector") -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1 or v.shape[0] < 1:
        raise ShapeError(f"{name} must be a non-empty 1-D array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ConfigError(f"{name} contains non-finite entries")
    return v


class SeededRng:
    """Deterministic random stream keyed by ``(seed, stream)``.

    ``stream`` may be an int or a tuple of ints; the pair maps onto a numpy
    ``SeedSequence`` spawn key, so distinct streams are statistically
    independent and any stream can be replayed in isolation.
    """

    def __init__(self, seed: int, stream: int | Sequence[int] = 0):
        if isinstance(stream, (int, np.integer)):
            stream = (int(stream),)
        self.seed = int(seed)
        self.stream = tuple(int(s) for s in stream)
        if self.seed < 0 or any(s < 0 for s in self.stream):
            raise ConfigError("seed and stream ids must be non-negative")
        seq = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def child(self, *key: int) -> "SeededRng":
        """Independent sub-stream ``(seed, stream + key)``."""
        return SeededRng(self.seed, self.stream + tuple(key))

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, stream={self.stream})"


def gram(H, rho: float = 0.0) -> np.ndarray:
    """Return ``A = H^H H + rho I``.

    Raises :class:`ShapeError` when ``H`` has fewer rows than columns; the
    system model assumes at least as many receive antennas as streams.
    """
    H = as_complex_matrix(H, "H")
    if rho < 0 or not np.isfinite(rho):
        raise ConfigError(f"rho must be a finite non-negative number, got {rho}")
    M, N = H.shape
    if M < N:
        raise ShapeError(f"H must satisfy M >= N, got M={M}, N={N}")
    A = H.conj().T @ H
    # symmetrize away rounding so downstream Hermitian kernels see exact symmetry
    A = 0.5 * (A + A.conj().T)
    A[np.diag_indices(N)] = A.diagonal().real + rho
    return A


def solve_hermitian(A, b) -> np.ndarray:
    """Solve ``A x = b`` for Hermitian positive definite ``A`` via Cholesky."""
    A = as_complex_matrix(A, "A")
    b = np.asarray(b, dtype=np.complex128)
    if A.shape[0] != A.shape[1]:
        raise ShapeError(f"A must be square, got {A.shape}")
    if b.shape[0] != A.shape[0]:
        raise ShapeError(f"b has length {b.shape[0]}, expected {A.shape[0]}")
    try:
        factor = linalg.cho_factor(A, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(str(exc)) from exc
    return linalg.cho_solve(factor, b, check_finite=False)


def matvec(A, x) -> np.ndarray:
    A = np.asarray(A)
    x = np.asarray(x)
    if A.ndim != 2 or x.ndim != 1 or A.shape[1] != x.shape[0]:
        raise ShapeError(f"cannot multiply {A.shape} by {x.shape}")
    return A @ x


def adjoint_matvec(H, y) -> np.ndarray:
    """Return ``H^H y``."""
    H = np.asarray(H)
    y = np.asarray(y)
    if H.ndim != 2 or y.ndim != 1 or H.shape[0] != y.shape[0]:
        raise ShapeError(f"cannot multiply adjoint of {H.shape} by {y.shape}")
    return H.conj().T @ y


def residual_norm_sq(v) -> float:
    v = np.asarray(v)
    return float(np.vdot(v, v).real)


def draw_complex_gaussian(rng: SeededRng, n: int, variance: float) -> np.ndarray:
    """Draw ``n`` i.i.d. CN(0, variance) samples (each axis has variance/2)."""
    if variance < 0 or not np.isfinite(variance):
        raise ConfigError(f"variance must be finite and non-negative, got {variance}")
    if n < 1:
        raise ConfigError(f"n must be positive, got {n}")
    scale = np.sqrt(variance / 2.0)
    g = rng.generator.standard_normal((n, 2))
    return scale * (g[:, 0] + 1j * g[:, 1])
