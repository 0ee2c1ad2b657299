"""Square QAM constellations, symbol sources, slicing and error counting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError
from .numerics import SeededRng

__all__ = [
    "Constellation",
    "SymbolVector",
    "make_qam",
    "draw_symbols",
    "slice_symbols",
    "count_symbol_errors",
]


@dataclass(frozen=True, eq=False)
class Constellation:
    """Unlabeled square J-QAM alphabet.

    Point ``i`` sits at grid position ``(i // L, i % L)`` with ``L = sqrt(J)``,
    the first coordinate on the real axis. ``K`` is the average number of
    nearest neighbours, ``4 - 4/sqrt(J)``.
    """

    order: int
    points: np.ndarray
    sigma_x_sq: float
    d_min: float
    K: float

    @property
    def side(self) -> int:
        return math.isqrt(self.order)

    @property
    def scale(self) -> float:
        """Half the grid spacing; grid level ``l`` maps to ``(2l - L + 1) * scale``."""
        return self.d_min / 2.0

    def __repr__(self) -> str:
        return f"Constellation(order={self.order}, sigma_x_sq={self.sigma_x_sq})"


@dataclass(frozen=True, eq=False)
class SymbolVector:
    indices: np.ndarray
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.indices)


def make_qam(J: int, sigma_x_sq: float = 1.0) -> Constellation:
    """Build a square QAM constellation of ``J`` points with mean energy ``sigma_x_sq``."""
    J = int(J)
    if J < 4 or 4 ** round(math.log(J, 4)) != J:
        raise ConfigError(f"QAM order must be a positive integer power of 4, got {J}")
    if not sigma_x_sq > 0:
        raise ConfigError(f"sigma_x_sq must be positive, got {sigma_x_sq}")
    L = math.isqrt(J)
    levels = 2.0 * np.arange(L) - (L - 1)
    scale = math.sqrt(1.5 * sigma_x_sq / (J - 1))
    points = scale * (levels[:, None] + 1j * levels[None, :]).ravel()
    return Constellation(
        order=J,
        points=points,
        sigma_x_sq=float(sigma_x_sq),
        d_min=math.sqrt(6.0 * sigma_x_sq / (J - 1)),
        K=4.0 - 4.0 / L,
    )


def _symbols(c: Constellation, indices: np.ndarray) -> SymbolVector:
    indices = np.asarray(indices, dtype=np.int64)
    return SymbolVector(indices=indices, values=c.points[indices])


def draw_symbols(c: Constellation, N: int, rng: SeededRng) -> SymbolVector:
    """Draw ``N`` equiprobable i.i.d. symbols."""
    if N < 1:
        raise ConfigError(f"N must be positive, got {N}")
    return _symbols(c, rng.generator.integers(0, c.order, size=N))


def _axis_index(u: np.ndarray, L: int, scale: float) -> np.ndarray:
    # level position in units of grid steps; exact half-way ties go to the lower level
    pos = (u / scale + (L - 1)) / 2.0
    return np.clip(np.ceil(pos - 0.5), 0, L - 1).astype(np.int64)


def slice_indices(c: Constellation, xhat) -> np.ndarray:
    """Nearest-point indices for an array of any shape."""
    xhat = np.asarray(xhat, dtype=np.complex128)
    if not np.all(np.isfinite(xhat)):
        raise ConfigError("cannot slice non-finite values")
    L = c.side
    return _axis_index(xhat.real, L, c.scale) * L + _axis_index(xhat.imag, L, c.scale)


def slice_symbols(c: Constellation, xhat) -> SymbolVector:
    """Symbol-by-symbol nearest-point decision.

    Square QAM decouples into independent per-axis quantizers. A point exactly
    half-way between two levels goes to the smaller index.
    """
    xhat = np.asarray(xhat, dtype=np.complex128)
    if xhat.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got shape {xhat.shape}")
    return _symbols(c, slice_indices(c, xhat))


def count_symbol_errors(truth: SymbolVector, decision: SymbolVector) -> tuple[int, np.ndarray]:
    """Return ``(total, per_stream)`` index mismatch counts."""
    if len(truth) != len(decision):
        raise ShapeError(f"length mismatch: {len(truth)} vs {len(decision)}")
    per_stream = (np.asarray(truth.indices) != np.asarray(decision.indices)).astype(np.int64)
    return int(per_stream.sum()), per_stream
