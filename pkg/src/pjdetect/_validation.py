"""Input checks for the estimator API (sklearn's helpers reject complex data)."""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, ShapeError


def check_channel(H) -> np.ndarray:
    H = np.asarray(H)
    if H.ndim != 2:
        raise ShapeError(f"expected a 2-D channel matrix, got shape {H.shape}")
    M, N = H.shape
    if N < 1 or M < N:
        raise ShapeError(f"channel must be M x N with M >= N >= 1, got {H.shape}")
    H = H.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(H)):
        raise ConfigError("channel matrix contains NaN or Inf")
    return H


def check_received(Y, M: int) -> tuple[np.ndarray, bool]:
    """Return ``Y`` as an ``(n_samples, M)`` complex array and whether it was 1-D."""
    Y = np.asarray(Y)
    single = Y.ndim == 1
    Y = np.atleast_2d(Y).astype(np.complex128, copy=False)
    if Y.ndim != 2 or Y.shape[1] != M:
        raise ShapeError(f"received vectors must have {M} entries, got shape {np.shape(Y)}")
    if not np.all(np.isfinite(Y)):
        raise ConfigError("received vectors contain NaN or Inf")
    return Y, single


def check_symbols(X, N: int, n_samples: int) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.complex128))
    if X.shape != (n_samples, N):
        raise ShapeError(f"expected symbols of shape {(n_samples, N)}, got {X.shape}")
    return X
