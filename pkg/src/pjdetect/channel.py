"""Stationary (i.i.d.) and spatially non-stationary (i.n.d.) Rayleigh channels.

The non-stationary model splits a long uniform linear array into ``S`` equal
subarrays. Every antenna of a subarray shares the large-scale weight of the
subarray centre, and each user's weights are rescaled so that they sum to
``M``; the average received power per user is therefore identical in both
models.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from .errors import ConfigError
from .numerics import SeededRng, as_complex_matrix

__all__ = [
    "ElaaGeometry",
    "ChannelConfig",
    "ChannelRealization",
    "compute_weights",
    "generate_iid",
    "generate_ind",
    "generate",
    "condition_number",
    "dump_realization",
    "load_realization",
]

Model = Literal["iid", "ind"]


@dataclass(frozen=True)
class ElaaGeometry:
    """Planar geometry of a ULA with users on a line parallel to it.

    Distances are in metres. ``user_positions`` are coordinates along the
    array axis (the array spans ``[0, array_length]``); when omitted, users are
    spread uniformly over the array extent.
    """

    carrier_freq: float = 3.5e9
    array_length: float = 214.0
    user_perp_distance: float = 50.0
    user_positions: tuple[float, ...] | None = None
    pathloss_exponent: float = 2.0

    def positions(self, N: int) -> np.ndarray:
        if self.user_positions is None:
            return (np.arange(N) + 0.5) * self.array_length / N
        pos = np.asarray(self.user_positions, dtype=float)
        if pos.shape != (N,):
            raise ConfigError(f"expected {N} user positions, got {pos.size}")
        return pos

    def validate(self) -> None:
        if not (self.carrier_freq > 0 and self.array_length > 0 and self.user_perp_distance > 0):
            raise ConfigError("carrier frequency, array length and user distance must be positive")
        if self.pathloss_exponent < 0:
            raise ConfigError("pathloss exponent must be non-negative")


@dataclass(frozen=True)
class ChannelConfig:
    M: int
    N: int
    sigma_h_sq: float = 1.0
    model: Model = "iid"
    geometry: ElaaGeometry = field(default_factory=ElaaGeometry)
    subarrays: int = 1

    def validate(self) -> None:
        if not (self.M >= self.N >= 1):
            raise ConfigError(f"need M >= N >= 1, got M={self.M}, N={self.N}")
        if not self.sigma_h_sq > 0:
            raise ConfigError(f"sigma_h_sq must be positive, got {self.sigma_h_sq}")
        if self.model not in ("iid", "ind"):
            raise ConfigError(f"unknown channel model {self.model!r}")
        if self.subarrays < 1 or self.M % self.subarrays:
            raise ConfigError(f"subarrays={self.subarrays} must divide M={self.M}")
        if self.model == "ind":
            self.geometry.validate()

    def with_users(self, N: int) -> "ChannelConfig":
        geometry = self.geometry
        if geometry.user_positions is not None and len(geometry.user_positions) != N:
            geometry = ElaaGeometry(**{**asdict(geometry), "user_positions": None})
        return ChannelConfig(self.M, N, self.sigma_h_sq, self.model, geometry, self.subarrays)

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelConfig":
        d = dict(d)
        geo = d.pop("geometry", None) or {}
        try:
            # YAML 1.1 reads "3.5e9" as a string, so coerce every numeric field
            for key in ("carrier_freq", "array_length", "user_perp_distance", "pathloss_exponent"):
                if key in geo:
                    geo[key] = float(geo[key])
            if geo.get("user_positions") is not None:
                geo["user_positions"] = tuple(float(p) for p in geo["user_positions"])
            for key in ("M", "N", "subarrays"):
                if key in d:
                    d[key] = int(d[key])
            if "sigma_h_sq" in d:
                d["sigma_h_sq"] = float(d["sigma_h_sq"])
            cfg = cls(geometry=ElaaGeometry(**geo), **d)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad channel config: {exc}") from exc
        cfg.validate()
        return cfg


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    H: np.ndarray
    weights: np.ndarray
    config: ChannelConfig


def compute_weights(geometry: ElaaGeometry, M: int, N: int, S: int) -> np.ndarray:
    """Large-scale weights ``w[m, n]`` with every column summing to ``M``.

    Raw weights follow ``d**-gamma`` where ``d`` is the distance from the
    subarray centre to the user.
    """
    geometry.validate()
    if S < 1 or M % S:
        raise ConfigError(f"subarrays={S} must divide M={M}")
    antenna_x = np.arange(M) * (geometry.array_length / (M - 1) if M > 1 else 0.0)
    centres = antenna_x.reshape(S, M // S).mean(axis=1)
    users = geometry.positions(N)
    dist = np.hypot(centres[:, None] - users[None, :], geometry.user_perp_distance)
    if np.any(dist <= 0):
        raise ConfigError("degenerate geometry: zero antenna-user distance")
    raw = dist ** (-geometry.pathloss_exponent)
    w_sub = raw * (S / raw.sum(axis=0, keepdims=True))
    w = np.repeat(w_sub, M // S, axis=0)
    # exact normalisation; the repeat above is already correct up to rounding
    return w * (M / w.sum(axis=0, keepdims=True))


def _cn(rng: SeededRng, shape) -> np.ndarray:
    g = rng.generator.standard_normal(shape + (2,))
    return (g[..., 0] + 1j * g[..., 1]) * np.sqrt(0.5)


def generate_iid(cfg: ChannelConfig, rng: SeededRng) -> ChannelRealization:
    """Entries i.i.d. ``CN(0, sigma_h_sq / M)``."""
    cfg.validate()
    if cfg.model != "iid":
        raise ConfigError("generate_iid needs model='iid'")
    H = _cn(rng, (cfg.M, cfg.N)) * np.sqrt(cfg.sigma_h_sq / cfg.M)
    return ChannelRealization(H=H, weights=np.ones((cfg.M, cfg.N)), config=cfg)


def generate_ind(cfg: ChannelConfig, rng: SeededRng, weights: np.ndarray | None = None) -> ChannelRealization:
    """Entries independent ``CN(0, w[m, n] * sigma_h_sq / M)``.

    ``weights`` may be passed in to skip recomputing them for every trial.
    """
    cfg.validate()
    if cfg.model != "ind":
        raise ConfigError("generate_ind needs model='ind'")
    if weights is None:
        weights = compute_weights(cfg.geometry, cfg.M, cfg.N, cfg.subarrays)
    H = _cn(rng, (cfg.M, cfg.N)) * np.sqrt(weights * cfg.sigma_h_sq / cfg.M)
    return ChannelRealization(H=H, weights=weights, config=cfg)


def generate(cfg: ChannelConfig, rng: SeededRng, weights: np.ndarray | None = None) -> ChannelRealization:
    if cfg.model == "ind":
        return generate_ind(cfg, rng, weights)
    return generate_iid(cfg, rng)


def condition_number(H) -> float:
    """Ratio of extreme singular values; ``inf`` for numerically rank-deficient H."""
    H = as_complex_matrix(H, "H")
    if H.shape[0] < H.shape[1]:
        raise ConfigError("condition_number needs M >= N")
    s = np.linalg.svd(H, compute_uv=False)
    if s[-1] <= s[0] * max(H.shape) * np.finfo(float).eps:
        return float("inf")
    return float(s[0] / s[-1])


def dump_realization(path, real: ChannelRealization) -> None:
    """Write a realization as CSV, column-major (user index outer).

    The first line is a ``#`` comment with ``key=value`` metadata; columns are
    ``m,n,re,im,weight``.
    """
    cfg = real.config
    M, N = real.H.shape
    meta = f"# model={cfg.model} M={M} N={N} sigma_h_sq={cfg.sigma_h_sq!r} subarrays={cfg.subarrays}"
    with open(path, "w", newline="") as fh:
        fh.write(meta + "\n")
        writer = csv.writer(fh)
        writer.writerow(["m", "n", "re", "im", "weight"])
        for n in range(N):
            for m in range(M):
                h = real.H[m, n]
                writer.writerow([m, n, repr(float(h.real)), repr(float(h.imag)), repr(float(real.weights[m, n]))])


def load_realization(path) -> ChannelRealization:
    lines = Path(path).read_text().splitlines()
    meta = dict(item.split("=", 1) for item in lines[0].lstrip("# ").split())
    M, N = int(meta["M"]), int(meta["N"])
    H = np.zeros((M, N), dtype=np.complex128)
    w = np.zeros((M, N))
    for row in csv.DictReader(lines[1:]):
        m, n = int(row["m"]), int(row["n"])
        H[m, n] = complex(float(row["re"]), float(row["im"]))
        w[m, n] = float(row["weight"])
    cfg = ChannelConfig(M=M, N=N, sigma_h_sq=float(meta["sigma_h_sq"]), model=meta["model"],
                        subarrays=int(meta["subarrays"]))
    return ChannelRealization(H=H, weights=w, config=cfg)
