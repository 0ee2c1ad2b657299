"""Parallel Monte Carlo engine with adaptive stopping.

Every trial draws its randomness from ``SeededRng(seed, (point, trial))``,
so results depend only on the seed and the configuration, never on how
trials are spread over workers. Trials run in blocks; blocks are submitted
in fixed-size rounds and merged in block order, and the stopping rule is
evaluated after each round on the merged counts.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .. import __version__
from ..analysis import snr_db_to_noise_var
from ..channel import ChannelConfig, compute_weights, generate
from ..detectors import build_system, run_detector
from ..errors import ConfigError, PJDetectError
from ..modem import count_symbol_errors, draw_symbols
from ..numerics import SeededRng, draw_complex_gaussian
from .config import ExperimentConfig

logger = logging.getLogger(__name__)

__all__ = ["TrialOutcome", "PointResult", "RunManifest", "SweepResult", "SweepError", "run_trial", "run_sweep"]


@dataclass
class TrialOutcome:
    errors: int
    per_stream: np.ndarray
    op_count: int


@dataclass
class PointResult:
    detector: str
    snr_db: float
    n_users: int
    m_antennas: int
    trials: int = 0
    errors: int = 0
    per_stream_errors: np.ndarray | None = None
    opcount_total: int = 0
    wall_time: float = 0.0
    low_confidence: bool = False

    @property
    def ser(self) -> float:
        return self.errors / (self.trials * self.n_users) if self.trials else float("nan")

    @property
    def ci95(self) -> float:
        """Normal-approximation 95% half-width of the binomial SER estimate."""
        if not self.trials:
            return float("nan")
        p = self.ser
        return 1.96 * math.sqrt(p * (1 - p) / (self.trials * self.n_users))

    @property
    def opcount_mean(self) -> float:
        return self.opcount_total / self.trials if self.trials else 0.0


@dataclass
class RunManifest:
    config_hash: str
    seed: int
    version: str
    timestamp: str
    workers: int
    stream_scheme: str
    streams: list[dict]
    config: dict

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "RunManifest":
        return cls(**d)


@dataclass
class SweepResult:
    points: list[PointResult] = field(default_factory=list)

    def get(self, detector: str, snr_db: float | None = None, n_users: int | None = None) -> list[PointResult]:
        return [
            p for p in self.points
            if p.detector == detector
            and (snr_db is None or p.snr_db == snr_db)
            and (n_users is None or p.n_users == n_users)
        ]

    @property
    def any_low_confidence(self) -> bool:
        return any(p.low_confidence for p in self.points)


class SweepError(PJDetectError):
    """A trial failed; carries whatever was completed before the failure."""

    def __init__(self, message: str, partial: SweepResult, manifest: RunManifest):
        super().__init__(message)
        self.partial = partial
        self.manifest = manifest


def _channel_for(cfg: ExperimentConfig, N: int) -> ChannelConfig:
    return cfg.channel if N == cfg.channel.N else cfg.channel.with_users(N)


def run_trial(
    cfg: ExperimentConfig,
    snr_db: float,
    N: int,
    rng: SeededRng,
    weights: np.ndarray | None = None,
) -> dict[str, TrialOutcome]:
    """One paired trial: a single ``(H, x, v)`` shared by every configured detector."""
    channel = _channel_for(cfg, N)
    c = cfg.constellation
    sigma_v_sq = snr_db_to_noise_var(snr_db, c.sigma_x_sq, channel.sigma_h_sq)
    H = generate(channel, rng, weights).H
    x = draw_symbols(c, N, rng)
    v = draw_complex_gaussian(rng, channel.M, sigma_v_sq)
    sys = build_system(H, H @ x.values + v)
    out = {}
    for det in cfg.detectors:
        res = run_detector(det, sys, c, x=x, v=v, sigma_v_sq=sigma_v_sq)
        total, per_stream = count_symbol_errors(x, res.decision)
        out[det.name] = TrialOutcome(total, per_stream, res.op_count)
    return out


def _run_block(cfg: ExperimentConfig, point_index: int, snr_db: float, N: int, start: int, stop: int):
    channel = _channel_for(cfg, N)
    weights = None
    if channel.model == "ind":
        weights = compute_weights(channel.geometry, channel.M, N, channel.subarrays)
    t0 = time.perf_counter()
    acc = {d.name: [0, np.zeros(N, dtype=np.int64), 0] for d in cfg.detectors}
    for trial in range(start, stop):
        outcome = run_trial(cfg, snr_db, N, SeededRng(cfg.seed, (point_index, trial)), weights)
        for name, o in outcome.items():
            a = acc[name]
            a[0] += o.errors
            a[1] += o.per_stream
            a[2] += o.op_count
    return acc, time.perf_counter() - t0


def _stream_table(cfg: ExperimentConfig) -> list[dict]:
    return [{"point": i, "snr_db": snr, "n_users": n} for i, (snr, n) in enumerate(cfg.points())]


def make_manifest(cfg: ExperimentConfig) -> RunManifest:
    return RunManifest(
        config_hash=cfg.config_hash(),
        seed=cfg.seed,
        version=__version__,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        workers=cfg.workers,
        stream_scheme="SeededRng(seed, (point, trial)) -> numpy SeedSequence(seed, spawn_key=(point, trial)), PCG64",
        streams=_stream_table(cfg),
        config=cfg.raw,
    )


def run_sweep(cfg: ExperimentConfig, progress: bool = False) -> tuple[SweepResult, RunManifest]:
    """Run every ``(snr, N)`` point of ``cfg`` until its stopping rule fires.

    A point stops once it has at least ``min_trials`` trials and every
    detector has at least ``min_errors`` symbol errors, or when
    ``max_trials`` is reached; detectors still short of ``min_errors`` at that
    point are flagged ``low_confidence``.
    """
    manifest = make_manifest(cfg)
    result = SweepResult()
    policy = cfg.trials
    pool = ProcessPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        for point_index, (snr, N) in enumerate(cfg.points()):
            M = cfg.channel.M
            points = {d.name: PointResult(d.name, snr, N, M, per_stream_errors=np.zeros(N, dtype=np.int64))
                      for d in cfg.detectors}
            done = 0
            while True:
                starts = []
                for _ in range(policy.blocks_per_round):
                    if done + len(starts) * policy.block_size >= policy.max_trials:
                        break
                    starts.append(done + len(starts) * policy.block_size)
                bounds = [(s, min(s + policy.block_size, policy.max_trials)) for s in starts]
                args = [(cfg, point_index, snr, N, s, e) for s, e in bounds]
                try:
                    if pool is None:
                        blocks = [_run_block(*a) for a in args]
                    else:
                        blocks = list(pool.map(_run_block, *zip(*args)))
                except (PJDetectError, ArithmeticError, np.linalg.LinAlgError) as exc:
                    raise SweepError(f"trial failure at snr={snr} N={N}: {exc}", result, manifest) from exc
                for (s, e), (acc, dt) in zip(bounds, blocks):
                    for name, (errs, per_stream, ops) in acc.items():
                        p = points[name]
                        p.trials += e - s
                        p.errors += errs
                        p.per_stream_errors += per_stream
                        p.opcount_total += ops
                        p.wall_time += dt / len(acc)
                    done = e
                enough_errors = all(p.errors >= policy.min_errors for p in points.values())
                if done >= policy.max_trials or (done >= policy.min_trials and enough_errors):
                    break
            for p in points.values():
                p.low_confidence = p.errors < policy.min_errors
                result.points.append(p)
            if progress:
                logger.info("snr=%g N=%d trials=%d %s", snr, N, done,
                            " ".join(f"{p.detector}={p.ser:.3g}" for p in points.values()))
    finally:
        if pool is not None:
            pool.shutdown()
    return result, manifest


def replay(manifest: RunManifest, workers: int | None = None) -> tuple[SweepResult, RunManifest]:
    """Re-run the exact experiment recorded in ``manifest``."""
    from .config import parse_config

    cfg = parse_config(manifest.config)
    if cfg.config_hash() != manifest.config_hash:
        raise ConfigError("manifest config does not match its recorded hash")
    if workers is not None:
        cfg = cfg.with_workers(workers)
    return run_sweep(cfg)
