"""Experiment configuration: YAML schema, defaults and validation.

Schema (``schema_version: 1``)::

    schema_version: 1
    seed: 2024
    channel: {M: 128, N: 64, model: iid, sigma_h_sq: 1.0, subarrays: 1,
              geometry: {array_length: 214, user_perp_distance: 50, pathloss_exponent: 2.0}}
    modulation: {J: 64, sigma_x_sq: 1.0}
    detectors:
      - {kind: mfb}
      - {kind: pj, T: 3, init: rzf, init_rho: zf, solver: {kind: cg}}
    snr_db: [18, 20, 22]          # Es/No; .inf means noiseless
    load_sweep: [64, 128]         # optional list of N (overrides channel.N)
    trials: {min_trials: 100, max_trials: 20000, min_errors: 100, block_size: 16, blocks_per_round: 4}
    theory: {realizations: 20, init: zf}   # optional
    output: {svg: false}
    workers: 1
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from ..channel import ChannelConfig
from ..detectors import DetectorConfig
from ..errors import ConfigError
from ..modem import Constellation, make_qam

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class TrialPolicy:
    min_trials: int = 100
    max_trials: int = 10_000
    min_errors: int = 100
    block_size: int = 16
    blocks_per_round: int = 4

    def validate(self) -> None:
        if self.min_errors < 1:
            raise ConfigError("min_errors must be >= 1")
        if not 1 <= self.min_trials <= self.max_trials:
            raise ConfigError("need 1 <= min_trials <= max_trials")
        if self.block_size < 1 or self.blocks_per_round < 1:
            raise ConfigError("block_size and blocks_per_round must be positive")


@dataclass(frozen=True)
class TheorySettings:
    realizations: int = 20
    init: str | None = "zf"


@dataclass(frozen=True)
class ExperimentConfig:
    channel: ChannelConfig
    J: int
    sigma_x_sq: float
    detectors: tuple[DetectorConfig, ...]
    snr_db: tuple[float, ...]
    load_sweep: tuple[int, ...] | None = None
    trials: TrialPolicy = field(default_factory=TrialPolicy)
    seed: int = 0
    workers: int = 1
    theory: TheorySettings | None = None
    svg: bool = False
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def constellation(self) -> Constellation:
        return make_qam(self.J, self.sigma_x_sq)

    @property
    def user_counts(self) -> tuple[int, ...]:
        return self.load_sweep if self.load_sweep else (self.channel.N,)

    def points(self) -> list[tuple[float, int]]:
        """Simulation points ``(snr_db, N)`` in canonical order (N outer)."""
        return [(snr, n) for n in self.user_counts for snr in self.snr_db]

    def config_hash(self) -> str:
        # worker count never changes results, so it is not part of the identity
        content = {k: v for k, v in self.raw.items() if k != "workers"}
        blob = json.dumps(content, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return parse_config({**self.raw, "seed": int(seed)})

    def with_workers(self, workers: int) -> "ExperimentConfig":
        return parse_config({**self.raw, "workers": int(workers)})


def parse_config(d: dict) -> ExperimentConfig:
    """Build and validate an :class:`ExperimentConfig` from plain data."""
    if not isinstance(d, dict):
        raise ConfigError("config must be a mapping")
    d = json.loads(json.dumps(d, default=_json_default))
    version = d.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}, expected {SCHEMA_VERSION}")
    for key in ("channel", "modulation", "detectors", "snr_db"):
        if key not in d:
            raise ConfigError(f"missing required key {key!r}")
    channel = ChannelConfig.from_dict(d["channel"])
    mod = d["modulation"]
    J = int(mod.get("J", 4))
    sigma_x_sq = float(mod.get("sigma_x_sq", 1.0))
    make_qam(J, sigma_x_sq)
    if not d["detectors"]:
        raise ConfigError("at least one detector is required")
    detectors = tuple(DetectorConfig.from_dict(x) for x in d["detectors"])
    names = [det.name for det in detectors]
    if len(set(names)) != len(names):
        raise ConfigError(f"detector labels must be unique, got {names}; set 'label' to disambiguate")
    snr = tuple(float(s) for s in d["snr_db"])
    if not snr:
        raise ConfigError("snr_db must be non-empty")
    load = d.get("load_sweep")
    if load is not None:
        load = tuple(int(n) for n in load)
        if not load or any(not 1 <= n <= channel.M for n in load):
            raise ConfigError(f"every N in load_sweep must lie in [1, M={channel.M}]")
    try:
        trials = TrialPolicy(**d.get("trials", {}))
        theory = TheorySettings(**d["theory"]) if d.get("theory") is not None else None
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    trials.validate()
    workers = int(d.get("workers", 1))
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    return ExperimentConfig(
        channel=channel,
        J=J,
        sigma_x_sq=sigma_x_sq,
        detectors=detectors,
        snr_db=snr,
        load_sweep=load,
        trials=trials,
        seed=int(d.get("seed", 0)),
        workers=workers,
        theory=theory,
        svg=bool(d.get("output", {}).get("svg", False)),
        raw=d,
    )


def _json_default(o):
    if isinstance(o, tuple):
        return list(o)
    if hasattr(o, "__dataclass_fields__"):
        return asdict(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


def load_config(path) -> ExperimentConfig:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    return parse_config(data)
