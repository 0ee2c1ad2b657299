"""Command line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 finished but some points are flagged low-confidence.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from .analysis import theory_curves
from .errors import ConfigError, NumericalError, PJDetectError
from .harness import (
    SweepError,
    format_opcount_table,
    load_config,
    measure_opcounts,
    read_manifest,
    run_sweep,
    write_csv,
    write_manifest,
    write_svg,
)
from .harness.config import ExperimentConfig, parse_config
from .harness.output import rows_from_curves, rows_from_result
from .numerics import SeededRng
from .validation import format_oracle_report, run_oracle_suite

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_LOW_CONFIDENCE = 0, 2, 3, 4

log = logging.getLogger("pjdetect")


def _theory_rows(cfg: ExperimentConfig) -> list[dict]:
    settings = cfg.theory
    snrs = [s for s in cfg.snr_db if math.isfinite(s)]
    if settings is None or not snrs:
        return []
    rows = []
    for N in cfg.user_counts:
        channel = cfg.channel if N == cfg.channel.N else cfg.channel.with_users(N)
        curves = theory_curves(channel, cfg.constellation, snrs, settings.realizations,
                               SeededRng(cfg.seed, (2**20, N)), settings.init)
        rows += rows_from_curves(curves, N, channel.M)
    return rows


def _simulate(args) -> int:
    if args.manifest:
        manifest = read_manifest(args.manifest)
        cfg = parse_config(manifest.config)
        if cfg.config_hash() != manifest.config_hash:
            raise ConfigError("manifest config does not match its recorded hash")
    else:
        if not args.config:
            raise ConfigError("simulate needs --config or --manifest")
        cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.workers is not None:
        cfg = cfg.with_workers(args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        result, manifest = run_sweep(cfg, progress=True)
    except SweepError as exc:
        write_csv(out / "results.partial.csv", rows_from_result(exc.partial))
        write_manifest(out / "manifest.json", exc.manifest)
        log.error("%s", exc)
        return EXIT_NUMERICAL
    theory = _theory_rows(cfg)
    write_csv(out / "results.csv", rows_from_result(result) + theory)
    write_manifest(out / "manifest.json", manifest)
    if args.svg or cfg.svg:
        from .harness.output import read_csv

        sim, curves = read_csv(out / "results.csv")
        write_svg(out / "results.svg", sim, curves, title=f"M={cfg.channel.M}, {cfg.J}-QAM")
    print(f"wrote {out / 'results.csv'}")
    if result.any_low_confidence:
        log.warning("some points hit max_trials before min_errors; see the low_confidence column")
        return EXIT_LOW_CONFIDENCE
    return EXIT_OK


def _theory(args) -> int:
    cfg = load_config(args.config)
    if cfg.theory is None:
        cfg = parse_config({**cfg.raw, "theory": {}})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = write_csv(out / "theory.csv", _theory_rows(cfg))
    print(f"wrote {path}")
    return EXIT_OK


def _validate(args) -> int:
    checks = run_oracle_suite(trials=args.trials, seed=args.seed)
    print(format_oracle_report(checks))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_NUMERICAL


def _opcount(args) -> int:
    cfg = load_config(args.config)
    print(format_opcount_table(measure_opcounts(cfg)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pjdetect", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a Monte Carlo sweep")
    p.add_argument("--config")
    p.add_argument("--manifest", help="replay the run recorded in a manifest.json")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=_simulate)

    p = sub.add_parser("theory", help="evaluate the closed-form SER curves")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_theory)

    p = sub.add_parser("validate", help="check closed-form PEPs against Monte Carlo oracles")
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=_validate)

    p = sub.add_parser("opcount", help="report per-detector MAC counts")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_opcount)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, PJDetectError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
