"""Result persistence: CSV (the contract), JSON manifests and optional SVG charts."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable

from ..analysis import TheoryCurve
from ..errors import ConfigError
from .engine import PointResult, RunManifest, SweepResult

CSV_COLUMNS = [
    "detector", "source", "snr_db", "n_users", "m_antennas",
    "trials", "errors", "ser", "ci95", "opcount_mean", "low_confidence",
]


def _fmt(x: float) -> str:
    return repr(float(x))


def rows_from_result(result: SweepResult) -> list[dict]:
    return [
        {
            "detector": p.detector, "source": "sim", "snr_db": _fmt(p.snr_db),
            "n_users": str(p.n_users), "m_antennas": str(p.m_antennas),
            "trials": str(p.trials), "errors": str(p.errors), "ser": _fmt(p.ser),
            "ci95": _fmt(p.ci95), "opcount_mean": _fmt(p.opcount_mean),
            "low_confidence": str(int(p.low_confidence)),
        }
        for p in result.points
    ]


def rows_from_curves(curves: Iterable[TheoryCurve], n_users: int, m_antennas: int) -> list[dict]:
    rows = []
    for curve in curves:
        for snr, ser in zip(curve.snr_db, curve.ser):
            rows.append({
                "detector": curve.label, "source": "theory", "snr_db": _fmt(snr),
                "n_users": str(n_users), "m_antennas": str(m_antennas),
                "trials": "0", "errors": "0", "ser": _fmt(ser), "ci95": "0.0",
                "opcount_mean": "0.0", "low_confidence": "0",
            })
    return rows


def csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def write_csv(path, rows: list[dict]) -> Path:
    path = Path(path)
    try:
        path.write_text(csv_text(rows))
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc
    return path


def read_csv(path) -> tuple[SweepResult, list[TheoryCurve]]:
    """Parse a results CSV back into simulation points and theory curves."""
    result = SweepResult()
    curves: dict[str, TheoryCurve] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_COLUMNS:
            raise ConfigError(f"unexpected CSV columns {reader.fieldnames}")
        for row in reader:
            if row["source"] == "theory":
                curve = curves.setdefault(row["detector"], TheoryCurve(row["detector"], [], []))
                curve.snr_db.append(float(row["snr_db"]))
                curve.ser.append(float(row["ser"]))
                continue
            trials = int(row["trials"])
            result.points.append(PointResult(
                detector=row["detector"], snr_db=float(row["snr_db"]), n_users=int(row["n_users"]),
                m_antennas=int(row["m_antennas"]), trials=trials, errors=int(row["errors"]),
                opcount_total=round(float(row["opcount_mean"]) * trials),
                low_confidence=bool(int(row["low_confidence"])),
            ))
    return result, list(curves.values())


def write_manifest(path, manifest: RunManifest) -> Path:
    path = Path(path)
    path.write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n")
    return path


def read_manifest(path) -> RunManifest:
    try:
        return RunManifest.from_dict(json.loads(Path(path).read_text()))
    except (OSError, ValueError, TypeError) as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from exc


def write_svg(path, result: SweepResult, curves: list[TheoryCurve] = (), title: str = "") -> Path:
    """Log-scale SER chart; x axis is Es/No, or N for a single-SNR load sweep."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    snrs = sorted({p.snr_db for p in result.points})
    by_load = len(snrs) == 1 and len({p.n_users for p in result.points}) > 1
    fig, ax = plt.subplots(figsize=(6, 4.2))
    for name in dict.fromkeys(p.detector for p in result.points):
        pts = [p for p in result.points if p.detector == name and p.errors > 0]
        xs = [p.n_users if by_load else p.snr_db for p in pts]
        ax.semilogy(xs, [p.ser for p in pts], "o-", label=f"{name} (sim)")
    if not by_load:
        for curve in curves:
            keep = [(s, v) for s, v in zip(curve.snr_db, curve.ser) if v > 0 and math.isfinite(s)]
            if keep:
                ax.semilogy(*zip(*keep), "--", label=f"{curve.label} (theory)")
    ax.set_xlabel("N (users)" if by_load else "Es/No (dB)")
    ax.set_ylabel("SER")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return Path(path)
