"""Complex multiply-accumulate (MAC) accounting reports."""

from __future__ import annotations

from collections import defaultdict

from ..analysis import snr_db_to_noise_var
from ..channel import compute_weights, generate
from ..detectors import build_system, run_detector
from ..modem import draw_symbols
from ..numerics import SeededRng, draw_complex_gaussian
from .config import ExperimentConfig
from .engine import SweepResult, _channel_for


def opcount_report(result: SweepResult) -> list[dict]:
    """Mean MACs per trial for every detector and user count, averaged over SNR points."""
    acc: dict[tuple[str, int], list[int]] = defaultdict(lambda: [0, 0])
    for p in result.points:
        a = acc[(p.detector, p.n_users)]
        a[0] += p.opcount_total
        a[1] += p.trials
    return [
        {"detector": det, "n_users": n, "opcount_mean": tot / trials if trials else 0.0}
        for (det, n), (tot, trials) in acc.items()
    ]


def measure_opcounts(cfg: ExperimentConfig, trial_seed: int | None = None) -> list[dict]:
    """Run one trial per user count and report each detector's MAC breakdown.

    PJ rows carry the measured step cost per iteration next to the
    ``N**2 + N`` model; the residual evaluations used for output selection
    are reported in their own column.
    """
    seed = cfg.seed if trial_seed is None else trial_seed
    c = cfg.constellation
    snr = cfg.snr_db[0]
    rows = []
    for N in cfg.user_counts:
        channel = _channel_for(cfg, N)
        weights = compute_weights(channel.geometry, channel.M, N, channel.subarrays) if channel.model == "ind" else None
        rng = SeededRng(seed, (10**6, N))
        sigma_v_sq = snr_db_to_noise_var(snr, c.sigma_x_sq, channel.sigma_h_sq)
        H = generate(channel, rng, weights).H
        x = draw_symbols(c, N, rng)
        v = draw_complex_gaussian(rng, channel.M, sigma_v_sq)
        sys = build_system(H, H @ x.values + v)
        rows.append({"detector": "preprocess", "n_users": N, "total": sys.preprocess_macs,
                     "breakdown": {"gram+matched_filter": sys.preprocess_macs}})
        for det in cfg.detectors:
            out = run_detector(det, sys, c, x=x, v=v, sigma_v_sq=sigma_v_sq)
            row = {"detector": det.name, "n_users": N, "total": out.op_count, "breakdown": dict(out.ops)}
            if det.kind == "pj":
                row["step_per_iteration"] = out.ops["step"] / det.T
                row["step_model"] = N * N + N
                row["residual"] = out.ops["residual"]
            rows.append(row)
    return rows


def format_opcount_table(rows: list[dict]) -> str:
    lines = [f"{'detector':<14} {'N':>6} {'total MACs':>14}  breakdown"]
    for r in rows:
        extra = ""
        if "step_per_iteration" in r:
            extra = f"  [step/iter={r['step_per_iteration']:.0f} model N^2+N={r['step_model']}]"
        parts = ", ".join(f"{k}={v}" for k, v in r["breakdown"].items())
        lines.append(f"{r['detector']:<14} {r['n_users']:>6} {r['total']:>14}  {parts}{extra}")
    return "\n".join(lines)
