import json
import math
from pathlib import Path

import numpy as np
import pytest

from pjdetect.errors import ConfigError
from pjdetect.harness import (
    CSV_COLUMNS,
    csv_text,
    load_config,
    measure_opcounts,
    opcount_report,
    parse_config,
    read_csv,
    read_manifest,
    replay,
    run_sweep,
    write_csv,
    write_manifest,
    write_svg,
)
from pjdetect.harness.output import rows_from_curves, rows_from_result
from pjdetect.analysis import TheoryCurve

DATA = Path(__file__).parent / "data"

MINI = {
    "schema_version": 1,
    "seed": 3,
    "channel": {"M": 8, "N": 2, "model": "iid"},
    "modulation": {"J": 4},
    "detectors": [{"kind": "mfb"}, {"kind": "rzf", "rho": "zf", "solver": {"kind": "direct"}},
                  {"kind": "pj", "T": 2, "init": "rzf", "init_rho": "zf", "solver": {"kind": "direct"}}],
    "snr_db": [0, 6],
    "trials": {"min_trials": 16, "max_trials": 64, "min_errors": 5, "block_size": 8, "blocks_per_round": 2},
    "workers": 1,
}


def _cfg(**over):
    return parse_config({**MINI, **over})


def test_mini_run_matches_golden_csv():
    result, _ = run_sweep(_cfg())
    text = csv_text(rows_from_result(result))
    golden = (DATA / "golden_mini.csv").read_text()
    assert text == golden


def test_results_independent_of_worker_count():
    a, _ = run_sweep(_cfg(workers=1))
    b, _ = run_sweep(_cfg(workers=2))
    assert csv_text(rows_from_result(a)) == csv_text(rows_from_result(b))


def test_seed_changes_results():
    a, _ = run_sweep(_cfg())
    b, _ = run_sweep(_cfg(seed=4))
    assert csv_text(rows_from_result(a)) != csv_text(rows_from_result(b))


def test_stopping_rule_and_low_confidence():
    result, _ = run_sweep(_cfg(trials={"min_trials": 8, "max_trials": 24, "min_errors": 1000,
                                       "block_size": 8, "blocks_per_round": 1}))
    for p in result.points:
        assert p.trials == 24
        assert p.low_confidence
    assert result.any_low_confidence
    result, _ = run_sweep(_cfg(snr_db=[-10], trials={"min_trials": 8, "max_trials": 4000, "min_errors": 3,
                                                       "block_size": 8, "blocks_per_round": 1}))
    for p in result.points:
        assert p.trials == 8 and p.errors >= 3 and not p.low_confidence


def test_paired_trials_share_noise():
    # PJ from a ZF start can never have a larger residual than ZF, and all
    # detectors see the same trials
    result, _ = run_sweep(_cfg())
    trials = {p.trials for p in result.points if p.snr_db == 0.0}
    assert len(trials) == 1


def test_csv_roundtrip(tmp_path):
    result, _ = run_sweep(_cfg())
    curves = [TheoryCurve("MFB", [0.0, 6.0], [0.1, 0.01])]
    rows = rows_from_result(result) + rows_from_curves(curves, 2, 8)
    path = write_csv(tmp_path / "r.csv", rows)
    back, back_curves = read_csv(path)
    assert csv_text(rows_from_result(back)) == csv_text(rows_from_result(result))
    assert back_curves[0].ser == [0.1, 0.01]
    assert path.read_text().splitlines()[0] == ",".join(CSV_COLUMNS)


def test_empty_theory_gives_sim_only_csv(tmp_path):
    result, _ = run_sweep(_cfg())
    path = write_csv(tmp_path / "r.csv", rows_from_result(result) + rows_from_curves([], 2, 8))
    assert "theory" not in path.read_text()


def test_read_csv_rejects_wrong_columns(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ConfigError):
        read_csv(p)


def test_manifest_replay_is_byte_identical(tmp_path):
    result, manifest = run_sweep(_cfg())
    mpath = write_manifest(tmp_path / "manifest.json", manifest)
    replayed, _ = replay(read_manifest(mpath), workers=2)
    assert csv_text(rows_from_result(replayed)) == csv_text(rows_from_result(result))


def test_replay_rejects_tampered_manifest(tmp_path):
    _, manifest = run_sweep(_cfg(snr_db=[0], trials={"min_trials": 8, "max_trials": 8}))
    d = manifest.to_dict()
    d["config"] = {**d["config"], "seed": 99}
    p = tmp_path / "m.json"
    p.write_text(json.dumps(d))
    with pytest.raises(ConfigError):
        replay(read_manifest(p))


def test_config_hash_ignores_workers():
    assert _cfg(workers=1).config_hash() == _cfg(workers=3).config_hash()
    assert _cfg().config_hash() != _cfg(seed=8).config_hash()


@pytest.mark.parametrize("bad", [
    {"schema_version": 2},
    {"detectors": []},
    {"detectors": [{"kind": "mfb"}, {"kind": "mfb"}]},
    {"snr_db": []},
    {"load_sweep": [9]},
    {"modulation": {"J": 8}},
    {"trials": {"min_trials": 10, "max_trials": 5}},
    {"trials": {"bogus": 1}},
    {"workers": 0},
    {"channel": {"M": 2, "N": 4}},
])
def test_config_errors(bad):
    with pytest.raises(ConfigError):
        parse_config({**MINI, **bad})


def test_missing_key():
    d = dict(MINI)
    del d["channel"]
    with pytest.raises(ConfigError):
        parse_config(d)


def test_load_config_yaml(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("schema_version: 1\nchannel: {M: 4, N: 2}\nmodulation: {J: 4}\n"
                 "detectors: [{kind: mf}]\nsnr_db: [.inf, 3]\n")
    cfg = load_config(p)
    assert math.isinf(cfg.snr_db[0])
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")
    p.write_text("channel: [unclosed")
    with pytest.raises(ConfigError):
        load_config(p)


def test_shipped_configs_parse():
    for path in sorted((Path(__file__).parents[1] / "configs").glob("*.yaml")):
        load_config(path)


def test_load_sweep_points_order():
    cfg = _cfg(load_sweep=[2, 4], channel={"M": 8, "N": 2})
    assert cfg.points() == [(0.0, 2), (6.0, 2), (0.0, 4), (6.0, 4)]


@pytest.mark.parametrize("N", [16, 64])
def test_pj_opcount_model(N):
    cfg = parse_config({**MINI, "channel": {"M": 2 * N, "N": N}, "snr_db": [10],
                        "detectors": [{"kind": "pj", "T": 3, "init_rho": "zf"}]})
    rows = [r for r in measure_opcounts(cfg) if r["detector"] == "PJ(ZF)"]
    assert rows[0]["step_per_iteration"] == N * N + N == rows[0]["step_model"]
    assert rows[0]["residual"] == N * N + 4 * N


def test_direct_solve_opcount_grows_cubically():
    counts = []
    for N in (32, 64, 128):
        cfg = parse_config({**MINI, "channel": {"M": 128, "N": N}, "snr_db": [10],
                            "detectors": [{"kind": "rzf", "solver": {"kind": "direct"}}]})
        counts.append([r["total"] for r in measure_opcounts(cfg) if r["detector"] == "ZF"][0])
    slope = np.polyfit(np.log([32, 64, 128]), np.log(counts), 1)[0]
    assert abs(slope - 3.0) <= 0.3


def test_opcount_report_means():
    result, _ = run_sweep(_cfg())
    rows = {r["detector"]: r for r in opcount_report(result)}
    assert rows["PJ(ZF)"]["opcount_mean"] > 0


def test_svg_written(tmp_path):
    result, _ = run_sweep(_cfg())
    path = write_svg(tmp_path / "r.svg", result, [TheoryCurve("MFB", [0.0, 6.0], [0.1, 0.01])], "mini")
    assert path.read_text().lstrip().startswith("<?xml")
