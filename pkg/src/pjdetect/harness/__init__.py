from .config import ExperimentConfig, TrialPolicy, load_config, parse_config
from .engine import PointResult, RunManifest, SweepError, SweepResult, replay, run_sweep, run_trial
from .opcount import format_opcount_table, measure_opcounts, opcount_report
from .output import CSV_COLUMNS, csv_text, read_csv, read_manifest, write_csv, write_manifest, write_svg

__all__ = [
    "ExperimentConfig", "TrialPolicy", "load_config", "parse_config",
    "PointResult", "RunManifest", "SweepError", "SweepResult", "replay", "run_sweep", "run_trial",
    "format_opcount_table", "measure_opcounts", "opcount_report",
    "CSV_COLUMNS", "csv_text", "read_csv", "read_manifest", "write_csv", "write_manifest", "write_svg",
]
