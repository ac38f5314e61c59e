from .config import DEFAULTS, ConfigError, ExperimentConfig
from .reports import REPORT_KINDS, aml_detection_csv, emit_report, flow_distribution_csv, rs_attack_csv
from .runs import run, run_aml, run_recsys, run_theory
from .search import RunRecord, log_uniform, random_search, sample_trial

__all__ = [
    "DEFAULTS", "ConfigError", "ExperimentConfig",
    "REPORT_KINDS", "aml_detection_csv", "emit_report", "flow_distribution_csv", "rs_attack_csv",
    "run", "run_aml", "run_recsys", "run_theory",
    "RunRecord", "log_uniform", "random_search", "sample_trial",
]
