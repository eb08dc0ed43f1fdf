"""Monte Carlo experiment harness: configs, runners, statistics and reports."""

from .config import ConfigError, ExperimentConfig, parse_config_text, read_config_file
from .experiments import EXPERIMENTS, Check, ExperimentResult
from .report import result_to_csv, result_to_json, write_result

__all__ = [
    "Check",
    "ConfigError",
    "EXPERIMENTS",
    "ExperimentConfig",
    "ExperimentResult",
    "parse_config_text",
    "read_config_file",
    "result_to_csv",
    "result_to_json",
    "write_result",
]
