"""Experiment front end: configuration, canned experiments, serialization."""

from .config import ExperimentConfig, load_config, parse_config, emit_config
from .experiments import run_experiment, shift_experiment, bracket_table

__all__ = [
    "ExperimentConfig",
    "bracket_table",
    "emit_config",
    "load_config",
    "parse_config",
    "run_experiment",
    "shift_experiment",
]
