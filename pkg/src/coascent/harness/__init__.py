"""Experiment configuration, identity runners and the command line interface."""

from .config import IDENTITIES, ConfigError, ExperimentConfig, load_config
from .identities import CATALOG
from .runner import RunResult, run

__all__ = ["IDENTITIES", "CATALOG", "ConfigError", "ExperimentConfig", "RunResult",
           "load_config", "run"]
