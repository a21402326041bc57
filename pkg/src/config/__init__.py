"""Configuration module for OptionZero."""

from .settings import (
    EnvConfig,
    ModelConfig,
    ReplayConfig,
    RunConfig,
    SearchConfig,
    TrainConfig,
    dump_config,
    load_config,
    parse_assignments,
)

__all__ = [
    "EnvConfig",
    "ModelConfig",
    "ReplayConfig",
    "RunConfig",
    "SearchConfig",
    "TrainConfig",
    "dump_config",
    "load_config",
    "parse_assignments",
]
