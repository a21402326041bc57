"""Dominant-option semantics and option-head training targets."""

from .dominant import (
    OptionDistribution,
    PolicyTree,
    cumulative_probability,
    derive_dominant_option,
    distribution_from_tree,
    oracle_dominant_option,
    random_policy_tree,
)
from .oracle import OracleReport, constant_policy_tree, reference_cases, run_oracle_suite
from .targets import OptionRecord, OptionTarget, build_option_targets, comparison_option

__all__ = [
    "OptionDistribution",
    "PolicyTree",
    "cumulative_probability",
    "derive_dominant_option",
    "distribution_from_tree",
    "oracle_dominant_option",
    "random_policy_tree",
    "OracleReport",
    "constant_policy_tree",
    "reference_cases",
    "run_oracle_suite",
    "OptionRecord",
    "OptionTarget",
    "build_option_targets",
    "comparison_option",
]
