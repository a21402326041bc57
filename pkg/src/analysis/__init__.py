"""Behavior statistics over trajectory logs and search dumps."""

from .accuracy import AccuracyReport, prediction_accuracy
from .tables import render_text, write_csv, write_report
from .topk import PERCENTILES, OptionShare, TopKReport, option_label, top_k_options
from .tree_stats import TreeReport, read_search_dumps, tree_stats
from .usage import UsageReport, is_repeat, usage_stats

__all__ = [
    "AccuracyReport",
    "prediction_accuracy",
    "render_text",
    "write_csv",
    "write_report",
    "PERCENTILES",
    "OptionShare",
    "TopKReport",
    "option_label",
    "top_k_options",
    "TreeReport",
    "read_search_dumps",
    "tree_stats",
    "UsageReport",
    "is_repeat",
    "usage_stats",
]
