"""Unroll target assembly and the self-play/optimizer loop."""

from .loop import IterationMetrics, Trainer, read_metrics, selfplay_summary, train_loop
from .unroll import ABSORBING_ACTION, UnrollSample, assemble_unroll

__all__ = [
    "IterationMetrics",
    "Trainer",
    "read_metrics",
    "selfplay_summary",
    "train_loop",
    "ABSORBING_ACTION",
    "UnrollSample",
    "assemble_unroll",
]
