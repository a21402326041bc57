"""Self-play episodes, trajectory records, n-step returns and prioritized replay."""

from .episode import play_episode
from .records import (
    TRAJECTORY_LOG_KEYS,
    DecisionRecord,
    Trajectory,
    discounted_sum,
    make_record,
    read_trajectory_log,
    record_to_json,
    write_trajectory_log,
)
from .replay import ReplayBuffer, ReplayItem
from .returns import NStepReturn, compute_n_step_return, priority

__all__ = [
    "play_episode",
    "TRAJECTORY_LOG_KEYS",
    "DecisionRecord",
    "Trajectory",
    "discounted_sum",
    "make_record",
    "read_trajectory_log",
    "record_to_json",
    "write_trajectory_log",
    "ReplayBuffer",
    "ReplayItem",
    "NStepReturn",
    "compute_n_step_return",
    "priority",
]
