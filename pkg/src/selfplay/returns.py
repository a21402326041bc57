"""Composite-aware n-step value targets."""

from dataclasses import dataclass

from ..errors import UsageError
from .records import Trajectory


@dataclass(frozen=True)
class NStepReturn:
    value: float
    bootstrap_index: int  # decision index (absolute) whose root value bootstraps, may be len(traj)
    bootstrap_offset: int  # primitive steps from the start decision to the bootstrap decision


def compute_n_step_return(trajectory: Trajectory, index: int, td_steps: int, discount: float) -> NStepReturn:
    """Sum whole decisions until at least `td_steps` primitive steps are covered, then bootstrap.

    Decision rewards are discounted by the primitive offset at which each decision
    starts. The bootstrap value is the stored root value at the first decision
    boundary at or past `td_steps`, or 0 when the episode ends first.
    """
    if not 0 <= index < len(trajectory):
        raise UsageError("Decision index out of range", index=index, length=len(trajectory))
    records = trajectory.records
    starts = []
    offset = 0
    cursor = index
    while cursor < len(records) and offset < td_steps:
        starts.append(offset)
        offset += records[cursor].length
        cursor += 1
    # bootstrap first, then rewards in order: the plain MuZero summation when every length is 1
    value = records[cursor].root_value * discount**offset if cursor < len(records) else 0.0
    for i, start in enumerate(starts):
        value += records[index + i].discounted_reward * discount**start
    return NStepReturn(value=value, bootstrap_index=cursor, bootstrap_offset=offset)


def priority(trajectory: Trajectory, index: int, td_steps: int, discount: float, epsilon: float = 1e-6) -> float:
    """|z - stored root value| + epsilon"""
    target = compute_n_step_return(trajectory, index, td_steps, discount).value
    return abs(target - trajectory.records[index].root_value) + epsilon
