"""K-step unroll targets over composite decisions."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..env import CompositeAction
from ..errors import UsageError
from ..options import OptionTarget, build_option_targets
from ..selfplay import Trajectory, compute_n_step_return

# Padding composite past the episode end: one step of the lowest action id.
ABSORBING_ACTION: CompositeAction = (0,)


@dataclass(frozen=True, eq=False)
class UnrollSample:
    """Targets for one sampled decision and the K decisions that follow it."""

    observation: np.ndarray
    actions: Tuple[CompositeAction, ...]  # K composites
    policy_targets: np.ndarray  # (K+1, |A|)
    value_targets: np.ndarray  # (K+1,)
    reward_targets: np.ndarray  # (K+1,); entry 0 unused
    option_targets: Tuple[OptionTarget, ...]  # K+1
    policy_mask: np.ndarray  # (K+1,)
    primitive_offsets: Tuple[int, ...]  # K+1, offset 0 first
    weight: float = 1.0
    start: int = 0

    @property
    def unroll_steps(self) -> int:
        return len(self.actions)


def assemble_unroll(
    trajectory: Trajectory,
    start: int,
    unroll_steps: int,
    td_steps: int,
    discount: float,
    max_option_length: int,
    action_space_size: int,
    execute_options: bool = True,
    weight: float = 1.0,
) -> UnrollSample:
    """Collect the executed composites from `start` and the targets at each unrolled decision.

    Steps past the last decision are absorbing: a single lowest-id action,
    uniform policy (masked), zero value and reward, all-stop option target.
    """
    records = trajectory.records
    if not 0 <= start < len(records):
        raise UsageError("Unroll start out of range", start=start, length=len(records))

    uniform = np.full(action_space_size, 1.0 / action_space_size)
    actions, options, offsets = [], [], [0]
    policies = np.zeros((unroll_steps + 1, action_space_size))
    values = np.zeros(unroll_steps + 1)
    rewards = np.zeros(unroll_steps + 1)
    mask = np.zeros(unroll_steps + 1)

    for k in range(unroll_steps + 1):
        decision = start + k
        if k >= 1:
            previous = decision - 1
            if previous < len(records):
                actions.append(tuple(records[previous].executed))
                rewards[k] = records[previous].discounted_reward
            else:
                actions.append(ABSORBING_ACTION)
            offsets.append(offsets[-1] + len(actions[-1]))
        if decision < len(records):
            policies[k] = records[decision].policy
            values[k] = compute_n_step_return(trajectory, decision, td_steps, discount).value
            options.append(
                build_option_targets(records, decision, max_option_length, action_space_size, execute_options)
            )
            mask[k] = 1.0
        else:
            policies[k] = uniform
            options.append(OptionTarget.all_stop(max_option_length, action_space_size))

    return UnrollSample(
        observation=np.asarray(records[start].observation, dtype=np.float64),
        actions=tuple(actions),
        policy_targets=policies,
        value_targets=values,
        reward_targets=rewards,
        option_targets=tuple(options),
        policy_mask=mask,
        primitive_offsets=tuple(offsets),
        weight=float(weight),
        start=start,
    )
