"""Composite-action environment interface."""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import UsageError

# A composite action is a primitive action (length 1) or an option (length 2..L).
CompositeAction = Tuple[int, ...]


def make_composite(actions: Sequence[int], max_length: int, action_space_size: int) -> CompositeAction:
    """Validate and freeze an action sequence."""
    composite = tuple(int(a) for a in actions)
    if not 1 <= len(composite) <= max_length:
        raise UsageError(
            "Composite action length out of range",
            length=len(composite),
            max_length=max_length,
        )
    for a in composite:
        if not 0 <= a < action_space_size:
            raise UsageError("Primitive action id out of range", action=a, action_space_size=action_space_size)
    return composite


@dataclass(frozen=True)
class StepResult:
    """Outcome of executing one composite action as a single decision."""

    observation: np.ndarray
    rewards: List[float] = field(default_factory=list)
    terminal: bool = False
    steps_executed: int = 0
    reached_goal: bool = False

    @property
    def total_reward(self) -> float:
        return float(sum(self.rewards))


class CompositeEnvironment(ABC):
    """Environment whose unit of execution is a composite action."""

    action_space_size: int

    @abstractmethod
    def reset(self, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        """Start a new episode and return the first observation."""

    @abstractmethod
    def step(self, action: CompositeAction) -> StepResult:
        """Execute every primitive action of `action` as one decision."""

    @abstractmethod
    def legal_actions(self) -> FrozenSet[int]:
        """Primitive actions available in the current state."""

    @abstractmethod
    def render_ascii(self) -> str:
        """Text rendering of the current state."""

    @property
    @abstractmethod
    def terminal(self) -> bool:
        """Whether the current episode has ended."""
