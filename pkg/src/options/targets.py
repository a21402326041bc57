"""Training targets for the option heads."""

from dataclasses import dataclass
from typing import Optional, Protocol, Sequence, Tuple

import numpy as np

from ..env import CompositeAction


class OptionRecord(Protocol):
    executed: CompositeAction
    predicted: CompositeAction
    policy_argmax: int


@dataclass(frozen=True)
class OptionTarget:
    """L slots, each an action id or `stop` (== |A|)."""

    phi: Tuple[int, ...]
    action_space_size: int

    @property
    def stop(self) -> int:
        return self.action_space_size

    def __iter__(self):
        return iter(self.phi)

    def __len__(self) -> int:
        return len(self.phi)

    def one_hot(self) -> np.ndarray:
        out = np.zeros((len(self.phi), self.action_space_size + 1))
        out[np.arange(len(self.phi)), list(self.phi)] = 1.0
        return out

    def stop_is_suffix(self) -> bool:
        seen_stop = False
        for entry in self.phi:
            if entry == self.stop:
                seen_stop = True
            elif seen_stop:
                return False
        return True

    @classmethod
    def all_stop(cls, max_length: int, action_space_size: int) -> "OptionTarget":
        return cls(phi=(action_space_size,) * max_length, action_space_size=action_space_size)


def comparison_option(record: OptionRecord, execute_options: bool = True) -> CompositeAction:
    """What the executed action is compared against: the predicted option, or {argmax p}."""
    if execute_options and record.predicted:
        return tuple(record.predicted)
    return (int(record.policy_argmax),)


def build_option_targets(
    records: Sequence[OptionRecord],
    start: int,
    max_length: int,
    action_space_size: int,
    execute_options: bool = True,
) -> OptionTarget:
    """Copy executed moves while each decision's prediction matched what ran; stop afterwards."""
    slots = []
    index = start
    while len(slots) < max_length and index < len(records):
        record = records[index]
        if comparison_option(record, execute_options) != tuple(record.executed):
            break
        slots.extend(record.executed[: max_length - len(slots)])
        index += 1
    slots.extend([action_space_size] * (max_length - len(slots)))
    return OptionTarget(phi=tuple(int(s) for s in slots), action_space_size=action_space_size)
