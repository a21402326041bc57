"""Action-sequence encoding for the dynamics input."""

import numpy as np

from ..env import CompositeAction
from ..errors import UsageError


def encode_action_sequence(action: CompositeAction, max_length: int, action_space_size: int) -> np.ndarray:
    """L one-hot slots of size |A|, zero after the last move."""
    if len(action) > max_length:
        raise UsageError("Composite action longer than L", length=len(action), max_length=max_length)
    encoding = np.zeros((max_length, action_space_size), dtype=np.float64)
    for slot, a in enumerate(action):
        if not 0 <= a < action_space_size:
            raise UsageError("Primitive action id out of range", action=a)
        encoding[slot, a] = 1.0
    return encoding.ravel()


def decode_action_sequence(encoding: np.ndarray, max_length: int, action_space_size: int) -> CompositeAction:
    slots = np.asarray(encoding).reshape(max_length, action_space_size)
    actions = []
    for row in slots:
        if not row.any():
            break
        actions.append(int(np.argmax(row)))
    return tuple(actions)
