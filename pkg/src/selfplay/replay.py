"""Prioritized replay over whole games."""

import threading
from collections import deque
from dataclasses import dataclass
from typing import Deque, List, Optional, Tuple

import numpy as np

from ..errors import UsageError
from ..logging_config import get_logger
from .records import Trajectory
from .returns import priority

logger = get_logger(__name__)


@dataclass(frozen=True)
class ReplayItem:
    trajectory: Trajectory
    index: int
    weight: float
    probability: float


class ReplayBuffer:
    """Thread-safe PER buffer; capacity counts games and the oldest game is evicted first.

    Priorities are computed once at push time and never updated.
    """

    def __init__(
        self,
        capacity_games: int,
        td_steps: int,
        discount: float,
        alpha: float = 1.0,
        beta: float = 0.4,
        priority_epsilon: float = 1e-6,
    ):
        if capacity_games <= 0:
            raise UsageError("Replay capacity must be positive", capacity_games=capacity_games)
        self.capacity_games = capacity_games
        self.td_steps = td_steps
        self.discount = discount
        self.alpha = alpha
        self.beta = beta
        self.priority_epsilon = priority_epsilon
        self._games: Deque[Tuple[Trajectory, np.ndarray]] = deque(maxlen=capacity_games)
        self._lock = threading.Lock()
        self.total_pushed = 0

    @classmethod
    def from_config(cls, replay_config, train_config) -> "ReplayBuffer":
        return cls(
            capacity_games=replay_config.capacity_games,
            td_steps=train_config.td_steps,
            discount=train_config.discount,
            alpha=replay_config.alpha,
            beta=replay_config.beta,
            priority_epsilon=replay_config.priority_epsilon,
        )

    def __len__(self) -> int:
        return len(self._games)

    @property
    def num_records(self) -> int:
        with self._lock:
            return sum(len(t) for t, _ in self._games)

    def priorities_for(self, trajectory: Trajectory) -> np.ndarray:
        return np.array(
            [
                priority(trajectory, i, self.td_steps, self.discount, self.priority_epsilon)
                for i in range(len(trajectory))
            ]
        )

    def push(self, trajectory: Trajectory, priorities: Optional[np.ndarray] = None) -> None:
        """Add a whole game atomically."""
        if len(trajectory) == 0:
            raise UsageError("Cannot push an empty trajectory", game=trajectory.game)
        if priorities is None:
            priorities = self.priorities_for(trajectory)
        priorities = np.asarray(priorities, dtype=np.float64)
        if priorities.shape != (len(trajectory),):
            raise UsageError("One priority per record expected", game=trajectory.game)
        with self._lock:
            self._games.append((trajectory, priorities))
            self.total_pushed += 1

    def games(self) -> List[Trajectory]:
        with self._lock:
            return [t for t, _ in self._games]

    def sample(
        self,
        batch_size: int,
        rng: np.random.Generator,
        alpha: Optional[float] = None,
        beta: Optional[float] = None,
    ) -> List[ReplayItem]:
        """Draw records with probability priority^alpha / sum; weights (1/(N*prob))^beta over the batch max."""
        alpha = self.alpha if alpha is None else alpha
        beta = self.beta if beta is None else beta
        with self._lock:
            snapshot = list(self._games)
        if not snapshot:
            raise UsageError("Cannot sample from an empty replay buffer")
        index_map = [(g, i) for g, (traj, _) in enumerate(snapshot) for i in range(len(traj))]
        scaled = np.concatenate([p for _, p in snapshot]) ** alpha
        probs = scaled / scaled.sum()
        picks = rng.choice(len(probs), size=batch_size, p=probs)
        raw = (1.0 / (len(probs) * probs[picks])) ** beta
        weights = raw / raw.max()
        items = []
        for pick, weight in zip(picks, weights):
            game, index = index_map[pick]
            items.append(
                ReplayItem(
                    trajectory=snapshot[game][0],
                    index=index,
                    weight=float(weight),
                    probability=float(probs[pick]),
                )
            )
        return items
