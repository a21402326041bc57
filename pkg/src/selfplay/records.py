"""Decision records, trajectories and the line-delimited trajectory log."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import orjson

from ..env import CompositeAction
from ..errors import UsageError
from ..logging_config import get_logger

logger = get_logger(__name__)

TRAJECTORY_LOG_KEYS = (
    "game",
    "move",
    "policy",
    "executed",
    "predicted",
    "policy_argmax",
    "suggested",
    "rewards",
    "discounted_reward",
    "root_value",
    "terminal",
    "tree_metrics",
    "observation",
)


def discounted_sum(rewards: Sequence[float], discount: float) -> float:
    """sum_j discount^j * rewards[j]"""
    total = 0.0
    factor = 1.0
    for reward in rewards:
        total += factor * reward
        factor *= discount
    return total


@dataclass(frozen=True, eq=False)
class DecisionRecord:
    """Everything self-play keeps about one decision."""

    observation: np.ndarray
    policy: np.ndarray
    executed: CompositeAction
    predicted: CompositeAction
    policy_argmax: int
    suggested: CompositeAction
    rewards: Tuple[float, ...]
    discounted_reward: float
    root_value: float
    tree_metrics: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.executed) == 0:
            raise UsageError("Decision record without an executed action")
        if len(self.rewards) != len(self.executed):
            raise UsageError(
                "One reward per executed primitive expected",
                executed=len(self.executed),
                rewards=len(self.rewards),
            )

    @property
    def length(self) -> int:
        return len(self.executed)


@dataclass(frozen=True)
class Trajectory:
    """An ordered episode of decisions; `terminal` is True when it ended in the goal."""

    records: Tuple[DecisionRecord, ...]
    terminal: bool
    game: int = 0

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        offsets = np.cumsum([0] + [r.length for r in self.records])
        object.__setattr__(self, "_offsets", offsets)

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, index: int) -> DecisionRecord:
        return self.records[index]

    def __iter__(self) -> Iterator[DecisionRecord]:
        return iter(self.records)

    @property
    def offsets(self) -> np.ndarray:
        """Primitive offset of each decision's start; entry len(self) is the total length."""
        return self._offsets

    @property
    def total_length(self) -> int:
        return int(self._offsets[-1])

    def flat_actions(self) -> List[int]:
        return [a for r in self.records for a in r.executed]

    def flat_rewards(self) -> List[float]:
        return [u for r in self.records for u in r.rewards]

    @property
    def total_reward(self) -> float:
        return float(sum(self.flat_rewards()))


def make_record(
    observation: np.ndarray,
    policy: np.ndarray,
    executed: Sequence[int],
    rewards: Sequence[float],
    discount: float,
    root_value: float = 0.0,
    predicted: Sequence[int] = (),
    policy_argmax: int = 0,
    suggested: Sequence[int] = (),
    tree_metrics: Optional[Dict[str, Any]] = None,
) -> DecisionRecord:
    """Build a record and derive its discounted decision reward."""
    rewards = tuple(float(u) for u in rewards)
    return DecisionRecord(
        observation=np.asarray(observation, dtype=np.float64),
        policy=np.asarray(policy, dtype=np.float64),
        executed=tuple(int(a) for a in executed),
        predicted=tuple(int(a) for a in predicted),
        policy_argmax=int(policy_argmax),
        suggested=tuple(int(a) for a in suggested),
        rewards=rewards,
        discounted_reward=discounted_sum(rewards, discount),
        root_value=float(root_value),
        tree_metrics=dict(tree_metrics or {}),
    )


# -- trajectory log ----------------------------------------------------------------


def record_to_json(trajectory: Trajectory, move: int) -> Dict[str, Any]:
    record = trajectory.records[move]
    return {
        "game": trajectory.game,
        "move": move,
        "policy": record.policy.tolist(),
        "executed": list(record.executed),
        "predicted": list(record.predicted),
        "policy_argmax": record.policy_argmax,
        "suggested": list(record.suggested),
        "rewards": list(record.rewards),
        "discounted_reward": record.discounted_reward,
        "root_value": record.root_value,
        "terminal": trajectory.terminal,
        "tree_metrics": record.tree_metrics,
        "observation": record.observation.tolist(),
    }


def write_trajectory_log(path: Union[str, Path], trajectories: Iterable[Trajectory]) -> int:
    """Append every decision of every trajectory as one JSON line; returns lines written."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    written = 0
    with path.open("ab") as fh:
        for trajectory in trajectories:
            for move in range(len(trajectory)):
                fh.write(orjson.dumps(record_to_json(trajectory, move)) + b"\n")
                written += 1
    return written


def _record_from_json(data: Dict[str, Any]) -> DecisionRecord:
    return DecisionRecord(
        observation=np.asarray(data.get("observation", []), dtype=np.float64),
        policy=np.asarray(data["policy"], dtype=np.float64),
        executed=tuple(int(a) for a in data["executed"]),
        predicted=tuple(int(a) for a in data.get("predicted", [])),
        policy_argmax=int(data.get("policy_argmax", 0)),
        suggested=tuple(int(a) for a in data.get("suggested", [])),
        rewards=tuple(float(u) for u in data["rewards"]),
        discounted_reward=float(data["discounted_reward"]),
        root_value=float(data.get("root_value", 0.0)),
        tree_metrics=data.get("tree_metrics", {}),
    )


def read_trajectory_log(path: Union[str, Path]) -> List[Trajectory]:
    """Group log lines back into trajectories, ordered by game id then move index.

    Malformed lines are reported together in one UsageError.
    """
    path = Path(path)
    games: Dict[int, List[Tuple[int, DecisionRecord]]] = {}
    terminal: Dict[int, bool] = {}
    problems: List[str] = []
    with path.open("rb") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                data = orjson.loads(line)
                game = int(data["game"])
                games.setdefault(game, []).append((int(data["move"]), _record_from_json(data)))
                terminal[game] = bool(data.get("terminal", False))
            except (orjson.JSONDecodeError, KeyError, TypeError, ValueError, UsageError) as exc:
                problems.append(f"{path}:{lineno}: {exc}")
    if problems:
        raise UsageError("Unreadable trajectory log", path=str(path), problems="; ".join(problems))
    trajectories = []
    for game in sorted(games):
        moves = sorted(games[game], key=lambda item: item[0])
        trajectories.append(Trajectory(records=tuple(r for _, r in moves), terminal=terminal[game], game=game))
    logger.debug("trajectory_log_read", path=str(path), games=len(trajectories))
    return trajectories
