"""Shared fixtures: tiny models, maps, synthetic trajectories and a reference MuZero search."""

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

from src.config import ModelConfig, SearchConfig  # noqa: E402
from src.model import OptionZeroNetwork, PredictionOutput, DynamicsOutput  # noqa: E402
from src.selfplay import Trajectory, make_record  # noqa: E402

MAPS = ROOT / "maps"
CONFIGS = ROOT / "configs"


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long randomized or training runs")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def maps_dir() -> Path:
    return MAPS


@pytest.fixture
def tiny_model_config() -> ModelConfig:
    return ModelConfig(
        observation_shape=(2, 2, 2),
        action_space_size=3,
        max_option_length=3,
        hidden_size=4,
        trunk_size=5,
    )


@pytest.fixture
def tiny_network(tiny_model_config) -> OptionZeroNetwork:
    return OptionZeroNetwork.initialize(tiny_model_config, np.random.default_rng(7))


def grid_model_config(shape=(3, 5, 5), max_option_length=3, hidden_size=8, trunk_size=16) -> ModelConfig:
    return ModelConfig(
        observation_shape=shape,
        action_space_size=4,
        max_option_length=max_option_length,
        hidden_size=hidden_size,
        trunk_size=trunk_size,
    )


def search_config(simulations=16, max_option_length=3, **kwargs) -> SearchConfig:
    return SearchConfig(simulations=simulations, max_option_length=max_option_length, **kwargs)


def make_trajectory(
    lengths: Sequence[int],
    discount: float = 0.997,
    rewards: Optional[Sequence[Sequence[float]]] = None,
    root_values: Optional[Sequence[float]] = None,
    actions: Optional[Sequence[Sequence[int]]] = None,
    predicted: Optional[Sequence[Sequence[int]]] = None,
    suggested: Optional[Sequence[Sequence[int]]] = None,
    policies: Optional[Sequence[Sequence[float]]] = None,
    terminal: bool = True,
    action_space_size: int = 4,
    observation_shape=(3, 5, 5),
    game: int = 0,
) -> Trajectory:
    """Trajectory with the given composite lengths; unspecified fields get simple defaults."""
    records = []
    for i, length in enumerate(lengths):
        executed = list(actions[i]) if actions is not None else [(i + j) % action_space_size for j in range(length)]
        records.append(
            make_record(
                observation=np.full(observation_shape, float(i)),
                policy=policies[i] if policies is not None else np.full(action_space_size, 1.0 / action_space_size),
                executed=executed,
                rewards=list(rewards[i]) if rewards is not None else [-1.0] + [0.0] * (length - 1),
                discount=discount,
                root_value=root_values[i] if root_values is not None else 0.1 * i,
                predicted=list(predicted[i]) if predicted is not None else executed,
                policy_argmax=executed[0],
                suggested=list(suggested[i]) if suggested is not None else executed,
            )
        )
    return Trajectory(records=tuple(records), terminal=terminal, game=game)


@pytest.fixture
def trajectory_factory():
    return make_trajectory


class ScriptedNetwork:
    """Network double: fixed priors, option heads, values and rewards; hidden state is the depth."""

    def __init__(
        self,
        policy: Sequence[float],
        option_heads: Optional[np.ndarray] = None,
        value: float = 0.0,
        reward: float = 0.0,
        max_option_length: int = 3,
        option_heads_by_depth: Optional[Dict[int, np.ndarray]] = None,
    ):
        self.policy = np.asarray(policy, dtype=np.float64)
        self.action_space_size = len(self.policy)
        self.max_option_length = max_option_length
        stop_heads = np.zeros((max_option_length - 1, self.action_space_size + 1))
        stop_heads[:, -1] = 1.0
        self.option_heads = stop_heads if option_heads is None else np.asarray(option_heads, dtype=np.float64)
        self.option_heads_by_depth = option_heads_by_depth or {}
        self.value = value
        self.reward = reward
        self.dynamics_calls: List[tuple] = []

    def represent(self, obs):
        return np.array([0.0])

    def dynamics(self, state, action):
        self.dynamics_calls.append((float(state[0]), tuple(action)))
        return DynamicsOutput(next_state=np.array([state[0] + len(action)]), reward=self.reward)

    def predict(self, state):
        heads = self.option_heads_by_depth.get(int(state[0]), self.option_heads)
        return PredictionOutput(policy=self.policy.copy(), value=self.value, option_heads=heads.copy())


def consistent_heads(action: int, per_step: float, max_option_length: int, action_space_size: int) -> np.ndarray:
    """Option heads for an argmax path that repeats `action` with probability `per_step` each move."""
    heads = np.zeros((max_option_length - 1, action_space_size + 1))
    for row in range(max_option_length - 1):
        product = per_step ** (row + 2)
        heads[row, action] = product
        heads[row, -1] = 1.0 - product
    return heads


# -- reference MuZero search ------------------------------------------------------------


@dataclass
class RefNode:
    prior: float
    hidden: Optional[np.ndarray] = None
    reward: float = 0.0
    visit_count: int = 0
    value_sum: float = 0.0
    children: Dict[int, "RefNode"] = field(default_factory=dict)

    def expanded(self) -> bool:
        return bool(self.children)

    def q(self) -> float:
        return self.value_sum / self.visit_count if self.visit_count else 0.0


class RefMinMax:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.maximum, self.minimum = -math.inf, math.inf

    def update(self, value):
        self.maximum, self.minimum = max(self.maximum, value), min(self.minimum, value)

    def normalize(self, value):
        if self.enabled and self.maximum > self.minimum:
            return (value - self.minimum) / (self.maximum - self.minimum)
        return value


def reference_muzero_search(obs, network, simulations, c_puct, discount, normalize_q=True):
    """Plain one-edge-per-action MuZero search with the same PUCT conventions.

    Edge Q is the mean of (reward + discount * return below); unvisited children
    score with the mean normalized Q of visited siblings, or 1.
    """
    stats = RefMinMax(normalize_q)

    def expand(node, hidden):
        out = network.predict(hidden)
        node.hidden = hidden
        for a, p in enumerate(out.policy):
            node.children[a] = RefNode(prior=float(p))
        return out.value

    def edge_q(child):
        return child.q()

    def select(node):
        visited = [stats.normalize(edge_q(c)) for c in node.children.values() if c.visit_count > 0]
        q_hat = sum(visited) / len(visited) if visited else 1.0
        explore = math.sqrt(sum(c.visit_count for c in node.children.values()) + 1)
        best, best_score = 0, -math.inf
        for a in sorted(node.children):
            c = node.children[a]
            q = stats.normalize(edge_q(c)) if c.visit_count > 0 else q_hat
            score = q + c.prior * explore / (1 + c.visit_count) * c_puct
            if score > best_score:
                best, best_score = a, score
        return best

    root = RefNode(prior=1.0)
    expand(root, network.represent(obs))
    for _ in range(simulations):
        node, path, actions = root, [root], []
        while node.expanded():
            a = select(node)
            actions.append(a)
            node = node.children[a]
            path.append(node)
        parent = path[-2]
        out = network.dynamics(parent.hidden, (actions[-1],))
        node.reward = out.reward
        value = expand(node, out.next_state)
        # returns measured from each edge's source, leaf upward
        g = value
        for child in reversed(path[1:]):
            g = child.reward + discount * g
            child.value_sum += g
            child.visit_count += 1
            stats.update(child.q())
    return root
