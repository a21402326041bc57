"""Search tree nodes and edge statistics."""

from dataclasses import dataclass, field
from typing import Iterator, List, Optional

import numpy as np

from ..env import CompositeAction


@dataclass
class EdgeStats:
    """N, Q, P, R of one edge; R is set the first time a node is evaluated through it."""

    prior: float = 0.0
    visits: int = 0
    value: float = 0.0
    reward: float = 0.0
    reward_set: bool = False

    def update(self, g: float) -> None:
        self.value = (self.visits * self.value + g) / (self.visits + 1)
        self.visits += 1


@dataclass(eq=False)
class Edge:
    """Primitive edge; `child` may be created before the child is evaluated."""

    stats: EdgeStats = field(default_factory=EdgeStats)
    child: Optional["Node"] = None


@dataclass(eq=False)
class OptionEdge:
    """Edge from a node to the last node of its option's internal chain."""

    actions: CompositeAction
    stats: EdgeStats
    target: "Node"


@dataclass(eq=False)
class Node:
    depth: int
    action_space_size: int
    hidden: Optional[np.ndarray] = None
    cum_reward: float = 0.0
    value: float = 0.0
    evaluated: bool = False
    derived_option: CompositeAction = ()
    edges: List[Edge] = field(default_factory=list)
    option_edge: Optional[OptionEdge] = None
    # (parent, edge stats) this node was evaluated through; None for the root
    inbound_parent: Optional["Node"] = None
    inbound_stats: Optional[EdgeStats] = None

    def __post_init__(self):
        if not self.edges:
            self.edges = [Edge() for _ in range(self.action_space_size)]

    def child(self, action: int) -> "Node":
        edge = self.edges[action]
        if edge.child is None:
            edge.child = Node(depth=self.depth + 1, action_space_size=self.action_space_size)
        return edge.child

    def primitive_visits(self) -> np.ndarray:
        return np.array([e.stats.visits for e in self.edges], dtype=np.float64)

    def option_matches(self, action: int) -> bool:
        return self.option_edge is not None and self.option_edge.actions[0] == action

    def walk(self) -> Iterator["Node"]:
        """Every distinct node reachable through primitive or option edges."""
        seen = set()
        stack = [self]
        while stack:
            node = stack.pop()
            if id(node) in seen:
                continue
            seen.add(id(node))
            yield node
            for edge in node.edges:
                if edge.child is not None:
                    stack.append(edge.child)
            if node.option_edge is not None:
                stack.append(node.option_edge.target)


class MinMaxStats:
    """Running bounds of backed-up Q values, used to map Q into [0, 1] for PUCT."""

    def __init__(self, enabled: bool = True):
        self.enabled = enabled
        self.maximum = -float("inf")
        self.minimum = float("inf")

    def update(self, value: float) -> None:
        self.maximum = max(self.maximum, value)
        self.minimum = min(self.minimum, value)

    def normalize(self, value: float) -> float:
        if self.enabled and self.maximum > self.minimum:
            return (value - self.minimum) / (self.maximum - self.minimum)
        return value
