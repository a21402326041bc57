"""Option-aware Monte Carlo tree search.

A node may hold one option edge next to its |A| primitive edges. The primitive
edge sharing the option's first move includes the option edge's statistics, so
selection first runs PUCT over primitive edges and, when the winner starts the
option, compares the option edge against the primitive edge with the option's
share removed.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ..config import SearchConfig
from ..env import CompositeAction
from ..errors import SearchFault
from ..model import OptionZeroNetwork
from ..options import OptionDistribution, cumulative_probability, derive_dominant_option
from .tree import EdgeStats, MinMaxStats, Node, OptionEdge

PRIMITIVE, OPTION = "primitive", "option"


@dataclass(frozen=True)
class Transition:
    """One step of a selection path."""

    node: Node
    action: CompositeAction
    kind: str

    @property
    def is_option(self) -> bool:
        return self.kind == OPTION


@dataclass
class TreeMetrics:
    option_edge_expanded: bool = False
    simulations_traversing_option: int = 0
    max_depth: int = 0
    simulation_depths: List[int] = field(default_factory=list)
    simulation_used_option: List[bool] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "option_edge_expanded": self.option_edge_expanded,
            "simulations_traversing_option": self.simulations_traversing_option,
            "max_depth": self.max_depth,
            "simulation_depths": list(self.simulation_depths),
            "simulation_used_option": list(self.simulation_used_option),
        }


@dataclass
class SearchResult:
    root_policy: np.ndarray
    root_value: float
    chosen: CompositeAction
    suggested: CompositeAction
    root_option: CompositeAction
    root_policy_argmax: int
    tree_metrics: TreeMetrics
    root: Node


# -- selection ---------------------------------------------------------------------


def default_q(node: Node, stats: MinMaxStats) -> float:
    """Mean normalized Q over visited primitive children, or 1 when none is visited."""
    visited = [stats.normalize(e.stats.value) for e in node.edges if e.stats.visits > 0]
    if not visited:
        return 1.0
    return sum(visited) / len(visited)


def _exploration(total_visits: float) -> float:
    # Counts the parent's own evaluation, as a parent visit count does in MuZero.
    return math.sqrt(total_visits + 1)


def select_primitive(node: Node, c_puct: float, stats: Optional[MinMaxStats] = None) -> int:
    """PUCT over primitive edges; unvisited edges score with the default Q. Ties keep the lowest id."""
    stats = stats or MinMaxStats(enabled=False)
    q_hat = default_q(node, stats)
    explore = _exploration(sum(e.stats.visits for e in node.edges))
    best, best_score = 0, -float("inf")
    for action, edge in enumerate(node.edges):
        s = edge.stats
        q = stats.normalize(s.value) if s.visits > 0 else q_hat
        score = q + s.prior * explore / (1 + s.visits) * c_puct
        if score > best_score:
            best, best_score = action, score
    return best


def virtual_loss_q(primitive: EdgeStats, stats: Optional[MinMaxStats] = None) -> float:
    """Default Q for an unvisited option edge: the primitive edge's Q plus one virtual loss."""
    if primitive.visits == 0:
        return 0.0
    stats = stats or MinMaxStats(enabled=False)
    return stats.normalize(primitive.value) * primitive.visits / (primitive.visits + 1)


def adjusted_primitive_q(primitive: EdgeStats, option: EdgeStats) -> Optional[float]:
    """Q of the primitive edge with the option edge's visits removed; None when nothing remains."""
    remaining = primitive.visits - option.visits
    if remaining <= 0:
        return None
    return (primitive.visits * primitive.value - option.visits * option.value) / remaining


def adjusted_primitive_prior(primitive: EdgeStats, option: EdgeStats) -> float:
    return max(0.0, primitive.prior - option.prior)


def select_option_vs_primitive(
    node: Node, action: int, c_puct: float, stats: Optional[MinMaxStats] = None
) -> str:
    """Second selection stage between the option edge and the primitive edge it starts with."""
    stats = stats or MinMaxStats(enabled=False)
    option_edge = node.option_edge
    if option_edge is None or option_edge.actions[0] != action:
        return PRIMITIVE
    prim = node.edges[action].stats
    opt = option_edge.stats
    explore = _exploration(prim.visits)

    q_option = stats.normalize(opt.value) if opt.visits > 0 else virtual_loss_q(prim, stats)
    option_score = q_option + opt.prior * explore / (1 + opt.visits) * c_puct

    q_tilde = adjusted_primitive_q(prim, opt)
    q_prim = stats.normalize(q_tilde) if q_tilde is not None else virtual_loss_q(prim, stats)
    remaining = prim.visits - opt.visits
    prim_score = q_prim + adjusted_primitive_prior(prim, opt) * explore / (1 + remaining) * c_puct

    return OPTION if option_score > prim_score else PRIMITIVE


def select_path(root: Node, config: SearchConfig, stats: MinMaxStats) -> Tuple[List[Transition], Node]:
    """Descend from the root until an unevaluated node is reached."""
    path: List[Transition] = []
    node = root
    while True:
        action = select_primitive(node, config.c_puct, stats)
        if node.option_matches(action) and select_option_vs_primitive(node, action, config.c_puct, stats) == OPTION:
            path.append(Transition(node, node.option_edge.actions, OPTION))
            target = node.option_edge.target
        else:
            path.append(Transition(node, (action,), PRIMITIVE))
            target = node.child(action)
        if not target.evaluated:
            return path, target
        node = target


# -- expansion ---------------------------------------------------------------------


def _check_finite(**values) -> None:
    for name, value in values.items():
        if not np.all(np.isfinite(value)):
            raise SearchFault("Non-finite network output", output=name)


def evaluate_node(node: Node, hidden: np.ndarray, network: OptionZeroNetwork) -> None:
    """Run the prediction function at `node` and grow its primitive edges and option chain."""
    prediction = network.predict(hidden)
    _check_finite(hidden=hidden, policy=prediction.policy, value=prediction.value, options=prediction.option_heads)
    node.hidden = hidden
    node.value = prediction.value
    node.evaluated = True
    for edge, prior in zip(node.edges, prediction.policy):
        edge.stats.prior = float(prior)
    dist = OptionDistribution.from_prediction(prediction.policy, prediction.option_heads)
    node.derived_option = derive_dominant_option(dist)
    if len(node.derived_option) > 1:
        target = node
        for action in node.derived_option:
            target = target.child(action)
        node.option_edge = OptionEdge(
            actions=node.derived_option,
            stats=EdgeStats(prior=cumulative_probability(dist, node.derived_option)),
            target=target,
        )


def evaluate_root(obs: np.ndarray, network: OptionZeroNetwork) -> Node:
    root = Node(depth=0, action_space_size=network.action_space_size)
    evaluate_node(root, network.represent(obs), network)
    return root


def expand_and_evaluate(path: List[Transition], leaf: Node, network: OptionZeroNetwork, discount: float) -> Node:
    """Evaluate `leaf` with one dynamics call from the last evaluated node on the path."""
    if not path:
        raise SearchFault("Dynamics requested for the root; the root is built from the representation")
    last = path[-1]
    parent = last.node
    if not parent.evaluated or parent.hidden is None:
        raise SearchFault("Expansion parent is not evaluated", depth=parent.depth)
    out = network.dynamics(parent.hidden, last.action)
    _check_finite(reward=out.reward)
    edge_stats = parent.option_edge.stats if last.is_option else parent.edges[last.action[0]].stats
    edge_stats.reward = out.reward
    edge_stats.reward_set = True
    leaf.cum_reward = parent.cum_reward + discount ** parent.depth * out.reward
    leaf.inbound_parent = parent
    leaf.inbound_stats = edge_stats
    evaluate_node(leaf, out.next_state, network)
    return leaf


# -- backup ------------------------------------------------------------------------


def backup(path: List[Transition], leaf: Node, discount: float, stats: Optional[MinMaxStats] = None) -> None:
    """Update every traversed edge with the return measured from its source node.

    Segment rewards come from cumulative root-relative rewards, so edges whose own
    reward was never evaluated still receive an exact return.
    """
    l = leaf.depth
    for step in path:
        node = step.node
        k = node.depth
        g = (leaf.cum_reward - node.cum_reward) / discount ** k + discount ** (l - k) * leaf.value
        primitive = node.edges[step.action[0]].stats
        primitive.update(g)
        if stats is not None:
            stats.update(primitive.value)
        if step.is_option:
            node.option_edge.stats.update(g)
            if stats is not None:
                stats.update(node.option_edge.stats.value)


# -- root --------------------------------------------------------------------------


def add_root_noise(root: Node, alpha: float, epsilon: float, rng: np.random.Generator) -> None:
    """Mix Dirichlet noise into the primitive priors and, separately, into the option prior."""
    if epsilon <= 0.0:
        return
    noise = rng.dirichlet([alpha] * root.action_space_size)
    for edge, n in zip(root.edges, noise):
        edge.stats.prior = (1 - epsilon) * edge.stats.prior + epsilon * float(n)
    if root.option_edge is not None:
        draw = float(rng.dirichlet([alpha, alpha])[0])
        mixed = (1 - epsilon) * root.option_edge.stats.prior + epsilon * draw
        root.option_edge.stats.prior = min(1.0, max(0.0, mixed))


def visit_distribution(counts: np.ndarray, temperature: float) -> np.ndarray:
    """counts^(1/T), normalized. Counts are divided by their max first so small T cannot overflow."""
    counts = np.asarray(counts, dtype=np.float64)
    weights = (counts / counts.max()) ** (1.0 / temperature)
    return weights / weights.sum()


def sample_root_action(root: Node, temperature: float, rng: Optional[np.random.Generator] = None) -> CompositeAction:
    """Draw a primitive action by visit counts, then option versus primitive by their split.

    Temperature 0 takes the argmax at both stages (ties keep the primitive / lowest id).
    """
    counts = root.primitive_visits()
    greedy = temperature <= 0.0 or rng is None
    if counts.sum() <= 0:
        probs = np.full(len(counts), 1.0 / len(counts))
    else:
        probs = visit_distribution(counts, temperature) if not greedy else counts / counts.sum()
    action = int(np.argmax(probs)) if greedy else int(rng.choice(len(probs), p=probs))

    if not root.option_matches(action):
        return (action,)
    n_option = root.option_edge.stats.visits
    n_primitive = root.edges[action].stats.visits - n_option
    if greedy:
        return root.option_edge.actions if n_option > n_primitive else (action,)
    if n_option + n_primitive <= 0:
        return (action,)
    take_option = rng.random() < n_option / (n_option + n_primitive)
    return root.option_edge.actions if take_option else (action,)


def root_policy(root: Node) -> np.ndarray:
    counts = root.primitive_visits()
    if counts.sum() <= 0:
        return np.full(len(counts), 1.0 / len(counts))
    return counts / counts.sum()


def root_value(root: Node) -> float:
    counts = root.primitive_visits()
    if counts.sum() <= 0:
        return root.value
    q = np.array([e.stats.value for e in root.edges])
    return float(counts @ q / counts.sum())


# -- driver ------------------------------------------------------------------------


def run_search(
    obs: np.ndarray,
    network: OptionZeroNetwork,
    config: SearchConfig,
    rng: np.random.Generator,
    add_noise: bool = True,
    temperature: Optional[float] = None,
) -> SearchResult:
    """Run `config.simulations` simulations from the observation and pick a composite action."""
    if network.max_option_length != config.max_option_length:
        raise SearchFault(
            "Model and search disagree on L", model=network.max_option_length, search=config.max_option_length
        )
    root = evaluate_root(obs, network)
    root_option = root.derived_option
    policy_argmax = int(np.argmax([e.stats.prior for e in root.edges]))
    if add_noise:
        add_root_noise(root, config.dirichlet_alpha, config.dirichlet_epsilon, rng)

    stats = MinMaxStats(enabled=config.normalize_q)
    metrics = TreeMetrics(option_edge_expanded=root.option_edge is not None)
    for _ in range(config.simulations):
        path, leaf = select_path(root, config, stats)
        expand_and_evaluate(path, leaf, network, config.discount)
        backup(path, leaf, config.discount, stats)
        used_option = any(step.is_option for step in path)
        metrics.simulation_depths.append(leaf.depth)
        metrics.simulation_used_option.append(used_option)
        metrics.simulations_traversing_option += int(used_option)
        metrics.max_depth = max(metrics.max_depth, leaf.depth)
        metrics.option_edge_expanded = metrics.option_edge_expanded or leaf.option_edge is not None

    temperature = config.temperature if temperature is None else temperature
    return SearchResult(
        root_policy=root_policy(root),
        root_value=root_value(root),
        chosen=sample_root_action(root, temperature, rng),
        suggested=sample_root_action(root, 0.0),
        root_option=root_option,
        root_policy_argmax=policy_argmax,
        tree_metrics=metrics,
        root=root,
    )
