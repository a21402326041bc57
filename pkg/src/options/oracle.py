"""Equivalence suite: derived dominant options versus the brute-force tree oracle."""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, List, Optional, Tuple

import numpy as np

from ..env import CompositeAction
from ..logging_config import get_logger
from .dominant import (
    OptionDistribution,
    PolicyTree,
    derive_dominant_option,
    distribution_from_tree,
    oracle_dominant_option,
    random_policy_tree,
)

logger = get_logger(__name__)

Derive = Callable[[OptionDistribution], CompositeAction]


def constant_policy_tree(action_space_size: int, max_length: int, probs_by_depth: List[List[float]]) -> dict:
    """Every node at depth d carries probs_by_depth[d] (the last entry repeats past its end)."""
    tree = {}
    frontier: List[Tuple[int, ...]] = [()]
    for depth in range(max_length):
        probs = probs_by_depth[min(depth, len(probs_by_depth) - 1)]
        next_frontier = []
        for path in frontier:
            tree[path] = list(probs)
            next_frontier.extend(path + (a,) for a in range(action_space_size))
        frontier = next_frontier
    return tree


def reference_cases() -> List[Tuple[str, PolicyTree, int]]:
    """Hand-checkable trees: a length-3 option at product 0.512 and a length-2 option."""
    return [
        ("three_steps_0.512", constant_policy_tree(3, 4, [[0.8, 0.1, 0.1]]), 4),
        ("two_steps", constant_policy_tree(3, 4, [[0.8, 0.1, 0.1], [0.1, 0.7, 0.2], [0.2, 0.2, 0.6]]), 4),
        ("no_option", constant_policy_tree(3, 4, [[0.4, 0.35, 0.25]]), 4),
        ("single_action", constant_policy_tree(1, 3, [[1.0]]), 3),
    ]


@dataclass
class OracleReport:
    trials: int = 0
    failures: int = 0
    counterexample: Optional[Dict[str, Any]] = None
    by_case: Dict[str, int] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.failures == 0


def _trees(trials: int, rng: np.random.Generator) -> Iterator[Tuple[str, PolicyTree, int, int]]:
    for name, tree, length in reference_cases():
        yield name, tree, len(tree[()]), length
    # every |A| <= 4 and L <= 4 combination
    for action_space_size in range(1, 5):
        for max_length in range(1, 5):
            for _ in range(8):
                yield "exhaustive", random_policy_tree(rng, action_space_size, max_length), action_space_size, max_length
    for _ in range(trials):
        action_space_size = int(rng.integers(2, 7))
        max_length = int(rng.integers(1, 7))
        concentration = float(rng.choice([0.1, 0.3, 1.0]))
        tree = random_policy_tree(rng, action_space_size, max_length, concentration)
        yield "random", tree, action_space_size, max_length


def run_oracle_suite(trials: int = 10_000, seed: int = 0, derive: Derive = derive_dominant_option) -> OracleReport:
    """Compare `derive` with the oracle on reference, exhaustive-size and random trees.

    The first disagreement is kept as the counterexample.
    """
    rng = np.random.default_rng(seed)
    report = OracleReport()
    for name, tree, action_space_size, max_length in _trees(trials, rng):
        report.trials += 1
        report.by_case[name] = report.by_case.get(name, 0) + 1
        expected, products = oracle_dominant_option(tree, max_length)
        got = tuple(derive(distribution_from_tree(tree, max_length, action_space_size)))
        if got != tuple(expected):
            report.failures += 1
            if report.counterexample is None:
                report.counterexample = {
                    "case": name,
                    "action_space_size": action_space_size,
                    "max_length": max_length,
                    "expected": list(expected),
                    "derived": list(got),
                    "products": [round(p, 6) for p in products],
                }
    logger.info("oracle_suite_finished", trials=report.trials, failures=report.failures, seed=seed)
    return report
