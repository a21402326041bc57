"""Dominant option: the longest argmax prefix whose cumulative probability stays above one half."""

from dataclasses import dataclass
from typing import Mapping, Sequence, Tuple

import numpy as np

from ..env import CompositeAction
from ..errors import OracleError, UsageError

PolicyTree = Mapping[Tuple[int, ...], Sequence[float]]


@dataclass(frozen=True)
class OptionDistribution:
    """L rows over |A| actions plus stop (last column).

    Row 0 is synthesized from the policy head: only argmax p and stop = 1 - max p
    carry mass. Rows 1..L-1 are the option heads, whose entries model the
    cumulative probability of the argmax path.
    """

    omega: np.ndarray

    @property
    def max_length(self) -> int:
        return self.omega.shape[0]

    @property
    def action_space_size(self) -> int:
        return self.omega.shape[1] - 1

    @property
    def stop(self) -> int:
        return self.action_space_size

    @classmethod
    def from_prediction(cls, policy: np.ndarray, option_heads: np.ndarray) -> "OptionDistribution":
        policy = np.asarray(policy, dtype=np.float64)
        a = len(policy)
        first = np.zeros(a + 1)
        best = int(np.argmax(policy))
        first[best] = policy[best]
        first[a] = 1.0 - policy[best]
        heads = np.asarray(option_heads, dtype=np.float64).reshape(-1, a + 1)
        return cls(omega=np.vstack([first[None, :], heads]))


def _argmax(row: np.ndarray) -> int:
    # np.argmax keeps the first maximum: lowest action id wins and stop (last) loses ties.
    return int(np.argmax(row))


def derive_dominant_option(dist: OptionDistribution) -> CompositeAction:
    """Walk rows in order, taking each row's argmax until it is stop or L moves are taken.

    Returns an empty tuple when the policy's top action has at most half the mass
    (strictly less; an exact tie keeps the action).
    """
    option = []
    for row in dist.omega:
        choice = _argmax(row)
        if choice == dist.stop:
            break
        option.append(choice)
    return tuple(option)


def cumulative_probability(dist: OptionDistribution, option: CompositeAction) -> float:
    """Prior of an option edge: the head entry for the option's last move."""
    if not 2 <= len(option) <= dist.max_length:
        raise UsageError("Option length outside [2, L]", length=len(option), max_length=dist.max_length)
    return float(dist.omega[len(option) - 1, option[-1]])


def oracle_dominant_option(policy_tree: PolicyTree, max_length: int) -> Tuple[CompositeAction, Tuple[float, ...]]:
    """Brute force over an explicit policy tree keyed by action-path prefixes.

    Follows argmax actions, multiplying their probabilities, and keeps every
    prefix whose product exceeds 0.5.
    """
    path: Tuple[int, ...] = ()
    product = 1.0
    products = []
    for _ in range(max_length):
        if path not in policy_tree:
            raise OracleError("Policy tree has no distribution for path", path=path)
        probs = np.asarray(policy_tree[path], dtype=np.float64)
        best = _argmax(probs)
        product *= float(probs[best])
        if product <= 0.5:
            break
        products.append(product)
        path = path + (best,)
    return path, tuple(products)


def distribution_from_tree(policy_tree: PolicyTree, max_length: int, action_space_size: int) -> OptionDistribution:
    """Option distribution whose row i holds the true cumulative product along the argmax path."""
    omega = np.zeros((max_length, action_space_size + 1))
    path: Tuple[int, ...] = ()
    product = 1.0
    for i in range(max_length):
        if path not in policy_tree:
            raise OracleError("Policy tree has no distribution for path", path=path)
        probs = np.asarray(policy_tree[path], dtype=np.float64)
        best = _argmax(probs)
        product *= float(probs[best])
        omega[i, best] = product
        omega[i, action_space_size] = 1.0 - product
        path = path + (best,)
    return OptionDistribution(omega=omega)


def random_policy_tree(
    rng: np.random.Generator, action_space_size: int, max_length: int, concentration: float = 0.5
) -> dict:
    """Full tree of Dirichlet-distributed policies down to depth L-1."""
    tree = {}
    frontier = [()]
    for depth in range(max_length):
        next_frontier = []
        for path in frontier:
            tree[path] = rng.dirichlet([concentration] * action_space_size)
            if depth + 1 < max_length:
                next_frontier.extend(path + (a,) for a in range(action_space_size))
        frontier = next_frontier
    return tree
