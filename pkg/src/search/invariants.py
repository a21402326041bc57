"""Structural checks over a finished search tree."""

from typing import List

from .mcts import adjusted_primitive_q
from .tree import Node


def tree_violations(root: Node, simulations: int, discount: float, max_option_length: int, tol: float = 1e-9) -> List[str]:
    """Describe every broken invariant; an empty list means the tree is consistent."""
    problems: List[str] = []
    root_visits = int(root.primitive_visits().sum())
    if root_visits != simulations:
        problems.append(f"root primitive visits {root_visits} != simulations {simulations}")

    max_depth = 0
    for node in root.walk():
        if node.evaluated:
            max_depth = max(max_depth, node.depth)
        for action, edge in enumerate(node.edges):
            if edge.stats.visits < 0:
                problems.append(f"negative visits at depth {node.depth} action {action}")
        if node.option_edge is not None:
            if not node.evaluated:
                problems.append(f"option edge on unevaluated node at depth {node.depth}")
            if len(node.option_edge.actions) < 2:
                problems.append(f"option edge shorter than 2 at depth {node.depth}")
            if node.option_edge.target.depth != node.depth + len(node.option_edge.actions):
                problems.append(f"option target depth mismatch at depth {node.depth}")
            prim = node.edges[node.option_edge.actions[0]].stats
            opt = node.option_edge.stats
            if prim.visits < opt.visits:
                problems.append(f"inclusion broken at depth {node.depth}: N(a)={prim.visits} < N(o)={opt.visits}")
            q_tilde = adjusted_primitive_q(prim, opt)
            if q_tilde is not None:
                lhs = (prim.visits - opt.visits) * q_tilde + opt.visits * opt.value
                if abs(lhs - prim.visits * prim.value) > tol * max(1.0, abs(prim.visits * prim.value)):
                    problems.append(f"Q inclusion identity broken at depth {node.depth}")
        if node.evaluated and node.inbound_parent is not None:
            parent = node.inbound_parent
            expected = parent.cum_reward + discount ** parent.depth * node.inbound_stats.reward
            if abs(node.cum_reward - expected) > tol * max(1.0, abs(expected)):
                problems.append(f"telescoping identity broken at depth {node.depth}")

    if max_depth > simulations * max_option_length:
        problems.append(f"depth {max_depth} exceeds simulations x L = {simulations * max_option_length}")
    return problems
