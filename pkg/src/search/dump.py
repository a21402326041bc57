"""Per-move search dumps for analysis and golden-trace tests."""

from typing import Any, Dict, Optional

from ..env import CompositeAction
from .mcts import SearchResult


def _edge(stats) -> Dict[str, Any]:
    return {"N": stats.visits, "Q": stats.value, "P": stats.prior, "R": stats.reward}


def search_dump_record(
    result: SearchResult,
    game: int,
    move: int,
    executed: Optional[CompositeAction] = None,
    include_nodes: bool = True,
) -> Dict[str, Any]:
    metrics = result.tree_metrics
    record: Dict[str, Any] = {
        "game": game,
        "move": move,
        "simulations": len(metrics.simulation_depths),
        "option_edge_expanded": metrics.option_edge_expanded,
        "simulation_depths": list(metrics.simulation_depths),
        "simulation_used_option": list(metrics.simulation_used_option),
        "suggested": list(result.suggested),
        "executed": list(executed) if executed is not None else list(result.chosen),
    }
    if include_nodes:
        nodes = []
        for node in result.root.walk():
            if not node.evaluated:
                continue
            entry: Dict[str, Any] = {
                "depth": node.depth,
                "option": list(node.derived_option),
                "value": node.value,
                "cum_reward": node.cum_reward,
                "edges": [_edge(e.stats) for e in node.edges],
            }
            if node.option_edge is not None:
                entry["option_edge"] = _edge(node.option_edge.stats)
            nodes.append(entry)
        nodes.sort(key=lambda n: n["depth"])
        record["nodes"] = nodes
    return record
