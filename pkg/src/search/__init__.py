"""Option-aware Monte Carlo tree search."""

from .dump import search_dump_record
from .invariants import tree_violations
from .mcts import (
    OPTION,
    PRIMITIVE,
    SearchResult,
    Transition,
    TreeMetrics,
    add_root_noise,
    adjusted_primitive_prior,
    adjusted_primitive_q,
    backup,
    default_q,
    evaluate_node,
    evaluate_root,
    expand_and_evaluate,
    root_policy,
    root_value,
    run_search,
    sample_root_action,
    select_option_vs_primitive,
    select_path,
    select_primitive,
    virtual_loss_q,
    visit_distribution,
)
from .tree import Edge, EdgeStats, MinMaxStats, Node, OptionEdge

__all__ = [
    "search_dump_record",
    "tree_violations",
    "OPTION",
    "PRIMITIVE",
    "SearchResult",
    "Transition",
    "TreeMetrics",
    "add_root_noise",
    "adjusted_primitive_prior",
    "adjusted_primitive_q",
    "backup",
    "default_q",
    "evaluate_node",
    "evaluate_root",
    "expand_and_evaluate",
    "root_policy",
    "root_value",
    "run_search",
    "sample_root_action",
    "select_option_vs_primitive",
    "select_path",
    "select_primitive",
    "virtual_loss_q",
    "visit_distribution",
    "Edge",
    "EdgeStats",
    "MinMaxStats",
    "Node",
    "OptionEdge",
]
