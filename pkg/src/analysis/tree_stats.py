"""Search-tree statistics from per-move search dumps."""

from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np
import orjson
from pydantic import BaseModel

from ..errors import UsageError


class TreeReport(BaseModel):
    searches: int
    simulations: int
    in_tree_pct: float
    in_sim_pct: float
    mcts_pct: float
    env_pct: float
    depth_mean: float
    depth_p25: float
    depth_p50: float
    depth_p75: float
    depth_max: int

    def table(self) -> Tuple[List[str], List[List[str]]]:
        rows = [
            ["searches", str(self.searches)],
            ["% in Tree", f"{self.in_tree_pct:.2f}"],
            ["% in Sim", f"{self.in_sim_pct:.2f}"],
            ["% MCTS", f"{self.mcts_pct:.2f}"],
            ["% Env", f"{self.env_pct:.2f}"],
            ["depth avg", f"{self.depth_mean:.2f}"],
            ["depth P25", f"{self.depth_p25:.2f}"],
            ["depth P50", f"{self.depth_p50:.2f}"],
            ["depth P75", f"{self.depth_p75:.2f}"],
            ["depth max", str(self.depth_max)],
        ]
        return ["metric", "value"], rows


def read_search_dumps(path: Union[str, Path]) -> List[Dict[str, Any]]:
    path = Path(path)
    dumps, problems = [], []
    with path.open("rb") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                dumps.append(orjson.loads(line))
            except orjson.JSONDecodeError as exc:
                problems.append(f"{path}:{lineno}: {exc}")
    if problems:
        raise UsageError("Unreadable search dump", path=str(path), problems="; ".join(problems))
    return dumps


def tree_stats(dumps: Sequence[Dict[str, Any]]) -> TreeReport:
    """Aggregate per-search flags; depth percentiles are over each search's deepest simulation."""
    if not dumps:
        raise UsageError("No search dumps to analyze")
    try:
        in_tree = [bool(d["option_edge_expanded"]) for d in dumps]
        used = [bool(u) for d in dumps for u in d["simulation_used_option"]]
        max_depths = np.array([max(d["simulation_depths"], default=0) for d in dumps], dtype=np.float64)
        suggested = [len(d["suggested"]) > 1 for d in dumps]
        executed = [len(d["executed"]) > 1 for d in dumps]
    except KeyError as exc:
        raise UsageError("Search dump missing field", field=str(exc)) from exc
    p25, p50, p75 = np.percentile(max_depths, [25, 50, 75])
    return TreeReport(
        searches=len(dumps),
        simulations=len(used),
        in_tree_pct=100.0 * float(np.mean(in_tree)),
        in_sim_pct=100.0 * float(np.mean(used)) if used else 0.0,
        mcts_pct=100.0 * float(np.mean(suggested)),
        env_pct=100.0 * float(np.mean(executed)),
        depth_mean=float(max_depths.mean()),
        depth_p25=float(p25),
        depth_p50=float(p50),
        depth_p75=float(p75),
        depth_max=int(max_depths.max()),
    )
