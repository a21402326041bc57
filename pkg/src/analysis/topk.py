"""Most frequently executed options."""

import math
from collections import Counter
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from pydantic import BaseModel

from ..selfplay import Trajectory

PERCENTILES = (1, 5, 10, 25)


class OptionShare(BaseModel):
    option: List[int]
    label: str
    count: int
    share_pct: float


class TopKReport(BaseModel):
    total_options: int
    distinct_options: int
    rows: List[OptionShare]
    percentile_share_pct: Dict[int, float]

    def table(self) -> Tuple[List[str], List[List[str]]]:
        rows = [[str(rank), r.label, str(r.count), f"{r.share_pct:.2f}"] for rank, r in enumerate(self.rows, start=1)]
        rows += [[f"top {p}%", "", "", f"{share:.2f}"] for p, share in self.percentile_share_pct.items()]
        return ["rank", "option", "count", "share %"], rows


def option_label(option: Sequence[int], glyphs: Optional[Mapping[int, str]] = None) -> str:
    if glyphs:
        return "".join(glyphs.get(a, "?") for a in option)
    return "-".join(str(a) for a in option)


def top_k_options(
    trajectories: Sequence[Trajectory], k: int, glyphs: Optional[Mapping[int, str]] = None
) -> TopKReport:
    """Rank executed options (length >= 2) by frequency; ties break on the action ids."""
    counter = Counter(
        tuple(record.executed) for trajectory in trajectories for record in trajectory if record.length > 1
    )
    total = sum(counter.values())
    ranked = sorted(counter.items(), key=lambda item: (-item[1], item[0]))
    rows = [
        OptionShare(option=list(option), label=option_label(option, glyphs), count=count, share_pct=100.0 * count / total)
        for option, count in ranked[: max(k, 0)]
    ]
    percentile_shares = {}
    for p in PERCENTILES:
        if not ranked:
            percentile_shares[p] = 0.0
            continue
        top = max(1, math.ceil(len(ranked) * p / 100.0))
        percentile_shares[p] = 100.0 * sum(count for _, count in ranked[:top]) / total
    return TopKReport(
        total_options=total,
        distinct_options=len(ranked),
        rows=rows,
        percentile_share_pct=percentile_shares,
    )
