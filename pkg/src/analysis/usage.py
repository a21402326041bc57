"""How often decisions execute options, and of which lengths."""

from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel

from ..errors import UsageError
from ..selfplay import Trajectory


class UsageReport(BaseModel):
    decisions: int
    primitive_pct: float
    option_pct: float
    length_pct: Dict[int, float]
    mean_length: float
    repeat_pct: Optional[float] = None
    non_repeat_pct: Optional[float] = None
    distinct_options: int

    def table(self) -> Tuple[List[str], List[List[str]]]:
        rows = [["decisions", str(self.decisions)], ["%a", f"{self.primitive_pct:.2f}"], ["%o", f"{self.option_pct:.2f}"]]
        rows += [[f"%{length}", f"{share:.2f}"] for length, share in sorted(self.length_pct.items())]
        rows.append(["l_bar", f"{self.mean_length:.4f}"])
        rows.append(["%Rpt", "-" if self.repeat_pct is None else f"{self.repeat_pct:.2f}"])
        rows.append(["%NRpt", "-" if self.non_repeat_pct is None else f"{self.non_repeat_pct:.2f}"])
        rows.append(["distinct options", str(self.distinct_options)])
        return ["metric", "value"], rows


def is_repeat(option: Sequence[int]) -> bool:
    return len(set(option)) == 1


def usage_stats(trajectories: Sequence[Trajectory], max_option_length: Optional[int] = None) -> UsageReport:
    """Decision-level tallies over executed composites.

    Per-length shares cover lengths 2..L, where L defaults to the longest
    executed composite.
    """
    executed = [record.executed for trajectory in trajectories for record in trajectory]
    if not executed:
        raise UsageError("No decisions to analyze")
    longest = max(len(e) for e in executed)
    max_length = max_option_length or longest
    if longest > max_length:
        raise UsageError("Executed composite longer than L", longest=longest, max_option_length=max_length)

    total = len(executed)
    counts = {length: 0 for length in range(1, max_length + 1)}
    for composite in executed:
        counts[len(composite)] += 1
    options = [tuple(e) for e in executed if len(e) > 1]
    repeats = sum(1 for option in options if is_repeat(option))
    return UsageReport(
        decisions=total,
        primitive_pct=100.0 * counts[1] / total,
        option_pct=100.0 * len(options) / total,
        length_pct={length: 100.0 * counts[length] / total for length in range(2, max_length + 1)},
        mean_length=sum(len(e) for e in executed) / total,
        repeat_pct=100.0 * repeats / len(options) if options else None,
        non_repeat_pct=100.0 * (len(options) - repeats) / len(options) if options else None,
        distinct_options=len(set(options)),
    )
