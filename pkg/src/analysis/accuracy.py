"""How far into a suggested composite the agent's later primitives agree with it."""

from typing import List, Optional, Sequence, Tuple

from pydantic import BaseModel

from ..selfplay import Trajectory


class AccuracyReport(BaseModel):
    accuracy: List[Optional[float]]  # step k -> percent, None when nothing was eligible
    eligible: List[int]
    matches: List[int]

    def table(self) -> Tuple[List[str], List[List[str]]]:
        rows = [
            [f"{k}-step", "-" if acc is None else f"{acc:.2f}", str(self.matches[k]), str(self.eligible[k])]
            for k, acc in enumerate(self.accuracy)
        ]
        return ["step", "accuracy %", "matches", "eligible"], rows


def prediction_accuracy(trajectories: Sequence[Trajectory], max_option_length: int) -> AccuracyReport:
    """Compare the k-th suggested action with the k-th primitive executed from that decision on."""
    eligible = [0] * max_option_length
    matches = [0] * max_option_length
    for trajectory in trajectories:
        flat = trajectory.flat_actions()
        offsets = trajectory.offsets
        for index, record in enumerate(trajectory):
            suggestion = record.suggested[:max_option_length]
            for k, action in enumerate(suggestion):
                position = int(offsets[index]) + k
                if position >= len(flat):
                    break
                eligible[k] += 1
                matches[k] += int(flat[position] == action)
    return AccuracyReport(
        accuracy=[100.0 * m / e if e else None for m, e in zip(matches, eligible)],
        eligible=eligible,
        matches=matches,
    )
