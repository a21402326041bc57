"""GridWorld maze with decision-based reward accounting.

Every composite action costs one decision (-1); reaching the goal adds the goal
bonus on the primitive step that arrives, and the rest of an option is dropped.
Moving into a wall or the border is a legal no-op.
"""

from collections import deque
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Dict, FrozenSet, List, Mapping, Optional, Tuple

import numpy as np

from ..errors import ConfigurationError, UsageError
from ..logging_config import get_logger
from .base import CompositeAction, CompositeEnvironment, StepResult

logger = get_logger(__name__)

Cell = Tuple[int, int]

WALL, FLOOR, START, GOAL, AGENT = "#", ".", "S", "G", "@"
PRIMITIVE_MARK = "*"
COMMENT = ";"


def is_marker(glyph: str) -> bool:
    """Agent and overlay glyphs drawn by render_ascii; they sit on floor cells."""
    return glyph in (AGENT, PRIMITIVE_MARK) or glyph.islower()


class Move(IntEnum):
    """Primitive GridWorld actions."""

    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3


DELTAS: Dict[int, Cell] = {
    Move.UP: (-1, 0),
    Move.DOWN: (1, 0),
    Move.LEFT: (0, -1),
    Move.RIGHT: (0, 1),
}

MOVE_GLYPHS = {Move.UP: "U", Move.DOWN: "D", Move.LEFT: "L", Move.RIGHT: "R"}


@dataclass(frozen=True)
class GridMap:
    """Static maze layout."""

    walls: Tuple[Tuple[bool, ...], ...]
    start: Cell
    goal: Cell

    @property
    def height(self) -> int:
        return len(self.walls)

    @property
    def width(self) -> int:
        return len(self.walls[0])

    def is_wall(self, cell: Cell) -> bool:
        r, c = cell
        return self.walls[r][c]

    def open_cells(self) -> List[Cell]:
        return [
            (r, c) for r in range(self.height) for c in range(self.width) if not self.walls[r][c]
        ]

    def move(self, cell: Cell, action: int) -> Cell:
        dr, dc = DELTAS[action]
        r, c = cell[0] + dr, cell[1] + dc
        if not (0 <= r < self.height and 0 <= c < self.width) or self.walls[r][c]:
            return cell
        return (r, c)

    def distances_to_goal(self) -> Dict[Cell, int]:
        """BFS distances (in primitive moves) from every reachable cell to the goal."""
        dist = {self.goal: 0}
        frontier = deque([self.goal])
        while frontier:
            cell = frontier.popleft()
            for action in Move:
                # Moves are reversible, so neighbours of the goal side are predecessors.
                nxt = self.move(cell, action)
                if nxt not in dist:
                    dist[nxt] = dist[cell] + 1
                    frontier.append(nxt)
        return dist

    def shortest_path_length(self, start: Optional[Cell] = None) -> int:
        start = self.start if start is None else start
        dist = self.distances_to_goal()
        if start not in dist:
            raise ConfigurationError("Goal is unreachable from start", start=start, goal=self.goal)
        return dist[start]

    def to_text(self) -> str:
        rows = []
        for r in range(self.height):
            row = []
            for c in range(self.width):
                if (r, c) == self.start:
                    row.append(START)
                elif (r, c) == self.goal:
                    row.append(GOAL)
                else:
                    row.append(WALL if self.walls[r][c] else FLOOR)
            rows.append("".join(row))
        return "\n".join(rows)


def parse_map(text: str) -> GridMap:
    """Parse a map written with the glyphs #, ., S and G.

    Lines starting with `;` are comments. Agent and overlay marks read as floor,
    so the output of `GridWorld.render_ascii` parses back to the same map.
    """
    rows = [
        line.rstrip() for line in text.splitlines() if line.strip() and not line.lstrip().startswith(COMMENT)
    ]
    if not rows:
        raise ConfigurationError("Map is empty")
    width = len(rows[0])
    problems = []
    starts, goals = [], []
    walls = []
    for r, row in enumerate(rows):
        if len(row) != width:
            problems.append(f"row {r} has width {len(row)}, expected {width}")
        wall_row = []
        for c, glyph in enumerate(row):
            if glyph not in (WALL, FLOOR, START, GOAL) and not is_marker(glyph):
                problems.append(f"unknown glyph {glyph!r} at ({r}, {c})")
            if glyph == START:
                starts.append((r, c))
            elif glyph == GOAL:
                goals.append((r, c))
            wall_row.append(glyph == WALL)
        walls.append(tuple(wall_row))
    if len(goals) != 1:
        problems.append(f"expected exactly one goal cell, found {len(goals)}")
    if len(starts) != 1:
        problems.append(f"expected exactly one start cell, found {len(starts)}")
    if problems:
        raise ConfigurationError("Malformed map", problems=problems)
    grid = GridMap(walls=tuple(walls), start=starts[0], goal=goals[0])
    grid.shortest_path_length()
    return grid


def load_map(path: Path) -> GridMap:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError("Map file not found", path=str(path))
    return parse_map(path.read_text())


class GridWorld(CompositeEnvironment):
    """Navigate from a start cell to the goal with primitive actions or options."""

    action_space_size = len(Move)

    def __init__(
        self,
        grid: GridMap,
        start_mode: str = "fixed",
        decision_cap: int = 200,
        goal_reward: float = 200.0,
        decision_penalty: float = 1.0,
    ):
        if start_mode not in ("fixed", "random"):
            raise ConfigurationError("Invalid start mode", start_mode=start_mode)
        self.grid = grid
        self.start_mode = start_mode
        self.decision_cap = decision_cap
        self.goal_reward = goal_reward
        self.decision_penalty = decision_penalty
        self._start_cells = [
            cell for cell in grid.open_cells() if cell != grid.goal and cell in grid.distances_to_goal()
        ]
        if not self._start_cells:
            raise ConfigurationError("Map has no reachable non-goal start cell")
        self.position: Cell = grid.start
        self.decisions = 0
        self.reached_goal = False
        self._done = False
        self.history: List[Cell] = [grid.start]

    @classmethod
    def from_config(cls, env_config, start_mode: Optional[str] = None) -> "GridWorld":
        return cls(
            load_map(env_config.map_path),
            start_mode=start_mode or env_config.start_mode,
            decision_cap=env_config.decision_cap,
            goal_reward=env_config.goal_reward,
            decision_penalty=env_config.decision_penalty,
        )

    @property
    def terminal(self) -> bool:
        return self._done

    def reset(self, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        if self.start_mode == "random":
            if rng is None:
                raise UsageError("Random start mode needs a generator")
            self.position = self._start_cells[int(rng.integers(len(self._start_cells)))]
        else:
            self.position = self.grid.start
        self.decisions = 0
        self.reached_goal = False
        self._done = False
        self.history = [self.position]
        return self.observation()

    def observation(self) -> np.ndarray:
        planes = np.zeros((3, self.grid.height, self.grid.width), dtype=np.float64)
        planes[0] = np.asarray(self.grid.walls, dtype=np.float64)
        planes[1][self.position] = 1.0
        planes[2][self.grid.goal] = 1.0
        return planes

    def step(self, action: CompositeAction) -> StepResult:
        if self._done:
            raise UsageError("step() called on a terminal episode", decisions=self.decisions)
        if len(action) == 0:
            raise UsageError("Empty composite action")
        rewards: List[float] = []
        executed = 0
        for primitive in action:
            if primitive not in DELTAS:
                raise UsageError("Unknown primitive action", action=primitive)
            reward = -self.decision_penalty if executed == 0 else 0.0
            self.position = self.grid.move(self.position, primitive)
            self.history.append(self.position)
            executed += 1
            if self.position == self.grid.goal:
                reward += self.goal_reward
                self.reached_goal = True
                rewards.append(reward)
                break
            rewards.append(reward)
        self.decisions += 1
        self._done = self.reached_goal or self.decisions >= self.decision_cap
        if self._done:
            logger.debug(
                "episode_end", decisions=self.decisions, solved=self.reached_goal, steps=len(self.history) - 1
            )
        return StepResult(
            observation=self.observation(),
            rewards=rewards,
            terminal=self._done,
            steps_executed=executed,
            reached_goal=self.reached_goal,
        )

    def legal_actions(self) -> FrozenSet[int]:
        return frozenset(int(m) for m in Move)

    def render_ascii(self, overlay: Optional[Mapping[Cell, str]] = None) -> str:
        """Draw the maze; `overlay` maps cells to lowercase or `*` glyphs (e.g. option order).

        Marks go on floor cells only, so S and G stay readable; the last line is a
        `;` status line with the agent's cell.
        """
        canvas = [list(line) for line in self.grid.to_text().splitlines()]
        marks = dict(overlay or {})
        marks[self.position] = AGENT
        for (r, c), glyph in marks.items():
            glyph = glyph[:1]
            if canvas[r][c] != FLOOR:
                continue
            if not is_marker(glyph):
                raise UsageError("Overlay glyph must be lowercase or '*'", glyph=glyph, cell=(r, c))
            canvas[r][c] = glyph
        r, c = self.position
        status = f"{COMMENT} agent ({r}, {c}) decisions {self.decisions}"
        return "\n".join(["".join(row) for row in canvas] + [status])
