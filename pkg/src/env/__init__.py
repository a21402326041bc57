"""Environments executing composite actions."""

from .base import CompositeAction, CompositeEnvironment, StepResult, make_composite
from .gridworld import GridMap, GridWorld, Move, MOVE_GLYPHS, load_map, parse_map

__all__ = [
    "CompositeAction",
    "CompositeEnvironment",
    "StepResult",
    "make_composite",
    "GridMap",
    "GridWorld",
    "Move",
    "MOVE_GLYPHS",
    "load_map",
    "parse_map",
]
