"""OptionZero: MuZero with an option network and option-aware MCTS, at desk scale."""

__version__ = "0.1.0"
