"""Exception hierarchy for the OptionZero package."""

from typing import Any, Dict, Optional


class OptionZeroError(Exception):
    """Base class for every error raised by this package."""

    exit_code: int = 3

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.context: Dict[str, Any] = context

    def __str__(self) -> str:
        base = super().__str__()
        if not self.context:
            return base
        details = ", ".join(f"{k}={v}" for k, v in self.context.items())
        return f"{base} ({details})"


class ConfigurationError(OptionZeroError):
    """Invalid run configuration or map file."""

    exit_code = 2

    def __init__(self, message: str, problems: Optional[list] = None, **context: Any):
        super().__init__(message, **context)
        self.problems = list(problems or [])

    def __str__(self) -> str:
        base = super().__str__()
        if not self.problems:
            return base
        return base + "\n" + "\n".join(f"  - {p}" for p in self.problems)


class UsageError(OptionZeroError):
    """An API was called in a state that does not allow it."""


class ModelShapeError(OptionZeroError):
    """Input or gradient shape does not match the model configuration."""


class CheckpointError(OptionZeroError):
    """Checkpoint cannot be read or belongs to a different model config."""


class SearchFault(OptionZeroError):
    """Internal inconsistency or non-finite network output during search."""


class TrainingFault(OptionZeroError):
    """Non-finite loss or another unrecoverable optimizer condition."""

    def __init__(self, message: str, dump_path: Optional[str] = None, **context: Any):
        super().__init__(message, dump_path=dump_path, **context)
        self.dump_path = dump_path


class OracleError(OptionZeroError):
    """A policy tree handed to the brute-force oracle is missing a path."""
