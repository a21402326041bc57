"""Logging for OptionZero runs: rich console on stderr, optional JSON lines in the run directory."""

import logging
from pathlib import Path
from typing import Any, Optional

import structlog
from rich.console import Console
from rich.logging import RichHandler

RUN_LOG_NAME = "run.log"


def setup_logging(log_level: Optional[str] = None, debug: bool = False, run_dir: Optional[Path] = None) -> None:
    """Configure structlog over stdlib logging.

    Events go to stderr through rich. With ``run_dir`` they are also appended,
    one JSON object per line, to ``run_dir/run.log`` so a run's history sits
    next to its checkpoints. Calling this again replaces the handlers.
    """
    level = (log_level or "INFO").upper()

    handlers: list = [
        RichHandler(
            console=Console(stderr=True),
            rich_tracebacks=True,
            tracebacks_show_locals=debug,
            show_path=debug,
        )
    ]
    if run_dir is not None:
        Path(run_dir).mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(Path(run_dir) / RUN_LOG_NAME, encoding="utf-8"))

    logging.basicConfig(level=level, format="%(message)s", datefmt="[%X]", handlers=handlers, force=True)

    renderer = structlog.dev.ConsoleRenderer() if debug else structlog.processors.JSONRenderer()
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            renderer,
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )


def bind_run_context(**fields: Any) -> None:
    """Attach fields (run name, iteration) to every later event from this thread."""
    structlog.contextvars.bind_contextvars(**fields)


def clear_run_context() -> None:
    structlog.contextvars.clear_contextvars()


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    return structlog.get_logger(name)
