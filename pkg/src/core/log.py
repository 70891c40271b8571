"""
Structured logging setup.

Every module takes a named logger from get_logger(); configure_logging() is
called once by the command line entry point. Output goes to stderr so it never
interleaves with dumps on stdout.
"""

from __future__ import annotations

import logging
import sys

import structlog
from structlog.typing import FilteringBoundLogger, Processor

_configured = False


def configure_logging(level: str = "WARNING", json: bool = False) -> None:
    """Configure structlog with a console (default) or JSON renderer."""
    global _configured
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        numeric = logging.WARNING

    renderer: Processor
    if json:
        renderer = structlog.processors.JSONRenderer(sort_keys=True)
    else:
        renderer = structlog.dev.ConsoleRenderer(colors=False)

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )
    _configured = True


def get_logger(name: str) -> FilteringBoundLogger:
    """Return a logger bound to the given component name."""
    if not _configured:
        configure_logging()
    return structlog.get_logger(name).bind(component=name)
