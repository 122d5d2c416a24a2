import logging
import os
import sys
from typing import Optional, TextIO, Union


def resolve_level(level: Optional[Union[int, str]] = None) -> int:
    if level is None:
        level = os.getenv("LOG_LEVEL", "INFO")
    if isinstance(level, int):
        return level
    resolved = logging.getLevelName(level.upper())
    if not isinstance(resolved, int):
        raise ValueError(f"unknown log level {level!r}")
    return resolved


def setup_logging(level: Optional[Union[int, str]] = None, stream: Optional[TextIO] = None):
    """
    Configure root logging with one handler and a standardized format.
    Services log to stdout for log streaming; the CLI passes stderr so CSV
    written to stdout stays clean.
    """
    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    root_logger = logging.getLogger()
    root_logger.setLevel(resolve_level(level))

    # Remove any existing handlers
    while root_logger.handlers:
        root_logger.removeHandler(root_logger.handlers[0])

    handler = logging.StreamHandler(stream or sys.stdout)
    handler.setFormatter(formatter)
    root_logger.addHandler(handler)

    logging.debug("Logging initialized.")
