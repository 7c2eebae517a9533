import logging
import sys
from typing import Optional, Union

from app.core.settings import settings

def setup_logging(
    name: Optional[str] = None,
    level: Optional[Union[int, str]] = None
) -> logging.Logger:
    """
    Set up logging configuration.

    Args:
        name: Logger name. If None, returns the root logger.
        level: Logging level (default: settings.LOG_LEVEL)

    Returns:
        Configured logger
    """
    if level is None:
        level = settings.LOG_LEVEL
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.INFO

    # Get logger
    logger = logging.getLogger(name)

    # Configure if not already configured
    if not logger.handlers:
        logger.setLevel(level)

        # stdout carries CLI output (generated instances, CSV), so log to stderr
        handler = logging.StreamHandler(sys.stderr)
        handler.setLevel(level)

        formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
        )
        handler.setFormatter(formatter)
        logger.addHandler(handler)

        # Prevent propagation to root logger
        logger.propagate = False

    return logger
