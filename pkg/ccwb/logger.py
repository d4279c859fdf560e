# ccwb/logger.py
"""
Centralized logging configuration for the communication complexity workbench.
Everything goes to stderr so stdout only ever carries results.
"""

import logging
import sys

from ccwb.config import LOG_LEVEL


def setup_logger(name: str = "ccwb", level: str = LOG_LEVEL) -> logging.Logger:
    """
    Configure and return a logger instance.
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)

    if logger.handlers:
        return logger

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.DEBUG)

    formatter = logging.Formatter(
        fmt='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    console_handler.setFormatter(formatter)

    logger.addHandler(console_handler)

    return logger


def set_level(level: str) -> None:
    """Change the level of the shared workbench logger (used by --verbose)."""
    logger.setLevel(level)


logger = setup_logger()
