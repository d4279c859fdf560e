# ccwb/config.py
"""
Runtime configuration read from the environment (and an optional .env file).
CLI flags override these values.
"""

import os

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


def _flag(name: str, default: str) -> bool:
    return os.getenv(name, default).strip().lower() in ("1", "true", "yes", "on")


# Worker count for the solver, expansion and certificate enumerations
THREADS = int(os.getenv("CCWB_THREADS", "1"))

# Upper bound on the solver memo, in bytes (estimated, see solver.Memo)
MEMO_CAP = int(os.getenv("CCWB_MEMO_CAP", str(512 * 1024 * 1024)))

# Run-history store
DATABASE_URL = os.getenv("CCWB_DATABASE_URL", "sqlite:///ccwb_runs.db")
RECORD_RUNS = _flag("CCWB_RECORD_RUNS", "false")

LOG_LEVEL = os.getenv("CCWB_LOG_LEVEL", "INFO").upper()

# tqdm progress bars on stderr
PROGRESS = _flag("CCWB_PROGRESS", "true")
PROGRESS_INTERVAL = 1.0


def resolve_threads(override: int | None = None) -> int:
    """Worker count: explicit flag first, then CCWB_THREADS, never below 1."""
    threads = THREADS if override is None else override
    return max(1, threads)
