# scripts/init_db.py
"""
Script to initialize the run-history database.
Run this once; `ccwb reproduce --record` also creates missing tables itself.
"""
import sys
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from ccwb.config import DATABASE_URL  # noqa: E402
from ccwb.database import init_db  # noqa: E402
from ccwb.logger import logger  # noqa: E402


if __name__ == "__main__":
    logger.info(f"Initializing run history at {DATABASE_URL}")
    for table in init_db():
        logger.info(f"  - {table}")
    logger.info("Database initialization complete")
