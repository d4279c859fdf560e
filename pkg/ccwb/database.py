# ccwb/database.py
"""
Run-history store.
This file creates the engine and SessionLocal (factory for database sessions)
for the database named by CCWB_DATABASE_URL (a local sqlite file by default).
"""

from sqlalchemy import create_engine
from sqlalchemy.orm import declarative_base, sessionmaker

from ccwb import config

SQLALCHEMY_DATABASE_URL = config.DATABASE_URL

# sqlite only: allow the connection to be used outside the creating thread
connect_args = {"check_same_thread": False} if SQLALCHEMY_DATABASE_URL.startswith("sqlite") else {}

engine = create_engine(SQLALCHEMY_DATABASE_URL, connect_args=connect_args)

# Each call gives a new session
SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

# Base class for the ORM models
Base = declarative_base()


def init_db(bind=None) -> list[str]:
    """Create every table that does not exist yet; returns the table names."""
    from ccwb.models import db_schema  # noqa: F401  (registers the models on Base)

    Base.metadata.create_all(bind=bind or engine)
    return sorted(Base.metadata.tables)
