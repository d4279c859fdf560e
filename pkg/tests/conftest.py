# tests/conftest.py
import os

# Before any ccwb import: no progress bars, no run-history file in the working tree
os.environ.setdefault("CCWB_PROGRESS", "0")
os.environ.setdefault("CCWB_DATABASE_URL", "sqlite://")

import pytest  # noqa: E402
from sqlalchemy import create_engine  # noqa: E402
from sqlalchemy.orm import sessionmaker  # noqa: E402

from ccwb.constructions import separation  # noqa: E402
from ccwb.database import init_db  # noqa: E402
from ccwb.tables import gen_named, make_table  # noqa: E402


@pytest.fixture(scope="session")
def u_table():
    return separation.build_U()


@pytest.fixture(scope="session")
def m_table():
    return separation.build_M()


@pytest.fixture(scope="session")
def s_table():
    return separation.figure_S()


@pytest.fixture
def eq2():
    return gen_named("eq", 2)


@pytest.fixture
def small_partial():
    """2x3 partial table with two undefined cells."""
    return make_table([[0, None, 1], [2, 2, None]], ["a", "b"], ["x", "y", "z"])


@pytest.fixture
def session_factory(tmp_path):
    engine = create_engine(f"sqlite:///{tmp_path / 'runs.db'}", connect_args={"check_same_thread": False})
    init_db(engine)
    yield sessionmaker(autocommit=False, autoflush=False, bind=engine)
    engine.dispose()


@pytest.fixture
def db(session_factory):
    session = session_factory()
    try:
        yield session
    finally:
        session.close()
