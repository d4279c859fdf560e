# ccwb/models/db_schema.py
"""
SQLAlchemy models for the run history: one RunRecord per recorded command,
one CheckRecord per report inside it.
"""

import enum
from datetime import datetime

from sqlalchemy import Column, DateTime, Enum, Float, ForeignKey, Index, Integer, String, Text
from sqlalchemy.orm import relationship

from ccwb.database import Base


# ============== STATUS ENUMS ==============

class RunStatus(str, enum.Enum):
    """Overall result of a run"""
    passed = "pass"
    failed = "fail"
    budget = "budget"      # some search stopped at its budget


class CheckStatus(str, enum.Enum):
    """Stored outcome of one check (mirrors the report status)"""
    passed = "pass"
    failed = "fail"
    value = "value"
    skipped = "skipped"
    budget = "budget"


# ============== RUN MODEL ==============

class RunRecord(Base):
    """
    One recorded command run.
    report_json keeps the full ReportBundle so a run can be re-read exactly.
    """
    __tablename__ = "runs"

    id = Column(Integer, primary_key=True, index=True, autoincrement=True)

    command = Column(String(50), nullable=False)
    scope = Column(String(50), nullable=True)
    status = Column(Enum(RunStatus), nullable=False)
    exit_code = Column(Integer, nullable=False)
    tool_version = Column(String(20), nullable=False)
    threads = Column(Integer, nullable=False, default=1)

    started_at = Column(DateTime, default=datetime.utcnow, nullable=False)
    finished_at = Column(DateTime, nullable=True)

    report_json = Column(Text, nullable=False)

    checks = relationship("CheckRecord", back_populates="run", cascade="all, delete-orphan")

    def __repr__(self):
        return f"<RunRecord(id={self.id}, command='{self.command}', scope='{self.scope}', status={self.status.value})>"


# ============== CHECK MODEL ==============

class CheckRecord(Base):
    """One check of a run"""
    __tablename__ = "checks"

    id = Column(Integer, primary_key=True, index=True, autoincrement=True)

    run_id = Column(Integer, ForeignKey("runs.id"), nullable=False, index=True)

    task_id = Column(String(100), nullable=False)
    status = Column(Enum(CheckStatus), nullable=False)
    value = Column(String(255), nullable=True)   # rendered as text, values are heterogeneous
    runtime_ms = Column(Float, nullable=False, default=0.0)

    run = relationship("RunRecord", back_populates="checks")

    __table_args__ = (
        Index("ix_checks_run_id_task_id", "run_id", "task_id"),
    )

    def __repr__(self):
        return f"<CheckRecord(id={self.id}, task_id='{self.task_id}', status={self.status.value})>"
