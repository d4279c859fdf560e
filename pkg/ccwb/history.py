# ccwb/history.py
"""
Storing report bundles in the run-history database and reading them back.
"""

from datetime import datetime

from sqlalchemy.orm import Session

from ccwb.database import init_db
from ccwb.errors import EXIT_BUDGET, EXIT_OK
from ccwb.logger import logger
from ccwb.models.db_schema import CheckRecord, CheckStatus, RunRecord, RunStatus
from ccwb.schemas.report import ReportBundle


def _run_status(exit_code: int) -> RunStatus:
    if exit_code == EXIT_OK:
        return RunStatus.passed
    if exit_code == EXIT_BUDGET:
        return RunStatus.budget
    return RunStatus.failed


def record_run(db: Session, bundle: ReportBundle, started_at: datetime, threads: int = 1) -> RunRecord:
    """Insert one run with a check row per report and commit."""
    init_db(db.get_bind())
    run = RunRecord(
        command=bundle.command,
        scope=bundle.scope,
        status=_run_status(bundle.exit_code),
        exit_code=bundle.exit_code,
        tool_version=bundle.tool_version,
        threads=threads,
        started_at=started_at,
        finished_at=datetime.utcnow(),
        report_json=bundle.model_dump_json(),
    )
    for report in bundle.reports:
        run.checks.append(CheckRecord(
            task_id=report.task_id,
            status=CheckStatus(report.status.value),
            value=None if report.value is None else str(report.value)[:255],
            runtime_ms=report.runtime_ms,
        ))
    try:
        db.add(run)
        db.commit()
        db.refresh(run)
    except Exception as e:
        db.rollback()
        logger.error(f"Could not record run: {str(e)}")
        raise
    logger.info(f"Recorded run {run.id} ({len(bundle.reports)} checks, status {run.status.value})")
    return run


def recent_runs(db: Session, limit: int = 10) -> list[RunRecord]:
    init_db(db.get_bind())
    return db.query(RunRecord).order_by(RunRecord.id.desc()).limit(limit).all()


def load_bundle(run: RunRecord) -> ReportBundle:
    return ReportBundle.model_validate_json(run.report_json)


def run_summary(run: RunRecord) -> dict:
    """Flat JSON-ready view of a stored run, without the full report."""
    return {
        "id": run.id,
        "command": run.command,
        "scope": run.scope,
        "status": run.status.value,
        "exit_code": run.exit_code,
        "tool_version": run.tool_version,
        "threads": run.threads,
        "started_at": run.started_at.isoformat(),
        "finished_at": None if run.finished_at is None else run.finished_at.isoformat(),
        "checks": len(run.checks),
    }
