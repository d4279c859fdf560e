# tests/test_database.py
from datetime import datetime

from ccwb.database import init_db
from ccwb.history import load_bundle, recent_runs, record_run, run_summary
from ccwb.models.db_schema import CheckRecord, RunRecord, RunStatus
from ccwb.schemas.report import CheckStatus, Report, ReportBundle


def make_bundle(exit_code=0, scope="honest"):
    reports = [
        Report(task_id="f4.cc", instance="classical complexity of f = 4", status=CheckStatus.passed, value=4,
               runtime_ms=12.5),
        Report(task_id="s.cc", instance="classical complexity of S = 6", status=CheckStatus.skipped),
    ]
    return ReportBundle(command="reproduce", scope=scope, reports=reports,
                        summary={"pass": 1, "skipped": 1}, exit_code=exit_code)


def test_init_db_creates_tables(session_factory):
    assert init_db(session_factory.kw["bind"]) == ["checks", "runs"]


def test_record_run(db):
    started = datetime(2026, 1, 2, 3, 4, 5)
    run = record_run(db, make_bundle(), started, threads=4)
    assert run.id is not None
    assert run.status is RunStatus.passed
    assert run.threads == 4
    assert [c.task_id for c in run.checks] == ["f4.cc", "s.cc"]
    assert run.checks[0].value == "4"
    assert run.checks[1].value is None
    assert db.query(CheckRecord).count() == 2
    assert "RunRecord" in repr(run)


def test_run_status_from_exit_code(db):
    assert record_run(db, make_bundle(exit_code=2), datetime.utcnow()).status is RunStatus.budget
    assert record_run(db, make_bundle(exit_code=1), datetime.utcnow()).status is RunStatus.failed


def test_recent_runs_newest_first(db):
    for scope in ("partial", "honest", "separation"):
        record_run(db, make_bundle(scope=scope), datetime.utcnow())
    runs = recent_runs(db, limit=2)
    assert [r.scope for r in runs] == ["separation", "honest"]
    assert db.query(RunRecord).count() == 3


def test_load_bundle_round_trip(db):
    bundle = make_bundle()
    run = record_run(db, bundle, datetime.utcnow())
    assert load_bundle(run) == bundle


def test_run_summary(db):
    started = datetime(2026, 1, 2, 3, 4, 5)
    summary = run_summary(record_run(db, make_bundle(), started))
    assert summary["command"] == "reproduce"
    assert summary["status"] == "pass"
    assert summary["started_at"] == "2026-01-02T03:04:05"
    assert summary["checks"] == 2
    assert summary["finished_at"] is not None
