# ccwb/schemas/report.py
"""
Pydantic schemas for the JSON reports written by every command.
"""
import enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from ccwb import __version__

REPORT_SCHEMA_VERSION = 1


class CheckStatus(str, enum.Enum):
    """Outcome of one check"""
    passed = "pass"
    failed = "fail"
    value = "value"        # informational result, nothing to compare against
    skipped = "skipped"
    budget = "budget"      # search stopped at its budget


class Report(BaseModel):
    """Result of one task"""
    schema_version: int = Field(REPORT_SCHEMA_VERSION, description="Report schema version")
    task_id: str = Field(..., description="Stable identifier of the check")
    instance: str = Field(..., description="What was checked")
    status: CheckStatus
    value: Optional[Any] = Field(None, description="Computed value (depth, bound, count...)")
    witness: Optional[Any] = Field(None, description="Witness or counterexample, if any")
    runtime_ms: float = Field(0.0, ge=0)
    tool_version: str = Field(__version__)
    details: Dict[str, Any] = Field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status in (CheckStatus.passed, CheckStatus.value, CheckStatus.skipped)

    class Config:
        json_schema_extra = {
            "example": {
                "schema_version": 1,
                "task_id": "f4.cc",
                "instance": "classical complexity of f (5x5)",
                "status": "pass",
                "value": 4,
                "witness": None,
                "runtime_ms": 812.4,
                "tool_version": "1.0.0",
                "details": {"expected": 4, "nodes": 1532}
            }
        }


class ReportBundle(BaseModel):
    """All reports of one command run"""
    schema_version: int = Field(REPORT_SCHEMA_VERSION)
    command: str
    scope: Optional[str] = None
    reports: List[Report] = Field(default_factory=list)
    summary: Dict[str, int] = Field(default_factory=dict)
    separation: Optional[str] = Field(None, description="Separation statement when both bounds hold")
    exit_code: int = 0
    tool_version: str = Field(__version__)
