# ccwb/errors.py
"""
Domain errors. Each one carries the process exit code the CLI reports for it.

Verification answers (counterexamples, violations, witness subsets) are
returned as values; these exceptions are for calls that cannot produce an answer.
"""

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_BUDGET = 2
EXIT_USAGE = 64


class WorkbenchError(Exception):
    """Base class for every error raised by the workbench."""
    exit_code = EXIT_FAILURE


class UsageError(WorkbenchError):
    """Bad combination of arguments (mode vs table kind, leaf kind, unknown builtin)."""
    exit_code = EXIT_USAGE


class SizeLimitError(UsageError):
    """A generator or exact search was asked for an instance above its cap."""


class InvalidRectError(UsageError):
    """Empty or out-of-bounds row/column selection."""


class TableFormatError(UsageError):
    """Malformed ccmat input."""


class StrategyIncompleteError(WorkbenchError):
    """A half-duplex strategy has no action or output for a reached history."""


class ConstructionError(WorkbenchError):
    """A builder produced an inconsistent object (e.g. adversary branches disagree)."""


class BudgetExceededError(WorkbenchError):
    """An exact search ran out of its depth or size budget."""
    exit_code = EXIT_BUDGET
