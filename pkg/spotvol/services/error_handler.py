from __future__ import annotations

import asyncio
import sys
import traceback

from typing import TYPE_CHECKING

from spotvol.models import exceptions
from spotvol.utils import truncate_string

if TYPE_CHECKING:
    from spotvol.harness import Harness

# Errors reported with their own message and exit code, without a traceback
use_default = (
    exceptions.ValidationError,
    exceptions.NumericalFailure,
)

# Errors raised by numpy or the standard library that still mean a numerical failure
numerical = (
    FloatingPointError,
    OverflowError,
    ZeroDivisionError,
)

# Errors which end a run without being a failure of the run itself
interrupted = (
    KeyboardInterrupt,
    asyncio.CancelledError,
)

MAX_REASON_LENGTH = 500

def error_line(kind: str, code: int, reason: str) -> str:
    """Returns the one-line machine-parseable error report."""
    reason = truncate_string(" ".join(reason.split()), MAX_REASON_LENGTH)
    return f"spotvol: error={kind} code={code} reason={reason}"

class ErrorHandlingService:
    """This class turns exceptions that escape a command into exit codes."""

    def __init__(self, harness: Harness):
        super().__init__()
        self.harness = harness

    def notify(self, kind: str, code: int, reason: str) -> int:
        print(error_line(kind, code, reason), file=sys.stderr)
        return code

    def handle(self, error: BaseException) -> int:
        """Writes one error line to standard error and returns the exit code."""
        if self.harness.debugging:
            traceback.print_exception(type(error), error, error.__traceback__, file=sys.stderr)

        # Do not modify specified errors
        if isinstance(error, use_default):
            return self.notify(error.kind, error.exit_code, str(error))

        if isinstance(error, numerical):
            failure = exceptions.NumericalFailure
            return self.notify(failure.kind, failure.exit_code, f"{type(error).__name__}: {error}")

        if isinstance(error, interrupted):
            return self.notify("interrupted", 1, "run was cancelled before it finished")

        # All other errors are unexpected
        reason = str(error) or type(error).__name__
        if not self.harness.debugging:
            reason = f"{type(error).__name__}: {reason}, rerun with --debug for a traceback"
        return self.notify("internal", 1, reason)


async def setup(harness: Harness):
    harness.error_handler = ErrorHandlingService(harness)
