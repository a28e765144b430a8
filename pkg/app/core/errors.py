# app/core/errors.py
"""
Error types shared by the services and the command line.

Every error carries an `exit_code` and a human readable `detail`, in the same
spirit as an HTTP status code + detail. `app.main` turns them into process
exit codes:

- 0  success
- 1  assertion / audit failure
- 2  usage, configuration or rejected input
"""

from __future__ import annotations

from typing import Any, Optional

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class PopperSlitError(Exception):
    """Base class for all errors raised on purpose by this package."""

    exit_code: int = EXIT_FAILURE

    def __init__(self, detail: str, *, exit_code: Optional[int] = None) -> None:
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class InvalidInputError(PopperSlitError, ValueError):
    """Input rejected by validation (dimensions, tolerances, signs...)."""

    exit_code = EXIT_USAGE


class ConfigError(PopperSlitError):
    """
    Problem in a run-config file or on the command line.

    `problems` is a list of (line, message) pairs; line is None when the
    problem is not tied to a specific line (e.g. a command-line flag).
    """

    exit_code = EXIT_USAGE

    def __init__(
        self,
        detail: str,
        problems: Optional[list[tuple[Optional[int], str]]] = None,
    ) -> None:
        self.problems = problems or []
        if self.problems:
            lines = [
                f"line {line}: {msg}" if line is not None else msg
                for line, msg in self.problems
            ]
            detail = detail + "\n  " + "\n  ".join(lines)
        super().__init__(detail)


class GridTooSmallError(PopperSlitError):
    """Support does not fit the grid, or propagated mass reached the edges."""

    exit_code = EXIT_USAGE

    def __init__(self, detail: str, *, edge_mass: Optional[float] = None) -> None:
        super().__init__(detail)
        self.edge_mass = edge_mass


class EmptyPostSelectionError(PopperSlitError):
    """Coincidence post-selection left (numerically) nothing to renormalise."""

    exit_code = EXIT_USAGE


class UndefinedConditionalError(PopperSlitError):
    """Conditioning event has probability below the floor."""

    exit_code = EXIT_USAGE


class OutputError(PopperSlitError):
    """Output file could not be written."""

    exit_code = EXIT_USAGE


class AuditFailure(PopperSlitError):
    """A numerical audit exceeded its tolerance; `report` holds the details."""

    exit_code = EXIT_FAILURE

    def __init__(self, detail: str, report: Any = None) -> None:
        super().__init__(detail)
        self.report = report
