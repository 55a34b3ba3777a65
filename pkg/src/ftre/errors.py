"""Exception hierarchy shared by every pipeline stage.

Each class carries the process exit code the CLI maps it to.
"""

from __future__ import annotations


class FtreError(Exception):
    exit_code = 1


class ConfigurationError(FtreError):
    exit_code = 3


class CircuitParseError(FtreError):
    """Raised when a circuit document cannot be parsed.

    ``diagnostics`` holds every :class:`~ftre.ingest.ParseDiagnostic` collected
    before giving up; at least one has severity ``"error"``.
    """

    exit_code = 4

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        first = next((d for d in self.diagnostics if d.severity == "error"), None)
        msg = str(first) if first is not None else "parse failed"
        super().__init__(msg)


class ValidationError(FtreError):
    exit_code = 5


class UnsupportedGateError(FtreError):
    exit_code = 5


class DomainError(FtreError, ValueError):
    exit_code = 6


class InfeasibleBudgetError(FtreError):
    """No parameter choice meets the requested circuit error.

    ``best`` is the closest infeasible point found, when one exists.
    """

    exit_code = 2

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class UnattainableFidelityError(DomainError):
    pass


class LayoutError(FtreError):
    exit_code = 7


class RoutingError(FtreError):
    exit_code = 8


class CompilationError(FtreError):
    exit_code = 9
