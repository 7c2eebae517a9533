"""
Exception hierarchy shared by the graph layer, the solvers and the front-ends.
"""

from typing import Optional


class DmdpError(Exception):
    """Base class for every error raised by the solver suite."""


class GraphFormatError(DmdpError):
    """Malformed edge-list text."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class GraphStructureError(DmdpError):
    """A graph violates a structural invariant (out-degree, target range, sizes)."""


class InsufficientHistoryError(DmdpError):
    """Not enough past value vectors are retained to evaluate a walk."""


class UnreachableCycleError(DmdpError):
    """Some vertex has no path to the cycle a policy must be redirected to."""


class OracleLimitError(DmdpError):
    """The exhaustive enumeration guard was exceeded."""


class ConvergenceError(DmdpError):
    """An iterative detector exceeded its iteration cap."""


class SolverDisagreementError(DmdpError):
    """Two solvers returned different optimal means for the same instance."""
