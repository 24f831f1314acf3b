"""Exception hierarchy shared by all solvbie modules.

The CLI maps these onto stable exit codes: parse errors -> 3,
domain/precondition errors -> 4, numerical failures -> 5.
"""


class SolvbieError(Exception):
    """Base class for all solvbie errors."""


class ParseError(SolvbieError):
    """Malformed input file (PQR, mesh, config)."""


class EmptyInputError(ParseError):
    """Input file parsed but contained no usable records."""


class DomainError(SolvbieError):
    """A precondition on physical or mathematical domain was violated."""


class TopologyError(SolvbieError):
    """Surface mesh is open, non-manifold, or inconsistently oriented."""


class GeometryError(SolvbieError):
    """Degenerate mesh geometry (zero-area triangle, etc.)."""


class ConsistencyError(SolvbieError):
    """Internal numerical consistency check failed (signals a bug upstream)."""


class ConvergenceError(SolvbieError):
    """Iterative solve exceeded its iteration cap."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
