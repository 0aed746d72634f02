"""
utils/errors.py

Exception hierarchy shared by every service. Each error carries a human
readable `detail` and the process exit code the CLI maps it to, the same
way an HTTP error carries its status code.
"""

from typing import Any, Dict, Optional


EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3


class FputwavesError(Exception):
    exit_code: int = 1

    def __init__(self, detail: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(detail)
        self.detail = detail
        self.diagnostics = diagnostics or {}


# ─── Validation (exit 2) ─────────────────────────────────────────────────────

class InvalidInputError(FputwavesError):
    exit_code = EXIT_VALIDATION


class DomainError(InvalidInputError):
    """Parameters outside the regime where the waves exist (sonic limit, mass ratio)."""


class GridTooCoarseError(InvalidInputError):
    pass


# ─── Solver failures (exit 3) ────────────────────────────────────────────────

class SolverError(FputwavesError):
    exit_code = EXIT_SOLVER


class ConvergenceError(SolverError):
    pass


class ResolutionError(SolverError):
    pass


class RangeError(SolverError):
    """Right-hand side not in the range of the light operator."""


class NotInMcError(SolverError):
    pass


class NonContractionError(SolverError):
    pass


class StiffnessError(SolverError):
    pass


class InstabilityError(SolverError):
    pass


class FitError(SolverError):
    pass


def require(condition: bool, detail: str, error: type = InvalidInputError) -> None:
    if not condition:
        raise error(detail)
