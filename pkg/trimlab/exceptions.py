"""App exceptions."""

from typing import Dict, Optional, Type, Union

from pydantic import ValidationError


class TrimlabError(Exception):
    """Base class for all errors raised by trimlab."""


class DomainError(TrimlabError, ValueError):
    """Argument outside the domain of a function."""


class ConfigError(TrimlabError, ValueError):
    """Invalid or inconsistent configuration."""


class ConvergenceError(TrimlabError, ArithmeticError):
    """Iterative solver did not converge.

    Args:
        message: Error message.
        last_iterate: Last iterate of the solver.
        residual: Residual at the last iterate.

    Attributes:
        last_iterate: Last iterate of the solver.
        residual: Residual at the last iterate.
    """

    def __init__(
        self,
        message: str,
        last_iterate: float = float("nan"),
        residual: float = float("nan"),
    ) -> None:
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


class NumericFailure(TrimlabError, ArithmeticError):
    """A numerical evaluation produced a non-finite or unusable value."""


class PrecisionOverflowError(TrimlabError, ArithmeticError):
    """Symbolic window ran out of bits before a 1-bit was found.

    Args:
        message: Error message.
        index: Position in the path at which the overflow occurred.
        replica: Replica index, if known.
        checkpoint: Checkpoint being computed when the error surfaced, if any.
    """

    def __init__(
        self,
        message: str,
        index: Optional[int] = None,
        replica: Optional[int] = None,
        checkpoint: Optional[int] = None,
    ) -> None:
        super().__init__(message)
        self.index = index
        self.replica = replica
        self.checkpoint = checkpoint

    def __str__(self) -> str:
        context = [
            f"{name}={value}"
            for name, value in (
                ("replica", self.replica),
                ("index", self.index),
                ("checkpoint", self.checkpoint),
            )
            if value is not None
        ]
        base = super().__str__()
        return f"{base} ({', '.join(context)})" if context else base


class PlanViolation(TrimlabError, ValueError):
    """A checkpoint plan or trimming request breaks its contract."""


class ScheduleError(TrimlabError, ValueError):
    """A trimming schedule is unusable at some `n`.

    Args:
        message: Error message.
        n: Offending checkpoint.
    """

    def __init__(self, message: str, n: Optional[int] = None) -> None:
        super().__init__(message)
        self.n = n


class InsufficientDataError(TrimlabError, ValueError):
    """Not enough observations to produce an estimate."""


class UndefinedEventError(TrimlabError, ValueError):
    """Dependence measure requested for an event of empirical probability 0."""


class DegenerateSampleError(TrimlabError, ValueError):
    """Sample is degenerate for the requested estimator."""


class ExperimentInterrupted(TrimlabError):
    """A Monte Carlo run was interrupted; carries the partial report.

    Args:
        message: Error message.
        report: Report aggregated from the replicas completed so far.
    """

    def __init__(self, message: str, report: object = None) -> None:
        super().__init__(message)
        self.report = report


ExceptionEntry = Dict[str, Union[str, int]]

exceptions: Dict[Type[BaseException], ExceptionEntry] = {
    Exception: {
        "message": "An unexpected error occurred.",
        "code": 1,
    },
    TrimlabError: {
        "message": "The run failed.",
        "code": 1,
    },
    ValidationError: {
        "message": "The configuration is malformed.",
        "code": 2,
    },
    ConfigError: {
        "message": "The configuration is invalid.",
        "code": 2,
    },
    DomainError: {
        "message": "An argument is outside its admissible range.",
        "code": 2,
    },
    ScheduleError: {
        "message": "The trimming schedule is not admissible.",
        "code": 2,
    },
    PlanViolation: {
        "message": "The checkpoint plan is not admissible.",
        "code": 2,
    },
    ConvergenceError: {
        "message": "A numerical solver did not converge.",
        "code": 1,
    },
    NumericFailure: {
        "message": "A numerical evaluation failed.",
        "code": 1,
    },
    PrecisionOverflowError: {
        "message": "The symbolic window ran out of precision.",
        "code": 1,
    },
    InsufficientDataError: {
        "message": "Not enough data for the requested estimate.",
        "code": 1,
    },
    UndefinedEventError: {
        "message": "The dependence measure is undefined for a null event.",
        "code": 1,
    },
    DegenerateSampleError: {
        "message": "The sample is degenerate for this estimator.",
        "code": 1,
    },
    ExperimentInterrupted: {
        "message": "The run was interrupted; partial results were written.",
        "code": 1,
    },
}


def resolve_exception(exc: BaseException) -> ExceptionEntry:
    """Look up the user-facing entry for an exception.

    The most specific registered class in the exception's MRO wins.

    Args:
        exc: Raised exception.

    Returns:
        Dictionary with keys `message` and `code`.
    """
    for cls in type(exc).__mro__:
        if cls in exceptions:
            return exceptions[cls]
    return exceptions[Exception]
