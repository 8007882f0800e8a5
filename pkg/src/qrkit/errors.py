"""Exception types shared across qrkit."""

from __future__ import annotations

import enum


class QrkitError(Exception):
    """Base class for all qrkit errors."""


class NonFiniteError(QrkitError, ValueError):
    """Input matrix contains NaN or Inf."""


class DimensionMismatch(QrkitError, ValueError):
    pass


class ZeroMatrix(QrkitError, ValueError):
    pass


class SingularTriangular(QrkitError, ArithmeticError):
    pass


class SingularMatrix(QrkitError, ArithmeticError):
    pass


class DomainError(QrkitError, ValueError):
    pass


class UnknownAlgorithm(QrkitError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class NonConvergence(QrkitError, ArithmeticError):
    """An iterative method ran out of iterations.

    ``estimate`` carries the best value reached so far, if any.
    """

    def __init__(self, message: str, estimate: float | None = None, iterations: int = 0):
        super().__init__(message)
        self.estimate = estimate
        self.iterations = iterations


class NonConvergenceWarning(RuntimeWarning):
    pass


class ParseError(QrkitError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class Stage(enum.IntEnum):
    """Which Cholesky factorization of a multi-pass algorithm failed."""

    FIRST_CHOLESKY = 1
    SECOND_CHOLESKY = 2
    THIRD_CHOLESKY = 3


class BreakdownError(QrkitError, ArithmeticError):
    """Cholesky met a nonpositive (or non-finite) pivot.

    The algorithms attach ``stages_completed`` and ``shift_info`` before
    re-raising so callers can record where the failure happened.
    """

    def __init__(
        self,
        pivot_index: int,
        pivot_value: float,
        stage: Stage = Stage.FIRST_CHOLESKY,
        stages_completed: int = 0,
        shift_info=None,
    ):
        self.pivot_index = int(pivot_index)
        self.pivot_value = float(pivot_value)
        self.stage = Stage(stage)
        self.stages_completed = stages_completed
        self.shift_info = shift_info
        super().__init__(
            f"Cholesky breakdown in {self.stage.name.lower()} at pivot "
            f"{self.pivot_index} (value {self.pivot_value!r})"
        )

    def at_stage(self, stage: Stage, stages_completed: int, shift_info=None) -> "BreakdownError":
        return BreakdownError(
            self.pivot_index, self.pivot_value, stage, stages_completed, shift_info
        )
