"""Exception hierarchy shared by every stage of the toolkit."""

from __future__ import annotations


class FodError(Exception):
    """Base class for all toolkit errors."""


class InvalidOrderError(FodError, ValueError):
    pass


class InvalidPlanError(FodError, ValueError):
    pass


class EmptyInputError(FodError, ValueError):
    pass


class InsufficientDataError(FodError, ValueError):
    pass


class UnderdeterminedFitError(FodError, ValueError):
    pass


class SingularFitError(FodError, ValueError):
    pass


class DegenerateWindowError(FodError, ValueError):
    pass


class WindowTooCoarseError(FodError, ValueError):
    pass


class FusionError(FodError, ArithmeticError):
    """Fused values average to zero or a non-finite number."""


class StepUnderflowError(FodError, ArithmeticError):
    pass


class InvalidAttenuationError(FodError, ValueError):
    pass


class GainUnreachableError(FodError, ValueError):
    pass


class IterationRefitError(FodError):
    def __init__(self, pass_index: int, cause: Exception):
        super().__init__(f"refit failed at pass {pass_index}: {cause}")
        self.pass_index = pass_index
        self.cause = cause


class ParseError(FodError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line


class ConfigError(FodError, ValueError):
    pass
