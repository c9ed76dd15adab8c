"""Exception hierarchy shared by every fracap module."""

from __future__ import annotations


class FracapError(Exception):
    """Base class for all library errors."""


class InvalidArgument(FracapError, ValueError):
    pass


class UnsupportedOperation(FracapError, NotImplementedError):
    pass


class ConvergenceFailure(FracapError, RuntimeError):
    """Raised when an integrator cannot reach its tolerance.

    The best estimate obtained so far is attached as ``estimate`` so callers
    can still report it.
    """

    def __init__(self, message: str, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class DslParseError(FracapError, ValueError):
    """Shape/function DSL syntax error with the offending column."""

    def __init__(self, message: str, text: str, position: int):
        self.text = text
        self.position = position
        pointer = " " * position + "^"
        super().__init__(f"{message} at column {position}\n  {text}\n  {pointer}")
