"""Error types shared across the package.

Two failure families matter downstream: input/contract problems (rejected
before any numerics run) and numeric breakdowns discovered mid-computation.
The CLI maps them to distinct exit codes, so they stay distinct types here.
"""


class ValidationError(ValueError):
    """Raised when inputs violate a documented precondition."""


class NumericFailure(ArithmeticError):
    """Raised when a computation produces non-finite or degenerate numbers."""
