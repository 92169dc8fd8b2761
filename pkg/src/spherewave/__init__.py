"""spherewave: symbolic + numerical verification for the semilinear wave
equation on the two-sphere cross a time line."""

from .expr import (
    Expr,
    ZeroStatus,
    ZeroResult,
    diff,
    eval_numeric,
    is_zero,
    partial_diff,
    simplify,
    substitute,
    to_infix,
    to_latex,
)
from .parser import parse, ParseError

__version__ = "0.1.0"

__all__ = [
    "Expr",
    "ZeroStatus",
    "ZeroResult",
    "diff",
    "eval_numeric",
    "is_zero",
    "partial_diff",
    "simplify",
    "substitute",
    "to_infix",
    "to_latex",
    "parse",
    "ParseError",
    "__version__",
]
