"""Deterministic chaos game for affine iterated function systems."""

from ._core import *  # noqa: F401,F403
from ._core import (
    BudgetExceeded,
    CapExceeded,
    InvariantViolation,
    ValidationError,
)

__version__ = "0.1.0"
