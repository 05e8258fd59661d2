"""Numeric contract shared by the series evaluators and the Newton solvers."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import mpmath

__all__ = [
    "PrecisionContext",
    "InsufficientOrderError",
    "ConvergenceError",
    "DegeneratePointError",
    "auto_order",
    "TAIL_RATIO",
]

# worst geometric ratio of the k >= 2 series terms near the boundary curve
TAIL_RATIO = 0.55
ORDER_MARGIN = 32
ORDER_CAP = 600


class InsufficientOrderError(ArithmeticError):
    """The coefficient table is too short for the requested tail bound."""

    def __init__(self, required: int, available: int, where: str = ""):
        self.required = required
        self.available = available
        msg = f"truncation order {required} required, table has {available}"
        if where:
            msg += f" ({where})"
        super().__init__(msg)


class ConvergenceError(ArithmeticError):
    """Newton iteration did not converge within the iteration budget."""

    def __init__(self, what: str, residual, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"{what}: no convergence after {iterations} iterations, "
            f"residual {mpmath.nstr(residual, 5)}"
        )


class DegeneratePointError(ArithmeticError):
    """A derivative needed for the implicit-function step vanishes."""


def auto_order(digits: int) -> int:
    """Series truncation order for ``digits`` correct digits, capped."""
    need = math.ceil(digits * math.log(10) / abs(math.log(TAIL_RATIO))) + ORDER_MARGIN
    return min(need, ORDER_CAP)


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision and truncation order for one computation.

    ``digits`` is what callers want reported.  Arithmetic runs with
    ``work_dps`` decimal digits (twice ``digits`` by default) and every
    series tail and Newton step is pushed below ``tol``.
    """

    digits: int = 30
    order: int | None = None
    work_dps: int | None = None
    tol: mpmath.mpf | None = None
    max_iter: int = 60

    def __post_init__(self):
        if self.digits < 1:
            raise ValueError("digits must be >= 1")
        if self.work_dps is None:
            object.__setattr__(self, "work_dps", 2 * self.digits + 10)
        if self.order is None:
            object.__setattr__(self, "order", auto_order(self.digits + self.guard_digits))
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if self.tol is None:
            with mpmath.workdps(self.work_dps):
                object.__setattr__(self, "tol", mpmath.mpf(10) ** -(self.digits + self.guard_digits))
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")

    @property
    def guard_digits(self) -> int:
        return 8

    def workdps(self):
        return mpmath.workdps(self.work_dps)

    def doubled(self) -> PrecisionContext:
        """Twice the digits and twice the truncation order."""
        return replace(self, digits=2 * self.digits, order=2 * self.order, work_dps=None, tol=None)
