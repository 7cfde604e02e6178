"""Values paired with certified absolute error bounds.

Every series/quadrature evaluator in this package returns an
:class:`Enclosure` so that downstream positivity and comparison logic can
be carried out with explicit error budgets instead of bare floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Enclosure:
    """A numeric value with a certified absolute error bound.

    ``|value - truth| <= err`` for the mathematical quantity the producing
    routine documents.  ``degraded`` marks results whose ``err`` is a
    documented heuristic (asymptotic branches, adaptive quadrature) rather
    than a fully certified bound.
    """

    value: float
    err: float
    degraded: bool = field(default=False, compare=False)

    def __post_init__(self):
        if math.isfinite(self.value) and not (self.err >= 0.0):
            raise ValueError(f"invalid error bound {self.err!r}")

    @property
    def lo(self) -> float:
        return self.value - self.err

    @property
    def hi(self) -> float:
        return self.value + self.err

    def __add__(self, other):
        if isinstance(other, Enclosure):
            return Enclosure(self.value + other.value, self.err + other.err,
                             self.degraded or other.degraded)
        return Enclosure(self.value + other, self.err, self.degraded)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Enclosure):
            return Enclosure(self.value - other.value, self.err + other.err,
                             self.degraded or other.degraded)
        return Enclosure(self.value - other, self.err, self.degraded)

    def scale(self, c: float) -> "Enclosure":
        """Enclosure of ``c * value`` for an exact scalar ``c``."""
        return Enclosure(c * self.value, abs(c) * self.err, self.degraded)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def certainly_positive(self) -> bool:
        return self.lo > 0.0

    def rel_err(self) -> float:
        if self.value == 0.0:
            return math.inf if self.err > 0 else 0.0
        return self.err / abs(self.value)


def enclosure_ratio(num: Enclosure, den: Enclosure) -> Enclosure:
    """Enclosure of ``num/den``; requires ``den`` to exclude zero."""
    if not den.certainly_positive() and not (den.hi < 0.0):
        raise ZeroDivisionError("denominator enclosure contains zero")
    vals = [num.lo / den.lo, num.lo / den.hi, num.hi / den.lo, num.hi / den.hi]
    lo, hi = min(vals), max(vals)
    mid = 0.5 * (lo + hi)
    return Enclosure(mid, hi - mid, num.degraded or den.degraded)
