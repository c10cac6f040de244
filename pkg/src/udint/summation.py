"""Compensated running sums for long Cesàro averages.

The running total is held as an unevaluated pair ``hi + lo`` where ``hi`` is
the correctly rounded value of everything added so far and ``lo`` is the
correctly rounded residual.  Each update goes through :func:`math.fsum`, so
after ``m`` updates the pair is exact up to roughly ``m * eps**2 * |total|``.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def two_sum_fsum(values) -> tuple[float, float]:
    """Return ``(s, r)`` with ``s = fsum(values)`` and ``r`` the residual.

    When the residual is not exact it is nudged one ulp towards what was
    lost, so ``s + r`` never lands on a rounding tie the exact sum is not on.
    """
    vals = list(values)
    s = math.fsum(vals)
    vals.append(-s)
    r = math.fsum(vals)
    vals.append(-r)
    left = math.fsum(vals)
    if left != 0.0:
        r = math.nextafter(r, math.copysign(math.inf, left))
    return s, r


def pair_quotient(num: tuple[float, float], den: tuple[float, float]) -> float:
    """Correctly rounded ``(num[0] + num[1]) / (den[0] + den[1])``."""
    n = Fraction(num[0]) + Fraction(num[1])
    d = Fraction(den[0]) + Fraction(den[1])
    return float(n / d)


class RunningSum:
    """Accumulator for a long stream of floats.

    >>> acc = RunningSum()
    >>> acc.add([0.1] * 10)
    >>> acc.value
    1.0
    """

    def __init__(self) -> None:
        self.hi = 0.0
        self.lo = 0.0
        self.count = 0

    @property
    def value(self) -> float:
        return self.hi

    def mean(self, n: int) -> float:
        """Correctly rounded ``(hi + lo) / n``; avoids a second rounding after the sum."""
        return pair_quotient((self.hi, self.lo), (float(n), 0.0))

    def add(self, values) -> None:
        if isinstance(values, np.ndarray):
            values = values.tolist()
        else:
            values = list(values)
        if not values:
            return
        self.count += len(values)
        self.hi, self.lo = two_sum_fsum([self.hi, self.lo, *values])

    def add_with_prefixes(self, values: np.ndarray, cuts) -> list[tuple[float, float]]:
        """Add ``values`` and return the running ``(hi, lo)`` pair after each cut.

        ``cuts`` are increasing offsets into ``values`` (1-based lengths, so a
        cut of ``j`` means "after ``values[:j]``").  The whole array is always
        consumed.
        """
        out = []
        start = 0
        for j in cuts:
            self.add(values[start:j])
            out.append((self.hi, self.lo))
            start = j
        self.add(values[start:])
        return out
