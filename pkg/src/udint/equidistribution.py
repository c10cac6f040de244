"""Finite-sample checks of uniform distribution in the unit interval."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from udint.errors import InvalidArgument, MissingOracleError


@dataclass(frozen=True)
class DiscrepancyReport:
    """Star discrepancy of ``n`` points.

    ``worst_interval`` is the anchored interval ``(0, t)`` at which the
    supremum is attained.
    """

    n: int
    d_star: float
    worst_interval: tuple[float, float]

    def to_json(self) -> dict:
        return asdict(self)

    def csv_row(self) -> tuple:
        return (self.n, self.d_star, *self.worst_interval)


def _as_points(points) -> np.ndarray:
    x = np.asarray(points, dtype=np.float64).ravel()
    if x.size == 0:
        raise InvalidArgument("need at least one point")
    return x


def interval_ratio(points, c: float, d: float) -> float:
    """Fraction of ``points`` lying in the closed interval ``[c, d]``.

    Repeated points are counted with multiplicity.
    """
    if c > d:
        raise InvalidArgument(f"interval endpoints out of order: c={c} > d={d}")
    if c < 0 or d > 1:
        raise InvalidArgument(f"interval [{c}, {d}] is not inside [0, 1]")
    x = _as_points(points)
    return np.count_nonzero((x >= c) & (x <= d)) / x.size


def star_discrepancy(points) -> DiscrepancyReport:
    """Exact one-dimensional star discrepancy.

    Uses the sorted-sample formula
    ``D* = max_i max(i/n - x_(i), x_(i) - (i-1)/n)``.
    """
    x = np.sort(_as_points(points))
    n = x.size
    i = np.arange(1, n + 1)
    above = i / n - x
    below = x - (i - 1) / n
    ia, ib = int(np.argmax(above)), int(np.argmax(below))
    if above[ia] >= below[ib]:
        d, t = float(above[ia]), float(x[ia])
    else:
        d, t = float(below[ib]), float(x[ib])
    return DiscrepancyReport(n=n, d_star=d, worst_interval=(0.0, t))


def weyl_check(points, f) -> float:
    """``|mean of f over points - integral of f|`` for a continuous integrand."""
    if not f.continuous:
        raise InvalidArgument(f"weyl_check needs a continuous bounded integrand; {f.name!r} is not")
    if f.exact_integral is None:
        raise MissingOracleError(f"integrand {f.name!r} has no exact integral to compare against")
    x = _as_points(points)
    vals = f(x)
    return abs(math.fsum(vals.tolist()) / x.size - f.exact_integral)
