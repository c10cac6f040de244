"""Integral estimators along a point sequence.

All estimators stream the sequence in chunks, evaluate the integrand, and
keep compensated running sums (see :mod:`udint.summation`), so a trajectory
of 10**7 terms costs little memory and loses no precision to summation
order.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import asdict, dataclass, field

import numpy as np

from udint.errors import InvalidArgument, MissingOracleError, SingularEvaluationError
from udint.integrands import Integrand, partial_integral_below
from udint.sequences import DEFAULT_CHUNK, SequenceSpec
from udint.summation import RunningSum, pair_quotient, two_sum_fsum


def geometric_checkpoints(n_max: int, start_exp: float = 2.0, step: float = 0.5) -> list[int]:
    """``10**2, 10**2.5, ...`` rounded to integers, capped with ``n_max``."""
    if n_max < 1:
        raise InvalidArgument("n_max must be >= 1")
    out = []
    e = start_exp
    while True:
        n = int(round(10**e))
        if n >= n_max:
            break
        out.append(n)
        e += step
    out.append(n_max)
    return out


def _validate_checkpoints(checkpoints, n_max: int) -> list[int]:
    cps = [int(c) for c in checkpoints]
    if not cps:
        raise InvalidArgument("need at least one checkpoint")
    if any(b <= a for a, b in zip(cps, cps[1:])):
        raise InvalidArgument("checkpoints must be strictly increasing")
    if cps[0] < 1 or cps[-1] > n_max:
        raise InvalidArgument(f"checkpoints must lie in [1, {n_max}]")
    return cps


@dataclass
class Trajectory:
    """Partial means ``S_N`` at increasing checkpoints ``N``.

    ``tail_term[i]`` is the last summand divided by its index,
    ``g(x_N) / N``.
    """

    checkpoints: list[int]
    means: list[float]
    tail_term: list[float]
    label: str = ""
    notes: list[str] = field(default_factory=list)

    @property
    def final_mean(self) -> float:
        return self.means[-1]

    def sums(self) -> list[float]:
        return [m * n for m, n in zip(self.means, self.checkpoints)]

    def rows(self):
        return zip(self.checkpoints, self.means, self.tail_term)

    def error_slope(self, target: float) -> float | None:
        """Least-squares slope of ``log|S_N - target|`` against ``log N``.

        Descriptive only: points with zero error are skipped, and ``None``
        comes back when fewer than two checkpoints remain.
        """
        n = np.asarray(self.checkpoints, dtype=np.float64)
        err = np.abs(np.asarray(self.means) - target)
        keep = err > 0
        if keep.sum() < 2 or np.ptp(n[keep]) == 0:
            return None
        return float(np.polyfit(np.log(n[keep]), np.log(err[keep]), 1)[0])

    def to_json(self) -> dict:
        return asdict(self)


def _evaluate(f: Integrand, x: np.ndarray, first_index: int) -> np.ndarray:
    y = f(x)
    bad = np.isnan(y)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise SingularEvaluationError(first_index + i, float(x[i]), f.name)
    return y


class _Accumulator:
    """Streams summands, records checkpoint means and the window max of |g_n / n|."""

    def __init__(self, checkpoints, window_start=None):
        self.checkpoints = checkpoints
        self.window_start = window_start
        self.sum = RunningSum()
        self.means: list[float] = []
        self.tails: list[float] = []
        self.window_max = 0.0
        self._next = 0

    def feed(self, values: np.ndarray, first_index: int) -> None:
        stop = first_index + values.size
        cps = self.checkpoints
        j = self._next
        cuts = []
        while j < len(cps) and cps[j] < stop:
            cuts.append(cps[j] - first_index + 1)
            j += 1
        sums = self.sum.add_with_prefixes(values, cuts)
        for cut, pair in zip(cuts, sums):
            n = first_index + cut - 1
            self.means.append(pair_quotient(pair, (float(n), 0.0)))
            self.tails.append(float(values[cut - 1]) / n)
        self._next = j
        if self.window_start is not None and stop > self.window_start:
            lo = max(self.window_start - first_index, 0)
            idx = np.arange(first_index + lo, stop, dtype=np.float64)
            self.window_max = max(self.window_max, float(np.max(np.abs(values[lo:] / idx))))


def _run(summand, spec: SequenceSpec, n_max: int, checkpoints, window_start=None, chunk=DEFAULT_CHUNK):
    """``summand(x_chunk, first_index) -> values``; returns the filled accumulator."""
    acc = _Accumulator(checkpoints, window_start)
    first = 1
    for x in spec.chunks(n_max, chunk):
        acc.feed(summand(x, first), first)
        first += x.size
    return acc


def cesaro_mean(f: Integrand, spec: SequenceSpec, n_max: int, checkpoints=None,
                chunk: int = DEFAULT_CHUNK) -> Trajectory:
    """Running means ``(1/N) sum_{k<=N} f(x_k)`` at the given checkpoints."""
    cps = _validate_checkpoints(
        geometric_checkpoints(n_max) if checkpoints is None else checkpoints, n_max)
    acc = _run(lambda x, first: _evaluate(f, x, first), spec, n_max, cps, chunk=chunk)
    return Trajectory(cps, acc.means, acc.tails, label=f"{f.name} along {spec.label()}")


def running_means(values, checkpoints=None) -> Trajectory:
    """Cesàro trajectory of an explicit list of values (same summation kernel)."""
    vals = np.asarray(values, dtype=np.float64)
    n = vals.size
    cps = _validate_checkpoints(range(1, n + 1) if checkpoints is None else checkpoints, n)
    acc = _Accumulator(cps)
    acc.feed(vals, 1)
    return Trajectory(cps, acc.means, acc.tails)


def truncated_terms(f: Integrand, points, eps: float, first_index: int = 1) -> np.ndarray:
    """``f(x_k) * 1{f(x_k) < k*eps}`` with ``k`` counted from ``first_index``."""
    x = np.asarray(points, dtype=np.float64)
    y = _evaluate(f, x, first_index)
    k = np.arange(first_index, first_index + x.size, dtype=np.float64)
    return np.where(y < k * eps, y, 0.0)


def _require_truncation_args(f: Integrand, eps: float) -> None:
    if not f.nonneg:
        raise InvalidArgument(
            f"truncation needs a non-negative integrand; split {f.name!r} with "
            "positive_part/negative_part first")
    if not eps > 0:
        raise InvalidArgument(f"eps must be positive, got {eps!r}")


def truncated_mean(f: Integrand, spec: SequenceSpec, n_max: int, eps: float,
                   checkpoints=None, chunk: int = DEFAULT_CHUNK) -> Trajectory:
    """Running means of ``f(x_k) * 1{f(x_k) < k*eps}``."""
    _require_truncation_args(f, eps)
    cps = _validate_checkpoints(
        geometric_checkpoints(n_max) if checkpoints is None else checkpoints, n_max)
    acc = _run(lambda x, first: truncated_terms(f, x, eps, first), spec, n_max, cps, chunk=chunk)
    return Trajectory(cps, acc.means, acc.tails,
                      label=f"{f.name} truncated at k*{eps!r} along {spec.label()}")


def _partial_integrals(f: Integrand, levels: np.ndarray) -> np.ndarray:
    if f.partial_integral is not None:
        return np.asarray(f.partial_integral(levels), dtype=np.float64)
    return np.array([partial_integral_below(f, t) for t in levels])


def truncated_deviation_sq(f: Integrand, points, eps: float) -> float:
    """``[(1/N) sum_k (f(x_k) 1{f(x_k) < k eps} - int_{f < k eps} f)]**2``."""
    _require_truncation_args(f, eps)
    if f.partial_integral is None and f.monotone is None:
        raise MissingOracleError(f"integrand {f.name!r} has no partial-integral oracle")
    x = np.asarray(points, dtype=np.float64)
    if x.size == 0:
        raise InvalidArgument("need at least one point")
    k = np.arange(1, x.size + 1, dtype=np.float64)
    terms = truncated_terms(f, x, eps) - _partial_integrals(f, k * eps)
    return (math.fsum(terms.tolist()) / x.size) ** 2


_SAFE = 2.0**450  # products of factors in [1/_SAFE, _SAFE] neither underflow nor overflow


def _product_error(a: np.ndarray, b: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Rounding error of ``p = a * b`` (Dekker), so ``a * b == p + err`` exactly."""
    def split(v):
        t = 134217729.0 * v
        hi = t - (t - v)
        return hi, v - hi
    ah, al = split(a)
    bh, bl = split(b)
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _in_safe_range(v: np.ndarray) -> bool:
    m = np.abs(v[v != 0])
    return m.size == 0 or bool((m >= 1 / _SAFE).all() and (m <= _SAFE).all())


def toeplitz_average(weights, values) -> float:
    """``sum a_j x_j / sum a_j`` for non-negative weights ``a``."""
    a = np.asarray(weights, dtype=np.float64)
    x = np.asarray(values, dtype=np.float64)
    if a.shape != x.shape:
        raise InvalidArgument("weights and values must have equal length")
    if (a < 0).any():
        raise InvalidArgument("weights must be non-negative")
    if not (a > 0).any():
        raise InvalidArgument("weights sum to zero")
    if not np.isfinite(x).all():
        raise InvalidArgument("values must be finite")
    if _in_safe_range(a) and _in_safe_range(x):
        p = a * x
        num = two_sum_fsum(np.concatenate([p, _product_error(a, x, p)]).tolist())
        return pair_quotient(num, two_sum_fsum(a.tolist()))
    # extreme magnitudes: exact rational arithmetic
    num = sum((Fraction(ai) * Fraction(xi) for ai, xi in zip(a.tolist(), x.tolist())), Fraction(0))
    return float(num / sum((Fraction(ai) for ai in a.tolist()), Fraction(0)))


# Condition check ---------------------------------------------------------------

SURROGATE_NOTE = (
    "finite-n surrogates for limits: cond1 = max |f(x_n)/n| for n in [n_max/10, n_max]; "
    "cond2 = max |S_N - S_M| over checkpoints in that range; "
    "cond3 = |S_{n_max} - integral|, and requires cond2"
)


@dataclass(frozen=True)
class Tolerances:
    tail: float = 1e-2
    oscillation: float = 1e-2
    gap: float = 1e-2


@dataclass
class ConditionReport:
    n_max: int
    cond1_sup_tail: float
    cond2_oscillation: float
    cond3_gap: float | None
    verdicts: tuple
    tolerances: Tolerances
    trajectory: Trajectory
    note: str = SURROGATE_NOTE

    @property
    def all_true(self) -> bool:
        return all(v is True for v in self.verdicts)

    def to_json(self) -> dict:
        return {
            "n_max": self.n_max,
            "cond1_sup_tail": self.cond1_sup_tail,
            "cond2_oscillation": self.cond2_oscillation,
            "cond3_gap": self.cond3_gap,
            "verdicts": list(self.verdicts),
            "tolerances": asdict(self.tolerances),
            "note": self.note,
        }


def check_conditions(f: Integrand, spec: SequenceSpec, n_max: int,
                     tol: Tolerances | None = None, checkpoints=None) -> ConditionReport:
    """Evaluate the three convergence conditions on a finite prefix.

    cond3's verdict also requires cond2's: a limit equal to the integral is
    in particular a limit.  When ``f`` has no exact integral, cond3 is
    reported as ``None`` (not evaluable).
    """
    tol = tol or Tolerances()
    cps = _validate_checkpoints(
        geometric_checkpoints(n_max) if checkpoints is None else checkpoints, n_max)
    if cps[-1] != n_max:
        raise InvalidArgument("the last checkpoint must be n_max")
    window = max(1, n_max // 10)
    acc = _run(lambda x, first: _evaluate(f, x, first), spec, n_max, cps, window_start=window)
    traj = Trajectory(cps, acc.means, acc.tails, label=f"{f.name} along {spec.label()}")

    final = [m for n, m in zip(cps, acc.means) if n >= window]
    osc = max(final) - min(final)
    v1 = acc.window_max <= tol.tail
    v2 = osc <= tol.oscillation
    if f.exact_integral is None:
        gap, v3 = None, None
    else:
        gap = abs(acc.means[-1] - f.exact_integral)
        v3 = v2 and gap <= tol.gap
    return ConditionReport(n_max, acc.window_max, osc, gap, (v1, v2, v3), tol, traj)
