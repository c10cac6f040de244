"""Lebesgue-integrable test functions on (0, 1) and the metadata estimators need.

An :class:`Integrand` is a vectorized callable plus optional analytic
knowledge: the exact integral, the superlevel-set measure
``t -> |{x : f(x) >= t}|`` and the partial integral
``t -> integral of f over {x : f(x) < t}``.  Points where the function is
undefined (singular points, or outside the open interval) evaluate to NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable

import mpmath
import numpy as np

from udint.errors import InvalidArgument, MissingOracleError
from udint.quadrature import integrate_excluding

ArrayFn = Callable[[np.ndarray], np.ndarray]

SCAN_STEP = 1e-6


@dataclass(frozen=True)
class Integrand:
    name: str
    func: ArrayFn = field(repr=False)
    exact_integral: float | None = None
    singular_points: tuple = ()
    level_measure: ArrayFn | None = field(default=None, repr=False)
    partial_integral: ArrayFn | None = field(default=None, repr=False)
    nonneg: bool = False
    continuous: bool = False
    # "increasing" / "decreasing" on (0, 1); enables the numeric fallbacks
    monotone: str | None = None
    # (integral of f+, integral of f-) when known in closed form
    part_integrals: tuple[float, float] | None = None
    params: dict = field(default_factory=dict, compare=False)

    def __call__(self, x):
        arr = np.asarray(x, dtype=np.float64)
        with np.errstate(all="ignore"):
            y = np.asarray(self.func(arr), dtype=np.float64)
            y = np.where(np.isfinite(y) & (arr > 0) & (arr < 1), y, np.nan)
        if y.ndim == 0:
            return float(y)
        return y

    def to_json(self) -> dict:
        return {"integrand": self.params.get("catalog", self.name), **{
            k: v for k, v in self.params.items() if k != "catalog"}}


# Sign decomposition ----------------------------------------------------------


def positive_part(f: Integrand) -> Integrand:
    """``x -> max(f(x), 0)``."""
    if f.nonneg:
        return f
    integral = f.part_integrals[0] if f.part_integrals else None
    return Integrand(
        name=f"{f.name}+",
        func=lambda x, g=f: np.maximum(g(x), 0.0),
        exact_integral=integral,
        singular_points=f.singular_points,
        nonneg=True,
        continuous=f.continuous,
    )


def negative_part(f: Integrand) -> Integrand:
    """``x -> min(f(x), 0)``; the zero function when ``f`` is non-negative."""
    if f.nonneg:
        integral = 0.0
    else:
        integral = f.part_integrals[1] if f.part_integrals else None
    return Integrand(
        name=f"{f.name}-",
        func=lambda x, g=f: np.minimum(g(x), 0.0),
        exact_integral=integral,
        singular_points=f.singular_points,
        continuous=f.continuous,
    )


# Level sets and partial integrals ---------------------------------------------


def _oriented(f: Integrand):
    """Return a decreasing version of monotone ``f`` and whether it was mirrored."""
    if f.monotone == "decreasing":
        return f, False
    if f.monotone == "increasing":
        return (lambda x: f(1.0 - np.asarray(x))), True
    raise MissingOracleError(
        f"integrand {f.name!r} has no analytic level measure and no monotonicity "
        "metadata for the numeric fallback"
    )


def _crossing(g, t: float) -> float:
    """For decreasing ``g`` on (0, 1): ``sup{x : g(x) >= t}`` (0 if empty)."""
    n = int(round(1 / SCAN_STEP))
    mids = (np.arange(n) + 0.5) * SCAN_STEP
    inside = g(mids) >= t
    k = int(np.count_nonzero(inside))
    if k == n:
        return 1.0
    # refine between the last midpoint inside and the first outside
    lo = mids[k - 1] if k else 0.0
    hi = mids[k]
    while hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if g(np.array([mid]))[0] >= t:
            lo = mid
        else:
            hi = mid
    return lo


def level_set_measure(f: Integrand, t: float) -> float:
    """Lebesgue measure of ``{x in (0, 1) : f(x) >= t}``."""
    if f.level_measure is not None:
        return float(f.level_measure(np.asarray(float(t))))
    g, _ = _oriented(f)
    return _crossing(g, float(t))


def partial_integral_below(f: Integrand, t: float) -> float:
    """Integral of ``f`` over ``{x : f(x) < t}`` for non-negative ``f``."""
    if not f.nonneg:
        raise InvalidArgument(f"partial_integral_below needs a non-negative integrand; {f.name!r} is signed")
    if t <= 0:
        return 0.0
    if f.partial_integral is not None:
        return float(f.partial_integral(np.asarray(float(t))))
    if f.monotone is None:
        clipped = lambda x: np.where(f(x) < t, f(x), 0.0)
        return integrate_excluding(clipped, 0.0, 1.0, f.singular_points)
    g, mirrored = _oriented(f)
    b = _crossing(g, t)
    lo, hi = (0.0, 1.0 - b) if mirrored else (b, 1.0)
    return integrate_excluding(f, lo, hi, f.singular_points)


# Catalog -----------------------------------------------------------------------


def _square() -> Integrand:
    def level(t):
        return np.where(t <= 0, 1.0, 1.0 - np.sqrt(np.clip(t, 0.0, 1.0)))

    def partial(t):
        r = np.sqrt(np.clip(t, 0.0, 1.0))
        return r**3 / 3

    return Integrand(
        "square", lambda x: x * x, 1 / 3,
        level_measure=level, partial_integral=partial,
        nonneg=True, continuous=True, monotone="increasing",
        params={"catalog": "square"},
    )


def _log_recip() -> Integrand:
    def level(t):
        return np.where(t <= 0, 1.0, np.exp(-np.maximum(t, 0.0)))

    def partial(t):
        tp = np.maximum(t, 0.0)
        return 1.0 - np.exp(-tp) * (1.0 + tp)

    return Integrand(
        "log_recip", lambda x: -np.log(x), 1.0, singular_points=(0.0,),
        level_measure=level, partial_integral=partial,
        nonneg=True, monotone="decreasing",
        params={"catalog": "log_recip"},
    )


def _inv_sqrt() -> Integrand:
    def level(t):
        with np.errstate(divide="ignore"):
            return np.where(t <= 1, 1.0, 1.0 / np.maximum(t, 1.0) ** 2)

    def partial(t):
        return np.where(t <= 1, 0.0, 2.0 - 2.0 / np.maximum(t, 1.0))

    return Integrand(
        "inv_sqrt", lambda x: 1.0 / np.sqrt(x), 2.0, singular_points=(0.0,),
        level_measure=level, partial_integral=partial,
        nonneg=True, monotone="decreasing",
        params={"catalog": "inv_sqrt"},
    )


def _parse_rational(p) -> Fraction:
    try:
        frac = Fraction(p) if not isinstance(p, float) else Fraction(p).limit_denominator(10**9)
    except (ValueError, ZeroDivisionError):
        raise InvalidArgument(f"expected a rational like '1/2', got {p!r}") from None
    if not 0 < frac < 1:
        raise InvalidArgument(f"singular point p={frac} must lie in (0, 1)")
    return frac


def inv_sqrt_shift(p="1/2") -> Integrand:
    """``|x - p|**-1/2`` with a singularity at the rational point ``p``."""
    frac = _parse_rational(p)
    pf = float(frac)
    q = 1.0 - pf

    def level(t):
        with np.errstate(divide="ignore"):
            r = np.where(t > 0, 1.0 / np.maximum(t, 1e-300) ** 2, np.inf)
        return np.minimum(r, pf) + np.minimum(r, q)

    def partial(t):
        r = np.where(t > 0, 1.0 / np.maximum(t, 1e-300) ** 2, np.inf)
        left = np.where(r < pf, 2 * math.sqrt(pf) - 2 * np.sqrt(np.minimum(r, pf)), 0.0)
        right = np.where(r < q, 2 * math.sqrt(q) - 2 * np.sqrt(np.minimum(r, q)), 0.0)
        return left + right

    return Integrand(
        f"inv_sqrt_shift({frac})", lambda x: 1.0 / np.sqrt(np.abs(x - pf)),
        2 * math.sqrt(pf) + 2 * math.sqrt(q), singular_points=(pf,),
        level_measure=level, partial_integral=partial, nonneg=True,
        params={"catalog": "inv_sqrt_shift", "p": str(frac)},
    )


def _signed_demo() -> Integrand:
    # x**2 - ln(1/x) changes sign once, at the root of x**2 + ln x
    with mpmath.workdps(40):
        x0 = mpmath.findroot(lambda x: x**2 + mpmath.log(x), 0.65)
        anti = lambda x: x**3 / 3 + x * mpmath.log(x) - x
        pos = anti(mpmath.mpf(1)) - anti(x0)
        neg = mpmath.mpf(-2) / 3 - pos
    return Integrand(
        "signed_demo", lambda x: x * x + np.log(x), -2 / 3, singular_points=(0.0,),
        part_integrals=(float(pos), float(neg)), monotone="increasing",
        params={"catalog": "signed_demo"},
    )


def identity() -> Integrand:
    return Integrand(
        "identity", lambda x: x, 0.5,
        level_measure=lambda t: np.clip(1.0 - t, 0.0, 1.0),
        partial_integral=lambda t: np.clip(t, 0.0, 1.0) ** 2 / 2,
        nonneg=True, continuous=True, monotone="increasing",
        params={"catalog": "identity"},
    )


def constant(c: float = 1.0) -> Integrand:
    c = float(c)
    nonneg = c >= 0
    return Integrand(
        f"constant({c!r})", lambda x: np.full(np.shape(x), c), c,
        level_measure=lambda t: np.where(t <= c, 1.0, 0.0),
        partial_integral=(lambda t: np.where(t > c, c, 0.0)) if nonneg else None,
        nonneg=nonneg, continuous=True,
        part_integrals=(max(c, 0.0), min(c, 0.0)),
        params={"catalog": "constant", "c": c},
    )


def counterexample_integrand(points) -> Integrand:
    """Indicator of the complement of a finite stored point set.

    Membership is bit-identical equality, so the exceptional set has
    Lebesgue measure zero and the integral is 1.
    """
    stored = np.unique(np.asarray(points, dtype=np.float64).view(np.uint64))

    def func(x):
        bits = np.ascontiguousarray(x, dtype=np.float64).view(np.uint64)
        return np.where(np.isin(bits, stored), 0.0, 1.0)

    return Integrand(
        "counterexample", func, 1.0,
        level_measure=lambda t: np.where(t <= 1, 1.0, 0.0),
        partial_integral=lambda t: np.where(t > 1, 1.0, 0.0),
        nonneg=True,
        params={"catalog": "counterexample", "points": len(stored)},
    )


CATALOG = {
    "square": _square,
    "log_recip": _log_recip,
    "inv_sqrt": _inv_sqrt,
    "inv_sqrt_shift": inv_sqrt_shift,
    "signed_demo": _signed_demo,
    "identity": identity,
    "constant": constant,
}


def get_integrand(name: str, **params) -> Integrand:
    """Look up a catalog entry; ``inv_sqrt_shift`` takes ``p``, ``constant`` takes ``c``."""
    try:
        build = CATALOG[name]
    except KeyError:
        raise InvalidArgument(f"unknown integrand {name!r}; known: {sorted(CATALOG)}") from None
    try:
        return build(**params)
    except TypeError:
        raise InvalidArgument(f"integrand {name!r} does not take parameters {sorted(params)}") from None


def integrand_from_json(obj) -> Integrand:
    if isinstance(obj, str):
        return get_integrand(obj)
    obj = dict(obj)
    name = obj.pop("integrand", None)
    if name is None:
        raise InvalidArgument("integrand reference needs an 'integrand' key")
    return get_integrand(name, **obj)


def without_analytics(f: Integrand) -> Integrand:
    """Copy of ``f`` with closed-form level/partial maps removed (forces numeric paths)."""
    return replace(f, level_measure=None, partial_integral=None)
