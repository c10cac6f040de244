"""Jump-aware quantile map and strong-law simulations.

A distribution function is stored as its atoms ``(c_k, d_k)`` plus the
continuous part of the CDF.  The quantile map sends ``u`` to ``c_k`` when
``u`` falls in the atom's probability interval ``[F(c_k) - d_k, F(c_k))``
and otherwise to ``sup{y : F(y) = u}``.  The half-open intervals keep the map
single-valued where neighbouring pieces meet.

Note the *supremum* convention on flat stretches of ``F``: if ``F == u`` on
``[a, b]`` the map returns ``b``, not the more common ``a``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from udint.errors import IntegrityError, InvalidArgument, MissingOracleError
from udint.estimators import Trajectory, cesaro_mean
from udint.integrands import Integrand
from udint.sequences import SequenceSpec

BISECT_TOL = 1e-12


def _zero(y):
    return np.zeros(np.shape(y))


@dataclass(frozen=True)
class DistributionFunction:
    name: str
    jumps: tuple = ()
    continuous_cdf: Callable = field(default=_zero, repr=False)
    mean: float | None = None
    # closed-form sup-inverse for u outside every atom interval
    inverse: Callable | None = field(default=None, repr=False)
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        jumps = tuple((float(c), float(d)) for c, d in self.jumps)
        object.__setattr__(self, "jumps", jumps)
        locs = [c for c, _ in jumps]
        if any(b <= a for a, b in zip(locs, locs[1:])):
            raise InvalidArgument("jump locations must be strictly increasing")
        if any(not d > 0 for _, d in jumps):
            raise InvalidArgument("jump sizes must be positive")
        if sum(d for _, d in jumps) > 1 + 1e-12:
            raise InvalidArgument("total jump mass exceeds 1")

    @property
    def _locs(self) -> np.ndarray:
        return np.array([c for c, _ in self.jumps])

    @property
    def _masses(self) -> np.ndarray:
        return np.array([d for _, d in self.jumps])

    def cdf(self, y):
        y = np.asarray(y, dtype=np.float64)
        atoms = np.searchsorted(self._locs, y, side="right")
        cum = np.concatenate(([0.0], np.cumsum(self._masses)))
        return np.clip(self.continuous_cdf(y) + cum[atoms], 0.0, 1.0)

    def cdf_left(self, y):
        """``F(y-)``; the continuous part has no jumps by construction."""
        y = np.asarray(y, dtype=np.float64)
        atoms = np.searchsorted(self._locs, y, side="left")
        cum = np.concatenate(([0.0], np.cumsum(self._masses)))
        return np.clip(self.continuous_cdf(y) + cum[atoms], 0.0, 1.0)

    def jump_intervals(self) -> list[tuple[float, float]]:
        """``[F(c_k) - d_k, F(c_k))`` for every atom."""
        top = self.cdf(self._locs)
        return [(float(t - d), float(t)) for t, d in zip(top, self._masses)]

    def to_json(self) -> dict:
        return {"dist": self.params.get("dist", self.name),
                **{k: v for k, v in self.params.items() if k != "dist"}}


def _bisect_sup(F: DistributionFunction, u: np.ndarray) -> np.ndarray:
    """Vectorized ``sup{y : F(y) <= u}``, checked to be a point where ``F == u``."""
    lo = np.full(u.shape, -1.0)
    hi = np.full(u.shape, 1.0)
    for _ in range(64):
        need = F.cdf(lo) > u
        if not need.any():
            break
        lo = np.where(need, 2 * lo, lo)
    for _ in range(64):
        need = F.cdf(hi) <= u
        if not need.any():
            break
        hi = np.where(need, 2 * hi, hi)
    if (F.cdf(lo) > u).any() or (F.cdf(hi) <= u).any():
        raise IntegrityError(f"cannot bracket the quantile of {F.name!r}; malformed CDF")
    for _ in range(200):
        width = hi - lo
        if (width <= BISECT_TOL * np.maximum(1.0, np.abs(lo))).all():
            break
        mid = lo + width / 2
        below = F.cdf(mid) <= u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    # sup{F <= u} must be a point where F == u; by right-continuity F(hi) ~ F(sup),
    # so an overshoot means F jumps across u there (an undeclared atom)
    overshoot = F.cdf(hi) - u
    if (overshoot > 1e-6).any():
        raise IntegrityError(
            f"{F.name!r} has an undeclared jump near y={float(lo[np.argmax(overshoot)])!r}")
    return lo


def quantile(F: DistributionFunction, u):
    """Jump-aware generalized inverse of ``F`` at ``u`` in (0, 1).

    >>> quantile(bernoulli(0.3), 0.85)
    1.0
    """
    arr = np.asarray(u, dtype=np.float64)
    if not ((arr > 0) & (arr < 1)).all():
        raise InvalidArgument("quantile argument must lie strictly inside (0, 1)")
    flat = arr.ravel()
    out = np.empty(flat.shape)
    in_jump = np.zeros(flat.shape, dtype=bool)
    if F.jumps:
        bounds = F.jump_intervals()
        lefts = np.array([a for a, _ in bounds])
        rights = np.array([b for _, b in bounds])
        k = np.searchsorted(rights, flat, side="right")
        kk = np.minimum(k, len(bounds) - 1)
        in_jump = (k < len(bounds)) & (flat >= lefts[kk])
        out[in_jump] = F._locs[kk[in_jump]]
    rest = ~in_jump
    if rest.any():
        if F.inverse is not None:
            out[rest] = F.inverse(flat[rest])
        else:
            out[rest] = _bisect_sup(F, flat[rest])
    out = out.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def as_integrand(F: DistributionFunction) -> Integrand:
    """The quantile map as an integrand on (0, 1); its integral is the mean."""
    return Integrand(f"quantile[{F.name}]", lambda x: quantile(F, x), F.mean,
                     params={"dist": F.to_json()})


def slln_trajectory(F: DistributionFunction, spec: SequenceSpec, n_max: int,
                    checkpoints=None) -> Trajectory:
    """Running sample means of ``quantile(F, u_k)`` along ``spec``."""
    if F.mean is None:
        raise MissingOracleError(f"distribution {F.name!r} has no mean to converge to")
    traj = cesaro_mean(as_integrand(F), spec, n_max, checkpoints)
    if not spec.is_iid:
        msg = (f"{spec.label()} is deterministic, not an i.i.d. sample; "
               "the strong law does not apply as stated")
        warnings.warn(msg, stacklevel=2)
        traj.notes.append(msg)
    return traj


def ks_distance(F: DistributionFunction, samples) -> float:
    """Kolmogorov–Smirnov distance between the ECDF of ``samples`` and ``F``."""
    x = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    if x.size == 0:
        raise InvalidArgument("need at least one sample")
    vals, counts = np.unique(x, return_counts=True)
    upto = np.cumsum(counts) / x.size
    before = upto - counts / x.size
    d_at = np.abs(upto - F.cdf(vals))
    d_left = np.abs(before - F.cdf_left(vals))
    return float(max(d_at.max(), d_left.max()))


def pushforward_ks(F: DistributionFunction, spec: SequenceSpec, n: int) -> float:
    """KS distance of ``quantile(F, x_k)``, ``k <= n``, from ``F``."""
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    return ks_distance(F, quantile(F, spec.take(n)))


# Catalog ------------------------------------------------------------------------


def bernoulli(p: float) -> DistributionFunction:
    p = float(p)
    if not 0 < p < 1:
        raise InvalidArgument(f"bernoulli p must lie in (0, 1), got {p!r}")
    return DistributionFunction(f"bernoulli({p!r})", ((0.0, 1 - p), (1.0, p)), mean=p,
                                params={"dist": "bernoulli", "p": p})


def point_mass(c: float = 0.0) -> DistributionFunction:
    c = float(c)
    return DistributionFunction(f"point_mass({c!r})", ((c, 1.0),), mean=c,
                                params={"dist": "point_mass", "c": c})


def uniform() -> DistributionFunction:
    return DistributionFunction("uniform", (), lambda y: np.clip(y, 0.0, 1.0), 0.5,
                                inverse=lambda u: u, params={"dist": "uniform"})


def exponential(rate: float = 1.0) -> DistributionFunction:
    lam = float(rate)
    if not lam > 0:
        raise InvalidArgument(f"exponential rate must be positive, got {rate!r}")
    return DistributionFunction(
        f"exponential({lam!r})", (),
        lambda y: -np.expm1(-lam * np.maximum(y, 0.0)), 1 / lam,
        inverse=lambda u: -np.log1p(-u) / lam,
        params={"dist": "exponential", "rate": lam})


def mixed_atom_uniform(atom: float = 0.0, weight: float = 0.5) -> DistributionFunction:
    """``weight`` at ``atom`` plus ``1 - weight`` spread uniformly on (0, 1)."""
    a, w = float(atom), float(weight)
    if not 0 < w < 1:
        raise InvalidArgument(f"atom weight must lie in (0, 1), got {weight!r}")
    low = (1 - w) * min(max(a, 0.0), 1.0)

    def inverse(u):
        return np.where(u < low, u / (1 - w), (u - w) / (1 - w))

    return DistributionFunction(
        f"mixed_atom_uniform({a!r}, {w!r})", ((a, w),),
        lambda y: (1 - w) * np.clip(y, 0.0, 1.0), w * a + (1 - w) / 2,
        inverse=inverse,
        params={"dist": "mixed_atom_uniform", "atom": a, "weight": w})


DISTRIBUTIONS = {
    "bernoulli": bernoulli,
    "point_mass": point_mass,
    "uniform": uniform,
    "exponential": exponential,
    "mixed_atom_uniform": mixed_atom_uniform,
}


def distribution_from_json(obj: dict) -> DistributionFunction:
    obj = dict(obj)
    name = obj.pop("dist", None)
    try:
        build = DISTRIBUTIONS[name]
    except KeyError:
        raise InvalidArgument(f"unknown distribution {name!r}; known: {sorted(DISTRIBUTIONS)}") from None
    try:
        return build(**obj)
    except TypeError:
        raise InvalidArgument(f"distribution {name!r} does not take {sorted(obj)}") from None


def parse_distribution(text: str) -> DistributionFunction:
    """CLI form: ``bernoulli:0.3``, ``exponential:1``, ``mixed_atom_uniform:0:0.5``, ``uniform``."""
    name, *args = text.split(":")
    if name not in DISTRIBUTIONS:
        raise InvalidArgument(f"unknown distribution {name!r}; known: {sorted(DISTRIBUTIONS)}")
    try:
        return DISTRIBUTIONS[name](*(float(a) for a in args))
    except (TypeError, ValueError):
        raise InvalidArgument(f"bad parameters for {name!r}: {args}") from None
