"""Uniformly distributed point sequences in the open unit interval.

Every sequence here is 1-indexed and never emits exactly 0 or 1.  A sequence
is described by a small frozen dataclass (a *sequence spec*); the same spec
always yields the same floats, whether generated in one block or streamed in
chunks of any size.

Kinds
-----
kronecker
    ``{n * alpha}`` for an irrational ``alpha``.  Each term is reduced
    directly in double-double arithmetic, so the error is a few ulp of 1
    independent of ``n`` (no drift accumulates).
hybrid_pi
    ``1/2`` at ``n = 1``, then ``{n * pi}``.  Uniformly distributed but not a
    Kronecker sequence.
van_der_corput
    Radical inverse of ``n`` in an integer base.
prng
    numpy ``PCG64`` seeded with a 64-bit integer, doubles drawn by
    ``Generator.random`` (53-bit, half-open ``[0, 1)``).  Draws equal to 0.0
    are discarded and the stream continues with the next draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import ClassVar, Iterator

import mpmath
import numpy as np

from udint.errors import GeneratorBoundaryError, InvalidArgument

DEFAULT_CHUNK = 1 << 16
_SPLITTER = 134217729.0  # 2**27 + 1, Veltkamp split constant


def _named_constants() -> dict[str, tuple[float, float]]:
    with mpmath.workdps(60):
        exact = {
            "sqrt2": mpmath.sqrt(2),
            "pi": +mpmath.pi,
            "phi": (1 + mpmath.sqrt(5)) / 2,
        }
        out = {}
        for name, v in exact.items():
            hi = float(v)
            out[name] = (hi, float(v - mpmath.mpf(hi)))
    return out


#: name -> (hi, lo) double-double expansion of the constant
NAMED_CONSTANTS = _named_constants()


def fractional_part(x: float) -> float:
    """Return ``x - floor(x)``, a value in ``[0, 1)``.

    >>> fractional_part(-0.25)
    0.75
    """
    x = float(x)
    if not math.isfinite(x):
        raise InvalidArgument(f"fractional_part needs a finite real, got {x!r}")
    return x - math.floor(x)


def looks_rational(alpha: float, max_den: int = 10**6) -> Fraction | None:
    """Return ``p/q`` (``q <= max_den``) equal to ``alpha`` to machine tolerance, else None.

    A machine real is always rational, so this only screens out values that
    are obviously ratios of small integers.
    """
    frac = Fraction(alpha).limit_denominator(max_den)
    tol = 8 * np.finfo(float).eps * max(1.0, abs(alpha))
    if abs(float(frac) - alpha) <= tol:
        return frac
    return None


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def _kronecker_terms(hi: float, lo: float, n: np.ndarray) -> np.ndarray:
    nf = n.astype(np.float64)
    p, err = _two_prod(nf, hi)
    frac = p - np.floor(p)
    frac = frac + (err + nf * lo)
    return frac - np.floor(frac)


def _check_open(values: np.ndarray, what: str, first_index: int) -> np.ndarray:
    bad = (values <= 0.0) | (values >= 1.0)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise GeneratorBoundaryError(
            f"{what} produced {values[i]!r} at n={first_index + i}, outside (0, 1)"
        )
    return values


class SequenceSpec:
    """Common interface of all sequence specs.

    Subclasses implement :meth:`chunks`; index-addressable kinds also
    implement :meth:`terms`.
    """

    kind: ClassVar[str]

    def chunks(self, count: int, size: int = DEFAULT_CHUNK) -> Iterator[np.ndarray]:
        """Yield the first ``count`` points as consecutive arrays of length <= ``size``."""
        if count < 0:
            raise InvalidArgument("count must be non-negative")
        for start in range(1, count + 1, size):
            stop = min(start + size, count + 1)
            yield self.terms(start, stop)

    def terms(self, start: int, stop: int) -> np.ndarray:
        """Points with indices ``start <= n < stop``."""
        raise NotImplementedError

    def take(self, count: int) -> np.ndarray:
        """First ``count`` points as one array."""
        parts = list(self.chunks(count))
        if not parts:
            return np.empty(0)
        return np.concatenate(parts)

    def __iter__(self) -> Iterator[float]:
        # Unbounded stream; each iterator owns its own generator state.
        for chunk in self.chunks(2**62):
            yield from chunk.tolist()

    @property
    def is_iid(self) -> bool:
        return False

    def to_json(self) -> dict:
        raise NotImplementedError

    def label(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Kronecker(SequenceSpec):
    """``x_n = {n * alpha}``, ``n >= 1``.

    ``alpha`` is stored as a double-double ``alpha + alpha_lo``; the named
    constants carry their full 106-bit expansion.
    """

    alpha: float
    alpha_lo: float = 0.0
    name: str | None = None

    kind: ClassVar[str] = "kronecker"

    def __post_init__(self):
        a = self.alpha
        if not math.isfinite(a) or a <= 0:
            raise InvalidArgument(f"kronecker alpha must be a positive finite real, got {a!r}")
        frac = looks_rational(a)
        if frac is not None:
            raise InvalidArgument(f"kronecker alpha={a!r} is (numerically) rational: {frac}")

    @classmethod
    def named(cls, name: str) -> "Kronecker":
        try:
            hi, lo = NAMED_CONSTANTS[name]
        except KeyError:
            raise InvalidArgument(
                f"unknown constant {name!r}; expected one of {sorted(NAMED_CONSTANTS)}"
            ) from None
        return cls(hi, lo, name)

    @classmethod
    def of(cls, alpha) -> "Kronecker":
        if isinstance(alpha, str):
            if alpha in NAMED_CONSTANTS:
                return cls.named(alpha)
            try:
                alpha = float(alpha)
            except ValueError:
                raise InvalidArgument(f"bad alpha {alpha!r}") from None
        return cls(float(alpha))

    def terms(self, start, stop):
        if start < 1:
            raise InvalidArgument("sequences are 1-indexed; n must be >= 1")
        n = np.arange(start, stop, dtype=np.int64)
        return _check_open(_kronecker_terms(self.alpha, self.alpha_lo, n), "kronecker", start)

    def to_json(self):
        return {"kind": self.kind, "alpha": self.name if self.name else self.alpha}

    def label(self):
        return f"kronecker:{self.name if self.name else repr(self.alpha)}"


@dataclass(frozen=True)
class HybridPi(SequenceSpec):
    """``1/2`` at ``n = 1``; ``{n * pi}`` for ``n >= 2``."""

    kind: ClassVar[str] = "hybrid_pi"

    def terms(self, start, stop):
        if start < 1:
            raise InvalidArgument("sequences are 1-indexed; n must be >= 1")
        out = Kronecker.named("pi").terms(max(start, 2), max(stop, 2))
        if start == 1 and stop > 1:
            out = np.concatenate(([0.5], out))
        return out

    def to_json(self):
        return {"kind": self.kind}

    def label(self):
        return "hybrid_pi"


@dataclass(frozen=True)
class VanDerCorput(SequenceSpec):
    """Radical inverse of ``n`` in ``base``."""

    base: int = 2

    kind: ClassVar[str] = "van_der_corput"

    def __post_init__(self):
        if int(self.base) != self.base or self.base < 2:
            raise InvalidArgument(f"van der Corput base must be an integer >= 2, got {self.base!r}")

    def terms(self, start, stop):
        if start < 1:
            raise InvalidArgument("sequences are 1-indexed; n must be >= 1")
        n = np.arange(start, stop, dtype=np.int64)
        out = np.zeros(n.shape)
        scale = 1.0 / self.base
        while n.any():
            n, digit = np.divmod(n, self.base)
            out += digit * scale
            scale /= self.base
        return _check_open(out, "van_der_corput", start)

    def to_json(self):
        return {"kind": self.kind, "base": self.base}

    def label(self):
        return f"vdc:{self.base}"


@dataclass(frozen=True)
class Prng(SequenceSpec):
    """Seeded i.i.d. uniform stream (numpy PCG64, zero draws discarded)."""

    seed: int = 0

    kind: ClassVar[str] = "prng"

    def __post_init__(self):
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise InvalidArgument(f"prng seed must be a 64-bit unsigned integer, got {self.seed!r}")

    @property
    def is_iid(self):
        return True

    def chunks(self, count, size=DEFAULT_CHUNK):
        if count < 0:
            raise InvalidArgument("count must be non-negative")
        rng = np.random.Generator(np.random.PCG64(self.seed))
        buf = np.empty(0)
        remaining = count
        while remaining > 0:
            want = min(size, remaining)
            while buf.size < want:
                draw = rng.random(want - buf.size)
                buf = np.concatenate((buf, draw[draw > 0.0]))
            out, buf = buf[:want], buf[want:]
            remaining -= want
            yield out

    def terms(self, start, stop):
        if start < 1:
            raise InvalidArgument("sequences are 1-indexed; n must be >= 1")
        return self.take(stop - 1)[start - 1 :]

    def to_json(self):
        return {"kind": self.kind, "seed": self.seed}

    def label(self):
        return f"prng:{self.seed}"


# Scalar convenience wrappers -------------------------------------------------


def _require_index(n):
    if int(n) != n or n < 1:
        raise InvalidArgument(f"sequence index must be an integer >= 1, got {n!r}")
    return int(n)


def kronecker(alpha, n: int) -> float:
    """``{n * alpha}``; ``alpha`` may be a float or a named constant."""
    n = _require_index(n)
    return float(Kronecker.of(alpha).terms(n, n + 1)[0])


def hybrid_pi(n: int) -> float:
    n = _require_index(n)
    return float(HybridPi().terms(n, n + 1)[0])


def van_der_corput(n: int, base: int = 2) -> float:
    n = _require_index(n)
    return float(VanDerCorput(base).terms(n, n + 1)[0])


def prng_stream(seed: int, count: int) -> np.ndarray:
    if count < 1:
        raise InvalidArgument("count must be >= 1")
    return Prng(seed).take(count)


# Serialization ---------------------------------------------------------------


def sequence_from_json(obj: dict) -> SequenceSpec:
    kind = obj.get("kind")
    extra = set(obj) - {"kind"}
    if kind == "kronecker":
        if extra != {"alpha"}:
            raise InvalidArgument(f"kronecker spec needs exactly 'alpha', got {sorted(extra)}")
        return Kronecker.of(obj["alpha"])
    if kind == "hybrid_pi":
        if extra:
            raise InvalidArgument(f"hybrid_pi takes no parameters, got {sorted(extra)}")
        return HybridPi()
    if kind in ("van_der_corput", "vdc"):
        if extra - {"base"}:
            raise InvalidArgument(f"van_der_corput takes only 'base', got {sorted(extra)}")
        return VanDerCorput(int(obj.get("base", 2)))
    if kind == "prng":
        if extra != {"seed"}:
            raise InvalidArgument(f"prng spec needs exactly 'seed', got {sorted(extra)}")
        return Prng(int(obj["seed"]))
    raise InvalidArgument(f"unknown sequence kind {kind!r}")


def parse_sequence(text: str) -> SequenceSpec:
    """Parse the compact CLI form: ``kronecker:sqrt2``, ``hybrid_pi``, ``vdc:2``, ``prng:42``."""
    kind, _, arg = text.partition(":")
    if kind == "kronecker":
        if not arg:
            raise InvalidArgument("kronecker needs an alpha, e.g. kronecker:sqrt2")
        return Kronecker.of(arg)
    if kind == "hybrid_pi":
        if arg:
            raise InvalidArgument("hybrid_pi takes no parameter")
        return HybridPi()
    if kind in ("vdc", "van_der_corput"):
        return VanDerCorput(int(arg) if arg else 2)
    if kind == "prng":
        if not arg:
            raise InvalidArgument("prng needs a seed, e.g. prng:42")
        return Prng(int(arg))
    raise InvalidArgument(f"unknown sequence {text!r}")
