"""Adaptive Simpson quadrature with exclusion zones around singular points.

Only used as a fallback for integrands without closed-form partial
integrals; catalog entries never go through here.
"""

from __future__ import annotations

import heapq
import itertools
import math

import numpy as np

ZONE = 1e-10


def _scalar(g, x):
    return float(g(np.array([x]))[0])


def adaptive_simpson(g, a: float, b: float, abs_tol: float = 1e-13, rel_tol: float = 1e-12,
                     max_panels: int = 20000) -> float:
    """Globally adaptive Simpson rule for ``g`` (vectorized over numpy arrays) on ``[a, b]``.

    The panel with the largest Richardson error estimate is split first,
    until the summed estimate meets ``max(abs_tol, rel_tol * |I|)`` or the
    panel budget runs out.  Refining against a global target (instead of
    halving a local tolerance) keeps the cost bounded near singular edges,
    where node rounding puts a noise floor under every local estimate.
    """
    if a == b:
        return 0.0
    counter = itertools.count()

    def panel(lo, hi, flo, fmid, fhi):
        mid = 0.5 * (lo + hi)
        flm, frm = g(np.array([0.5 * (lo + mid), 0.5 * (mid + hi)]))
        whole = (hi - lo) / 6 * (flo + 4 * fmid + fhi)
        left = (mid - lo) / 6 * (flo + 4 * flm + fmid)
        right = (hi - mid) / 6 * (fmid + 4 * frm + fhi)
        delta = left + right - whole
        est = left + right + delta / 15
        err = abs(delta) / 15
        if not lo < mid < hi:
            err = 0.0  # cannot split further in floating point
        return (-err, next(counter), lo, hi, flo, flm, fmid, frm, fhi, est)

    fa, fm, fb = g(np.array([a, 0.5 * (a + b), b]))
    heap = [panel(a, b, fa, fm, fb)]
    total, err = heap[0][-1], -heap[0][0]
    while len(heap) < max_panels:
        if err <= max(abs_tol, rel_tol * abs(total)) or heap[0][0] == 0.0:
            break
        neg_err, _, lo, hi, flo, flm, fmid, frm, fhi, est = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        kids = (panel(lo, mid, flo, flm, fmid), panel(mid, hi, fmid, frm, fhi))
        for kid in kids:
            heapq.heappush(heap, kid)
        total += kids[0][-1] + kids[1][-1] - est
        err += neg_err - kids[0][0] - kids[1][0]
    return math.fsum(p[-1] for p in heap)


def _tail(g, edge: float, inward: float, zone: float) -> float:
    """Integral of ``g`` over the excluded zone next to a singular ``edge``.

    Fits ``C * |x - edge|**(-s)`` through two samples and integrates the fit.
    """
    near = _scalar(g, edge + inward * zone / 2)
    far = _scalar(g, edge + inward * zone)
    if not (math.isfinite(near) and math.isfinite(far)) or far == 0:
        return zone * (far if math.isfinite(far) else 0.0)
    ratio = near / far
    if ratio <= 0:
        return zone * far
    s = math.log2(ratio)
    if s >= 1:
        raise ArithmeticError("integrand is not integrable near a singular point (exponent >= 1)")
    return zone * far / (1 - s)


def integrate_excluding(
    g, a: float, b: float, singular_points=(), zone: float = ZONE
) -> float:
    """Integrate ``g`` over ``[a, b]``, cutting ``zone`` around each singular point.

    The cut-out pieces are filled in by :func:`_tail`.  Interval ends where
    ``g`` is not finite are treated as singular too.
    """
    if b <= a:
        return 0.0
    cuts = sorted({a, b, *(float(p) for p in singular_points if a <= p <= b)})
    sing = {float(p) for p in singular_points}
    pieces = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        lo_sing = lo in sing or not math.isfinite(_scalar(g, lo))
        hi_sing = hi in sing or not math.isfinite(_scalar(g, hi))
        z = min(zone, (hi - lo) / 4)
        l2 = lo + z if lo_sing else lo
        h2 = hi - z if hi_sing else hi
        pieces.append(adaptive_simpson(g, l2, h2))
        if lo_sing:
            pieces.append(_tail(g, lo, +1.0, z))
        if hi_sing:
            pieces.append(_tail(g, hi, -1.0, z))
    return math.fsum(pieces)
