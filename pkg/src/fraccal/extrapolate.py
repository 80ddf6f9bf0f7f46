"""Richardson extrapolation of a sequence of approximations Q(h) ~ L + C h^p."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from scipy.optimize import brentq


@dataclass(frozen=True)
class RichardsonResult:
    limit: float
    order: float
    ok: bool
    message: str = ""
    error_estimate: float = math.nan


def _order_from_three(h, v) -> float:
    d01 = v[0] - v[1]
    d12 = v[1] - v[2]
    if d12 == 0 or d01 == 0 or (d01 > 0) != (d12 > 0):
        return math.nan
    r = d01 / d12
    q0, q1 = h[0] / h[1], h[1] / h[2]
    if math.isclose(q0, q1, rel_tol=1e-12):
        return math.log(r) / math.log(q1) if r > 0 else math.nan

    # (h0^p - h1^p) / (h1^p - h2^p) = r
    def f(p):
        return (h[0] ** p - h[1] ** p) - r * (h[1] ** p - h[2] ** p)

    try:
        return brentq(f, 1e-3, 20.0)
    except ValueError:
        return math.nan


def richardson_extrapolate(pairs: Sequence[tuple[float, float]]) -> RichardsonResult:
    """Extrapolate to h -> 0 from ``(h, value)`` pairs with decreasing h.

    The order is estimated from the three finest entries and the limit
    eliminates the leading error term between the two finest.
    """
    if len(pairs) < 2:
        raise ValueError("need at least two (h, value) pairs")
    hs = [float(h) for h, _ in pairs]
    vs = [float(v) for _, v in pairs]
    if any(h <= 0 for h in hs) or any(b >= a for a, b in zip(hs, hs[1:])):
        raise ValueError("step sizes must be positive and strictly decreasing")
    if len(pairs) < 3:
        return RichardsonResult(vs[-1], math.nan, False, "order needs three entries", abs(vs[-1] - vs[-2]))
    h3, v3 = hs[-3:], vs[-3:]
    if v3[1] == v3[2]:
        return RichardsonResult(v3[2], math.inf, True, "converged", 0.0)
    p = _order_from_three(h3, v3)
    if not math.isfinite(p) or p <= 0:
        # conservative: the spread of the two finest values
        return RichardsonResult(vs[-1], math.nan, False, "no asymptotic regime", abs(v3[2] - v3[1]))
    ratio = (h3[1] / h3[2]) ** p
    limit = v3[2] + (v3[2] - v3[1]) / (ratio - 1.0)
    return RichardsonResult(limit, p, True, "", abs(v3[2] - limit))
