"""Nonlocal perimeter of interval unions, its curvature and its calibration.

In one dimension every kernel integral between two intervals has a closed
form, so the perimeter, the sign-kernel calibration and its alternative
expression are all evaluated exactly up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from fraccal.calibration import DomainSpec, EnergyValue
from fraccal.quadrature import (
    AmbientFunction,
    ConfigError,
    DomainError,
    composite_rule,
    normalization_constant,
    rounding_floor,
)

INF = math.inf


@dataclass(frozen=True)
class PerimeterKernel:
    """K(z) = constant |z|^(-n-2s); the constant defaults to the Laplacian normalization."""

    s: float
    constant: float | None = None
    n: int = 1

    def __post_init__(self):
        if not 0 < self.s < 1:
            raise DomainError("fractional order must lie in (0,1)")

    @property
    def c(self) -> float:
        return normalization_constant(self.n, self.s) if self.constant is None else self.constant

    @property
    def finite_perimeters(self) -> bool:
        return self.s < 0.5


@dataclass(frozen=True)
class IntervalSet:
    """Finite union of disjoint open intervals, sorted, endpoints possibly infinite."""

    pieces: tuple[tuple[float, float], ...] = ()

    @classmethod
    def of(cls, pieces: Sequence[Sequence[float]]) -> "IntervalSet":
        items = sorted((float(a), float(b)) for a, b in pieces if float(a) < float(b))
        merged: list[list[float]] = []
        for a, b in items:
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        return cls(tuple((a, b) for a, b in merged))

    @classmethod
    def halfline(cls, start: float, right: bool = True) -> "IntervalSet":
        return cls.of([(start, INF)] if right else [(-INF, start)])

    def complement(self) -> "IntervalSet":
        out, prev = [], -INF
        for a, b in self.pieces:
            if a > prev:
                out.append((prev, a))
            prev = b
        if prev < INF:
            out.append((prev, INF))
        return IntervalSet.of(out)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        for a, b in self.pieces:
            for c, d in other.pieces:
                lo, hi = max(a, c), min(b, d)
                if lo < hi:
                    out.append((lo, hi))
        return IntervalSet.of(out)

    def minus(self, other: "IntervalSet") -> "IntervalSet":
        return self.intersect(other.complement())

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for a, b in self.pieces:
            out |= (x > a) & (x < b)
        return out

    def boundary(self) -> list[float]:
        pts = []
        for a, b in self.pieces:
            pts += [v for v in (a, b) if math.isfinite(v)]
        return pts

    def as_list(self) -> list[list[float]]:
        return [[a, b] for a, b in self.pieces]


def domain_set(dom: DomainSpec) -> IntervalSet:
    return IntervalSet.of([(dom.a, dom.b)])


@dataclass(frozen=True)
class HalfSpace:
    """{x in R^2 : x . normal > offset} with a unit normal."""

    normal: tuple[float, float]
    offset: float

    def __post_init__(self):
        if not math.isclose(math.hypot(*self.normal), 1.0, rel_tol=1e-12):
            raise ConfigError("halfspace normal must be a unit vector")


def parse_set(text: str):
    """``[[a,b],...]`` for interval unions or ``halfspace:e1,e2,c`` in the plane."""
    import json

    text = text.strip()
    if text.startswith("halfspace:"):
        vals = [float(v) for v in text.split(":", 1)[1].split(",")]
        if len(vals) != 3:
            raise ConfigError("halfspace needs 'halfspace:e1,e2,c'")
        e = np.array(vals[:2])
        e = e / np.linalg.norm(e)
        return HalfSpace((float(e[0]), float(e[1])), vals[2])
    try:
        raw = json.loads(text.replace("inf", "1e308"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"cannot parse set {text!r}") from exc
    return IntervalSet.of([(INF if a >= 1e308 else -INF if a <= -1e308 else a,
                            INF if b >= 1e308 else -INF if b <= -1e308 else b) for a, b in raw])


# --------------------------------------------------------------------------
# closed-form kernel integrals


def _g(d: float, s: float) -> float:
    return d ** (1.0 - 2.0 * s)


def interaction(A: tuple[float, float], B: tuple[float, float], s: float) -> float:
    """Integral over x in A, y in B of |x - y|^(-1-2s) for disjoint intervals (s < 1/2)."""
    (a1, a2), (b1, b2) = A, B
    if a1 >= b2:  # A to the right of B: reflect
        (a1, a2), (b1, b2) = (-a2, -a1), (-b2, -b1)
    if a2 > b1:
        raise DomainError("interaction needs disjoint intervals")
    if a1 == -INF and b2 == INF:
        return INF
    k = 1.0 / (2.0 * s * (1.0 - 2.0 * s))
    total = 0.0
    # g(b1-a1) - g(b1-a2) - g(b2-a1) + g(b2-a2), with the paired infinite terms dropped
    if a1 == -INF:
        total += -_g(b1 - a2, s) + _g(b2 - a2, s)
    elif b2 == INF:
        total += _g(b1 - a1, s) - _g(b1 - a2, s)
    else:
        total += _g(b1 - a1, s) - _g(b1 - a2, s) - _g(b2 - a1, s) + _g(b2 - a2, s)
    return k * total


def _side(A, B) -> float:
    """+1 if A lies to the right of B, -1 if to the left."""
    return 1.0 if A[0] >= B[1] else -1.0


def _pair_sum(left: IntervalSet, right: IntervalSet, s: float, signed: bool):
    terms = []
    for A in left.pieces:
        for B in right.pieces:
            v = interaction(A, B, s)
            terms.append(v * (_side(A, B) if signed else 1.0))
    return terms


def nonlocal_perimeter(F: IntervalSet, dom: DomainSpec, kernel: PerimeterKernel) -> EnergyValue:
    """Half the kernel-weighted measure of pairs in Q(Omega) separated by F."""
    if not kernel.finite_perimeters:
        return EnergyValue(INF, INF, {}, True, provenance="perimeter diverges for s >= 1/2")
    Om = domain_set(dom)
    Fc = F.complement()
    inner = _pair_sum(F.intersect(Om), Fc, kernel.s, False)
    outer = _pair_sum(F.minus(Om), Fc.intersect(Om), kernel.s, False)
    c = kernel.c
    v_in, v_out = c * math.fsum(inner), c * math.fsum(outer)
    value = v_in + v_out
    divergent = not math.isfinite(value)
    return EnergyValue(value, rounding_floor(np.array(inner + outer) * c) if not divergent else INF,
                       {"inside_vs_complement": v_in, "outside_vs_complement_inside": v_out}, divergent,
                       provenance="closed-form interval interactions")


def nonlocal_mean_curvature(F: IntervalSet, x: float, kernel: PerimeterKernel) -> float:
    """Principal value of int (1_{F^c} - 1_F)(y) K(x - y) dy at a boundary point x of F.

    The two pieces adjacent to x carry equal and opposite divergent parts
    under symmetric truncation, which are cancelled analytically.
    """
    if not any(math.isclose(x, b, rel_tol=0, abs_tol=1e-14) for b in F.boundary()):
        raise DomainError(f"{x} is not a boundary point of the set")
    s = kernel.s
    total = 0.0
    for sign, S in ((1.0, F.complement()), (-1.0, F)):
        for a, b in S.pieces:
            for lo, hi in ((max(a, x), b), (a, min(b, x))):
                if lo >= hi:
                    continue
                near = min(abs(lo - x), abs(hi - x))
                far = max(abs(lo - x), abs(hi - x))
                near_term = 0.0 if near == 0 else near ** (-2 * s)
                far_term = 0.0 if far == INF else far ** (-2 * s)
                total += sign * (near_term - far_term) / (2 * s)
    return kernel.c * total


def halfspace_mean_curvature(H: HalfSpace, x: Sequence[float], kernel: PerimeterKernel,
                             eps: float = 1e-3, angular_order: int = 64) -> float:
    """Curvature of a planar halfspace at a boundary point, by polar quadrature."""
    x = np.asarray(x, dtype=float)
    if abs(float(np.dot(H.normal, x)) - H.offset) > 1e-12:
        raise DomainError("point is not on the boundary hyperplane")
    theta0 = math.atan2(H.normal[1], H.normal[0])
    breaks = theta0 + np.array([-math.pi, -math.pi / 2, 0.0, math.pi / 2, math.pi])
    th, wt = composite_rule(breaks, angular_order)
    inside = np.cos(th - theta0) > 0
    indicator = np.where(inside, -1.0, 1.0)
    radial = eps ** (-2 * kernel.s) / (2 * kernel.s)  # int_eps^inf r^(-2-2s) r dr
    return float(kernel.c * radial * (indicator * wt).sum())


# --------------------------------------------------------------------------
# level-set families and the calibration


@dataclass(frozen=True)
class LevelSetFamily:
    """Superlevel sets {phi > t} of a strictly monotone function on the line."""

    phi: AmbientFunction
    span: float = 1e6

    def direction(self, samples: int = 4001) -> float:
        ys = np.linspace(-50, 50, samples)
        d = np.diff(self.phi(ys))
        if np.all(d > 0):
            return 1.0
        if np.all(d < 0):
            return -1.0
        raise DomainError("level-set function must be strictly monotone along the line")

    def level_point(self, t: float) -> float:
        f = lambda y: float(self.phi(np.asarray(y))) - t
        lo, hi = -1.0, 1.0
        while f(lo) * f(hi) > 0 and hi < self.span:
            lo, hi = 2 * lo, 2 * hi
        return brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)

    def superlevel(self, t: float) -> IntervalSet:
        return IntervalSet.halfline(self.level_point(t), right=self.direction() > 0)


def calibration_perimeter(family: LevelSetFamily, F: IntervalSet, dom: DomainSpec,
                          kernel: PerimeterKernel) -> EnergyValue:
    """Half the double integral of sign(phi(x) - phi(y)) (1_F(x) - 1_F(y)) K over Q(Omega)."""
    if not kernel.finite_perimeters:
        return EnergyValue(INF, INF, {}, True, provenance="diverges for s >= 1/2")
    direction = family.direction()
    Om = domain_set(dom)
    Fc = F.complement()
    inner = _pair_sum(F.intersect(Om), Fc, kernel.s, True)
    outer = _pair_sum(F.minus(Om), Fc.intersect(Om), kernel.s, True)
    c = kernel.c * direction
    v_in, v_out = c * math.fsum(inner), c * math.fsum(outer)
    return EnergyValue(v_in + v_out, rounding_floor(np.array(inner + outer) * kernel.c),
                       {"inside_vs_complement": v_in, "outside_vs_complement_inside": v_out}, False,
                       provenance="sign-kernel calibration, direct form")


def calibration_perimeter_alt(family: LevelSetFamily, F: IntervalSet, dom: DomainSpec,
                              kernel: PerimeterKernel, order: int = 10, h: float = 0.05) -> EnergyValue:
    """Curvature of the leaf through each point of F in Omega, plus an exterior term."""
    if not kernel.finite_perimeters:
        return EnergyValue(INF, INF, {}, True, provenance="diverges for s >= 1/2")
    direction = family.direction()
    Om = domain_set(dom)
    curv_terms = []
    for a, b in F.intersect(Om).pieces:
        n = max(1, math.ceil((b - a) / h))
        xs, ws = composite_rule(a + (b - a) * np.arange(n + 1) / n, order)
        for xv, wv in zip(xs, ws):
            leaf_set = family.superlevel(float(family.phi(np.asarray(xv))))
            curv_terms.append(wv * nonlocal_mean_curvature(leaf_set, family.level_point(float(family.phi(np.asarray(xv)))), kernel))
    # exterior: x in F outside Omega, y in Omega, weight sign(phi(x) - phi(y))
    ext = [direction * _side(A, B) * interaction(A, B, kernel.s)
           for A in F.minus(Om).pieces for B in Om.pieces]
    v_curv = math.fsum(curv_terms)
    v_ext = kernel.c * math.fsum(ext)
    err = rounding_floor(np.array(curv_terms + [e * kernel.c for e in ext]))
    return EnergyValue(v_curv + v_ext, err, {"leaf_curvature": v_curv, "exterior": v_ext}, False,
                       provenance="sign-kernel calibration, alternative form")


def random_interval_competitor(rng: np.random.Generator, base: IntervalSet, dom: DomainSpec,
                               max_pieces: int = 3) -> IntervalSet:
    """A set equal to ``base`` outside the domain with random intervals inside."""
    Om = domain_set(dom)
    k = int(rng.integers(0, max_pieces + 1))
    cuts = np.sort(rng.uniform(dom.a, dom.b, 2 * k))
    inside = [(cuts[2 * i], cuts[2 * i + 1]) for i in range(k)]
    return IntervalSet.of(list(base.minus(Om).pieces) + inside)
