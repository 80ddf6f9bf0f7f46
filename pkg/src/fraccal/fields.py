"""One-parameter families of functions (fields), leaf inversion and potentials."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from fraccal.quadrature import (
    AmbientFunction,
    ConfigError,
    DomainError,
    FracParams,
    QuadratureScheme,
    TailModel,
    l1s_norm,
)


class AdmissibilityError(ValueError):
    """A point or competitor leaves the region foliated by the field."""


Array = np.ndarray


@dataclass(frozen=True)
class ExtremalField:
    """A family of functions x -> leaf(t, x) indexed by t in ``interval``.

    All callables broadcast over numpy arrays of t and x.  ``tail(t)`` gives
    the far-field model of the leaf with index t (t may be an array).
    ``inverse`` is an optional closed form of the leaf parameter used only
    for cross-checks.
    """

    name: str
    leaf: Callable[[Array, Array], Array]
    dleaf_dt: Callable[[Array, Array], Array]
    dleaf_dx: Callable[[Array, Array], Array]
    interval: tuple[float, float] = (-math.inf, math.inf)
    tail: Callable[[Array], TailModel] = lambda t: TailModel.none()
    core_radius: float = 5.0
    strict_in_domain: bool = True
    nondecreasing_outside: bool = True
    inverse: Callable[[Array, Array], Array] | None = None

    def leaf_function(self, t: float) -> AmbientFunction:
        return AmbientFunction(
            lambda y, t=t: self.leaf(t, y),
            self.tail(t),
            core_radius=self.core_radius,
            derivative=lambda y, t=t: self.dleaf_dx(t, y),
            name=f"{self.name}[t={t:g}]",
        )

    def contains_index(self, t) -> Array:
        lo, hi = self.interval
        t = np.asarray(t, dtype=float)
        return (t >= lo) & (t <= hi)

    def distance_to_boundary(self, t0: float) -> float:
        lo, hi = self.interval
        return min(t0 - lo, hi - t0)


@dataclass(frozen=True)
class Potential:
    name: str
    F: Callable[[Array], Array]
    Fprime: Callable[[Array], Array]


POTENTIALS: dict[str, Potential] = {
    "zero": Potential("zero", lambda u: np.zeros(np.shape(u)), lambda u: np.zeros(np.shape(u))),
    "cosine-well": Potential("cosine-well", lambda u: 1.0 - np.cos(u), np.sin),
    "negative-quadratic": Potential("negative-quadratic", lambda u: -0.5 * np.asarray(u) ** 2, lambda u: -np.asarray(u)),
}


def get_potential(name: str) -> Potential:
    try:
        return POTENTIALS[name]
    except KeyError:
        raise ConfigError(f"unknown potential {name!r}; choose from {sorted(POTENTIALS)}") from None


# --------------------------------------------------------------------------
# leaf inversion


@dataclass(frozen=True)
class LeafParam:
    field: ExtremalField
    tol: float = 1e-14
    max_iter: int = 200


def _bracket(lp: LeafParam, x: Array, lam: Array):
    f = lp.field
    lo_lim, hi_lim = f.interval
    lo = np.full(x.shape, lo_lim if math.isfinite(lo_lim) else -1.0)
    hi = np.full(x.shape, hi_lim if math.isfinite(hi_lim) else 1.0)
    for _ in range(80):
        need_lo = (f.leaf(lo, x) > lam) & ~np.isfinite(np.full(x.shape, lo_lim))
        need_hi = (f.leaf(hi, x) < lam) & ~np.isfinite(np.full(x.shape, hi_lim))
        if not (need_lo.any() or need_hi.any()):
            break
        width = hi - lo
        lo = np.where(need_lo, lo - width, lo)
        hi = np.where(need_hi, hi + width, hi)
    flo = f.leaf(lo, x)
    fhi = f.leaf(hi, x)
    scale = lp.tol * np.maximum(1.0, np.abs(lam))
    outside = (lam < flo - scale) | (lam > fhi + scale)
    if outside.any():
        i = int(np.flatnonzero(outside)[0])
        raise AdmissibilityError(
            f"outside foliated region: lambda={lam[i]:.6g} at x={x[i]:.6g} not in "
            f"[{flo[i]:.6g}, {fhi[i]:.6g}]"
        )
    return lo, hi


def leaf_parameter(lp: LeafParam, x, lam):
    """Leaf index t with leaf(t, x) = lam, by bisection then a secant polish."""
    f = lp.field
    xa, la = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(lam, dtype=float))
    shape = xa.shape
    xa = xa.ravel().copy()
    la = la.ravel().copy()
    lo, hi = _bracket(lp, xa, la)
    flo = f.leaf(lo, xa) - la
    fhi = f.leaf(hi, xa) - la
    scale = lp.tol * np.maximum(1.0, np.abs(la))
    # coarse bisection
    for _ in range(40):
        width = hi - lo
        if np.all(width <= 1e-6 * np.maximum(1.0, np.abs(lo) + np.abs(hi))):
            break
        mid = 0.5 * (lo + hi)
        fm = f.leaf(mid, xa) - la
        left = fm >= 0
        hi = np.where(left, mid, hi)
        fhi = np.where(left, fm, fhi)
        lo = np.where(left, lo, mid)
        flo = np.where(left, flo, fm)
    # safeguarded secant (regula falsi with bisection fallback)
    t = np.where(np.abs(flo) <= np.abs(fhi), lo, hi)
    ft = np.where(np.abs(flo) <= np.abs(fhi), flo, fhi)
    for _ in range(lp.max_iter):
        done = np.abs(ft) <= scale
        if done.all():
            break
        denom = fhi - flo
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = hi - fhi * (hi - lo) / denom
        bad = ~np.isfinite(cand) | (cand <= np.minimum(lo, hi)) | (cand >= np.maximum(lo, hi))
        cand = np.where(bad, 0.5 * (lo + hi), cand)
        fc = f.leaf(cand, xa) - la
        left = fc >= 0
        new_hi = np.where(left, cand, hi)
        new_fhi = np.where(left, fc, fhi)
        new_lo = np.where(left, lo, cand)
        new_flo = np.where(left, flo, fc)
        hi = np.where(done, hi, new_hi)
        fhi = np.where(done, fhi, new_fhi)
        lo = np.where(done, lo, new_lo)
        flo = np.where(done, flo, new_flo)
        t = np.where(done, t, cand)
        ft = np.where(done, ft, fc)
        if np.all(hi - lo <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(t))):
            break
    return t.reshape(shape) if shape else float(t[0])


# --------------------------------------------------------------------------
# built-in fields


def peierls_nabarro_field() -> ExtremalField:
    """Layers 2 arctan(x + t); extremals of (-Delta)^(1/2) u = sin u."""
    return ExtremalField(
        name="peierls-nabarro",
        leaf=lambda t, x: 2.0 * np.arctan(np.add(x, t)),
        dleaf_dt=lambda t, x: 2.0 / (1.0 + np.add(x, t) ** 2),
        dleaf_dx=lambda t, x: 2.0 / (1.0 + np.add(x, t) ** 2),
        tail=lambda t: TailModel.constant(-math.pi, math.pi),
        core_radius=6.0,
        inverse=lambda x, lam: np.tan(np.asarray(lam) / 2.0) - x,
    )


def linear_field() -> ExtremalField:
    """Translations x + t of the identity (unbounded leaves)."""
    return ExtremalField(
        name="linear",
        leaf=lambda t, x: np.add(x, t) * 1.0,
        dleaf_dt=lambda t, x: np.ones(np.broadcast(t, x).shape),
        dleaf_dx=lambda t, x: np.ones(np.broadcast(t, x).shape),
        tail=lambda t: TailModel.power(1.0, -1.0, 1.0, left=t, right=t),
        core_radius=2.0,
        inverse=lambda x, lam: np.subtract(lam, x),
    )


def make_constant_field(interval: tuple[float, float] = (-1.0, 1.0)) -> ExtremalField:
    """Constant leaves u^t = t."""
    return ExtremalField(
        name="constant",
        leaf=lambda t, x: np.broadcast_to(np.asarray(t, dtype=float), np.broadcast(t, x).shape).copy(),
        dleaf_dt=lambda t, x: np.ones(np.broadcast(t, x).shape),
        dleaf_dx=lambda t, x: np.zeros(np.broadcast(t, x).shape),
        interval=interval,
        tail=lambda t: TailModel.constant(t, t),
        core_radius=1.0,
        inverse=lambda x, lam: np.broadcast_to(np.asarray(lam, dtype=float), np.broadcast(x, lam).shape).copy(),
    )


def make_vertical_field(profile: AmbientFunction, interval=(-math.inf, math.inf)) -> ExtremalField:
    """Vertical translates u + t of a fixed profile."""
    tail = profile.tail
    if tail.kind not in ("constant", "none"):
        raise ConfigError("vertical fields support constant or absent tails only")

    def shifted(t):
        if tail.kind == "none":
            return TailModel.none()
        return TailModel.constant(np.asarray(tail.left) + t, np.asarray(tail.right) + t)

    return ExtremalField(
        name=f"vertical:{profile.name}",
        leaf=lambda t, x: profile(x) + t,
        dleaf_dt=lambda t, x: np.ones(np.broadcast(t, x).shape),
        dleaf_dx=lambda t, x: profile.deriv(np.broadcast_to(x, np.broadcast(t, x).shape)),
        interval=interval,
        tail=shifted,
        core_radius=profile.core_radius,
        inverse=lambda x, lam: np.subtract(lam, profile(x)),
    )


def make_translation_field(profile: AmbientFunction, interval=(-math.inf, math.inf),
                           check_points: int = 2001) -> ExtremalField:
    """Horizontal translates x -> profile(x + t) of a strictly increasing profile."""
    lo, hi = profile.smooth_neighborhood
    if not (math.isfinite(lo) and math.isfinite(hi)):
        span = profile.core_radius if math.isfinite(profile.core_radius) else 50.0
        lo, hi = -2 * span, 2 * span
    ys = np.linspace(lo, hi, check_points)
    vals = profile(ys)
    if not np.all(np.diff(vals) > 0):
        raise AdmissibilityError(f"profile {profile.name!r} is not strictly increasing")
    tail = profile.tail
    if tail.kind == "power" and tail.exponent not in (0.0, 1.0):
        raise ConfigError("translation fields support power tails with exponent 1 only")

    def shifted(t):
        if tail.kind != "power" or tail.exponent == 0.0:
            return tail
        # B |y + t| for y -> +inf is B y + B t; for y -> -inf it is B |y| - B t
        return TailModel.power(1.0, tail.left_coef, tail.right_coef,
                               left=np.asarray(tail.left) - np.asarray(tail.left_coef) * t,
                               right=np.asarray(tail.right) + np.asarray(tail.right_coef) * t)

    return ExtremalField(
        name=f"translation:{profile.name}",
        leaf=lambda t, x: profile(np.add(x, t)),
        dleaf_dt=lambda t, x: profile.deriv(np.add(x, t)),
        dleaf_dx=lambda t, x: profile.deriv(np.add(x, t)),
        interval=interval,
        tail=shifted,
        core_radius=profile.core_radius,
    )


def load_profile_csv(path: str | Path) -> AmbientFunction:
    """Monotone-preserving interpolant of a two-column ``x,value`` CSV, flat outside."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["x", "value"]:
            raise ConfigError(f"{path}: expected header 'x,value'")
        try:
            rows = [(float(r[0]), float(r[1])) for r in reader if r]
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"{path}: malformed row ({exc})") from None
    if len(rows) < 2:
        raise ConfigError(f"{path}: need at least two samples")
    xs = np.array([r[0] for r in rows])
    vs = np.array([r[1] for r in rows])
    if not np.all(np.diff(xs) > 0):
        raise ConfigError(f"{path}: x column must be strictly increasing")
    interp = PchipInterpolator(xs, vs, extrapolate=False)
    dinterp = interp.derivative()
    lo, hi = xs[0], xs[-1]

    def f(y):
        y = np.asarray(y, dtype=float)
        return np.where(y <= lo, vs[0], np.where(y >= hi, vs[-1], interp(np.clip(y, lo, hi))))

    def df(y):
        y = np.asarray(y, dtype=float)
        inside = (y > lo) & (y < hi)
        return np.where(inside, dinterp(np.clip(y, lo, hi)), 0.0)

    # monotonicity is only checked across the sampled range; outside it the profile is flat
    return AmbientFunction(f, TailModel.constant(vs[0], vs[-1]), smooth_neighborhood=(lo, hi),
                           core_radius=max(abs(lo), abs(hi)), derivative=df, name=path.stem)


BUILTIN_FIELDS = ("peierls-nabarro", "linear", "constant", "translation:<csv>")


def field_by_name(name: str) -> ExtremalField:
    if name == "peierls-nabarro":
        return peierls_nabarro_field()
    if name == "linear":
        return linear_field()
    if name == "constant":
        return make_constant_field()
    if name.startswith("translation:"):
        return make_translation_field(load_profile_csv(name.split(":", 1)[1]))
    raise ConfigError(f"unknown field {name!r}; choose from {list(BUILTIN_FIELDS)}")


# --------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    conditions: dict[str, dict] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c["verdict"] == "pass" for c in self.conditions.values())

    def add(self, name: str, verdict: bool, **info):
        self.conditions[name] = {"verdict": "pass" if verdict else "fail", **info}


def validate_field(f: ExtremalField, omega: tuple[float, float], scheme: QuadratureScheme,
                   p: FracParams, compact: tuple[float, float] = (-2.0, 2.0),
                   samples: int = 81, margin: float = 0.5) -> ValidationReport:
    """Sampled checks of continuity, monotonicity and regularity of a field.

    All verdicts are sampled: they can expose violations but not certify the
    almost-everywhere statements they proxy.
    """
    rep = ValidationReport()
    a, b = omega
    lo = max(compact[0], f.interval[0])
    hi = min(compact[1], f.interval[1])
    ts = np.linspace(lo, hi, samples)
    xs = np.linspace(a, b, samples)
    T, X = np.meshgrid(ts, xs, indexing="ij")
    vals = f.leaf(T, X)

    # joint continuity: refine the grid and compare increments
    ts2 = np.linspace(lo, hi, 2 * samples - 1)
    xs2 = np.linspace(a, b, 2 * samples - 1)
    T2, X2 = np.meshgrid(ts2, xs2, indexing="ij")
    v2 = f.leaf(T2, X2)
    jump = max(np.max(np.abs(np.diff(vals, axis=0))), np.max(np.abs(np.diff(vals, axis=1))))
    jump2 = max(np.max(np.abs(np.diff(v2, axis=0))), np.max(np.abs(np.diff(v2, axis=1))))
    finite = bool(np.all(np.isfinite(vals)))
    rep.add("continuity", finite and jump2 <= 0.75 * jump + 1e-12, modulus=float(jump), refined_modulus=float(jump2))

    # strict monotonicity in t on the closed domain
    dt = np.diff(vals, axis=0)
    rep.add("strict_in_domain", bool(np.all(dt > 0)), min_increment=float(dt.min()))

    # nondecreasing outside the domain (sampled only)
    xo = np.concatenate([np.linspace(a - 20.0, a, samples, endpoint=False),
                         np.linspace(b, b + 20.0, samples + 1)[1:]])
    To, Xo = np.meshgrid(ts, xo, indexing="ij")
    do = np.diff(f.leaf(To, Xo), axis=0)
    rep.add("nondecreasing_outside", bool(np.all(do >= -1e-14)), min_increment=float(do.min()), sampled=True)

    # bounds over the compact parameter set
    dts = f.dleaf_dt(T, X)
    rep.add("dleaf_dt_bound", bool(np.all(np.isfinite(dts)) and np.all(dts >= 0)), sup=float(np.max(np.abs(dts))))

    norms = []
    finite_all = True
    for t in (lo, 0.5 * (lo + hi), hi):
        val, fin = l1s_norm(f.leaf_function(t), scheme, p)
        norms.append(val)
        finite_all &= fin
    rep.add("l1s_finite", finite_all, sup=float(max(norms)))

    # second-difference bound on a neighbourhood of the closed domain
    hstep = 1e-3
    xn = np.linspace(a - margin, b + margin, 4 * samples)
    Tn, Xn = np.meshgrid(ts, xn, indexing="ij")
    d2 = (f.leaf(Tn, Xn + hstep) - 2 * f.leaf(Tn, Xn) + f.leaf(Tn, Xn - hstep)) / hstep**2
    rep.add("second_derivative_bound", bool(np.all(np.isfinite(d2))), sup=float(np.max(np.abs(d2))))
    return rep
