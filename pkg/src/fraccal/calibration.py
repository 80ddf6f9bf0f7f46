"""Nonlocal energies, the calibration functional and competing candidates.

Double integrals run over Q(Omega), the plane minus the square of the
complement.  They are split as

    Q(Omega) = (Omega x R) U (Omega^c x Omega),

with the outer variable always inside Omega and the inner variable written
as an offset z from it.  Every comparison between two functions is done on
the pointwise difference of integrands, so truncation and tail effects are
matched and fields with infinite energy still give finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from fraccal.fields import AdmissibilityError, ExtremalField, LeafParam, Potential, leaf_parameter
from fraccal.parallel import parallel_map
from fraccal.quadrature import (
    AmbientFunction,
    ConfigError,
    FracParams,
    NumericError,
    QuadratureScheme,
    TailModel,
    combine_ladder,
    gradient_constant,
    gradient_ladder_values,
    kernel_rule,
    ladder_values,
    outer_rule,
    paired_gradient,
    paired_laplacian,
    rounding_floor,
    uniform_rule,
    _legendre,
)

Array = np.ndarray
PairFn = Callable[[Array, Array], Array]


@dataclass(frozen=True)
class DomainSpec:
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
            raise ConfigError(f"domain must be a bounded interval, got ({self.a}, {self.b})")

    @property
    def length(self) -> float:
        return self.b - self.a

    def inside(self, y) -> Array:
        y = np.asarray(y)
        return (y > self.a) & (y < self.b)

    def as_list(self) -> list[float]:
        return [self.a, self.b]


@dataclass(frozen=True)
class AdmissibleCompetitor:
    """A competitor w together with its leaf index x -> t(x, w(x)).

    ``leaf_index`` equals ``t0`` outside the domain.
    """

    w: AmbientFunction
    t0: float
    leaf_index: Callable[[Array], Array]
    exterior_matches_leaf: bool = True
    graph_in_G: bool = True
    label: str = ""


@dataclass
class EnergyValue:
    value: float
    error_estimate: float
    blocks: dict = field(default_factory=dict)
    divergent: bool = False
    delta: float | None = None
    delta_error: float | None = None
    provenance: str = ""

    def as_dict(self) -> dict:
        out = {
            "value": self.value,
            "error_estimate": self.error_estimate,
            "blocks": dict(self.blocks),
            "divergent": self.divergent,
        }
        if self.delta is not None:
            out["delta"] = self.delta
            out["delta_error"] = self.delta_error
        out["provenance"] = self.provenance
        return out


# --------------------------------------------------------------------------
# competitors


def competitor_from_shift(field_: ExtremalField, t0: float, dom: DomainSpec,
                          shift: Callable[[Array], Array], dshift: Callable[[Array], Array],
                          label: str = "") -> AdmissibleCompetitor:
    """w(y) = leaf(t0 + shift(y), y) with ``shift`` supported inside the domain."""

    def index(y):
        y = np.asarray(y, dtype=float)
        return t0 + np.where(dom.inside(y), shift(y), 0.0)

    def dindex(y):
        y = np.asarray(y, dtype=float)
        return np.where(dom.inside(y), dshift(y), 0.0)

    w = AmbientFunction(
        lambda y: field_.leaf(index(y), y),
        field_.tail(t0),
        core_radius=field_.core_radius,
        derivative=lambda y: field_.dleaf_dx(index(y), y) + field_.dleaf_dt(index(y), y) * dindex(y),
        name=label or "shift",
    )
    return AdmissibleCompetitor(w, t0, index, label=label)


def competitor_from_function(field_: ExtremalField, t0: float, dom: DomainSpec, w: AmbientFunction,
                             samples: int = 401, tol: float = 1e-9) -> AdmissibleCompetitor:
    """Wrap an arbitrary function, checking it is admissible for the leaf t0."""
    lp = LeafParam(field_)
    xo = np.concatenate([np.linspace(dom.a - 10, dom.a, samples, endpoint=False),
                         np.linspace(dom.b, dom.b + 10, samples + 1)[1:]])
    ext = bool(np.all(np.abs(w(xo) - field_.leaf(t0, xo)) <= tol * np.maximum(1, np.abs(w(xo)))))
    if not ext:
        raise AdmissibilityError("competitor differs from the base leaf outside the domain")
    xs = np.linspace(dom.a, dom.b, samples)
    ts = leaf_parameter(lp, xs, w(xs))
    if not np.all(field_.contains_index(ts)):
        raise AdmissibilityError("competitor graph leaves the foliated region")

    def index(y):
        y = np.asarray(y, dtype=float)
        out = np.full(y.shape, float(t0))
        m = dom.inside(y)
        if np.any(m):
            out[m] = leaf_parameter(lp, y[m], w(y[m]))
        return out

    return AdmissibleCompetitor(w, t0, index, True, True, label=w.name)


def base_competitor(field_: ExtremalField, t0: float, dom: DomainSpec) -> AdmissibleCompetitor:
    return AdmissibleCompetitor(field_.leaf_function(t0), t0,
                                lambda y: np.full(np.shape(y), float(t0)), label="base-leaf")


# --------------------------------------------------------------------------
# double integrals over Q(Omega)


@dataclass
class QResult:
    value: float
    blocks: dict
    tail: float
    tail_error: float
    divergent: bool


def _zcore(core: float, dom: DomainSpec) -> float:
    return core + max(abs(dom.a), abs(dom.b)) if math.isfinite(core) else math.inf


def q_integral(f: PairFn, dom: DomainSpec, p: FracParams, scheme: QuadratureScheme,
               eps: float = 0.0, h: float | None = None, core: float = 5.0,
               chunk: int = 32) -> QResult:
    """c * double integral of f(x, y) |x - y|^(-1-2s) over Q(Omega) minus {|x-y| < eps}.

    ``f`` must broadcast over arrays.  With ``eps == 0`` it must vanish like
    |x - y|^2 on the diagonal.
    """
    h = scheme.h if h is None else h
    R = scheme.outer_radius
    s2 = 2.0 * p.s
    extra = (dom.a + eps, dom.b - eps) if eps > 0 else ()
    P, Wp = outer_rule(dom.a, dom.b, h, scheme.order, extra_breaks=extra)
    zc = _zcore(core, dom)
    if eps > 0:
        z, wz = kernel_rule(eps, R, s2, h, scheme.order, core=zc)
    else:
        z, wz = kernel_rule(0.0, R, s2, h, scheme.order, core=zc, jacobi_panel=h)

    oo = np.zeros(P.shape)
    oc = np.zeros(P.shape)
    mag = np.zeros(P.shape)
    for i0 in range(0, P.size, chunk):
        ps = P[i0:i0 + chunk, None]
        yp = ps + z[None, :]
        ym = ps - z[None, :]
        fp = f(ps, yp) * wz[None, :]
        fm = f(ps, ym) * wz[None, :]
        inp = dom.inside(yp)
        inm = dom.inside(ym)
        oo[i0:i0 + chunk] = np.where(inp, fp, 0.0).sum(axis=1) + np.where(inm, fm, 0.0).sum(axis=1)
        oc[i0:i0 + chunk] = np.where(inp, 0.0, fp).sum(axis=1) + np.where(inm, 0.0, fm).sum(axis=1)
        mag[i0:i0 + chunk] = np.abs(fp).sum(axis=1) + np.abs(fm).sum(axis=1)

    # both mixed blocks with panels that start exactly at the boundary of Omega;
    # the rule centred on P above straddles it, so only oo + oc is accurate there
    co = np.zeros(P.shape)
    oc_exact = np.zeros(P.shape)
    for i, pv in enumerate(P):
        acc = acc_t = 0.0
        for d, sgn in ((dom.b - pv, 1.0), (pv - dom.a, -1.0)):
            lo = max(d, eps)
            if lo >= R:
                continue
            zz, ww = kernel_rule(lo, R, s2, h, scheme.order, core=zc)
            far = pv + sgn * zz
            here = np.full(zz.shape, pv)
            vals = f(far, here) * ww
            acc += float(vals.sum())
            acc_t += float((f(here, far) * ww).sum())
            mag[i] += float(np.abs(vals).sum())
        co[i] = acc
        oc_exact[i] = acc_t

    tails = np.zeros(P.shape)
    tail_err = 0.0
    divergent = False
    if scheme.tail == "model":
        def g(r):
            return (f(P, P + r) + f(P, P - r) + f(P + r, P) + f(P - r, P))

        gR, g2R = g(R), g(2 * R)
        scale = R ** (-s2) / s2
        grow = np.abs(g2R) >= (2.0**s2) * np.abs(gR) * (1 - 1e-6)
        significant = np.abs(g2R) > 1e-12 * max(1.0, float(np.max(np.abs(gR))))
        divergent = bool(np.any(grow & significant))
        if not divergent:
            tails = gR * scale
            tail_err = float(p.c * (np.abs(g2R - gR) * scale * Wp).sum())
    blocks = {
        "omega_omega": float(p.c * ((oo + oc - oc_exact) * Wp).sum()),
        "omega_complement": float(p.c * ((oc_exact + 0.5 * tails) * Wp).sum()),
        "complement_omega": float(p.c * ((co + 0.5 * tails) * Wp).sum()),
    }
    value = blocks["omega_omega"] + blocks["omega_complement"] + blocks["complement_omega"]
    if not math.isfinite(value):
        raise NumericError("non-finite double integral")
    # floating-point floor: summation over roughly P.size * z.size terms
    rounding = 4 * np.finfo(float).eps * math.sqrt(P.size * (z.size + 1)) * p.c * float((mag * Wp).sum())
    return QResult(value, blocks, float(p.c * (tails * Wp).sum()), tail_err + rounding, divergent)


def q_integral_with_error(f: PairFn, dom: DomainSpec, p: FracParams, scheme: QuadratureScheme,
                          eps: float = 0.0, core: float = 5.0) -> tuple[QResult, float]:
    """Fine result and an error estimate from a run at doubled spacing."""
    fine = q_integral(f, dom, p, scheme, eps=eps, core=core)
    coarse = q_integral(f, dom, p, scheme, eps=eps, h=2 * scheme.h, core=core)
    err = abs(fine.value - coarse.value) + fine.tail_error
    return fine, err


def potential_integral(w: AmbientFunction, dom: DomainSpec, pot: Potential, scheme: QuadratureScheme) -> float:
    x, wx = uniform_rule(dom.a, dom.b, scheme.h, scheme.order)
    return float((pot.F(w(x)) * wx).sum())


# --------------------------------------------------------------------------
# energies


def _ev(q: QResult, err: float, provenance: str) -> EnergyValue:
    return EnergyValue(q.value, err, q.blocks, q.divergent, provenance=provenance)


def energy_gagliardo(w: AmbientFunction, dom: DomainSpec, scheme: QuadratureScheme, p: FracParams,
                     eps: float = 0.0) -> EnergyValue:
    """(c/4) * double integral of |w(x) - w(y)|^2 K over Q(Omega)."""
    def f(X, Y):
        return 0.25 * (w(X) - w(Y)) ** 2

    q, err = q_integral_with_error(f, dom, p, scheme, eps=eps, core=w.core_radius)
    return _ev(q, err, "gagliardo energy over Q(Omega)")


def energy_semilinear(w: AmbientFunction, dom: DomainSpec, pot: Potential, scheme: QuadratureScheme,
                      p: FracParams) -> EnergyValue:
    e = energy_gagliardo(w, dom, scheme, p)
    pint = potential_integral(w, dom, pot, scheme)
    blocks = dict(e.blocks, potential=-pint)
    return EnergyValue(e.value - pint, e.error_estimate, blocks, e.divergent,
                       provenance="gagliardo energy minus potential integral")


def energy_difference(w: AmbientFunction, base: AmbientFunction, dom: DomainSpec, scheme: QuadratureScheme,
                      p: FracParams, eps: float = 0.0) -> EnergyValue:
    """E_s(w) - E_s(base) from the pointwise difference of integrands."""
    def f(X, Y):
        return 0.25 * ((w(X) - w(Y)) ** 2 - (base(X) - base(Y)) ** 2)

    q, err = q_integral_with_error(f, dom, p, scheme, eps=eps, core=max(w.core_radius, base.core_radius))
    return _ev(q, err, "matched-truncation energy difference")


# --------------------------------------------------------------------------
# batched operators on leaves


def leaf_laplacian(field_: ExtremalField, T: Array, X: Array, scheme: QuadratureScheme, p: FracParams,
                   eps: float | None = None, chunk: int = 256):
    """(-Delta)^s of leaf(T_i, .) at X_i for every row i.

    With ``eps`` the truncated operator is returned (error estimate from a
    run at doubled spacing); otherwise the ladder-extrapolated principal value.
    """
    T = np.asarray(T, dtype=float).ravel()
    X = np.asarray(X, dtype=float).ravel()
    starts = list(range(0, T.size, chunk))

    def block(i0):
        t = T[i0:i0 + chunk]
        x = X[i0:i0 + chunk]
        func = lambda Y, rows, t=t: field_.leaf(t[rows, None], Y)
        ux = field_.leaf(t, x)
        tail = field_.tail(t)
        if eps is not None:
            args = (func, x, ux, tail, p.s, p.c, scheme.outer_radius, eps)
            fine, terr = paired_laplacian(*args, scheme.h, scheme.order, field_.core_radius, False, scheme.tail,
                                          with_tail_error=True)
            coarse = paired_laplacian(*args, 2 * scheme.h, scheme.order, field_.core_radius, False, scheme.tail)
            return fine, np.abs(fine - coarse) + terr
        rungs, terr = ladder_values(func, x, ux, tail, field_.core_radius, scheme, p)
        v, e = combine_ladder(scheme, rungs)
        return v, e + terr

    parts = parallel_map(block, starts)
    if not parts:
        return np.empty(0), np.empty(0)
    return np.concatenate([v for v, _ in parts]), np.concatenate([e for _, e in parts])


def leaf_gradient(field_: ExtremalField, T: Array, X: Array, scheme: QuadratureScheme, p: FracParams,
                  chunk: int = 256):
    """Fractional gradient of leaf(T_i, .) at X_i, ladder-extrapolated."""
    T = np.asarray(T, dtype=float).ravel()
    X = np.asarray(X, dtype=float).ravel()
    ct = gradient_constant(p.n, p.s)
    out_v, out_e = [], []
    for i0 in range(0, T.size, chunk):
        t = T[i0:i0 + chunk]
        x = X[i0:i0 + chunk]
        func = lambda Y, rows, t=t: field_.leaf(t[rows, None], Y)
        rungs, terr = gradient_ladder_values(func, x, field_.tail(t), field_.core_radius, scheme, p)
        v, e = combine_ladder(scheme, rungs)
        out_v.append(ct * v)
        out_e.append(ct * (e + terr))
    return np.concatenate(out_v), np.concatenate(out_e)


def fractional_gradient(w: AmbientFunction, x, scheme: QuadratureScheme, p: FracParams):
    """Fractional gradient of w at x: ``(value, error_estimate)``."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    func = lambda Y, rows: w(Y)
    rungs, terr = gradient_ladder_values(func, xa, w.tail, w.core_radius, scheme, p)
    v, e = combine_ladder(scheme, rungs)
    e = e + terr
    ct = gradient_constant(p.n, p.s)
    if np.ndim(x) == 0:
        return float(ct * v[0]), float(ct * e[0])
    return ct * v, ct * e


# --------------------------------------------------------------------------
# the calibration functional


def _lambda_nodes(field_: ExtremalField, comp: AdmissibleCompetitor, dom: DomainSpec,
                  scheme: QuadratureScheme, lam_order: int | None = None):
    """Quadrature nodes for int_Omega int_{u^t0(x)}^{w(x)} g dlambda dx.

    Returns (x, lambda, t, weight) arrays; weights carry the orientation of
    the lambda interval.
    """
    m = lam_order or scheme.order
    xs, wx = uniform_rule(dom.a, dom.b, scheme.h, scheme.order)
    base = field_.leaf(comp.t0, xs)
    top = comp.w(xs)
    span = top - base
    keep = np.abs(span) > 1e-15 * np.maximum(1.0, np.abs(base))
    xs, wx, base, span = xs[keep], wx[keep], base[keep], span[keep]
    xi, wxi = _legendre(m)
    X = np.repeat(xs, m)
    LAM = (base[:, None] + 0.5 * span[:, None] * (1.0 + xi[None, :])).ravel()
    W = (wx[:, None] * 0.5 * span[:, None] * wxi[None, :]).ravel()
    T = leaf_parameter(LeafParam(field_), X, LAM) if X.size else np.empty(0)
    if X.size and not np.all(field_.contains_index(T)):
        raise AdmissibilityError("leaf parameter outside the index interval")
    return X, LAM, T, W


def residual_integral(field_: ExtremalField, comp: AdmissibleCompetitor, dom: DomainSpec,
                      pot: Potential | None, scheme: QuadratureScheme, p: FracParams,
                      eps: float | None = None):
    """int_Omega int (-Delta)^s u^t(x) - F'(u^t(x)) at t = t(x, lambda): ``(value, error)``."""
    X, LAM, T, W = _lambda_nodes(field_, comp, dom, scheme)
    if X.size == 0:
        return 0.0, 0.0
    lap, err = leaf_laplacian(field_, T, X, scheme, p, eps=eps)
    integrand = lap - (pot.Fprime(LAM) if pot is not None else 0.0)
    # each operator value carries rounding of order eps * |u| * (kernel mass beyond the first node)
    scale = np.abs(field_.leaf(T, X)) + np.abs(lap) + 1.0
    rnd = rounding_floor(scale * W) * p.c * scheme.ladder[-1][1] ** (-2 * p.s) / (2 * p.s)
    return float((integrand * W).sum()), float((err * np.abs(W)).sum()) + rnd


def calibration_C(field_: ExtremalField, t0: float, comp: AdmissibleCompetitor, dom: DomainSpec,
                  pot: Potential, scheme: QuadratureScheme, p: FracParams,
                  base_energy: EnergyValue | None = None) -> EnergyValue:
    """Calibration value C(w) = E(u^t0) + Delta_C(w).

    ``delta`` is the residual integral, finite even when the leaf energy is not.
    """
    delta, derr = residual_integral(field_, comp, dom, pot, scheme, p)
    if base_energy is None:
        base_energy = energy_semilinear(field_.leaf_function(t0), dom, pot, scheme, p)
    return EnergyValue(base_energy.value + delta, base_energy.error_estimate + derr,
                       dict(base_energy.blocks, residual_integral=delta), base_energy.divergent,
                       delta=delta, delta_error=derr,
                       provenance="leaf energy plus residual integral over the foliated region")


def calibration_C_eps(field_: ExtremalField, t0: float, comp: AdmissibleCompetitor, dom: DomainSpec,
                      eps: float, scheme: QuadratureScheme, p: FracParams) -> EnergyValue:
    """Truncated calibration evaluated from its defining expression."""
    delta, derr = residual_integral(field_, comp, dom, None, scheme, p, eps=eps)
    base = energy_gagliardo(field_.leaf_function(t0), dom, scheme, p, eps=eps)
    return EnergyValue(base.value + delta, base.error_estimate + derr,
                       {"residual_integral": delta, "leaf_energy": base.value}, base.divergent,
                       delta=delta, delta_error=derr, provenance="truncated calibration, direct form")


def calibration_C_eps_alt(field_: ExtremalField, t0: float, comp: AdmissibleCompetitor, dom: DomainSpec,
                          eps: float, scheme: QuadratureScheme, p: FracParams,
                          t_order: int = 24) -> EnergyValue:
    """Truncated calibration from its symmetrized two-term form."""
    leaf = field_.leaf
    dleaf = field_.dleaf_dt
    idx = comp.leaf_index
    w = comp.w
    xi, wxi = _legendre(t_order)

    def first(X, Y):
        TX, TY = np.broadcast_arrays(idx(X), idx(Y))
        Xb, Yb = np.broadcast_arrays(X, Y)
        half = 0.5 * (TY - TX)
        tt = 0.5 * (TX + TY)[..., None] + half[..., None] * xi
        g = (leaf(tt, Xb[..., None]) - leaf(tt, Yb[..., None])) * dleaf(tt, Yb[..., None])
        return -0.5 * half * (g * wxi).sum(axis=-1)

    def second(X, Y):
        base = leaf(t0, X) - leaf(t0, Y)
        return 0.25 * ((w(X) - leaf(idx(X), Y)) ** 2 - base**2)

    core = field_.core_radius
    q1, e1 = q_integral_with_error(first, dom, p, scheme, eps=eps, core=core)
    q2, e2 = q_integral_with_error(second, dom, p, scheme, eps=eps, core=core)
    base = energy_gagliardo(field_.leaf_function(t0), dom, scheme, p, eps=eps)
    delta = q1.value + q2.value
    derr = e1 + e2
    return EnergyValue(base.value + delta, base.error_estimate + derr,
                       {"leaf_transport": q1.value, "square_term_change": q2.value, "leaf_energy": base.value},
                       base.divergent or q1.divergent or q2.divergent,
                       delta=delta, delta_error=derr, provenance="truncated calibration, symmetrized form")


def inequality_gap(field_: ExtremalField, t0: float, comp: AdmissibleCompetitor, dom: DomainSpec,
                   scheme: QuadratureScheme, p: FracParams) -> EnergyValue:
    """E_s(w) - C_s(w) computed as a matched-truncation difference."""
    ediff = energy_difference(comp.w, field_.leaf_function(t0), dom, scheme, p)
    delta, derr = residual_integral(field_, comp, dom, None, scheme, p)
    return EnergyValue(ediff.value - delta, ediff.error_estimate + derr,
                       {"energy_change": ediff.value, "residual_integral": delta}, ediff.divergent,
                       provenance="energy minus calibration")


# --------------------------------------------------------------------------
# alternative candidates


def _pair_candidate(variant: str, field_: ExtremalField, comp: AdmissibleCompetitor) -> PairFn:
    leaf = field_.leaf
    idx = comp.leaf_index
    w = comp.w

    if variant == "F1":
        def f(X, Y):
            A = w(X) - leaf(idx(X), Y)
            return 0.5 * A * (w(X) - w(Y)) - 0.25 * A**2
    elif variant == "F2":
        def f(X, Y):
            A = leaf(idx(Y), X) - leaf(idx(X), Y)
            return 0.5 * A * (w(X) - w(Y)) - 0.25 * A**2
    else:
        raise ConfigError(f"unknown pair candidate {variant!r}")
    return f


def candidate_functional(variant: str, field_: ExtremalField, t0: float, comp: AdmissibleCompetitor,
                         dom: DomainSpec, pot: Potential, scheme: QuadratureScheme,
                         p: FracParams) -> EnergyValue:
    """Value of an alternative candidate and its change relative to the base leaf."""
    base = base_competitor(field_, t0, dom)
    pint = potential_integral(comp.w, dom, pot, scheme)
    pint0 = potential_integral(base.w, dom, pot, scheme)
    core = field_.core_radius
    if variant in ("F1", "F2"):
        fw = _pair_candidate(variant, field_, comp)
        f0 = _pair_candidate(variant, field_, base)
        qa, ea = q_integral_with_error(fw, dom, p, scheme, core=core)
        qd, ed = q_integral_with_error(lambda X, Y: fw(X, Y) - f0(X, Y), dom, p, scheme, core=core)
        return EnergyValue(qa.value - pint, ea, dict(qa.blocks, potential=-pint), qa.divergent,
                           delta=qd.value - (pint - pint0), delta_error=ed,
                           provenance=f"candidate {variant}")
    if variant == "F3":
        def value(c: AdmissibleCompetitor, h: float):
            xs, wx = uniform_rule(dom.a, dom.b, h, scheme.order)
            gl, el = leaf_gradient(field_, c.leaf_index(xs), xs, scheme, p)
            gw, ew = fractional_gradient(c.w, xs, scheme, p)
            val = float(((gl * gw - 0.5 * gl**2) * wx).sum())
            err = float(((np.abs(gw - gl) * el + np.abs(gl) * ew) * wx).sum())
            return val, err

        v, e = value(comp, scheme.h)
        vc, _ = value(comp, 2 * scheme.h)
        v0, e0 = value(base, scheme.h)
        v0c, _ = value(base, 2 * scheme.h)
        err = e + abs(v - vc)
        err0 = e0 + abs(v0 - v0c)
        return EnergyValue(v - pint, err, {"gradient_term": v, "potential": -pint}, False,
                           delta=(v - pint) - (v0 - pint0), delta_error=err + err0,
                           provenance="candidate F3")
    raise ConfigError(f"unknown candidate {variant!r}; choose F1, F2 or F3")


def transport_identity_residual(field_: ExtremalField, comp: AdmissibleCompetitor, dom: DomainSpec,
                                scheme: QuadratureScheme, p: FracParams, t_order: int = 24) -> EnergyValue:
    """Difference of the two double integrals whose equality would make F1 a calibration.

    Reported as measured; no conclusion is drawn from it.
    """
    leaf = field_.leaf
    dleaf = field_.dleaf_dt
    idx = comp.leaf_index
    w = comp.w
    xi, wxi = _legendre(t_order)

    def lhs(X, Y):
        TX, TY = np.broadcast_arrays(idx(X), idx(Y))
        Xb, Yb = np.broadcast_arrays(X, Y)
        half = 0.5 * (TY - TX)
        tt = 0.5 * (TX + TY)[..., None] + half[..., None] * xi
        g = (leaf(tt, Xb[..., None]) - leaf(tt, Yb[..., None])) * dleaf(tt, Yb[..., None])
        return -half * (g * wxi).sum(axis=-1)

    def rhs(X, Y):
        mid = leaf(idx(X), Y)
        return (w(X) - mid) * (mid - w(Y))

    core = field_.core_radius
    ql, el = q_integral_with_error(lhs, dom, p, scheme, core=core)
    qr, er = q_integral_with_error(rhs, dom, p, scheme, core=core)
    return EnergyValue((ql.value - qr.value) / p.c, (el + er) / p.c,
                       {"lhs": ql.value / p.c, "rhs": qr.value / p.c}, ql.divergent or qr.divergent,
                       provenance="inconclusive: unproven identity, measured residual")
