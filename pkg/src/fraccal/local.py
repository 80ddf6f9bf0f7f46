"""Local (gradient) Lagrangians in one dimension and their calibration."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from fraccal.calibration import DomainSpec
from fraccal.fields import ExtremalField, LeafParam, get_potential, leaf_parameter
from fraccal.quadrature import AmbientFunction, ConfigError, DomainError, _legendre, rounding_floor, uniform_rule

Array = np.ndarray


@dataclass(frozen=True)
class LocalLagrangian:
    """G(x, lambda, q); partial derivatives by central differences."""

    name: str
    G: Callable[[Array, Array, Array], Array]
    rel_step: float = 1e-5

    def derivative_error(self, terms) -> float:
        """Error scale of a sum of terms built from difference quotients of G."""
        terms = np.asarray(terms, dtype=float)
        return rounding_floor(terms) + float(np.finfo(float).eps / self.rel_step * np.abs(terms).sum())

    def _step(self, v):
        return self.rel_step * np.maximum(1.0, np.abs(v))

    def dG_dlam(self, x, lam, q):
        d = self._step(lam)
        return (self.G(x, lam + d, q) - self.G(x, lam - d, q)) / (2 * d)

    def dG_dq(self, x, lam, q):
        d = self._step(q)
        return (self.G(x, lam, q + d) - self.G(x, lam, q - d)) / (2 * d)


def dirichlet() -> LocalLagrangian:
    return LocalLagrangian("dirichlet", lambda x, lam, q: 0.5 * np.asarray(q) ** 2)


def p_dirichlet(power: float) -> LocalLagrangian:
    if power <= 1:
        raise ConfigError("p-Dirichlet exponent must exceed 1")
    return LocalLagrangian(f"p-dirichlet:{power:g}", lambda x, lam, q: np.abs(q) ** power / power)


def semilinear(potential_name: str) -> LocalLagrangian:
    pot = get_potential(potential_name)
    return LocalLagrangian(f"semilinear:{potential_name}",
                           lambda x, lam, q: 0.5 * np.asarray(q) ** 2 - pot.F(lam))


def lagrangian_by_name(name: str) -> LocalLagrangian:
    if name == "dirichlet":
        return dirichlet()
    if name.startswith("p-dirichlet:"):
        return p_dirichlet(float(name.split(":", 1)[1]))
    if name.startswith("semilinear:"):
        return semilinear(name.split(":", 1)[1])
    raise ConfigError(f"unknown Lagrangian {name!r}; use dirichlet, p-dirichlet:<p> or semilinear:<F>")


# --------------------------------------------------------------------------
# operators


def euler_lagrange_op(G: LocalLagrangian, w: AmbientFunction, x, step: float = 1e-3,
                      dom: DomainSpec | None = None):
    """-d/dx dG/dq(x, w, w') + dG/dlam(x, w, w') by central differences."""
    x = np.asarray(x, dtype=float)
    if dom is not None and np.any((x - step < dom.a) | (x + step > dom.b)):
        raise DomainError("difference stencil leaves the domain")

    def flux(y):
        return G.dG_dq(y, w(y), w.deriv(y))

    div = (flux(x + step) - flux(x - step)) / (2 * step)
    return -div + G.dG_dlam(x, w(x), w.deriv(x))


def _one_sided_derivative(w: AmbientFunction, x: float, inward: float, step: float) -> float:
    if w.derivative is not None:
        return float(w.derivative(np.asarray(x)))
    f0, f1, f2 = (float(w(np.asarray(x + inward * k * step))) for k in range(3))
    return inward * (-3 * f0 + 4 * f1 - f2) / (2 * step)


def neumann_op(G: LocalLagrangian, w: AmbientFunction, x_boundary: float, dom: DomainSpec,
               step: float = 1e-4) -> float:
    """dG/dq(x, w, w') times the outward normal at an endpoint of the domain."""
    if math.isclose(x_boundary, dom.b):
        nu = 1.0
    elif math.isclose(x_boundary, dom.a):
        nu = -1.0
    else:
        raise DomainError(f"{x_boundary} is not a boundary point of ({dom.a}, {dom.b})")
    q = _one_sided_derivative(w, x_boundary, -nu, step)
    x = np.asarray(x_boundary)
    return float(G.dG_dq(x, w(x), np.asarray(q)) * nu)


def excess(G: LocalLagrangian, x, lam, q, q_tilde):
    """G(x, lam, q~) - G(x, lam, q) - dG/dq(x, lam, q) (q~ - q)."""
    return G.G(x, lam, q_tilde) - G.G(x, lam, q) - G.dG_dq(x, lam, q) * (np.asarray(q_tilde) - q)


def local_energy(G: LocalLagrangian, w: AmbientFunction, dom: DomainSpec, h: float = 0.02, order: int = 10) -> float:
    x, wx = uniform_rule(dom.a, dom.b, h, order)
    return float((G.G(x, w(x), w.deriv(x)) * wx).sum())


# --------------------------------------------------------------------------
# calibration in both forms


@dataclass
class LocalValue:
    value: float
    error_estimate: float
    parts: dict

    def as_dict(self) -> dict:
        return {"value": self.value, "error_estimate": self.error_estimate, "parts": dict(self.parts)}


def _leaf_index(field_: ExtremalField, x, lam):
    return leaf_parameter(LeafParam(field_), x, lam)


def _cl_integrand(G: LocalLagrangian, field_: ExtremalField, w: AmbientFunction, x: Array):
    T = _leaf_index(field_, x, w(x))
    lam = field_.leaf(T, x)
    qu = field_.dleaf_dx(T, x)
    return G.dG_dq(x, lam, qu) * (w.deriv(x) - qu) + G.G(x, lam, qu), T, lam, qu


def calibration_CL(G: LocalLagrangian, field_: ExtremalField, w: AmbientFunction, dom: DomainSpec,
                   h: float = 0.02, order: int = 10) -> LocalValue:
    """Classical calibration value from its defining (Legendre) form."""
    def value(hh):
        x, wx = uniform_rule(dom.a, dom.b, hh, order)
        g, *_ = _cl_integrand(G, field_, w, x)
        return float((g * wx).sum()), G.derivative_error(g * wx)

    v, fl = value(h)
    return LocalValue(v, abs(v - value(2 * h)[0]) + fl, {})


def _lambda_rule(base: Array, top: Array, m: int):
    xi, wxi = _legendre(m)
    span = top - base
    lam = base[..., None] + 0.5 * span[..., None] * (1 + xi)
    wts = 0.5 * span[..., None] * wxi
    return lam, wts


def leaf_euler_lagrange(G: LocalLagrangian, field_: ExtremalField, T, X, step: float):
    """Euler-Lagrange operator applied to leaf(T, .) at X (T held fixed)."""
    def flux(y):
        return G.dG_dq(y, field_.leaf(T, y), field_.dleaf_dx(T, y))

    div = (flux(X + step) - flux(X - step)) / (2 * step)
    return -div + G.dG_dlam(X, field_.leaf(T, X), field_.dleaf_dx(T, X))


def calibration_CL_alt(G: LocalLagrangian, field_: ExtremalField, t0: float, w: AmbientFunction,
                       dom: DomainSpec, h: float = 0.02, order: int = 10, step: float = 1e-3) -> LocalValue:
    """Interior Euler-Lagrange term plus boundary Neumann term plus E(u^t0)."""
    base = field_.leaf_function(t0)

    def interior(hh, st):
        x, wx = uniform_rule(dom.a, dom.b, hh, order)
        lam, wl = _lambda_rule(base(x), w(x), order)
        X = np.broadcast_to(x[:, None], lam.shape)
        T = _leaf_index(field_, X, lam)
        L = leaf_euler_lagrange(G, field_, T, X, st)
        terms = (L * wl) * wx[:, None]
        # the divergence divides difference quotients of G by the stencil width
        return float(terms.sum()), G.derivative_error(terms) / st + G.derivative_error(
            np.abs(wl * wx[:, None]) * np.abs(G.dG_dq(X, lam, field_.dleaf_dx(T, X))) / st)

    def boundary():
        total, fl = 0.0, 0.0
        for xb, nu in ((dom.a, -1.0), (dom.b, 1.0)):
            xa = np.array([xb])
            lam, wl = _lambda_rule(base(xa), w(xa), order)
            X = np.broadcast_to(xa[:, None], lam.shape)
            T = _leaf_index(field_, X, lam)
            N = G.dG_dq(X, field_.leaf(T, X), field_.dleaf_dx(T, X)) * nu
            total += float((N * wl).sum())
            fl += G.derivative_error(N * wl)
        return total, fl

    i1, fl1 = interior(h, step)
    i_coarse, _ = interior(2 * h, 2 * step)
    bnd, flb = boundary()
    e0 = local_energy(G, base, dom, h, order)
    e0c = local_energy(G, base, dom, 2 * h, order)
    err = abs(i1 - i_coarse) + abs(e0 - e0c) + fl1 + flb + rounding_floor([i1, bnd, e0])
    return LocalValue(i1 + bnd + e0, err, {"interior": i1, "boundary": bnd, "leaf_energy": e0})


def weierstrass_decomposition_residual(G: LocalLagrangian, field_: ExtremalField, w: AmbientFunction,
                                       dom: DomainSpec, h: float = 0.02, order: int = 10) -> LocalValue:
    """E_L(w) - C_L(w) - integral of the excess along the leaf through each point."""
    def parts(hh):
        x, wx = uniform_rule(dom.a, dom.b, hh, order)
        g, T, lam, qu = _cl_integrand(G, field_, w, x)
        energy = float((G.G(x, w(x), w.deriv(x)) * wx).sum())
        cl = float((g * wx).sum())
        exc = excess(G, x, lam, qu, w.deriv(x)) * wx
        ex = float(exc.sum())
        fl = G.derivative_error(g * wx) + G.derivative_error(exc) + rounding_floor(G.G(x, w(x), w.deriv(x)) * wx)
        return energy, cl, ex, fl

    e, c, x_, fl = parts(h)
    ec, cc, xc, _ = parts(2 * h)
    err = abs(e - ec) + abs(c - cc) + abs(x_ - xc) + fl
    return LocalValue(e - c - x_, err, {"energy": e, "calibration": c, "excess_integral": x_})


def leaf_gradient_identity_residual(field_: ExtremalField, w: AmbientFunction, x: float, step: float,
                                    min_slope: float = 1e-8) -> float:
    """Difference of the two sides of the gradient identity for t(x, w(x)), all by central differences."""
    lp = LeafParam(field_)
    x = float(x)
    T = float(leaf_parameter(lp, x, float(w(np.asarray(x)))))
    if float(field_.dleaf_dt(T, x)) < min_slope:
        raise DomainError("degenerate leaf: d/dt of the leaf vanishes")
    xs = np.array([x - step, x + step])
    Ts = leaf_parameter(lp, xs, w(xs))
    lhs = (Ts[1] - Ts[0]) / (2 * step)
    dw = float(w(np.asarray(x + step)) - w(np.asarray(x - step))) / (2 * step)
    du = float(field_.leaf(T, x + step) - field_.leaf(T, x - step)) / (2 * step)
    lam = float(w(np.asarray(x)))
    tl = leaf_parameter(lp, np.array([x, x]), np.array([lam - step, lam + step]))
    dt_dlam = (tl[1] - tl[0]) / (2 * step)
    return float(lhs - (dw - du) * dt_dlam)


def first_variation_residual(G: LocalLagrangian, w: AmbientFunction, eta: AmbientFunction, dom: DomainSpec,
                             delta: float = 1e-4, h: float = 0.02, order: int = 10, step: float = 1e-3) -> float:
    """d/de E_L(w + e eta) at 0 minus the Euler-Lagrange pairing (eta vanishing near the boundary)."""
    def shifted(sgn):
        return AmbientFunction(lambda y: w(y) + sgn * delta * eta(y), w.tail, core_radius=w.core_radius,
                               derivative=lambda y: w.deriv(y) + sgn * delta * eta.deriv(y))

    dE = (local_energy(G, shifted(1), dom, h, order) - local_energy(G, shifted(-1), dom, h, order)) / (2 * delta)
    x, wx = uniform_rule(dom.a + step, dom.b - step, h, order)
    pairing = float((euler_lagrange_op(G, w, x, step) * eta(x) * wx).sum())
    return dE - pairing


def field_divergence_residual(G: LocalLagrangian, field_: ExtremalField, x: float, lam: float,
                              step: float = 1e-4) -> float:
    """Divergence of X(x, lam) = (-dG/dq, G - q dG/dq) at slope q of the leaf through (x, lam),
    minus the Euler-Lagrange operator of that leaf.  Diagnostic only.

    The calibration is the flux of X through the graph of w, so a vanishing
    residual is what makes it a null-Lagrangian on extremal fields.
    """
    lp = LeafParam(field_)

    def X(xx, ll):
        t = leaf_parameter(lp, np.atleast_1d(float(xx)), np.atleast_1d(float(ll)))
        q = field_.dleaf_dx(t, xx)
        dq = G.dG_dq(xx, ll, q)
        return float(-dq[0]), float((G.G(xx, ll, q) - q * dq)[0])

    d1 = (X(x + step, lam)[0] - X(x - step, lam)[0]) / (2 * step)
    d2 = (X(x, lam + step)[1] - X(x, lam - step)[1]) / (2 * step)
    t = leaf_parameter(lp, np.array([float(x)]), np.array([float(lam)]))
    return float(d1 + d2 - leaf_euler_lagrange(G, field_, t, np.array([float(x)]), step)[0])
