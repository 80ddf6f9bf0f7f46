"""Riesz kernel, normalization constants and singular quadrature on the line.

Every integral against the kernel ``c |z|^{-1-2s}`` is computed with composite
Gauss-Legendre panels in the offset variable ``z``.  Panels are geometrically
graded towards the kernel singularity, capped at width ``h`` inside the core
region of the integrand and allowed to grow in the far field.  When an
integral reaches ``z = 0`` the integrand is assumed to vanish like ``z**2``
(second differences, squared first differences) and the first panel is a
Gauss-Jacobi rule for the weight ``z**(1-2s)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import gamma, roots_jacobi

from fraccal.extrapolate import richardson_extrapolate


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ConfigError(ValueError):
    """A scheme or experiment configuration is inconsistent."""


class NumericError(ArithmeticError):
    """A quadrature produced a non-finite or non-convergent value."""


# --------------------------------------------------------------------------
# constants and kernel


def normalization_constant(n: int, s: float) -> float:
    """Constant making the fractional Laplacian have Fourier symbol |xi|^(2s)."""
    if n not in (1, 2):
        raise DomainError(f"dimension must be 1 or 2, got {n}")
    if not 0.0 < s < 1.0:
        raise DomainError(f"fractional order must lie in (0,1), got {s}")
    return float(4.0**s * gamma(n / 2 + s) / (math.pi ** (n / 2) * abs(gamma(-s))))


def gradient_constant(n: int, s: float) -> float:
    """Constant for the fractional gradient, symbol i xi |xi|^(s-1)."""
    if n not in (1, 2):
        raise DomainError(f"dimension must be 1 or 2, got {n}")
    if not 0.0 < s < 1.0:
        raise DomainError(f"fractional order must lie in (0,1), got {s}")
    return float(2.0**s * gamma((n + s + 1) / 2) / (math.pi ** (n / 2) * gamma((1 - s) / 2)))


@dataclass(frozen=True)
class FracParams:
    n: int
    s: float
    c: float

    def __post_init__(self):
        if not 0.0 < self.s < 1.0:
            raise DomainError(f"fractional order must lie in (0,1), got {self.s}")
        if self.c <= 0:
            raise DomainError("normalization constant must be positive")
        if not math.isclose(self.c, normalization_constant(self.n, self.s), rel_tol=1e-12):
            raise DomainError("c does not match normalization_constant(n, s)")

    @classmethod
    def of(cls, s: float, n: int = 1) -> "FracParams":
        return cls(n=n, s=s, c=normalization_constant(n, s))


def riesz_kernel(z, p: FracParams):
    """c |z|^(-n-2s); ``z`` is a scalar (n=1) or a point/array of points."""
    z = np.asarray(z, dtype=float)
    r = np.abs(z) if p.n == 1 or z.ndim == 0 else np.linalg.norm(z, axis=-1)
    if np.any(r == 0):
        raise DomainError("kernel singularity at z = 0")
    out = p.c * r ** (-p.n - 2 * p.s)
    return float(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# far-field models


@dataclass(frozen=True)
class TailModel:
    """Far-field behaviour u(y) ~ A_pm + B_pm |y|^p as y -> pm infinity.

    ``kind="constant"`` has B = 0.  ``kind="none"`` drops everything beyond the
    outer radius.  Coefficients may be arrays (one entry per leaf parameter).
    """

    kind: str = "constant"
    left: object = 0.0
    right: object = 0.0
    left_coef: object = 0.0
    right_coef: object = 0.0
    exponent: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "power", "none"):
            raise ConfigError(f"unknown tail model {self.kind!r}")

    @classmethod
    def constant(cls, left, right) -> "TailModel":
        return cls("constant", left, right)

    @classmethod
    def power(cls, exponent, left_coef, right_coef, left=0.0, right=0.0) -> "TailModel":
        return cls("power", left, right, left_coef, right_coef, float(exponent))

    @classmethod
    def none(cls) -> "TailModel":
        return cls("none")

    @property
    def growth(self) -> float:
        """Exponent of |u| at infinity (0 for bounded tails)."""
        if self.kind == "power" and np.any(np.asarray(self.left_coef) != 0) | np.any(
            np.asarray(self.right_coef) != 0
        ):
            return max(self.exponent, 0.0)
        return 0.0

    def as_dict(self) -> dict:
        def plain(v):
            return float(v) if np.ndim(v) == 0 else [float(a) for a in np.ravel(v)]

        return {
            "kind": self.kind,
            "left": plain(self.left),
            "right": plain(self.right),
            "left_coef": plain(self.left_coef),
            "right_coef": plain(self.right_coef),
            "exponent": self.exponent,
        }


def _power_tail(q: float, R: float, coef) -> np.ndarray:
    """coef * int_R^inf z^q dz, infinite when the integral diverges and coef != 0."""
    coef = np.asarray(coef, dtype=float)
    if q < -1:
        return coef * R ** (q + 1) / (-q - 1)
    return np.where(coef == 0, 0.0, np.inf * np.sign(coef))


def paired_tail(tail: TailModel, x, ux, R: float, s: float) -> np.ndarray:
    """int_R^inf [2u(x) - u(x+z) - u(x-z)] z^(-1-2s) dz under the far-field model."""
    x = np.asarray(x, dtype=float)
    ux = np.asarray(ux, dtype=float)
    base = 2 * ux * R ** (-2 * s) / (2 * s)
    if tail.kind == "none":
        return np.zeros(np.broadcast(x, ux).shape)
    A = np.asarray(tail.left, dtype=float) + np.asarray(tail.right, dtype=float)
    out = base - A * R ** (-2 * s) / (2 * s)
    if tail.kind == "power":
        p = tail.exponent
        Bsum = np.asarray(tail.left_coef, dtype=float) + np.asarray(tail.right_coef, dtype=float)
        Bdiff = np.asarray(tail.right_coef, dtype=float) - np.asarray(tail.left_coef, dtype=float)
        with np.errstate(invalid="ignore"):
            out = out - _power_tail(p - 1 - 2 * s, R, Bsum) - _power_tail(p - 2 - 2 * s, R, p * x * Bdiff)
    return out


# --------------------------------------------------------------------------
# functions on the line


@dataclass(frozen=True)
class AmbientFunction:
    """A function on the real line with a declared far-field model.

    ``core_radius`` bounds the region where the function has O(1) structure;
    outside it panels may grow.  ``math.inf`` marks oscillatory functions that
    need width-``h`` panels all the way to the outer radius.
    """

    f: Callable[[np.ndarray], np.ndarray]
    tail: TailModel = field(default_factory=TailModel.none)
    smooth_neighborhood: tuple[float, float] = (-math.inf, math.inf)
    core_radius: float = 10.0
    derivative: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = ""

    def __call__(self, y):
        return self.f(np.asarray(y, dtype=float))

    def deriv(self, y, step: float = 1e-5):
        y = np.asarray(y, dtype=float)
        if self.derivative is not None:
            return self.derivative(y)
        return (self.f(y + step) - self.f(y - step)) / (2 * step)


def constant_function(value: float) -> AmbientFunction:
    return AmbientFunction(
        lambda y: np.full(np.shape(y), float(value)),
        TailModel.constant(value, value),
        core_radius=1.0,
        derivative=lambda y: np.zeros(np.shape(y)),
        name=f"constant:{value}",
    )


# --------------------------------------------------------------------------
# schemes and rules


@dataclass(frozen=True)
class QuadratureScheme:
    """Cutoffs and resolution for the singular integrals.

    ``ladder`` holds ``(eps, h)`` pairs, strictly decreasing in both entries,
    used by the principal-value extrapolation.  ``order`` is the number of
    Gauss nodes per panel; ``tail`` is ``"model"`` (use each function's far
    field model beyond ``outer_radius``) or ``"none"``.
    """

    eps: float = 0.1
    outer_radius: float = 1.0e5
    h: float = 0.1
    ladder: tuple[tuple[float, float], ...] = ((0.2, 0.2), (0.1, 0.1), (0.05, 0.05))
    order: int = 10
    tail: str = "model"

    def __post_init__(self):
        if self.eps <= 0 or self.h <= 0 or self.outer_radius <= 0:
            raise ConfigError("eps, h and outer_radius must be positive")
        if self.eps < self.h:
            raise ConfigError("inner cutoff eps must be at least the grid spacing h")
        for (e0, h0), (e1, h1) in zip(self.ladder, self.ladder[1:]):
            if not (e1 < e0 and h1 < h0):
                raise ConfigError("ladder entries must decrease strictly in eps and h")
        for e, hh in self.ladder:
            if e < hh:
                raise ConfigError("every ladder entry needs eps >= h")
        if self.tail not in ("model", "none"):
            raise ConfigError(f"unknown tail mode {self.tail!r}")

    def coarsened(self, factor: float = 2.0) -> "QuadratureScheme":
        return QuadratureScheme(
            eps=self.eps * factor,
            outer_radius=self.outer_radius,
            h=self.h * factor,
            ladder=tuple((e * factor, hh * factor) for e, hh in self.ladder),
            order=self.order,
            tail=self.tail,
        )

    def check_domain(self, omega: tuple[float, float]) -> None:
        if self.outer_radius <= 2 * (omega[1] - omega[0]) + max(abs(omega[0]), abs(omega[1])):
            raise ConfigError("outer radius must exceed the diameter of the domain")

    def as_dict(self) -> dict:
        return {
            "eps": self.eps,
            "outer_radius": self.outer_radius,
            "h": self.h,
            "ladder": [list(e) for e in self.ladder],
            "order": self.order,
            "tail": self.tail,
        }


@lru_cache(maxsize=64)
def _legendre(m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    return x, w


@lru_cache(maxsize=64)
def _jacobi(m: int, beta: float):
    x, w = roots_jacobi(m, 0.0, beta)
    return x, w


def panel_breaks(start: float, stop: float, h: float, core: float = math.inf,
                 growth: float = 0.5, grade: float = 1.0) -> np.ndarray:
    """Breakpoints on [start, stop] for an integrand singular at z = 0.

    A panel starting at z is at most ``grade * z`` wide (geometric grading
    towards the singularity), at most ``h`` wide while ``z <= core`` and at
    most ``h + growth * (z - core)`` wide beyond.
    """
    if not stop > start >= 0:
        raise ConfigError(f"empty or negative panel range [{start}, {stop}]")
    pts = [start]
    z = start
    while z < stop:
        width = h if z <= core else h + growth * (z - core)
        if z > 0:
            width = min(width, grade * z)
        nz = z + width
        if nz >= stop or (stop - nz) < 1e-3 * width:
            nz = stop
        pts.append(nz)
        z = nz
    return np.asarray(pts)


def composite_rule(breaks: np.ndarray, order: int):
    """Gauss-Legendre nodes and weights on consecutive panels."""
    x, w = _legendre(order)
    a = breaks[:-1, None]
    b = breaks[1:, None]
    nodes = 0.5 * (b - a) * x[None, :] + 0.5 * (a + b)
    weights = 0.5 * (b - a) * w[None, :]
    return nodes.ravel(), weights.ravel()


def kernel_rule(start: float, stop: float, sigma: float, h: float, order: int,
                core: float = math.inf, jacobi_panel: float | None = None,
                grade: float = 1.0, vanish: int = 2, split: float | None = None):
    """Nodes z and weights for int_start^stop f(z) z^(-1-sigma) dz.

    With ``start == 0`` the integrand is assumed to vanish like z^vanish and
    the first panel [0, jacobi_panel] uses a Gauss-Jacobi rule on
    f(z)/z^vanish with weight z^(vanish-1-sigma).  ``split`` forces a panel
    break so that nodes beyond it form an exact rule for [split, stop].
    """
    nodes, weights = [], []
    lo = start
    if start == 0.0:
        d = min(jacobi_panel if jacobi_panel is not None else h, stop)
        beta = vanish - 1.0 - sigma
        xj, wj = _jacobi(order, beta)
        zj = 0.5 * d * (1.0 + xj)
        nodes.append(zj)
        weights.append(wj * (0.5 * d) ** (beta + 1.0) / zj**vanish)
        lo = d
    ranges = [(lo, stop)]
    if split is not None and lo < split < stop:
        ranges = [(lo, split), (split, stop)]
    for a, b in ranges:
        if b > a:
            br = panel_breaks(a, b, h, core=core, grade=grade)
            z, w = composite_rule(br, order)
            nodes.append(z)
            weights.append(w * z ** (-1.0 - sigma))
    if not nodes:
        return np.empty(0), np.empty(0)
    return np.concatenate(nodes), np.concatenate(weights)


def outer_rule(a: float, b: float, h: float, order: int, extra_breaks: Sequence[float] = (),
               depth: float = 1e-7):
    """Gauss-Legendre rule on (a, b) graded geometrically towards both ends."""
    L = b - a
    pts = {a, b}
    k = 1
    while L * 0.5**k > depth * L:
        pts.add(a + L * 0.5**k)
        pts.add(b - L * 0.5**k)
        k += 1
    for e in extra_breaks:
        if a < e < b:
            pts.add(e)
    br = np.array(sorted(pts))
    fine = [br[0]]
    for lo, hi in zip(br[:-1], br[1:]):
        nsub = max(1, int(math.ceil((hi - lo) / h - 1e-9)))
        fine.extend(lo + (hi - lo) * np.arange(1, nsub + 1) / nsub)
    return composite_rule(np.asarray(fine), order)


def uniform_rule(a: float, b: float, h: float, order: int):
    nsub = max(1, int(math.ceil((b - a) / h - 1e-9)))
    return composite_rule(a + (b - a) * np.arange(nsub + 1) / nsub, order)


def rounding_floor(terms) -> float:
    """Floating-point error scale for the sum of ``terms``."""
    terms = np.asarray(terms, dtype=float)
    if terms.size == 0:
        return 0.0
    return float(4 * np.finfo(float).eps * math.sqrt(terms.size) * np.abs(terms).sum())


# --------------------------------------------------------------------------
# fractional Laplacian


def _check_points(u: AmbientFunction, x: np.ndarray) -> None:
    lo, hi = u.smooth_neighborhood
    if np.any((x < lo) | (x > hi)):
        raise DomainError(f"evaluation point outside the smooth neighborhood ({lo}, {hi})")


def _tail_error(far_part, model_far, tail_mode: str):
    """Change of the result if the outer radius were halved."""
    if tail_mode != "model":
        return np.abs(far_part)
    with np.errstate(invalid="ignore"):
        d = np.abs(far_part - model_far)
    return np.where(np.isfinite(d), d, np.inf)


def paired_laplacian(func, x, ux, tail: TailModel, s: float, c: float, R: float,
                     eps: float, h: float, order: int, core: float,
                     include_inner: bool, tail_mode: str = "model", chunk: int = 512,
                     with_tail_error: bool = False):
    """Batch of c * int_{eps}^{R} [2u(x) - u(x+z) - u(x-z)] z^(-1-2s) dz plus tail.

    ``func(Y)`` evaluates the (row-dependent) function on an array ``Y`` whose
    row i belongs to point ``x[i]``.  With ``include_inner`` the piece
    [0, eps] is added through the Gauss-Jacobi panel, giving the principal
    value rather than the truncated operator.  ``with_tail_error`` also
    returns how far the far field departs from its model on [R/2, R].
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    ux = np.broadcast_to(np.asarray(ux, dtype=float), x.shape)
    zcore = core + float(np.max(np.abs(x))) if math.isfinite(core) else math.inf
    split = 0.5 * R if with_tail_error else None
    if include_inner:
        z, w = kernel_rule(0.0, R, 2 * s, h, order, core=zcore, jacobi_panel=eps, split=split)
    else:
        z, w = kernel_rule(eps, R, 2 * s, h, order, core=zcore, split=split)
    far = z > 0.5 * R
    out = np.empty(x.shape)
    far_part = np.zeros(x.shape)
    for i0 in range(0, x.size, chunk):
        xs = x[i0:i0 + chunk, None]
        us = ux[i0:i0 + chunk, None]
        rows = slice(i0, i0 + chunk)
        g = 2.0 * us - func(xs + z[None, :], rows) - func(xs - z[None, :], rows)
        gw = g * w[None, :]
        out[rows] = gw.sum(axis=1)
        if with_tail_error:
            far_part[rows] = gw[:, far].sum(axis=1)
    if not np.all(np.isfinite(out)):
        bad = int(np.flatnonzero(~np.isfinite(out))[0])
        raise NumericError(f"non-finite integrand near x = {x[bad]}")
    if tail_mode == "model":
        out = out + paired_tail(tail, x, ux, R, s)
    if not with_tail_error:
        return c * out
    with np.errstate(invalid="ignore"):
        model_far = paired_tail(tail, x, ux, 0.5 * R, s) - paired_tail(tail, x, ux, R, s)
    return c * out, c * _tail_error(far_part, model_far, tail_mode)


def gradient_tail(tail: TailModel, R: float, s: float) -> np.ndarray:
    """int_R^inf [u(x+z) - u(x-z)] z^(-1-s) dz under the far-field model."""
    if tail.kind == "none":
        return np.asarray(0.0)
    A = np.asarray(tail.right, dtype=float) - np.asarray(tail.left, dtype=float)
    out = A * R ** (-s) / s
    if tail.kind == "power":
        B = np.asarray(tail.right_coef, dtype=float) - np.asarray(tail.left_coef, dtype=float)
        with np.errstate(invalid="ignore"):
            out = out + _power_tail(tail.exponent - 1 - s, R, B)
    return out


def paired_gradient(func, x, tail: TailModel, s: float, R: float, eps: float, h: float,
                    order: int, core: float, tail_mode: str = "model", chunk: int = 512,
                    with_tail_error: bool = False):
    """Batch of PV int_0^R [u(x+z) - u(x-z)] z^(-1-s) dz plus tail (constant excluded).

    The piece [0, eps] uses the Gauss-Jacobi panel for an integrand vanishing
    linearly at z = 0.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    zcore = core + float(np.max(np.abs(x))) if math.isfinite(core) else math.inf
    split = 0.5 * R if with_tail_error else None
    z, w = kernel_rule(0.0, R, s, h, order, core=zcore, jacobi_panel=eps, vanish=1, split=split)
    far = z > 0.5 * R
    out = np.empty(x.shape)
    far_part = np.zeros(x.shape)
    for i0 in range(0, x.size, chunk):
        xs = x[i0:i0 + chunk, None]
        rows = slice(i0, i0 + chunk)
        g = func(xs + z[None, :], rows) - func(xs - z[None, :], rows)
        gw = g * w[None, :]
        out[rows] = gw.sum(axis=1)
        if with_tail_error:
            far_part[rows] = gw[:, far].sum(axis=1)
    if not np.all(np.isfinite(out)):
        raise NumericError("non-finite fractional gradient integrand")
    if tail_mode == "model":
        out = out + gradient_tail(tail, R, s)
    if not with_tail_error:
        return out
    with np.errstate(invalid="ignore"):
        model_far = gradient_tail(tail, 0.5 * R, s) - gradient_tail(tail, R, s)
    return out, _tail_error(far_part, np.broadcast_to(model_far, x.shape), tail_mode)


def _rowwise(u: AmbientFunction):
    return lambda Y, rows: u.f(Y)


def frac_laplacian_eps(u: AmbientFunction, x, scheme: QuadratureScheme, p: FracParams, eps: float | None = None):
    """Truncated operator int_{|x-y|>eps} (u(x)-u(y)) K(x-y) dy."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    _check_points(u, xa)
    e = scheme.eps if eps is None else eps
    if e <= 0:
        raise DomainError("truncation radius must be positive")
    val = paired_laplacian(_rowwise(u), xa, u.f(xa), u.tail, p.s, p.c, scheme.outer_radius,
                           e, scheme.h, scheme.order, u.core_radius, False, scheme.tail)
    return float(val[0]) if np.ndim(x) == 0 else val


def ladder_values(func, x, ux, tail, core, scheme: QuadratureScheme, p: FracParams):
    """Ladder table (one row per rung) and the far-field error of the finest rung."""
    if len(scheme.ladder) < 2:
        raise ConfigError("principal value extrapolation needs at least two ladder entries")
    rows = [paired_laplacian(func, x, ux, tail, p.s, p.c, scheme.outer_radius, e, hh,
                             scheme.order, core, True, scheme.tail)
            for e, hh in scheme.ladder[:-1]]
    e, hh = scheme.ladder[-1]
    last, terr = paired_laplacian(func, x, ux, tail, p.s, p.c, scheme.outer_radius, e, hh,
                                  scheme.order, core, True, scheme.tail, with_tail_error=True)
    return np.stack(rows + [last]), terr


def gradient_ladder_values(func, x, tail, core, scheme: QuadratureScheme, p: FracParams):
    """Fractional-gradient analogue of ``ladder_values`` (without the constant)."""
    rows = [paired_gradient(func, x, tail, p.s, scheme.outer_radius, e, hh, scheme.order, core, scheme.tail)
            for e, hh in scheme.ladder[:-1]]
    e, hh = scheme.ladder[-1]
    last, terr = paired_gradient(func, x, tail, p.s, scheme.outer_radius, e, hh, scheme.order, core,
                                 scheme.tail, with_tail_error=True)
    return np.stack(rows + [last]), terr


def combine_ladder(scheme: QuadratureScheme, vals: np.ndarray):
    """Extrapolated value and error estimate per column of a ladder table."""
    steps = [e for e, _ in scheme.ladder]
    value = np.empty(vals.shape[1])
    err = np.empty(vals.shape[1])
    for j in range(vals.shape[1]):
        col = vals[:, j]
        if len(col) >= 3:
            res = richardson_extrapolate(list(zip(steps, col)))
            lim = res.limit if res.ok else col[-1]
        else:
            lim = col[-1]
        value[j] = lim
        # spread over the two finest rungs, plus the extrapolation correction
        err[j] = max(abs(col[-1] - col[-2]), abs(col[-1] - lim))
    return value, err


def frac_laplacian(u: AmbientFunction, x, scheme: QuadratureScheme, p: FracParams):
    """Principal value (-Delta)^s u(x) with an error estimate from the ladder.

    Returns ``(value, error_estimate)``; arrays when ``x`` is an array.
    """
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    _check_points(u, xa)
    vals, terr = ladder_values(_rowwise(u), xa, u.f(xa), u.tail, u.core_radius, scheme, p)
    value, err = combine_ladder(scheme, vals)
    err = err + terr
    if np.ndim(x) == 0:
        return float(value[0]), float(err[0])
    return value, err


# --------------------------------------------------------------------------
# weighted L^1 norm


def l1s_norm(u: AmbientFunction, scheme: QuadratureScheme, p: FracParams):
    """int |u(y)| / (1 + |y|^(n+2s)) dy; returns ``(value, finite)``."""
    R = scheme.outer_radius
    core = u.core_radius if math.isfinite(u.core_radius) else R
    total = 0.0
    for sign in (1.0, -1.0):
        z, w = composite_rule(panel_breaks(0.0, R, scheme.h, core=core, grade=math.inf), scheme.order)
        y = sign * z
        total += float((np.abs(u.f(y)) / (1.0 + z ** (1 + 2 * p.s)) * w).sum())
    finite = True
    if scheme.tail == "model" and u.tail.kind != "none":
        t = u.tail
        for A, B in ((t.left, t.left_coef), (t.right, t.right_coef)):
            A = float(np.max(np.abs(A)))
            B = float(np.max(np.abs(B))) if t.kind == "power" else 0.0
            total += A * R ** (-2 * p.s) / (2 * p.s)
            if B:
                q = t.exponent - 1 - 2 * p.s
                if q >= -1:
                    finite = False
                else:
                    total += B * R ** (q + 1) / (-q - 1)
    return total, finite
