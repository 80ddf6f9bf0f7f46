"""Seeded admissible perturbations and calibration-property verdicts."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from fraccal.calibration import (
    AdmissibleCompetitor,
    DomainSpec,
    base_competitor,
    calibration_C,
    competitor_from_shift,
    energy_difference,
    energy_semilinear,
    inequality_gap,
    leaf_laplacian,
    potential_integral,
)
from fraccal.extrapolate import RichardsonResult, richardson_extrapolate
from fraccal.fields import AdmissibilityError, ExtremalField, LeafParam, Potential, leaf_parameter
from fraccal.parallel import parallel_map
from fraccal.quadrature import ConfigError, FracParams, QuadratureScheme

__all__ = [
    "PerturbationSpec",
    "Verdict",
    "VerificationReport",
    "ResidualProfile",
    "SHAPES",
    "check_admissible",
    "check_calibration_properties",
    "generate_admissible",
    "passes",
    "residual_sign_profile",
    "richardson_extrapolate",
    "RichardsonResult",
]

SHAPES = ("bump", "multi-bump", "leaf-modulation")
DEFAULT_REL_TOL = 1e-6


@dataclass(frozen=True)
class PerturbationSpec:
    seed: int = 42
    count: int = 20
    shape: str = "bump"
    amplitude_fraction: float = 0.5

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ConfigError(f"unknown perturbation shape {self.shape!r}; choose from {list(SHAPES)}")
        if not 0 <= self.amplitude_fraction < 1:
            raise ConfigError("amplitude_fraction must lie in [0, 1)")
        if self.count < 0:
            raise ConfigError("count must be non-negative")


def passes(gap: float, error: float, scale: float = 1.0, rel_tol: float = DEFAULT_REL_TOL,
           signed: bool = False) -> bool:
    """|gap| (or -gap when ``signed``) within max(3 * error, rel_tol * scale)."""
    tol = max(3.0 * error, rel_tol * abs(scale))
    return (-gap if signed else abs(gap)) <= tol


# --------------------------------------------------------------------------
# perturbations


def _bump(center: float, radius: float, amplitude: float):
    """Smooth bump exp(1 - 1/(1 - u^2)) with peak ``amplitude``, and its derivative."""
    def value(x):
        u = (np.asarray(x, dtype=float) - center) / radius
        out = np.zeros(u.shape)
        m = np.abs(u) < 1
        out[m] = amplitude * np.exp(1.0 - 1.0 / (1.0 - u[m] ** 2))
        return out

    def deriv(x):
        u = (np.asarray(x, dtype=float) - center) / radius
        out = np.zeros(u.shape)
        m = np.abs(u) < 1
        um = u[m]
        out[m] = amplitude * np.exp(1.0 - 1.0 / (1.0 - um**2)) * (-2 * um / (1 - um**2) ** 2) / radius
        return out

    return value, deriv


def _sum(parts):
    return (lambda x: sum(f(x) for f, _ in parts), lambda x: sum(d(x) for _, d in parts))


def _draw_shift(rng: np.random.Generator, dom: DomainSpec, shape: str, bound: float):
    half = 0.5 * dom.length
    mid = 0.5 * (dom.a + dom.b)
    if shape == "bump":
        radius = rng.uniform(0.3, 0.9) * half
        center = mid + rng.uniform(-1, 1) * (half - radius)
        amp = rng.choice([-1.0, 1.0]) * rng.uniform(0.3, 1.0) * bound
        return _bump(center, radius, amp), f"bump(c={center:.3f},r={radius:.3f},A={amp:.3f})"
    if shape == "multi-bump":
        k = int(rng.integers(2, 4))
        parts = []
        for _ in range(k):
            radius = rng.uniform(0.15, 0.5) * half
            center = mid + rng.uniform(-1, 1) * (half - radius)
            amp = rng.choice([-1.0, 1.0]) * rng.uniform(0.3, 1.0) * bound / k
            parts.append(_bump(center, radius, amp))
        return _sum(parts), f"multi-bump(k={k})"
    # a wide envelope times an oscillation, which bends the graph across several leaves
    radius = 0.98 * half
    freq = float(rng.integers(1, 4))
    phase = rng.uniform(0, 2 * math.pi)
    amp = rng.uniform(0.3, 1.0) * bound
    env, denv = _bump(mid, radius, amp)
    k = freq * math.pi / half

    def value(x):
        return env(x) * np.sin(k * (np.asarray(x) - mid) + phase)

    def deriv(x):
        arg = k * (np.asarray(x) - mid) + phase
        return denv(x) * np.sin(arg) + env(x) * k * np.cos(arg)

    return (value, deriv), f"leaf-modulation(freq={freq:g})"


def check_admissible(field_: ExtremalField, comp: AdmissibleCompetitor, dom: DomainSpec,
                     samples: int = 401, tol: float = 1e-12) -> AdmissibleCompetitor:
    """Sampled check of exterior match, continuity and graph inside the foliated region."""
    xo = np.concatenate([np.linspace(dom.a - 5, dom.a, samples), np.linspace(dom.b, dom.b + 5, samples)])
    ext = np.abs(comp.w(xo) - field_.leaf(comp.t0, xo)) <= tol * np.maximum(1.0, np.abs(comp.w(xo)))
    xs = np.linspace(dom.a, dom.b, samples)
    ws = comp.w(xs)
    ts = leaf_parameter(LeafParam(field_), xs, ws)
    in_g = bool(np.all(field_.contains_index(ts)))
    # no jump larger than the sampled slope allows
    dx = xs[1] - xs[0]
    slope = float(np.abs(comp.w.deriv(xs)).max())
    continuous = bool(np.all(np.isfinite(ws))) and float(np.abs(np.diff(ws)).max()) <= 2 * slope * dx + 1e-12
    if not (bool(np.all(ext)) and in_g and continuous):
        raise AdmissibilityError(f"competitor {comp.label!r} is not admissible "
                                 f"(exterior={bool(np.all(ext))}, graph={in_g}, continuous={continuous})")
    return comp


def generate_admissible(field_: ExtremalField, t0: float, dom: DomainSpec,
                        spec: PerturbationSpec) -> list[AdmissibleCompetitor]:
    """Competitors leaf(t0 + eta(x), x) with eta smooth and supported inside the domain.

    |eta| stays below amplitude_fraction times the distance from t0 to the
    ends of the index interval (times one when that interval is unbounded).
    """
    dist = field_.distance_to_boundary(t0)
    if dist < 0:
        raise AdmissibilityError(f"t0 = {t0} lies outside the index interval")
    if dist == 0 and spec.amplitude_fraction > 0:
        raise AdmissibilityError("t0 is an endpoint of the index interval: cannot perturb in both directions")
    bound = spec.amplitude_fraction * min(dist, 1.0)
    rng = np.random.default_rng(spec.seed)
    out = []
    for i in range(spec.count):
        (eta, deta), desc = _draw_shift(rng, dom, spec.shape, bound)
        comp = competitor_from_shift(field_, t0, dom, eta, deta, label=f"{spec.seed}:{i}:{desc}")
        out.append(check_admissible(field_, comp, dom))
    return out


# --------------------------------------------------------------------------
# residual profile


@dataclass
class ResidualProfile:
    rows: list[dict]
    classification: str
    tolerance: float

    def as_dict(self) -> dict:
        return {"classification": self.classification, "tolerance": self.tolerance, "rows": self.rows}


def residual_sign_profile(field_: ExtremalField, dom: DomainSpec, pot: Potential, t_grid: Sequence[float],
                          scheme: QuadratureScheme, p: FracParams, t0: float | None = None,
                          points: int = 41, abs_tol: float = 1e-6) -> ResidualProfile:
    """min/max over the domain of (-Delta)^s u^t - F'(u^t) for every t of the grid.

    Classification: ``extremal`` when every residual vanishes within the
    tolerance, ``one-sided`` when residuals are >= 0 for t >= t0 and <= 0
    for t <= t0, ``neither`` otherwise.
    """
    xs = np.linspace(dom.a, dom.b, points)
    rows = []
    worst_err = 0.0
    for t in t_grid:
        T = np.full(xs.shape, float(t))
        lap, err = leaf_laplacian(field_, T, xs, scheme, p)
        res = lap - pot.Fprime(field_.leaf(T, xs))
        e = float(err.max())
        worst_err = max(worst_err, e)
        rows.append({"t": float(t), "min_residual": float(res.min()), "max_residual": float(res.max()),
                     "error_estimate": e})
    tol = max(3.0 * worst_err, abs_tol)
    if all(max(abs(r["min_residual"]), abs(r["max_residual"])) <= tol for r in rows):
        cls = "extremal"
    elif t0 is not None and all(
        (r["t"] < t0 or r["min_residual"] >= -tol) and (r["t"] > t0 or r["max_residual"] <= tol) for r in rows
    ):
        cls = "one-sided"
    else:
        cls = "neither"
    return ResidualProfile(rows, cls, tol)


def default_t_grid(field_: ExtremalField, t0: float, count: int = 5) -> list[float]:
    reach = min(field_.distance_to_boundary(t0), 1.0)
    return [float(t0 + reach * v) for v in np.linspace(-1, 1, count)]


# --------------------------------------------------------------------------
# report


@dataclass
class Verdict:
    gap: float
    error_estimate: float
    verdict: str
    note: str = ""

    def as_dict(self) -> dict:
        out = {"gap": self.gap, "error_estimate": self.error_estimate, "verdict": self.verdict}
        if self.note:
            out["note"] = self.note
        return out


def _verdict(ok: bool) -> str:
    return "pass" if ok else "fail"


@dataclass
class VerificationReport:
    fixture: dict
    scheme: dict
    properties: dict = field(default_factory=dict)
    competitors: list = field(default_factory=list)
    residual_profile: dict | None = None
    wall_clock: float | None = None  # kept out of the JSON so reruns are byte-identical

    @property
    def all_pass(self) -> bool:
        return all(v.verdict in ("pass", "unverified") for v in self.properties.values())

    def as_dict(self) -> dict:
        return {
            "fixture": self.fixture,
            "scheme": self.scheme,
            "properties": {k: v.as_dict() for k, v in self.properties.items()},
            "competitors": self.competitors,
            "residual_profile": self.residual_profile,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, allow_nan=True) + "\n"


def _worst(rows: list[dict], key: str, err_key: str, signed: bool, scale: float, rel_tol: float) -> Verdict:
    """The competitor that comes closest to violating the property."""
    if not rows:
        return Verdict(0.0, 0.0, "pass", "no competitors")

    def margin(r):
        tol = max(3.0 * r[err_key], rel_tol * abs(scale))
        return (-r[key] if signed else abs(r[key])) - tol

    r = max(rows, key=margin)
    ok = all(passes(q[key], q[err_key], scale, rel_tol, signed) for q in rows)
    return Verdict(r[key], r[err_key], _verdict(ok), f"worst of {len(rows)} competitors")


def check_calibration_properties(field_: ExtremalField, t0: float, dom: DomainSpec, pot: Potential,
                                 spec: PerturbationSpec, scheme: QuadratureScheme, p: FracParams,
                                 rel_tol: float = DEFAULT_REL_TOL, t_grid: Sequence[float] | None = None,
                                 profile_points: int = 41) -> VerificationReport:
    """Run (C2), (C3), (C1) or (C1') and the minimality chain on seeded competitors."""
    comps = generate_admissible(field_, t0, dom, spec)
    profile = residual_sign_profile(field_, dom, pot, t_grid or default_t_grid(field_, t0), scheme, p,
                                    t0=t0, points=profile_points)
    base = field_.leaf_function(t0)
    e0 = energy_semilinear(base, dom, pot, scheme, p)
    scale = abs(e0.value) if not e0.divergent and e0.value != 0 else 1.0
    pint0 = potential_integral(base, dom, pot, scheme)

    c2 = calibration_C(field_, t0, base_competitor(field_, t0, dom), dom, pot, scheme, p, base_energy=e0)

    def evaluate(comp: AdmissibleCompetitor) -> dict:
        c = calibration_C(field_, t0, comp, dom, pot, scheme, p, base_energy=e0)
        g = inequality_gap(field_, t0, comp, dom, scheme, p)
        ed = energy_difference(comp.w, base, dom, scheme, p)
        min_gap = ed.value - (potential_integral(comp.w, dom, pot, scheme) - pint0)
        return {
            "label": comp.label,
            "delta_C": c.delta,
            "delta_C_error": c.delta_error,
            "energy_minus_calibration": g.value,
            "energy_minus_calibration_error": g.error_estimate,
            "energy_gap": min_gap,
            "energy_gap_error": ed.error_estimate,
        }

    rows = parallel_map(evaluate, comps)

    rep = VerificationReport(
        fixture={"field": field_.name, "t0": t0, "omega": dom.as_list(), "potential": pot.name,
                 "s": p.s, "c": p.c, "perturbation": {"seed": spec.seed, "count": spec.count,
                                                     "shape": spec.shape,
                                                     "amplitude_fraction": spec.amplitude_fraction},
                 "leaf_energy": e0.value, "leaf_energy_error": e0.error_estimate,
                 "leaf_energy_divergent": e0.divergent, "rel_tol": rel_tol},
        scheme=scheme.as_dict(),
        competitors=rows,
        residual_profile=profile.as_dict(),
    )
    rep.properties["C2"] = Verdict(c2.delta, c2.delta_error,
                                   _verdict(passes(c2.delta, c2.delta_error, scale, rel_tol)),
                                   "calibration of the base leaf minus its energy")
    rep.properties["C3"] = _worst(rows, "energy_minus_calibration", "energy_minus_calibration_error",
                                  True, scale, rel_tol)
    if profile.classification == "extremal":
        rep.properties["C1"] = _worst(rows, "delta_C", "delta_C_error", False, scale, rel_tol)
    elif profile.classification == "one-sided":
        rep.properties["C1'"] = _worst(rows, "delta_C", "delta_C_error", True, scale, rel_tol)
    else:
        rep.properties["C1"] = Verdict(math.nan, math.nan, "unverified",
                                       "leaf residuals are neither zero nor one-sided")
    rep.properties["minimality"] = _worst(rows, "energy_gap", "energy_gap_error", True, scale, rel_tol)
    return rep
