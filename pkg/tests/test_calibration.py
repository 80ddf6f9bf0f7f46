"""Calibration engine against brute-force high-precision oracles.

The frozen constants below were computed independently with mpmath adaptive
quadrature (30 significant digits where noted) and are not produced by this
library.
"""

import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import gamma

from conftest import gaussian
from fraccal.calibration import (
    DomainSpec,
    base_competitor,
    calibration_C,
    candidate_functional,
    competitor_from_function,
    competitor_from_shift,
    energy_difference,
    energy_gagliardo,
    energy_semilinear,
    fractional_gradient,
    inequality_gap,
    leaf_gradient,
    leaf_laplacian,
    q_integral,
    residual_integral,
)
from fraccal.fields import AdmissibilityError, get_potential, linear_field, make_constant_field, peierls_nabarro_field
from fraccal.quadrature import AmbientFunction, ConfigError, FracParams, TailModel, constant_function, uniform_rule
from fraccal.verifier import _bump

# (c/4) * Gagliardo integral of 2 arctan over Q((-1,1)) at s = 1/2
LAYER_GAGLIARDO = 4.2301420791023
# the same minus the integral of 1 - cos(2 arctan x) = 2x^2/(1+x^2) over (-1,1), i.e. 4 - pi
LAYER_SEMILINEAR = 3.3717347327
# pi * (2 asinh(1) + pi/2) - LAYER_GAGLIARDO, from the closed-form half gradient of the layer
GRADIENT_CANDIDATE_CONTACT_GAP = 6.2424936935397
# Gagliardo energy at s = 3/4 of the bump with centre 0.1, radius 0.6, peak 0.4 (30 digits)
BUMP_ENERGY = 0.195603567935564


@pytest.fixture(scope="module")
def half():
    return FracParams.of(0.5)


def test_domain_validation():
    with pytest.raises(ConfigError):
        DomainSpec(1.0, -1.0)
    with pytest.raises(ConfigError):
        DomainSpec(-math.inf, 1.0)


def test_layer_energy_oracle(scheme, omega, half):
    e = energy_gagliardo(peierls_nabarro_field().leaf_function(0.0), omega, scheme, half)
    assert not e.divergent
    assert abs(e.value - LAYER_GAGLIARDO) <= max(3 * e.error_estimate, 1e-9)
    assert set(e.blocks) == {"omega_omega", "omega_complement", "complement_omega"}
    assert e.blocks["omega_complement"] == pytest.approx(e.blocks["complement_omega"], rel=1e-6)


def test_layer_semilinear_energy(scheme, omega, half):
    e = energy_semilinear(peierls_nabarro_field().leaf_function(0.0), omega, get_potential("cosine-well"),
                          scheme, half)
    assert abs(e.value - LAYER_SEMILINEAR) <= max(3 * e.error_estimate, 1e-9)
    assert e.blocks["potential"] == pytest.approx(-(4 - math.pi), abs=1e-13)


def test_energy_of_constants_vanishes(scheme, omega, half):
    assert energy_gagliardo(constant_function(2.5), omega, scheme, half).value == 0.0


def test_bump_energy_oracle(scheme, omega):
    val, der = _bump(0.1, 0.6, 0.4)
    eta = AmbientFunction(val, TailModel.constant(0.0, 0.0), core_radius=1.0, derivative=der)
    e = energy_gagliardo(eta, omega, scheme, FracParams.of(0.75))
    assert abs(e.value - BUMP_ENERGY) <= max(3 * e.error_estimate, 1e-11)


@pytest.mark.parametrize("s", [0.25, 0.75])
def test_unbounded_leaf_energy_diverges(s, scheme, omega):
    # |x - y|^2 |x - y|^(-1-2s) is not integrable at infinity for any s < 1
    e = energy_gagliardo(linear_field().leaf_function(0.0), omega, scheme, FracParams.of(s))
    assert e.divergent


def test_energy_difference_of_identical_functions(scheme, omega, half):
    w = peierls_nabarro_field().leaf_function(0.3)
    assert energy_difference(w, w, omega, scheme, half).value == 0.0


def test_q_integral_is_additive(scheme, omega, half):
    f1 = lambda X, Y: (np.tanh(X) - np.tanh(Y)) ** 2
    f2 = lambda X, Y: (np.arctan(X) - np.arctan(Y)) ** 2
    a = q_integral(f1, omega, half, scheme).value
    b = q_integral(f2, omega, half, scheme).value
    ab = q_integral(lambda X, Y: f1(X, Y) + f2(X, Y), omega, half, scheme).value
    assert ab == pytest.approx(a + b, rel=1e-12)


# ---------------------------------------------------------------- operators on leaves


def test_layer_is_extremal(scheme, half):
    f = peierls_nabarro_field()
    xs = np.linspace(-1, 1, 11)
    for t in (-1.0, 0.0, 1.0):
        lap, err = leaf_laplacian(f, np.full(xs.shape, t), xs, scheme, half)
        res = lap - np.sin(f.leaf(t, xs))
        assert np.all(np.abs(res) <= 3 * err + 1e-10)


def test_truncated_leaf_laplacian_matches_scalar_operator(scheme, half):
    from fraccal.quadrature import frac_laplacian_eps

    f = peierls_nabarro_field()
    lap, _ = leaf_laplacian(f, np.array([0.4]), np.array([0.2]), scheme, half, eps=0.1)
    ref = frac_laplacian_eps(f.leaf_function(0.4), 0.2, scheme, half, eps=0.1)
    assert lap[0] == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("x", [-0.8, 0.0, 0.5, 3.0])
def test_layer_half_gradient_closed_form(x, scheme, half):
    exact = 2 * math.sqrt(math.pi) * (1 + x * x) ** -0.25 * math.cos(0.5 * math.atan(x))
    g, e = leaf_gradient(peierls_nabarro_field(), np.array([0.0]), np.array([x]), scheme, half)
    assert abs(g[0] - exact) <= 3 * e[0] + 1e-10


@pytest.mark.parametrize("s", [0.3, 0.5, 0.7])
@pytest.mark.parametrize("x", [0.3, 1.1])
def test_gaussian_gradient_against_fourier_integral(s, x, scheme):
    # the gradient has symbol i xi |xi|^(s-1); the Gaussian transform is sqrt(pi) exp(-xi^2/4)
    ref = -integrate.quad(lambda xi: xi**s * math.sqrt(math.pi) * math.exp(-xi * xi / 4) * math.sin(xi * x),
                          0, 60, epsabs=1e-14, limit=400)[0] / math.pi
    val, err = fractional_gradient(gaussian(), x, scheme, FracParams.of(s))
    assert abs(val - ref) <= 3 * err + 1e-9


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_gaussian_energy_identity(s, scheme):
    # int exp(-x^2) (-Delta)^s exp(-x^2) dx = 2^(s - 1/2) Gamma(s + 1/2)
    from fraccal.quadrature import frac_laplacian

    xs, ws = uniform_rule(-6.0, 6.0, 0.5, 10)
    vals, errs = frac_laplacian(gaussian(), xs, scheme, FracParams.of(s))
    g = np.exp(-xs * xs)
    total = float((g * vals * ws).sum())
    bound = float((g * errs * ws).sum())
    assert abs(total - 2 ** (s - 0.5) * gamma(s + 0.5)) <= 3 * bound + 1e-9


# ---------------------------------------------------------------- calibration


def _layer_competitor(omega, center=0.0, radius=0.7, amplitude=0.3):
    val, der = _bump(center, radius, amplitude)
    return competitor_from_shift(peierls_nabarro_field(), 0.0, omega, val, der, label="bump")


def test_contact_property(scheme, omega, half):
    f = peierls_nabarro_field()
    c = calibration_C(f, 0.0, base_competitor(f, 0.0, omega), omega, get_potential("cosine-well"), scheme, half)
    assert c.delta == 0.0
    assert abs(c.value - LAYER_SEMILINEAR) <= max(3 * c.error_estimate, 1e-9)


def test_null_lagrangian_on_layer(scheme, omega, half):
    comp = _layer_competitor(omega)
    delta, err = residual_integral(peierls_nabarro_field(), comp, omega, get_potential("cosine-well"), scheme, half)
    assert abs(delta) <= max(3 * err, 1e-9)


def test_calibration_bounds_energy(scheme, omega, half):
    comp = _layer_competitor(omega, 0.2, 0.6, -0.4)
    g = inequality_gap(peierls_nabarro_field(), 0.0, comp, omega, scheme, half)
    assert g.value >= -3 * g.error_estimate
    assert g.value > 0.01


def test_competitor_from_function_recovers_index(omega):
    f = peierls_nabarro_field()
    val, der = _bump(0.0, 0.5, 0.2)
    w = AmbientFunction(lambda y: f.leaf(0.0 + val(y), y), f.tail(0.0), core_radius=6.0, name="wrapped")
    comp = competitor_from_function(f, 0.0, omega, w)
    xs = np.linspace(-0.9, 0.9, 7)
    assert np.allclose(comp.leaf_index(xs), val(xs), atol=1e-10)
    assert comp.leaf_index(np.array([3.0]))[0] == 0.0


def test_competitor_with_wrong_exterior_is_rejected(omega):
    f = peierls_nabarro_field()
    w = AmbientFunction(lambda y: f.leaf(0.1, y), f.tail(0.1))
    with pytest.raises(AdmissibilityError):
        competitor_from_function(f, 0.0, omega, w)


def test_constant_field_residual_is_t(scheme, omega, half):
    f = make_constant_field()
    xs = np.linspace(-1, 1, 5)
    pot = get_potential("negative-quadratic")
    for t in (-0.5, 0.25):
        lap, _ = leaf_laplacian(f, np.full(xs.shape, t), xs, scheme, half)
        assert np.allclose(lap - pot.Fprime(f.leaf(t, xs)), t, atol=1e-12)


# ---------------------------------------------------------------- alternative candidates


def test_gradient_candidate_misses_contact(scheme, omega, half):
    f = peierls_nabarro_field()
    pot = get_potential("cosine-well")
    c3 = candidate_functional("F3", f, 0.0, base_competitor(f, 0.0, omega), omega, pot, scheme, half)
    e0 = energy_semilinear(f.leaf_function(0.0), omega, pot, scheme, half)
    gap = c3.value - e0.value
    err = c3.error_estimate + e0.error_estimate
    assert abs(gap - GRADIENT_CANDIDATE_CONTACT_GAP) <= max(3 * err, 1e-9)


def test_pair_candidate_is_not_null_lagrangian(scheme, omega):
    val, der = _bump(0.1, 0.6, 0.4)
    comp = competitor_from_shift(linear_field(), 0.0, omega, val, der)
    c2 = candidate_functional("F2", linear_field(), 0.0, comp, omega, get_potential("zero"), scheme,
                              FracParams.of(0.75))
    assert abs(c2.delta - (-3 * BUMP_ENERGY)) <= max(3 * c2.delta_error, 1e-9)
    assert abs(c2.delta) > 10 * c2.delta_error


def test_unknown_candidate(scheme, omega, half):
    f = peierls_nabarro_field()
    with pytest.raises(ConfigError):
        candidate_functional("F9", f, 0.0, base_competitor(f, 0.0, omega), omega, get_potential("zero"),
                             scheme, half)
