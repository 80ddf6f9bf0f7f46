import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraccal.calibration import DomainSpec
from fraccal.fields import linear_field, peierls_nabarro_field
from fraccal.local import (
    calibration_CL,
    calibration_CL_alt,
    dirichlet,
    euler_lagrange_op,
    excess,
    first_variation_residual,
    lagrangian_by_name,
    leaf_gradient_identity_residual,
    local_energy,
    neumann_op,
    p_dirichlet,
    semilinear,
    weierstrass_decomposition_residual,
)
from fraccal.quadrature import AmbientFunction, ConfigError, DomainError, TailModel
from fraccal.verifier import _bump

OMEGA = DomainSpec(-1.0, 1.0)
slopes = st.floats(min_value=-5, max_value=5)


def smooth_competitor(amplitude=0.3):
    return AmbientFunction(lambda y: np.asarray(y) + amplitude * np.sin(2 * np.asarray(y)) + 0.1,
                           derivative=lambda y: 1 + 2 * amplitude * np.cos(2 * np.asarray(y)), name="wavy")


def test_lagrangian_lookup():
    assert lagrangian_by_name("dirichlet").name == "dirichlet"
    assert lagrangian_by_name("p-dirichlet:4").name == "p-dirichlet:4"
    assert lagrangian_by_name("semilinear:cosine-well").name == "semilinear:cosine-well"
    with pytest.raises(ConfigError):
        lagrangian_by_name("unknown")
    with pytest.raises(ConfigError):
        p_dirichlet(1.0)


@given(q=slopes, qt=slopes)
def test_dirichlet_excess_is_half_square(q, qt):
    assert excess(dirichlet(), 0.0, 0.0, q, qt) == pytest.approx(0.5 * (qt - q) ** 2, abs=1e-8)


@given(q=slopes, qt=slopes)
def test_convex_excess_nonnegative(q, qt):
    G = p_dirichlet(4)
    # central differences with step 1e-5 lose slopes below the step size; allow that floor
    floor = 1e-9 * (1 + q**4 + qt**4)
    assert excess(G, 0.0, 0.0, q, qt) >= -floor


def test_euler_lagrange_of_lines_vanishes():
    w = linear_field().leaf_function(0.3)
    xs = np.linspace(-0.9, 0.9, 7)
    for G in (dirichlet(), p_dirichlet(4)):
        assert np.max(np.abs(euler_lagrange_op(G, w, xs))) < 1e-6


def test_euler_lagrange_of_parabola():
    w = AmbientFunction(lambda y: np.asarray(y) ** 2, derivative=lambda y: 2 * np.asarray(y))
    assert euler_lagrange_op(dirichlet(), w, np.array([0.2]))[0] == pytest.approx(-2.0, abs=1e-6)
    with pytest.raises(DomainError):
        euler_lagrange_op(dirichlet(), w, np.array([0.9999]), dom=OMEGA)


def test_neumann_operator():
    w = linear_field().leaf_function(0.0)
    assert neumann_op(dirichlet(), w, 1.0, OMEGA) == pytest.approx(1.0, abs=1e-8)
    assert neumann_op(dirichlet(), w, -1.0, OMEGA) == pytest.approx(-1.0, abs=1e-8)
    with pytest.raises(DomainError):
        neumann_op(dirichlet(), w, 0.0, OMEGA)


@pytest.mark.parametrize("G", [dirichlet(), p_dirichlet(4)], ids=["dirichlet", "p4"])
def test_calibration_forms_agree(G):
    w = smooth_competitor()
    a = calibration_CL(G, linear_field(), w, OMEGA)
    b = calibration_CL_alt(G, linear_field(), 0.0, w, OMEGA)
    assert abs(a.value - b.value) <= 3 * (a.error_estimate + b.error_estimate)


@pytest.mark.parametrize("G", [dirichlet(), p_dirichlet(4)], ids=["dirichlet", "p4"])
def test_weierstrass_decomposition(G):
    r = weierstrass_decomposition_residual(G, linear_field(), smooth_competitor(), OMEGA)
    assert abs(r.value) <= 3 * r.error_estimate
    assert r.parts["excess_integral"] >= 0


def test_null_lagrangian_for_fixed_boundary_values():
    val, der = _bump(0.0, 0.8, 0.4)
    f = linear_field()
    w = AmbientFunction(lambda y: f.leaf(0.0, y) + val(y), derivative=lambda y: 1 + der(y))
    a = calibration_CL(dirichlet(), f, w, OMEGA)
    b = calibration_CL(dirichlet(), f, f.leaf_function(0.0), OMEGA)
    assert abs(a.value - b.value) <= 3 * (a.error_estimate + b.error_estimate) + 1e-12
    # and the energy is larger than the leaf energy
    assert local_energy(dirichlet(), w, OMEGA) > local_energy(dirichlet(), f.leaf_function(0.0), OMEGA)


def test_first_variation_of_extremal_vanishes():
    val, der = _bump(0.1, 0.5, 1.0)
    eta = AmbientFunction(val, derivative=der)
    w = linear_field().leaf_function(0.0)
    assert abs(first_variation_residual(dirichlet(), w, eta, OMEGA)) < 1e-6


def test_first_variation_matches_pairing_for_non_extremal():
    val, der = _bump(0.0, 0.5, 1.0)
    eta = AmbientFunction(val, derivative=der)
    w = AmbientFunction(lambda y: np.asarray(y) ** 2, derivative=lambda y: 2 * np.asarray(y))
    assert abs(first_variation_residual(semilinear("cosine-well"), w, eta, OMEGA)) < 1e-5


def test_gradient_identity_converges_at_second_order():
    f = peierls_nabarro_field()
    val, der = _bump(0.0, 0.9, 0.5)
    w = AmbientFunction(lambda y: f.leaf(val(y), y), derivative=None)
    steps = [0.04, 0.02, 0.01, 0.005]
    res = [abs(leaf_gradient_identity_residual(f, w, 0.3, h)) for h in steps]
    orders = [math.log2(a / b) for a, b in zip(res, res[1:])]
    assert min(orders) >= 1.8


UNIT_INTERVAL = DomainSpec(0.0, 1.0)


def test_p_dirichlet_euler_lagrange_of_parabola():
    w = AmbientFunction(lambda y: np.asarray(y) ** 2, derivative=lambda y: 2 * np.asarray(y))
    xs = np.array([0.2, 0.5, 0.8])
    assert np.allclose(euler_lagrange_op(p_dirichlet(4), w, xs), -24 * xs**2, atol=1e-5)


def test_semilinear_euler_lagrange_of_zero():
    zero = AmbientFunction(lambda y: np.zeros(np.shape(y)), derivative=lambda y: np.zeros(np.shape(y)))
    assert np.all(euler_lagrange_op(semilinear("negative-quadratic"), zero, np.array([0.1, 0.4])) == 0)


def test_p_dirichlet_neumann_and_excess_values():
    w = linear_field().leaf_function(0.0)
    assert neumann_op(p_dirichlet(4), w, 1.0, UNIT_INTERVAL) == pytest.approx(1.0, abs=1e-8)
    assert excess(p_dirichlet(4), 0.0, 0.0, 1.0, 2.0) == pytest.approx(11 / 4, abs=1e-8)
    assert excess(p_dirichlet(4), 0.0, 0.0, 1.3, 1.3) == 0.0


@pytest.mark.parametrize("G, expected", [(dirichlet(), 0.5), (p_dirichlet(4), 0.25)], ids=["dirichlet", "p4"])
def test_calibration_on_unit_interval(G, expected):
    f = linear_field()
    val, der = _bump(0.5, 0.4, 0.3)
    w = AmbientFunction(lambda y: np.asarray(y) + val(y), derivative=lambda y: 1 + der(y))
    for cand in (f.leaf_function(0.0), w):
        a = calibration_CL(G, f, cand, UNIT_INTERVAL)
        b = calibration_CL_alt(G, f, 0.0, cand, UNIT_INTERVAL)
        assert a.value == pytest.approx(expected, abs=3 * a.error_estimate + 1e-12)
        assert b.value == pytest.approx(expected, abs=3 * b.error_estimate + 1e-12)


def test_boundary_term_for_different_boundary_values():
    # C_L(w) - C_L(leaf) picks up the boundary term when w moves the endpoint values
    f = linear_field()
    w = AmbientFunction(lambda y: np.asarray(y) + 0.1 * np.asarray(y) ** 2, derivative=lambda y: 1 + 0.2 * np.asarray(y))
    b = calibration_CL_alt(dirichlet(), f, 0.0, w, UNIT_INTERVAL)
    # the Neumann term at x = 1 integrates dG/dq = 1 over lambda in (1, 1.1)
    assert b.parts["boundary"] == pytest.approx(0.1, abs=1e-10)
    assert b.parts["interior"] == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize("G", [dirichlet(), p_dirichlet(4), semilinear("cosine-well")], ids=lambda g: g.name)
@given(x=st.floats(-0.9, 0.9), lam=st.floats(-1.5, 1.5))
@settings(max_examples=15, deadline=None)
def test_field_divergence_equals_euler_lagrange(G, x, lam):
    from fraccal.local import field_divergence_residual

    assert abs(field_divergence_residual(G, peierls_nabarro_field(), x, lam)) < 5e-5


def test_one_sided_local_fixture(tmp_path):
    from fraccal.cli import ExperimentConfig, run

    code, rep = run(ExperimentConfig(experiment="local", field="constant", lagrangian="semilinear:negative-quadratic",
                                     count=5, out=str(tmp_path)))
    assert code == 0
    assert rep.results["classification"] == "one-sided"
    assert rep.properties["one_sided_lower_bound"].verdict == "pass"
    assert rep.properties["one_sided_lower_bound"].gap > 0
