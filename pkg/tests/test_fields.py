import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraccal.fields import (
    AdmissibilityError,
    LeafParam,
    field_by_name,
    get_potential,
    leaf_parameter,
    linear_field,
    load_profile_csv,
    make_constant_field,
    make_translation_field,
    make_vertical_field,
    peierls_nabarro_field,
    validate_field,
)
from fraccal.quadrature import AmbientFunction, ConfigError, FracParams, QuadratureScheme, TailModel

coords = st.floats(min_value=-3, max_value=3)
indices = st.floats(min_value=-3, max_value=3)


@given(x=coords, t=indices)
@settings(max_examples=80)
def test_peierls_nabarro_round_trip(x, t):
    f = peierls_nabarro_field()
    lam = f.leaf(t, x)
    got = leaf_parameter(LeafParam(f), np.array([x]), np.array([lam]))[0]
    assert got == pytest.approx(t, abs=1e-10)
    assert got == pytest.approx(float(f.inverse(x, lam)), abs=1e-10)


@given(x=coords, t=indices)
@settings(max_examples=50)
def test_linear_round_trip(x, t):
    f = linear_field()
    got = leaf_parameter(LeafParam(f), np.array([x]), np.array([x + t]))[0]
    assert got == pytest.approx(t, abs=1e-12)


@given(x=coords, lam=st.floats(min_value=-1, max_value=1))
@settings(max_examples=50)
def test_constant_round_trip(x, lam):
    f = make_constant_field()
    assert leaf_parameter(LeafParam(f), np.array([x]), np.array([lam]))[0] == pytest.approx(lam, abs=1e-13)


def test_outside_foliated_region():
    f = make_constant_field((-1.0, 1.0))
    with pytest.raises(AdmissibilityError, match="outside foliated region"):
        leaf_parameter(LeafParam(f), np.array([0.0]), np.array([1.5]))
    pn = peierls_nabarro_field()
    with pytest.raises(AdmissibilityError):
        leaf_parameter(LeafParam(pn), np.array([0.0]), np.array([4.0]))


def test_distance_to_boundary():
    assert make_constant_field((-1, 1)).distance_to_boundary(0.25) == 0.75
    assert math.isinf(peierls_nabarro_field().distance_to_boundary(0.0))


def test_vertical_and_translation_builders():
    prof = AmbientFunction(lambda y: np.tanh(y), TailModel.constant(-1.0, 1.0), core_radius=5.0,
                           derivative=lambda y: 1 / np.cosh(y) ** 2, name="tanh")
    v = make_vertical_field(prof)
    assert v.leaf(0.5, 0.0) == pytest.approx(0.5)
    assert v.tail(0.5).right == pytest.approx(1.5)
    tr = make_translation_field(prof)
    assert tr.leaf(1.0, 0.0) == pytest.approx(math.tanh(1.0))
    got = leaf_parameter(LeafParam(tr), np.array([0.3]), np.array([math.tanh(0.8)]))[0]
    assert got == pytest.approx(0.5, abs=1e-10)


def test_translation_rejects_non_monotone_profile():
    prof = AmbientFunction(lambda y: np.cos(y), TailModel.none(), core_radius=5.0)
    with pytest.raises(AdmissibilityError):
        make_translation_field(prof)


def test_profile_csv(tmp_path):
    p = tmp_path / "layer.csv"
    xs = np.linspace(-20, 20, 401)
    p.write_text("x,value\n" + "\n".join(f"{float(x)!r},{2 * math.atan(x)!r}" for x in xs) + "\n")
    prof = load_profile_csv(p)
    assert float(prof(np.asarray(0.05))) == pytest.approx(2 * math.atan(0.05), abs=1e-4)
    assert float(prof(np.asarray(50.0))) == pytest.approx(2 * math.atan(20.0))
    f = field_by_name(f"translation:{p}")
    assert f.leaf(0.0, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_profile_csv_header_checked(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n0,1\n1,2\n")
    with pytest.raises(ConfigError):
        load_profile_csv(p)
    p.write_text("x,value\n0,1\n1,oops\n")
    with pytest.raises(ConfigError, match="malformed"):
        load_profile_csv(p)


def test_unknown_names():
    with pytest.raises(ConfigError):
        field_by_name("nope")
    with pytest.raises(ConfigError):
        get_potential("nope")


def test_potential_derivatives():
    for name in ("zero", "cosine-well", "negative-quadratic"):
        pot = get_potential(name)
        u = np.linspace(-2, 2, 9)
        d = 1e-6
        assert np.allclose((pot.F(u + d) - pot.F(u - d)) / (2 * d), pot.Fprime(u), atol=1e-8)


def test_validation_of_builtin_fields():
    sch = QuadratureScheme(eps=0.1, h=0.1)
    rep = validate_field(peierls_nabarro_field(), (-1, 1), sch, FracParams.of(0.5))
    assert rep.ok, rep.conditions
    rep = validate_field(linear_field(), (-1, 1), sch, FracParams.of(0.25))
    assert rep.conditions["l1s_finite"]["verdict"] == "fail"
    rep = validate_field(linear_field(), (-1, 1), sch, FracParams.of(0.75))
    assert rep.ok


def test_validation_flags_decreasing_field():
    f = peierls_nabarro_field()
    from dataclasses import replace

    flipped = replace(f, leaf=lambda t, x: -2 * np.arctan(np.add(x, t)))
    rep = validate_field(flipped, (-1, 1), QuadratureScheme(eps=0.1, h=0.1), FracParams.of(0.5))
    assert rep.conditions["strict_in_domain"]["verdict"] == "fail"
