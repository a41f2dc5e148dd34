import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lolight3.errors import NonDiophantineSlope, ResonantFrequency, SmallDivisor, SpecError
from lolight3.periodic import (
    PeriodicFn1D,
    PeriodicFn2D,
    PolyPeriodic,
    ThetaSpec,
    cohomological_residual,
    exterior_density,
    gcd_ext,
    solve_cohomological,
    solve_directional,
    solve_exterior,
)

TAU = 2 * math.pi
coef = st.floats(-2.0, 2.0, allow_nan=False)
Z = np.linspace(0.0, 1.0, 37)


def trig(a, b):
    return lambda z: sum(a[j] * np.cos(TAU * j * z) + b[j] * np.sin(TAU * j * z)
                         for j in range(len(a)))


@st.composite
def series(draw, m=3):
    a = draw(st.lists(coef, min_size=m + 1, max_size=m + 1))
    b = [0.0] + draw(st.lists(coef, min_size=m, max_size=m))
    return a, b


@given(series())
def test_from_ab_matches_direct_evaluation(ab):
    a, b = ab
    f = PeriodicFn1D.from_ab(a, b)
    assert np.allclose(f.eval(Z), trig(a, b)(Z), atol=1e-12)


@given(series())
def test_derivative_matches_termwise_formula(ab):
    a, b = ab
    f = PeriodicFn1D.from_ab(a, b)
    expected = sum(TAU * j * (-a[j] * np.sin(TAU * j * Z) + b[j] * np.cos(TAU * j * Z))
                   for j in range(len(a)))
    assert np.allclose(f.derivative().eval(Z), expected, atol=1e-10)


@given(series(), series())
def test_product_is_pointwise(ab1, ab2):
    f, g = PeriodicFn1D.from_ab(*ab1), PeriodicFn1D.from_ab(*ab2)
    assert np.allclose((f * g).eval(Z), f.eval(Z) * g.eval(Z), atol=1e-10)


@given(series(), st.floats(-1.0, 1.0))
def test_shift_translates_argument(ab, t):
    f = PeriodicFn1D.from_ab(*ab)
    assert np.allclose(f.shift(t).eval(Z), f.eval(Z + t), atol=1e-10)


@given(series())
def test_antiderivative_inverts_derivative(ab):
    f = PeriodicFn1D.from_ab(*ab)
    g = f - f.mean()
    assert np.allclose(g.antiderivative().derivative().eval(Z), g.eval(Z), atol=1e-10)


def test_antiderivative_rejects_nonzero_mean():
    with pytest.raises(Exception):
        PeriodicFn1D.const(1.0).antiderivative()


def test_2d_partials_and_fiber_mean():
    f = PeriodicFn2D.cos(1, 2, 0.5) + PeriodicFn2D.sin(0, 1, 2.0) + PeriodicFn2D.const(3.0)
    y, z = np.meshgrid(Z, Z, indexing="ij")
    dy = -0.5 * TAU * np.sin(TAU * (y + 2 * z))
    dz = -TAU * np.sin(TAU * (y + 2 * z)) + 2.0 * TAU * np.cos(TAU * z)
    assert np.allclose(f.dy().eval(y, z), dy, atol=1e-10)
    assert np.allclose(f.dz().eval(y, z), dz, atol=1e-10)
    assert np.allclose(f.fiber_mean("y").eval(Z), 3.0 + 2.0 * np.sin(TAU * Z), atol=1e-12)
    assert f.depends_on_y() and f.depends_on_z() and not f.is_constant()


def test_json_round_trip_2d():
    f = PeriodicFn2D.cos(2, -1, 0.3) + PeriodicFn2D.sin(1, 1, 0.7)
    g = PeriodicFn2D.from_json(f.to_json())
    assert f.allclose(g, 0.0)


def test_json_rejects_bad_shape():
    with pytest.raises(SpecError):
        PeriodicFn2D.from_json({"max_freq": [1, 1], "coeffs": [[1.0]]})


def test_poly_periodic_eval():
    p = PolyPeriodic((PeriodicFn2D.cos(0, 1), PeriodicFn2D.const(2.0), PeriodicFn2D.const(-1.0)))
    y, z = 0.3, 1.7
    assert np.isclose(p.eval(y, z), math.cos(TAU * z) + 2 * z - z * z)
    assert np.isclose(p.dz().eval(y, z), -TAU * math.sin(TAU * z) + 2 - 2 * z)


def test_cohomological_golden_residual():
    h = PeriodicFn1D.from_ab([0.0, 1.0, 0.0], [0.0, 0.0, 0.3])
    th = ThetaSpec.golden()
    psi = solve_cohomological(h, th)
    assert cohomological_residual(psi, h, th, grid=512) < 1e-9
    assert abs(psi.mean()) < 1e-15


def test_cohomological_resonant_rational_raises():
    h = PeriodicFn1D.from_ab([0.0, 0.0, 1.0], [0.0, 0.0, 0.0])
    with pytest.raises(ResonantFrequency):
        solve_cohomological(h, ThetaSpec.rational(1, 2))


def test_cohomological_non_resonant_rational_solves():
    h = PeriodicFn1D.from_ab([0.0, 1.0], [0.0, 0.0])
    th = ThetaSpec.rational(1, 3)
    assert cohomological_residual(solve_cohomological(h, th), h, th) < 1e-12


def test_uncertified_float_slope_refused():
    h = PeriodicFn1D.from_ab([0.0, 1.0], [0.0, 0.0])
    with pytest.raises(NonDiophantineSlope):
        solve_cohomological(h, ThetaSpec.declared(0.3819660112501051, False))


def test_small_divisor_detected():
    h = PeriodicFn1D.from_ab([0.0, 1.0], [0.0, 0.0])
    with pytest.raises(SmallDivisor):
        solve_cohomological(h, ThetaSpec.declared(1e-12, True))


def test_directional_solver():
    nu = PeriodicFn2D.cos(1, 1, 0.4) + PeriodicFn2D.sin(0, 2, 0.2) + PeriodicFn2D.const(0.7)
    th = ThetaSpec.golden()
    N, k = solve_directional(nu, th)
    lhs = N.directional(th.value)
    y, z = np.meshgrid(Z, Z, indexing="ij")
    assert np.isclose(k, -0.7)
    assert np.allclose(lhs.eval(y, z), nu.eval(y, z) + k, atol=1e-12)


def test_exterior_round_trip():
    kappa = PeriodicFn2D.cos(1, 2, 0.4) + PeriodicFn2D.sin(2, 0, 0.1)
    th = ThetaSpec.golden()
    nu, mu = solve_exterior(kappa, th)
    assert exterior_density(nu, mu, th).allclose(kappa, 1e-12)


@given(st.integers(-500, 500), st.integers(-500, 500))
def test_gcd_ext_bezout(a, b):
    g, u, v = gcd_ext(a, b)
    assert g == math.gcd(a, b)
    assert u * a + v * b == g


def test_theta_kinds():
    assert math.isclose(ThetaSpec.golden().value, (math.sqrt(5) - 1) / 2)
    assert ThetaSpec.rational(2, 4).q == 2
    th = ThetaSpec.golden()
    assert ThetaSpec.from_json(th.to_json()).value == th.value
    # theta' = (c + d theta) / (a + b theta)
    m = th.mobius(1, 1, 0, 1)
    assert math.isclose(m.value, th.value / (1 + th.value))
    with pytest.raises(SpecError):
        ThetaSpec.quadratic(1, 1, 1, 4)
