import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import christoffel_fd, r_fd

from lolight3.curvature import (
    check_parallel_X,
    christoffels_at,
    curvature_r_at,
    curvature_r_closed_form,
    gauss_bonnet,
    leaf_holonomy_alpha,
    metric_compatibility_residual,
    parallel_transport_loop,
    quotient_connection_b,
)
from lolight3.errors import NotInNormalForm
from lolight3.model import LatticeSpec, MetricSpec
from lolight3.periodic import PeriodicFn2D as F
from lolight3.periodic import ThetaSpec, grid_points

L2_SIN = F.const(2.0) + F.sin(0, 1, 1.0)
PTS = [(0.13, 0.71), (0.5, 0.05), (0.91, 0.42)]


def cos_y_spec():
    return MetricSpec.flat(0).with_(mu=F.cos(1, 0, 1.0))


def test_parallel_field_on_corpus(corpus):
    for spec, _ in corpus.values():
        assert check_parallel_X(spec, 16) < 1e-9


def test_christoffels_match_finite_differences(corpus):
    for name in ("case2_diophantine", "case5_psi", "case4_sigma"):
        spec = corpus[name][0]
        for y, z in PTS:
            spectral = christoffels_at(spec, np.array([y]), np.array([z]))[0]
            assert np.abs(spectral - christoffel_fd(spec, y, z)).max() < 1e-7


def test_metric_compatibility(corpus):
    assert metric_compatibility_residual(corpus["case3_phi0"][0]) < 1e-6


def test_r_matches_finite_difference_oracle(corpus):
    for spec, _ in corpus.values():
        for y, z in PTS:
            full = curvature_r_at(spec, np.array([y]), np.array([z]))[0]
            assert abs(full - r_fd(spec, y, z)) < 1e-6 * (1 + abs(full))


def test_r_hand_computed_example():
    y, z = grid_points(24)
    r = curvature_r_at(cos_y_spec(), y, z)
    assert np.abs(r + 2 * math.pi ** 2 * np.cos(2 * math.pi * y)).max() < 1e-9


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_r_independent_of_admissible_frame(a, b, c):
    spec = MetricSpec(LatticeSpec.gamma(1), ThetaSpec.golden(), 1.3, F.const(1.4),
                      F.cos(1, 1, 0.2), F.sin(1, 0, 0.5) + F.cos(0, 1, 0.3))
    y, z = np.array([0.2, 0.7]), np.array([0.4, 0.9])
    r0 = curvature_r_at(spec, y, z)
    r1 = curvature_r_at(spec, y, z, frame_mix=(a, b, c))
    assert np.allclose(r0, r1, atol=1e-9 * (1 + np.abs(r0).max()))


def test_closed_form_matches_full_tensor(reports):
    y, z = grid_points(24)
    for name in ("case4_sigma", "case5_psi", "case6_chi", "case9_flow"):
        spec = reports[name].spec
        gap = np.abs(curvature_r_closed_form(spec).eval(y, z) - curvature_r_at(spec, y, z)).max()
        assert gap < 1e-6


def test_closed_form_needs_normal_form():
    spec = MetricSpec.flat(0).with_(nu=F.cos(1, 0, 0.3))
    with pytest.raises(NotInNormalForm):
        curvature_r_closed_form(spec)


def test_gauss_bonnet_on_corpus(corpus):
    for spec, _ in corpus.values():
        assert abs(gauss_bonnet(spec, 64)) < 1e-6


def test_gauss_bonnet_detects_nonzero_integrand():
    # r integrates to zero only against the parallel density; against dy dz it need not
    spec = MetricSpec.flat(0).with_(L2=L2_SIN)
    y, z = grid_points(64)
    r = curvature_r_at(spec, y, z)
    assert abs(r.mean()) > 1e-3
    assert abs(gauss_bonnet(spec, 64)) < 1e-10


@pytest.mark.parametrize("z", [0.0, 0.3])
def test_leaf_holonomy(z):
    spec = MetricSpec.flat(0).with_(L2=L2_SIN)
    alpha = -2 * math.pi * math.cos(2 * math.pi * z) / 2.0
    assert math.isclose(float(leaf_holonomy_alpha(spec, z)), alpha, abs_tol=1e-12)
    m2 = parallel_transport_loop(spec, z, "gamma2")
    assert np.abs(m2 - np.array([[1.0, alpha], [0.0, 1.0]])).max() < 1e-6
    assert np.abs(parallel_transport_loop(spec, z, "gamma1") - np.eye(2)).max() < 1e-8


def test_quotient_connection_constant_part():
    spec = MetricSpec(LatticeSpec.gamma(2), ThetaSpec.rational(0), 0.8, L2_SIN, F.const(0.3),
                      F.zero())
    b = quotient_connection_b(spec, np.array([0.1, 0.6]), np.array([0.2, 0.8]))
    assert np.allclose(b, -2 * 0.8, atol=1e-10)


def test_quotient_connection_fluctuating_part():
    nu, mu = F.cos(1, 1, 0.3), F.sin(1, 2, 0.4)
    spec = MetricSpec(LatticeSpec.gamma(0), ThetaSpec.rational(0), 1.0, F.const(1.0), nu, mu)
    y, z = np.array([0.1, 0.6, 0.33]), np.array([0.2, 0.8, 0.51])
    expected = nu.dz().eval(y, z) - 0.5 * mu.dy().eval(y, z)
    assert np.allclose(quotient_connection_b(spec, y, z), expected, atol=1e-10)
