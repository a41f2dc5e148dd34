from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import pullback_fd

from lolight3.curvature import christoffels_at
from lolight3.errors import CertificateMissing, IncompatibleNormalForm, NotLatticeNormalizing
from lolight3.model import ArithCertificates, LatticeSpec, MetricSpec, metric_coords_at
from lolight3.periodic import PeriodicFn2D as F
from lolight3.periodic import PolyPeriodic, ThetaSpec
from lolight3.transforms import (
    Affine,
    AffineMapSpec,
    YFun,
    affine_defect,
    check_r_invariance,
    chi,
    compose,
    decompose_E,
    flow_y,
    make_generator,
    nilpotency_residual,
    normalizes_lattice,
    phi0,
    power,
    psi,
    pullback_at,
    sample_points,
    sigma,
    verify_generator,
)

L2_SIN = F.const(2.0) + F.sin(0, 1, 1.0)


def closed(n=0, lam=1.0, k=0.2, mu=None, L2=L2_SIN, certs=None):
    return MetricSpec(LatticeSpec.gamma(n), ThetaSpec.rational(0), lam, L2, F.const(k),
                      mu if mu is not None else F.cos(1, 0, 0.3), certs or ArithCertificates())


def shear(beta):
    return AffineMapSpec((Affine([[1, 0, beta], [0, 1, 0], [0, 0, 1]], [0, 0, 0]),), "shear")


@pytest.mark.parametrize("n", [0, 1, 3])
def test_sigma_normalizes(n):
    assert normalizes_lattice(sigma(closed(n)), LatticeSpec.gamma(n, 0.2, 0.4))


def test_non_integer_shear_does_not_normalize():
    assert not normalizes_lattice(shear(0.3), LatticeSpec.gamma(0))
    with pytest.raises(NotLatticeNormalizing):
        affine_defect(closed(), shear(0.3))


def test_lattice_translations_normalize():
    lat = LatticeSpec.gamma(2, 0.1, 0.5)
    for g in lat.generators().values():
        m = AffineMapSpec.affine(g.matrix, g.vector)
        assert normalizes_lattice(m, lat)


def test_identity_has_zero_defect():
    d = affine_defect(closed(), AffineMapSpec.identity())
    assert d.C == 0.0 and d.residual == 0.0


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.5, -1.5])
def test_sigma_constant_is_two_over_lambda(lam):
    # sigma^* g adds 2 Lambda dz^2 = (2 / Lambda)(Lambda dz)^2
    spec = closed(lam=lam)
    d = affine_defect(spec, sigma(spec))
    assert abs(d.C - 2.0 / lam) < 1e-12 and d.residual < 1e-12


def test_pullback_matches_finite_difference(reports):
    spec = reports["case7_sigma_chi"].spec
    pts = sample_points(4)
    for phi in (sigma(spec), chi(spec), compose(chi(spec), flow_y(spec, 0.3))):
        assert np.abs(pullback_at(spec, phi, pts) - pullback_fd(spec, phi, pts)).max() < 1e-7


def test_pullback_functoriality(reports):
    spec = reports["case7_sigma_chi"].spec
    a, b = chi(spec), sigma(spec)
    pts = sample_points(6)
    img, J = b.apply_with_jac(pts)
    inner = pullback_at(spec, a, img)
    two_step = np.einsum("pai,pab,pbj->pij", J, inner, J)
    assert np.abs(pullback_at(spec, compose(a, b), pts) - two_step).max() < 1e-10


def additivity_pool(spec):
    return [sigma(spec), power(sigma(spec), -1), chi(spec), power(chi(spec), 2),
            flow_y(spec, 0.25)]


@given(st.integers(0, 4), st.integers(0, 4))
def test_defect_is_additive(i, j):
    spec = closed(lam=np.sqrt(3), k=0.1, mu=F.const(0.3), certs=ArithCertificates(Fraction(1)))
    pool = additivity_pool(spec)
    c = lambda m: affine_defect(spec, m, 8).C  # noqa: E731
    assert abs(c(compose(pool[i], pool[j])) - c(pool[i]) - c(pool[j])) < 1e-8


@pytest.mark.parametrize("k", [-3, 2, 5])
def test_sigma_powers(k):
    spec = closed()
    assert abs(affine_defect(spec, power(sigma(spec), k)).C - 2.0 * k) < 1e-10


def test_decompose_E_for_sigma():
    spec = closed(lam=1.5)
    E, N = decompose_E(spec, sigma(spec), np.array([0.1, 0.2, 0.3]))
    assert np.abs(N @ N).max() < 1e-12
    n2, shape = nilpotency_residual(spec, sigma(spec))
    assert n2 < 1e-10 and shape < 1e-10
    # only the X row is touched: N = C X (x) X_flat
    assert np.allclose(N[1:], 0.0)


def test_decompose_E_isometry_is_identity():
    spec = closed(mu=F.const(0.3))
    E, N = decompose_E(spec, flow_y(spec, 0.4), np.array([0.0, 0.1, 0.2]))
    assert np.allclose(E, np.eye(3)) and np.allclose(N, 0.0)


def test_non_affine_map_breaks_r_invariance():
    spec = closed(mu=F.cos(1, 0, 0.8))
    bend = AffineMapSpec((YFun(PolyPeriodic.of(F.sin(0, 1, 0.3))),), "bend")
    assert check_r_invariance(spec, bend) > 1e-2
    assert check_r_invariance(spec, sigma(spec)) < 1e-9


def test_connection_shared_by_defect_family():
    spec = closed()
    C = 0.7
    shifted = spec.with_(mu=spec.mu + C * spec.Lambda ** 2)
    y, z = np.array([0.2, 0.6]), np.array([0.1, 0.9])
    assert np.abs(christoffels_at(spec, y, z) - christoffels_at(shifted, y, z)).max() < 1e-8
    G0 = metric_coords_at(spec, y, z)
    G1 = metric_coords_at(shifted, y, z)
    xi = G0[:, 0, :]
    assert np.allclose(G1 - G0, C * np.einsum("pi,pj->pij", xi, xi))


def test_chi_on_unit_ratio_flat_metric():
    spec = MetricSpec.flat(0).with_(certs=ArithCertificates(Fraction(1)))
    m = chi(spec)
    assert m.params == {"p": 1, "q": 1}
    rep = verify_generator(spec, m)
    assert rep.passed() and abs(rep.defect.C) > 1e-3


def test_chi_needs_certificate():
    with pytest.raises(CertificateMissing):
        chi(closed())


def test_chi_rejects_wrong_certificate():
    with pytest.raises(IncompatibleNormalForm):
        chi(closed(certs=ArithCertificates(Fraction(2))))


def test_generator_preconditions():
    with pytest.raises(IncompatibleNormalForm):
        psi(closed(0), (2, 1))
    with pytest.raises(CertificateMissing):
        psi(closed(2))
    with pytest.raises(IncompatibleNormalForm):
        phi0(closed(0))
    with pytest.raises(ValueError):
        make_generator("nonsense", None, closed())


def test_phi0_on_flat_case3_form():
    spec = MetricSpec(LatticeSpec.gamma(1), ThetaSpec.golden(), 1.0, F.const(1.0), F.zero(),
                      F.zero())
    rep = verify_generator(spec, phi0(spec))
    assert rep.passed() and abs(rep.defect.C - 2.0) < 1e-9


def test_generators_pass_on_corpus(reports):
    for rep in reports.values():
        for g in rep.generators:
            assert g.report.passed(), g.name


def test_inverse_composes_to_identity(reports):
    spec = reports["case6_chi"].spec
    m = chi(spec)
    pts = np.random.default_rng(0).uniform(-1, 1, size=(10, 3))
    assert np.allclose(compose(m, m.inverse()).apply(pts), pts, atol=1e-10)
