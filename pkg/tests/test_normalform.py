import pytest
from hypothesis import given
from hypothesis import strategies as st

from lolight3.errors import NonUnimodular, NotInNormalForm
from lolight3.model import LatticeSpec, MetricSpec
from lolight3.normalform import (
    NormalFormClosed,
    NormalFormDio,
    act_gl2,
    act_signs,
    act_translation,
    act_Z,
    are_isometric,
    check_ranges,
    move_flow_u,
    move_flow_z,
    move_gl2,
    move_shear,
    move_signs,
    move_translate,
    move_x_function,
    reduce,
    straighten_slope,
    tuples_equal,
)
from lolight3.periodic import PeriodicFn1D, ThetaSpec
from lolight3.periodic import PeriodicFn2D as F
from lolight3.transforms import conjugates_lattice, isometry_residual

L2_SIN = F.const(2.0) + F.sin(0, 1, 1.0)


def generic(n=1, theta=None, L2=None):
    return MetricSpec(LatticeSpec.gamma(n, 0.0, 0.0), theta or ThetaSpec.golden(), 1.2,
                      L2 or F.const(1.5), F.cos(1, 1, 0.2) + F.const(0.1),
                      F.sin(1, 0, 0.3) + F.cos(0, 1, 0.1) + F.const(0.4))


def assert_isometry(before: MetricSpec, moved):
    # the recorded change psi satisfies psi^* g_out = g_in
    assert isometry_residual(before, moved.spec, moved.change) < 1e-9
    assert conjugates_lattice(moved.change, before.lattice, moved.spec.lattice)


@given(st.integers(-3, 3), st.integers(-3, 3), st.integers(0, 2))
def test_integer_shear_is_isometry(p, q, n):
    spec = generic(n)
    assert_isometry(spec, move_shear(spec, p, q))


@given(st.floats(-1, 1), st.integers(0, 2))
def test_flows_are_isometries(s, n):
    spec = generic(n)
    assert_isometry(spec, move_flow_u(spec, s))
    assert_isometry(spec, move_flow_z(spec, s))


@pytest.mark.parametrize("signs", [(1, 1, 1), (-1, -1, 1), (-1, 1, -1), (1, -1, -1)])
def test_sign_moves(signs):
    spec = generic(1)
    assert_isometry(spec, move_signs(spec, *signs))


@pytest.mark.parametrize("mat", [(1, 1, 0, 1), (2, 1, 1, 1), (1, 0, 1, 1), (1, -1, 0, 1),
                                 (0, 1, 1, 0)])
@pytest.mark.parametrize("n", [0, 2])
def test_gl2_moves(mat, n):
    spec = generic(n)
    assert_isometry(spec, move_gl2(spec, *mat))


def test_gl2_rejects_non_unimodular():
    with pytest.raises(NonUnimodular):
        move_gl2(generic(0), 2, 0, 0, 1)


def test_x_function_move():
    spec = generic(0)
    assert_isometry(spec, move_x_function(spec, F.cos(1, 1, 0.1) + F.sin(0, 2, 0.05)))


def test_translate_move():
    spec = generic(2)
    assert_isometry(spec, move_translate(spec, 0.5, 0.3))


def test_reduce_corpus(corpus):
    for name, (spec, _) in corpus.items():
        if spec.lattice.kind != "gamma":
            continue
        nf = reduce(spec)
        assert check_ranges(nf) == [], name
        assert isometry_residual(spec, nf.to_spec(), nf.change) < 1e-8, name
        again = reduce(nf.to_spec())
        assert tuples_equal(again, nf), name
        assert len(again.change.steps) == 0, name


def test_reduce_generic_diophantine():
    spec = generic(1)
    nf = reduce(spec)
    assert isinstance(nf, NormalFormDio)
    assert isometry_residual(spec, nf.to_spec(), nf.change) < 1e-8
    assert nf.Lambda > 0


def test_reduce_rational_slope_to_closed_chart():
    spec = MetricSpec(LatticeSpec.gamma(0), ThetaSpec.rational(1, 2), -0.9, F.const(1.3),
                      F.cos(1, -2, 0.2), F.cos(2, -4, 0.1) + F.const(0.2))
    nf = reduce(spec)
    assert isinstance(nf, NormalFormClosed) and nf.Lambda > 0
    assert isometry_residual(spec, nf.to_spec(), nf.change) < 1e-8
    assert check_ranges(nf) == []


def test_closed_reduction_needs_z_only_L():
    spec = MetricSpec(LatticeSpec.gamma(0), ThetaSpec.rational(0), 1.0,
                      F.const(2.0) + F.cos(1, 0, 0.3), F.zero(), F.zero())
    with pytest.raises(NotInNormalForm):
        reduce(spec)


def test_straighten_slope():
    ceiling = PeriodicFn1D.from_ab([1.5, 0.2], [0.0, 0.1])
    mean, psi, resid = straighten_slope(ceiling, ThetaSpec.golden())
    assert mean == pytest.approx(1.5) and resid < 1e-12


def closed_nf(n=0):
    spec = MetricSpec(LatticeSpec.gamma(n), ThetaSpec.rational(0), 1.0, L2_SIN, F.const(0.1),
                      F.cos(1, 1, 0.3) + F.const(0.2))
    return reduce(spec)


@given(st.integers(-2, 2), st.integers(-2, 2))
def test_act_Z_composes(a, b):
    nf = closed_nf()
    assert tuples_equal(act_Z(act_Z(nf, a), b), act_Z(nf, a + b))


def test_act_Z_shifts_k_by_lcal():
    nf = closed_nf()
    out = act_Z(nf, 1)
    assert out.k == pytest.approx((nf.k + nf.Lcal) % nf.Lambda, abs=1e-9)


def test_act_Z_change_is_isometry():
    nf = closed_nf(1)
    out = act_Z(nf, 1)
    assert isometry_residual(nf.to_spec(), out.to_spec(), out.change) < 1e-8


@pytest.mark.parametrize("mat", [(1, 1, 0, 1), (2, 1, 1, 1), (0, 1, -1, 0)])
def test_act_gl2_round_trip(mat):
    nf = reduce(generic(0))
    a, b, c, d = mat
    det = a * d - b * c
    back = act_gl2(act_gl2(nf, *mat), d * det, -b * det, -c * det, a * det)
    assert tuples_equal(back, nf)


def test_act_signs_is_involutive():
    nf = closed_nf(1)
    twice = act_signs(act_signs(nf, -1, -1, 1), -1, -1, 1)
    assert tuples_equal(twice, nf)


def test_are_isometric_finds_Z_witness():
    nf = closed_nf()
    dec = are_isometric(nf, act_Z(nf, 1))
    assert dec.decision == "isometric" and dec.witness["ell"] == 1
    assert dec.witness["residual"] < 1e-8


def test_are_isometric_finds_translation():
    nf = closed_nf(2)
    moved = act_translation(nf, 0.5, 0.5)
    dec = are_isometric(nf, moved)
    assert dec.decision == "isometric"
    assert isometry_residual(nf.to_spec(), moved.to_spec(), dec.witness["map"]) < 1e-8


def test_are_isometric_rejects_perturbation():
    nf = closed_nf()
    other = reduce(nf.to_spec().with_(mu=nf.mu + F.cos(1, 0, 0.05)))
    assert are_isometric(nf, other).decision == "not_isometric"


def test_are_isometric_dio_family():
    nf = reduce(generic(0))
    out = act_gl2(nf, 1, 1, 0, 1)
    dec = are_isometric(nf, out)
    assert dec.decision == "isometric"
    assert dec.to_json()["witness"]["steps"]
