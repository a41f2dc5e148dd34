import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lolight3.errors import SpecError
from lolight3.model import (
    IRRATIONAL,
    ArithCertificates,
    LatticeSpec,
    MetricSpec,
    check_invariance,
    connection_from_metric,
    lattice_action,
    lorentz_signature,
    metric_from_connection,
)
from lolight3.periodic import PeriodicFn2D, ThetaSpec

BASE = {
    "manifold": {"type": "gamma", "n": 1},
    "theta": {"kind": "rational", "p": 0, "q": 1},
    "Lambda": 1.0,
    "L2": {"max_freq": [0, 0], "coeffs": [[1.0, 0.0]]},
    "nu": {"max_freq": [0, 0], "coeffs": [[0.0, 0.0]]},
    "mu": {"max_freq": [0, 0], "coeffs": [[0.0, 0.0]]},
}


def test_corpus_json_round_trip(corpus):
    for spec, _ in corpus.values():
        again = MetricSpec.from_json(json.loads(json.dumps(spec.to_json())))
        assert again.to_json() == spec.to_json()


@pytest.mark.parametrize("mutation, message", [
    (lambda o: o.update(extra=1), "unknown"),
    (lambda o: o.pop("mu"), "missing"),
    (lambda o: o.update(Lambda=0.0), "Lambda"),
    (lambda o: o.update(Lambda="one"), "Lambda"),
    (lambda o: o.update(L2={"max_freq": [0, 0], "coeffs": [[-1.0, 0.0]]}), "positive"),
    (lambda o: o.update(arith={"Lcal_over_Lambda": [1, 0]}), "certificate"),
    (lambda o: o.update(arith={"period_decl": [0, 1]}), "period"),
    (lambda o: o["manifold"].update(n=-1), "n"),
])
def test_schema_rejections(mutation, message):
    obj = json.loads(json.dumps(BASE))
    mutation(obj)
    with pytest.raises(SpecError, match=message):
        MetricSpec.from_json(obj)


def test_certificates_round_trip():
    c = ArithCertificates(Fraction(2, 3), IRRATIONAL, (2, 1))
    assert ArithCertificates.from_json(c.to_json()) == c


def test_torus_lattice_rejects_slope():
    with pytest.raises(SpecError):
        MetricSpec(LatticeSpec("torusA", tau=1.5, r1=0.0, r2=0.0), ThetaSpec.golden(), 1.0,
                   PeriodicFn2D.const(1.0), PeriodicFn2D.zero(), PeriodicFn2D.zero())


@given(st.integers(0, 4), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_heisenberg_commutator_is_central(n, x, y, z):
    lat = LatticeSpec.gamma(n, 0.3, 0.7)
    p = np.array([x, y, z])
    # z y Z Y is the translation of x by n
    out = lattice_action(lat, "zyZY", p)
    assert np.allclose(out, p + np.array([n, 0.0, 0.0]), atol=1e-12)


def test_lattice_action_inverse():
    lat = LatticeSpec.gamma(2, 0.1, 0.2)
    p = np.array([0.3, -0.4, 1.1])
    assert np.allclose(lattice_action(lat, "y^-1 y", p), p)


def test_metric_is_lattice_invariant_and_lorentzian(corpus):
    for spec, _ in corpus.values():
        assert check_invariance(spec) < 1e-10
        assert lorentz_signature(spec) == (1, 2)


def test_connection_round_trip():
    th = ThetaSpec.golden()
    spec = MetricSpec(LatticeSpec.gamma(2), th, 0.75, PeriodicFn2D.const(1.0),
                      PeriodicFn2D.cos(1, 1, 0.2), PeriodicFn2D.sin(0, 1, 0.1))
    data = connection_from_metric(spec)
    back = metric_from_connection(data, n_choice=2)
    assert back.n == 2 and np.isclose(back.Lambda, 0.75)
    again = connection_from_metric(back)
    assert again.b.allclose(data.b, 1e-10)
