import math
from fractions import Fraction

import pytest

from lolight3.bundled import manifest
from lolight3.classify import UNDECIDED, classify, find_period, flow_linearity, is_period
from lolight3.model import IRRATIONAL, ArithCertificates, LatticeSpec, MetricSpec
from lolight3.normalform import reduce
from lolight3.periodic import PeriodicFn2D as F
from lolight3.periodic import ThetaSpec

SQRT3 = math.sqrt(3.0)
L2_SIN = F.const(2.0) + F.sin(0, 1, 1.0)
NAMES = sorted(manifest())


def closed(n, lam, L2, nu, mu, certs=None):
    return MetricSpec(LatticeSpec.gamma(n), ThetaSpec.rational(0), lam, L2, nu, mu,
                      certs or ArithCertificates())


@pytest.mark.parametrize("name", NAMES)
def test_corpus_labels(name, corpus, reports):
    _, labels = corpus[name]
    rep = reports[name]
    assert rep.table1_row == labels["table1_row"]
    assert rep.table2_case == labels["table2_case"]
    assert rep.group == labels["group"]
    assert rep.isom_compact == labels["isom_compact"]
    assert rep.verified


@pytest.mark.parametrize("name", NAMES)
def test_generators_verify(name, reports):
    for g in reports[name].generators:
        assert g.report.defect.residual < 1e-9
        assert g.report.normalizes


def test_undecided_names_missing_certificate(reports):
    rep = reports["undecided_no_certificate"]
    assert not rep.decided and rep.generators == []
    assert any("Lcal_over_Lambda" in c for c in rep.caveats)


def test_missing_k_certificate_is_undecided():
    spec = closed(0, SQRT3, L2_SIN, F.const(0.2), F.const(0.3),
                  ArithCertificates(Fraction(1)))
    rep = classify(spec)
    assert rep.table2_case == UNDECIDED
    assert any("k_over_Lambda" in c for c in rep.caveats)


def test_irrational_lcal_gives_sigma_only():
    spec = closed(0, SQRT3, L2_SIN, F.const(0.2), F.const(0.3),
                  ArithCertificates(IRRATIONAL))
    rep = classify(spec)
    assert rep.table2_case == 4 and [g.name for g in rep.generators] == ["sigma"]
    assert rep.imC["measured_C"] == pytest.approx(2.0 / SQRT3, rel=1e-9) and rep.imC["agree"]


def test_case6_trivial_exponents_branch():
    spec = closed(0, SQRT3, L2_SIN, F.const(SQRT3 / 2.0), F.const(0.25),
                  ArithCertificates(Fraction(1), Fraction(1, 2)))
    rep = classify(spec)
    assert rep.table2_case == 6 and rep.isom_compact is False
    assert [g.name for g in rep.generators] == ["sigma"]
    assert any("B = b = 1" in c for c in rep.caveats)
    assert rep.verified


def test_case7_defect_ratio_is_irrational_combination(reports):
    imc = reports["case7_sigma_chi"].imC
    assert imc["measured_C_sigma"] == pytest.approx(2.0 / SQRT3, rel=1e-9)
    assert not float(imc["alpha"]).is_integer()


def test_find_period_on_corpus(corpus):
    nf = reduce(corpus["case5_psi"][0])
    P, Pp = find_period(nf)
    assert P == 2 and is_period(nf, P, Pp)


def test_find_period_mixed_modes():
    spec = closed(2, 1.0, F.const(1.5), F.zero(), F.cos(1, 1, 0.3))
    nf = reduce(spec)
    P, Pp = find_period(nf)
    assert P == 2 and is_period(nf, P, Pp)


def test_no_period_falls_back_to_sigma():
    spec = closed(1, 1.0, F.const(1.5), F.zero(), F.cos(1, 0, 0.3))
    rep = classify(spec)
    assert rep.table2_case == 4 and [g.name for g in rep.generators] == ["sigma"]


def test_wrong_declared_period_is_reported():
    spec = closed(2, 1.0, F.const(2.0) + F.sin(0, 2, 0.5), F.zero(), F.cos(1, 1, 0.4),
                  ArithCertificates(period_decl=(3, 1)))
    rep = classify(spec)
    assert rep.table2_case == 5
    assert any("not a period" in c for c in rep.caveats)


def test_flow_defect_is_linear(corpus):
    spec = reduce(corpus["case9_flow"][0]).to_spec()
    fit = flow_linearity(spec)
    assert fit["fit_residual"] < 1e-9
    assert fit["slope"] == pytest.approx(fit["expected_slope"], rel=1e-9)


def test_tori_are_trivial(reports):
    for name in ("case1_torusA", "case1_torusB"):
        assert reports[name].group == "trivial" and reports[name].generators == []


def test_report_json_round_trips(reports):
    import json

    for rep in reports.values():
        doc = json.loads(json.dumps(rep.to_json()))
        assert doc["table2_case"] == rep.table2_case
