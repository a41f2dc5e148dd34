"""One test per acceptance criterion; each prints its pass/fail line."""

import numpy as np
import pytest

import conftest
from lolight3 import acceptance
from lolight3.curvature import curvature_r_closed_form
from lolight3.model import metric_coords_at

from oracles import pullback_fd, r_fd


def report(res):
    line = res.line()
    print(line)
    conftest.ACCEPTANCE_LINES.append(line)
    assert res.passed, res.details


def test_criterion_01_parallel_field():
    report(acceptance.run_criterion(acceptance.parallel_field))


def test_criterion_02_gauss_bonnet():
    report(acceptance.run_criterion(acceptance.gauss_bonnet_check))


def test_criterion_03_curvature():
    res = acceptance.run_criterion(acceptance.curvature_oracle)
    # independent check: the closed form against a finite-difference Riemann tensor
    worst = 0.0
    for name in ("case4_sigma", "case5_psi", "case6_chi", "case9_flow"):
        spec = acceptance._nf_spec(name)
        closed = curvature_r_closed_form(spec)
        for y, z in [(0.13, 0.41), (0.62, 0.07), (0.88, 0.73)]:
            worst = max(worst, abs(float(closed(y, z)) - float(r_fd(spec, y, z))))
    res.details["fd_oracle_gap"] = worst
    res.passed = res.passed and worst < 1e-6
    report(res)


def test_criterion_04_cohomological():
    report(acceptance.run_criterion(acceptance.cohomological))


def test_criterion_05_generators():
    res = acceptance.run_criterion(acceptance.generator_suite)
    # independent check: finite-difference pullback minus g is C (Xflat)^2
    pts = np.array([[0.1, 0.2, 0.3], [0.5, 0.77, 0.61], [0.9, 0.35, 0.05]])
    worst = 0.0
    for spec, phi in acceptance._generator_cases().values():
        G = metric_coords_at(spec, pts[:, 1], pts[:, 2])
        delta = pullback_fd(spec, phi, pts) - G
        xi = G[:, 0, :]
        C = acceptance.affine_defect(spec, phi, 12).C
        worst = max(worst, float(np.abs(delta - C * np.einsum("pi,pj->pij", xi, xi)).max()))
    res.details["fd_pullback_gap"] = worst
    res.passed = res.passed and worst < 1e-6
    report(res)


def test_criterion_06_additivity():
    report(acceptance.run_criterion(acceptance.defect_additivity))


def test_criterion_07_classification():
    report(acceptance.run_criterion(acceptance.classification))


def test_criterion_08_compactness():
    report(acceptance.run_criterion(acceptance.isometry_compactness))


def test_criterion_09_deformation():
    report(acceptance.run_criterion(acceptance.deformation))


def test_criterion_10_holonomy():
    report(acceptance.run_criterion(acceptance.holonomy))


def test_criterion_11_group_laws():
    report(acceptance.run_criterion(acceptance.group_laws))


def test_criterion_12_sigma_constant():
    res = acceptance.run_criterion(acceptance.sigma_constant)
    lam = res.details["Lambda"]
    # derived by hand: sigma adds 2/Lambda times the square of g(X, .)
    assert res.details["oracle_C"] == pytest.approx(2.0 / lam, rel=1e-9)
    report(res)
