"""The twelve acceptance checks, runnable from tests and from ``lolight3 selftest``.

Each check returns a :class:`CriterionResult` carrying the measured numbers;
thresholds are fixed here and never relaxed by callers.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .bundled import load_corpus
from .classify import UNDECIDED, classify
from .curvature import (
    check_parallel_X,
    curvature_r_at,
    curvature_r_closed_form,
    gauss_bonnet,
    leaf_holonomy_alpha,
    parallel_transport_loop,
)
from .deform import DEFAULT_SAMPLES, flat_endpoint, verify_along_path
from .errors import LolightError, ResonantFrequency
from .model import MetricSpec
from .normalform import act_gl2, act_Z, reduce, tuples_equal
from .periodic import PeriodicFn1D, PeriodicFn2D, ThetaSpec, cohomological_residual, \
    grid_points, solve_cohomological
from .transforms import (
    AffineMapSpec,
    affine_defect,
    chi,
    compose,
    flow_y,
    phi0,
    power,
    psi,
    sigma,
    verify_generator,
)

GB_FLOOR = 1e-12


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d}: {self.title}"

    def to_json(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "details": self.details, "seconds": self.seconds}


@lru_cache(maxsize=1)
def _corpus():
    return load_corpus()


@lru_cache(maxsize=1)
def _reports():
    return {name: classify(spec) for name, (spec, _) in _corpus().items()}


def _nf_spec(name: str) -> MetricSpec:
    return _reports()[name].spec


# ---------------------------------------------------------------------------
# the criteria
# ---------------------------------------------------------------------------


def parallel_field() -> CriterionResult:
    t0 = time.perf_counter()
    res = {name: check_parallel_X(spec, 16) for name, (spec, _) in _corpus().items()}
    elapsed = time.perf_counter() - t0
    worst = max(res.values())
    return CriterionResult(1, "parallel-field suite", worst < 1e-9 and elapsed < 5.0,
                           {"sup_nabla_X": res, "worst": worst, "runtime_s": elapsed})


def gauss_bonnet_check() -> CriterionResult:
    rows, ok = {}, True
    for name, (spec, _) in _corpus().items():
        v64, v128 = abs(gauss_bonnet(spec, 64)), abs(gauss_bonnet(spec, 128))
        refined = (v64 < GB_FLOOR and v128 < GB_FLOOR) or v128 * 4.0 <= v64
        good = v64 < 1e-6 and refined
        ok &= good
        rows[name] = {"grid64": v64, "grid128": v128, "passed": good}
    return CriterionResult(2, "Gauss-Bonnet identity", ok, {"specs": rows, "roundoff_floor": GB_FLOOR})


def _cos_y_spec() -> MetricSpec:
    return MetricSpec.flat(0).with_(mu=PeriodicFn2D.cos(1, 0, 1.0))


def curvature_oracle() -> CriterionResult:
    specs = {"L=1, mu=cos(2 pi y)": _cos_y_spec()}
    for name in ("case4_sigma", "case5_psi", "case6_chi", "case9_flow"):
        specs[name] = _nf_spec(name)
    y, z = grid_points(32)
    rows, ok = {}, True
    for name, spec in specs.items():
        closed = curvature_r_closed_form(spec).eval(y, z)
        full = curvature_r_at(spec, y, z)
        gap = float(np.abs(closed - full).max())
        rows[name] = gap
        ok &= gap < 1e-6
    derived = float(np.abs(curvature_r_at(_cos_y_spec(), y, z)
                           + 2.0 * math.pi ** 2 * np.cos(2.0 * math.pi * y)).max())
    ok &= derived < 1e-6
    return CriterionResult(3, "closed-form curvature vs full tensor", ok,
                           {"sup_gap": rows, "derived_cos_case_gap": derived})


def cohomological() -> CriterionResult:
    h = PeriodicFn1D.from_ab([0.0, 1.0, 0.0], [0.0, 0.0, 0.3])
    golden = ThetaSpec.golden()
    res = cohomological_residual(solve_cohomological(h, golden), h, golden, grid=512)
    try:
        solve_cohomological(h, ThetaSpec.rational(1, 2))
        raised = None
    except ResonantFrequency as exc:
        raised = type(exc).__name__
    return CriterionResult(4, "cohomological solver", res < 1e-9 and raised is not None,
                           {"residual_512": res, "resonant_error": raised})


def _generator_cases() -> dict[str, tuple[MetricSpec, AffineMapSpec]]:
    s4, s3, s8 = _nf_spec("case4_sigma"), _nf_spec("case3_phi0"), _nf_spec("case8_flat_flow")
    s7, s5 = _nf_spec("case7_sigma_chi"), _nf_spec("case5_psi")
    return {"sigma": (s4, sigma(s4)), "phi0": (s3, phi0(s3)), "flowY": (s8, flow_y(s8, 1.0)),
            "chi": (s7, chi(s7)), "psi": (s5, psi(s5))}


def generator_suite() -> CriterionResult:
    rows, ok = {}, True
    for name, (spec, phi) in _generator_cases().items():
        rep = verify_generator(spec, phi, 16)
        rows[name] = rep.to_json()
        ok &= rep.passed()
    return CriterionResult(5, "generator suite", ok, {"generators": rows})


def _additivity_pool() -> list[tuple[MetricSpec, list[AffineMapSpec]]]:
    s7, s5, s3, s9 = (_nf_spec(n) for n in ("case7_sigma_chi", "case5_psi", "case3_phi0",
                                            "case9_flow"))
    return [
        (s7, [sigma(s7), power(sigma(s7), -2), chi(s7), power(chi(s7), -1), flow_y(s7, 0.3)]),
        (s5, [sigma(s5), psi(s5), power(psi(s5), -1), power(sigma(s5), 3)]),
        (s3, [phi0(s3), power(phi0(s3), -1), power(phi0(s3), 2)]),
        (s9, [flow_y(s9, 0.37), flow_y(s9, -1.1), sigma(s9)]),
    ]


def defect_additivity(n_pairs: int = 10, seed: int = 2024) -> CriterionResult:
    rng = np.random.default_rng(seed)
    pool = _additivity_pool()
    rows, worst = [], 0.0
    for _ in range(n_pairs):
        spec, maps = pool[int(rng.integers(len(pool)))]
        i, j = (int(v) for v in rng.integers(len(maps), size=2))
        a, b = maps[i], maps[j]
        ca, cb = affine_defect(spec, a, 12).C, affine_defect(spec, b, 12).C
        cab = affine_defect(spec, compose(a, b), 12).C
        gap = abs(cab - ca - cb)
        worst = max(worst, gap)
        rows.append({"pair": [a.label, b.label], "C_pair": cab, "C_sum": ca + cb, "gap": gap})
    return CriterionResult(6, "defect additivity", worst < 1e-8, {"pairs": rows, "worst": worst})


def classification() -> CriterionResult:
    rows, ok = {}, True
    for name, (_, labels) in _corpus().items():
        rep = _reports()[name]
        got = {"table1_row": rep.table1_row, "table2_case": rep.table2_case,
               "group": rep.group, "isom_compact": rep.isom_compact}
        match = all(got[k] == labels[k] for k in got)
        if labels["table2_case"] == UNDECIDED:
            match &= any(labels["missing"] in c for c in rep.caveats)
        else:
            match &= rep.verified
        fit = rep.imC.get("flow_fit")
        if rep.group == "R":
            match &= fit is not None and fit["fit_residual"] < 1e-8
        rows[name] = {"expected": labels["table2_case"], "got": rep.table2_case,
                      "flow_fit_residual": None if fit is None else fit["fit_residual"],
                      "passed": bool(match)}
        ok &= bool(match)
    return CriterionResult(7, "classification of the corpus", ok, {"specs": rows})


def isometry_compactness() -> CriterionResult:
    rows, ok, seen = {}, True, 0
    for name, (_, labels) in _corpus().items():
        if labels["isom_compact"] is not False:
            continue
        seen += 1
        wit = _reports()[name].compactness_witness
        good = (wit is not None and abs(wit["C"]) < 1e-8 and wit["residual"] < 1e-8
                and wit["normalizes_lattice"])
        rows[name] = None if wit is None else {k: v for k, v in wit.items() if k != "map"}
        ok &= good
    return CriterionResult(8, "non-compact isometry witnesses", ok and seen > 0, {"witnesses": rows})


def path_maps(name: str) -> list[AffineMapSpec]:
    """The maps followed along the deformation for a corpus entry."""
    rep = _reports()[name]
    if rep.generators:
        return [g.map for g in rep.generators]
    if rep.family == "closed_leaves":
        return [sigma(rep.spec)]
    return [AffineMapSpec.identity()]


def _needs_chi_family(phi: AffineMapSpec) -> bool:
    return "chi" in phi.label


def deformation() -> CriterionResult:
    rows, ok = {}, True
    for name in _corpus():
        spec = _reports()[name].spec
        for phi in path_maps(name):
            civ = _needs_chi_family(phi)
            try:
                ds = verify_along_path(spec, phi, DEFAULT_SAMPLES, case_iv=civ)
                r0 = flat_endpoint(spec, phi, civ)
                good = r0 < 1e-8
                row = {"C": [d.C for d in ds], "worst_residual": max(d.residual for d in ds),
                       "r_sup_at_0": r0}
            except LolightError as exc:
                good, row = False, {"error": f"{type(exc).__name__}: {exc}"}
            row.update({"family": "chi" if civ else "standard", "passed": good})
            rows[f"{name}:{phi.label}"] = row
            ok &= good
    return CriterionResult(9, "deformation to a flat metric", ok, {"paths": rows})


def holonomy() -> CriterionResult:
    spec = MetricSpec.flat(0).with_(L2=PeriodicFn2D.const(2.0) + PeriodicFn2D.sin(0, 1, 1.0))
    rows, ok = {}, True
    for z in (0.0, 0.3):
        alpha = float(leaf_holonomy_alpha(spec, z))
        M2 = parallel_transport_loop(spec, z, "gamma2")
        M1 = parallel_transport_loop(spec, z, "gamma1")
        e2 = float(np.abs(M2 - np.array([[1.0, alpha], [0.0, 1.0]])).max())
        e1 = float(np.abs(M1 - np.eye(2)).max())
        rows[str(z)] = {"alpha": alpha, "gamma2_error": e2, "gamma1_error": e1}
        ok &= e2 < 1e-6 and e1 < 1e-8
    return CriterionResult(10, "leaf holonomy", ok, {"heights": rows})


def group_laws(n_trials: int = 6, seed: int = 7) -> CriterionResult:
    rng = np.random.default_rng(seed)
    closed = reduce(_nf_spec("case4_sigma"))
    dio = reduce(_nf_spec("case2_diophantine"))
    rows, ok = [], True
    for _ in range(n_trials):
        a, b = (int(v) for v in rng.integers(-2, 3, size=2))
        lhs = act_Z(act_Z(closed, a), b)
        rhs = act_Z(closed, a + b)
        good = tuples_equal(lhs, rhs)
        rows.append({"law": f"Z: {a} then {b}", "passed": good})
        ok &= good
    mats = [(1, 1, 0, 1), (2, 1, 1, 1), (1, 0, -1, 1), (0, 1, -1, 0), (1, 2, 0, 1), (3, 2, 1, 1)]
    for m in mats[:n_trials]:
        a, b, c, d = m
        det = a * d - b * c
        inv = (d * det, -b * det, -c * det, a * det)
        back = act_gl2(act_gl2(dio, *m), *inv)
        good = tuples_equal(back, dio)
        rows.append({"law": f"GL2 {list(m)} then inverse", "passed": good})
        ok &= good
    return CriterionResult(11, "normal-form group laws", ok, {"checks": rows})


def sigma_constant() -> CriterionResult:
    spec = _nf_spec("case4_sigma")
    lam = spec.Lambda
    s = sigma(spec)
    c1 = affine_defect(spec, s, 16).C
    powers = {k: affine_defect(spec, power(s, k), 16).C for k in (-3, -2, -1, 2, 3)}
    power_gap = max(abs(c - k * c1) for k, c in powers.items())
    other = chi(_nf_spec("case7_sigma_chi"))
    s7 = _nf_spec("case7_sigma_chi")
    add_gap = abs(affine_defect(s7, compose(sigma(s7), other), 16).C
                  - affine_defect(s7, sigma(s7), 16).C - affine_defect(s7, other, 16).C)
    ok = power_gap < 1e-8 and add_gap < 1e-8 and abs(c1) > 1e-8
    return CriterionResult(12, "sigma defect constant", ok, {
        "Lambda": lam, "oracle_C": c1, "one_over_Lambda": 1.0 / lam,
        "two_Lambda": 2.0 * lam, "oracle_C_times_Lambda2": c1 * lam * lam,
        "oracle_matches_2_over_Lambda": abs(c1 - 2.0 / lam) < 1e-8,
        "power_gap": power_gap, "additivity_gap": add_gap})


CRITERIA: tuple[Callable[[], CriterionResult], ...] = (
    parallel_field, gauss_bonnet_check, curvature_oracle, cohomological, generator_suite,
    defect_additivity, classification, isometry_compactness, deformation, holonomy,
    group_laws, sigma_constant,
)


def run_criterion(fn: Callable[[], CriterionResult]) -> CriterionResult:
    t0 = time.perf_counter()
    try:
        res = fn()
    except Exception as exc:  # a crash is a failed criterion, reported with its cause
        number = CRITERIA.index(fn) + 1 if fn in CRITERIA else 0
        res = CriterionResult(number, fn.__name__, False, {"error": f"{type(exc).__name__}: {exc}"})
    res.seconds = time.perf_counter() - t0
    return res


def run_all(echo: Callable[[str], None] | None = None) -> list[CriterionResult]:
    out = []
    for fn in CRITERIA:
        res = run_criterion(fn)
        if echo is not None:
            echo(res.line())
        out.append(res)
    return out


__all__ = ["CriterionResult", "CRITERIA", "run_all", "run_criterion", "path_maps"]
