"""Decision procedure for the affine-quotient classification.

Given a metric (or a normal form) and its arithmetic certificates, the report
names the geometric row, the affine-quotient case, the group type and its
generators (each verified by the pullback oracle), compactness of the
isometry group and the image of the defect morphism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .curvature import r_on_grid
from .errors import CertificateMissing, IncompatibleNormalForm, LolightError
from .model import IRRATIONAL, ArithCertificates, MetricSpec
from .normalform import NormalForm, NormalFormClosed, NormalFormDio, reduce
from .periodic import gcd_ext
from .transforms import (
    AffineMapSpec,
    GeneratorReport,
    affine_defect,
    chi,
    chi_prime,
    chi_prime_exponents,
    compose,
    flow_y,
    phi0,
    power,
    psi,
    sigma,
    verify_generator,
)

FLAT_TOL = 1e-8
CONST_TOL = 1e-12
SNAP_DENOMINATOR = 10 ** 6
FLOW_SAMPLES = (0.1, 0.2, 0.4)

UNDECIDED = "undecided"
FLAT_TORUS = "flat_torus"


@dataclass
class GeneratorEntry:
    name: str
    map: AffineMapSpec
    report: GeneratorReport | None = None

    @property
    def passed(self) -> bool:
        return self.report is not None and self.report.passed()

    def to_json(self) -> dict:
        out = {"name": self.name, "map": self.map.describe(),
               "steps": [s.describe() for s in self.map.steps]}
        if self.report is not None:
            out["verification"] = self.report.to_json()
        return out


@dataclass
class ClassReport:
    family: str
    table1_row: str
    table2_case: int | str
    group: str | None
    generators: list[GeneratorEntry] = field(default_factory=list)
    isom_compact: bool | str = UNDECIDED
    imC: dict = field(default_factory=dict)
    caveats: list[str] = field(default_factory=list)
    flat: bool = False
    normal_form: dict | None = None
    compactness_witness: dict | None = None
    # the metric the generators act on (normal-form coordinates when available)
    spec: MetricSpec | None = field(default=None, repr=False, compare=False)

    @property
    def decided(self) -> bool:
        return self.table2_case != UNDECIDED

    @property
    def verified(self) -> bool:
        gens_ok = all(g.passed for g in self.generators)
        wit_ok = self.compactness_witness is None or self.compactness_witness.get("passed", False)
        return gens_ok and wit_ok

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "table1_row": self.table1_row,
            "table2_case": self.table2_case,
            "group": self.group,
            "generators": [g.to_json() for g in self.generators],
            "isom_compact": self.isom_compact,
            "imC": self.imC,
            "caveats": list(self.caveats),
            "flat": self.flat,
            "normal_form": self.normal_form,
            "compactness_witness": self.compactness_witness,
            "verified": self.verified,
        }


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def is_flat(spec: MetricSpec, grid_n: int = 64, tol: float = FLAT_TOL) -> bool:
    return float(np.abs(r_on_grid(spec, grid_n)).max()) < tol


def _snap(cert, measured: float, name: str):
    """Re-express a rational certificate in normal-form coordinates."""
    if cert is None or cert == IRRATIONAL:
        return cert
    if abs(float(cert) - measured) < 1e-9:
        return cert
    snapped = Fraction(measured).limit_denominator(SNAP_DENOMINATOR)
    if abs(float(snapped) - measured) > 1e-9:
        raise CertificateMissing(f"{name} is declared rational but the normal-form value "
                                 f"{measured!r} has no small denominator")
    return snapped


def normal_form_certs(nf: NormalFormClosed, certs: ArithCertificates) -> ArithCertificates:
    lc = _snap(certs.Lcal_over_Lambda, nf.Lcal / nf.Lambda, "Lcal_over_Lambda")
    if nf.n != 0:
        kc = Fraction(0)
    else:
        kc = _snap(certs.k_over_Lambda, nf.k / nf.Lambda, "k_over_Lambda")
    return ArithCertificates(lc, kc, certs.period_decl)


def _active(nf: NormalFormClosed) -> list[tuple[int, int]]:
    modes = set(nf.mu.active_modes(CONST_TOL))
    L2 = nf.L2
    for k in range(-L2.max_freq, L2.max_freq + 1):
        if abs(L2.mode(k)) > CONST_TOL * (1.0 + float(np.abs(L2.coef).max())):
            modes.add((0, k))
    return sorted(modes)


def is_period(nf: NormalFormClosed, P: int, Pp: int) -> bool:
    """(L, mu) invariant under (y, z) -> (y + 1/P, z + P'/n)."""
    n = nf.n
    return all((j * n + k * Pp * P) % (P * n) == 0 for j, k in _active(nf))


def find_period(nf: NormalFormClosed) -> tuple[int, int] | None:
    """Largest P > 1 (with some P') such that (1/P, P'/n) is a period of (L, mu).

    A period forces P | j n for every active mode, so P runs over the divisors
    of gcd(j n).
    """
    if nf.n == 0:
        return None
    bound = 0
    for j, _ in nf.mu.active_modes(CONST_TOL):
        bound = math.gcd(bound, abs(j * nf.n))
    for P in range(bound, 1, -1):
        if bound % P:
            continue
        for Pp in range(abs(nf.n)):
            if is_period(nf, P, Pp):
                return P, Pp
    return None


def _verify(spec: MetricSpec, entries: list[GeneratorEntry], grid_n: int) -> None:
    for e in entries:
        e.report = verify_generator(spec, e.map, grid_n)


def _measured_C(spec: MetricSpec, phi: AffineMapSpec, grid_n: int) -> float:
    return float(affine_defect(spec, phi, grid_n).C)


def flow_linearity(spec: MetricSpec, samples=FLOW_SAMPLES, grid_n: int = 12) -> dict:
    """Fit C(t) for the flow along Ybar; the defect must be linear in t."""
    ts = np.array(samples, dtype=float)
    cs = np.array([_measured_C(spec, flow_y(spec, t), grid_n) for t in ts])
    slope, icpt = np.polyfit(ts, cs, 1)
    resid = float(np.abs(cs - (slope * ts + icpt)).max())
    return {"t": ts.tolist(), "C": cs.tolist(), "slope": float(slope), "intercept": float(icpt),
            "fit_residual": resid, "expected_slope": 2.0 * spec.n / spec.Lambda}


# ---------------------------------------------------------------------------
# compactness of the isometry group
# ---------------------------------------------------------------------------


def isom_compactness(nf: NormalForm, certs: ArithCertificates, grid_n: int = 12
                     ) -> tuple[bool | str, dict | None, list[str]]:
    """(compact?, chi-prime witness or None, caveats)."""
    if not isinstance(nf, NormalFormClosed):
        return True, None, []
    if not nf.mu.is_constant(CONST_TOL):
        return True, None, []
    if certs.Lcal_over_Lambda is None:
        return UNDECIDED, None, ["missing certificate Lcal_over_Lambda: compact if irrational, "
                                 "non-compact if rational (with k rational)"]
    if certs.Lcal_over_Lambda == IRRATIONAL:
        return True, None, []
    if certs.k_over_Lambda is None:
        return UNDECIDED, None, ["missing certificate k_over_Lambda: compact if irrational, "
                                 "non-compact if rational"]
    if certs.k_over_Lambda == IRRATIONAL:
        return True, None, []
    spec = nf.to_spec(certs)
    wit = chi_prime(spec)
    d = affine_defect(spec, wit, grid_n)
    rep = verify_generator(spec, wit, grid_n)
    ok = abs(d.C) < 1e-8 and d.residual < 1e-8 and rep.normalizes
    return False, {"map": wit.describe(), "C": d.C, "residual": d.residual,
                   "normalizes_lattice": rep.normalizes, "passed": ok}, []


# ---------------------------------------------------------------------------
# the decision tree
# ---------------------------------------------------------------------------


def _torus_report(spec: MetricSpec, grid_n: int) -> ClassReport:
    row = "a" if spec.lattice.kind == "torusA" else "b"
    flat = is_flat(spec, grid_n)
    if flat:
        return ClassReport("torus", row, FLAT_TORUS, None, [], True,
                           {"symbolic": "n/a"},
                           ["flat 3-torus: decomposable, the affine quotient is "
                            "GL3(Z)/(GL3(Z) ∩ Isom)"], True, spec.to_json())
    return ClassReport("torus", row, 1, "trivial", [], True,
                       {"symbolic": "{0}", "oracle": "{0}"},
                       ["isometries are the translations preserving the metric functions"],
                       False, spec.to_json())


def _dio_report(nf: NormalFormDio | None, spec: MetricSpec, grid_n: int,
                verify_grid: int) -> ClassReport:
    flat = is_flat(spec, grid_n)
    n = spec.n
    caveats = []
    if flat and n == 0:
        caveats.append("flat metric on the 3-torus: decomposable, outside the indecomposable "
                       "classification")
    if flat and n != 0:
        base = nf.to_spec() if nf is not None else spec
        gen = GeneratorEntry("flowY", flow_y(base, 1.0))
        _verify(base, [gen], verify_grid)
        lin = flow_linearity(base)
        return ClassReport("irrational_slope", "c", 8, "R", [gen], True,
                           {"symbolic": "R", "flow_fit": lin}, caveats, True,
                           nf.to_json() if nf is not None else None)
    if nf is None:
        return ClassReport("irrational_slope", "c", UNDECIDED, None, [], True, {},
                           ["slope not certified Diophantine: the normal form (needed to "
                            "separate case 2 from case 3) is unavailable"], flat, None)
    nspec = nf.to_spec()
    mu = nf.mu
    if (n != 0 and abs(nf.k) < CONST_TOL and not mu.depends_on_z(CONST_TOL)
            and not mu.is_constant(CONST_TOL)):
        gen = GeneratorEntry("phi0", phi0(nspec))
        _verify(nspec, [gen], verify_grid)
        c = gen.report.defect.C
        caveats.append("generator is phi0 = (x+z, y, z+theta/n); the shear (x+z, y, z) is "
                       "not affine for an irrational slope")
        return ClassReport("irrational_slope", "c", 3, "Z", [gen], True,
                           _imc_rank1(c, 2.0 / nf.Lambda, nf.Lambda, "(2/Lambda)Z", "2 Lambda Z"),
                           caveats, flat, nf.to_json())
    return ClassReport("irrational_slope", "c", 2, "trivial", [], True,
                       {"symbolic": "{0}", "oracle": "{0}"}, caveats, flat, nf.to_json())


def _word(*factors: tuple[str, int]) -> str:
    parts = [name if e == 1 else f"{name}^{e}" for name, e in factors if e]
    return " ".join(parts) or "id"


def _imc_rank1(measured: float, formula: float, lam: float, oracle: str, unnormalized: str) -> dict:
    return {"symbolic": oracle, "unnormalized": unnormalized, "measured_C": measured,
            "formula_C": formula, "agree": bool(abs(measured - formula) < 1e-8),
            "measured_C_times_Lambda2": measured * lam * lam}


def _closed_report(nf: NormalFormClosed, certs: ArithCertificates, grid_n: int,
                   verify_grid: int) -> ClassReport:
    caveats: list[str] = []
    try:
        ncerts = normal_form_certs(nf, certs)
    except CertificateMissing as exc:
        return ClassReport("closed_leaves", "d", UNDECIDED, None, [], UNDECIDED, {},
                           [str(exc)], False, nf.to_json())
    spec = nf.to_spec(ncerts)
    flat = is_flat(spec, grid_n)
    n, lam = nf.n, nf.Lambda
    if flat and n == 0:
        caveats.append("flat metric on the 3-torus: decomposable, outside the indecomposable "
                       "classification")
    compact, witness, ccav = isom_compactness(nf, ncerts)
    caveats.extend(ccav)

    def done(case, group, gens, imc) -> ClassReport:
        _verify(spec, gens, verify_grid)
        return ClassReport("closed_leaves", "d", case, group, gens, compact, imc(gens),
                           caveats, flat, nf.to_json(), witness)

    mu_const = nf.mu.is_constant(CONST_TOL)
    if n != 0 and mu_const and abs(nf.k) < CONST_TOL and abs(nf.mu.mean()) < CONST_TOL:
        gens = [GeneratorEntry("flowY", flow_y(spec, 1.0))]
        return done(9, "R", gens, lambda g: {"symbolic": "R", "flow_fit": flow_linearity(spec)})

    if mu_const:
        # n = 0 here: the n != 0 constant-mu normal form is mu = 0, k = 0
        lc = ncerts.Lcal_over_Lambda
        if lc is None:
            caveats.append("missing certificate Lcal_over_Lambda: rational -> case 6 or 7, "
                           "irrational -> case 4")
            return ClassReport("closed_leaves", "d", UNDECIDED, None, [], compact, {},
                               caveats, flat, nf.to_json(), witness)
        if lc != IRRATIONAL:
            kc = ncerts.k_over_Lambda
            if kc is None:
                caveats.append("missing certificate k_over_Lambda: rational -> case 6, "
                               "irrational -> case 7")
                return ClassReport("closed_leaves", "d", UNDECIDED, None, [], compact, {},
                                   caveats, flat, nf.to_json(), witness)
            if kc == IRRATIONAL:
                gens = [GeneratorEntry("sigma", sigma(spec)), GeneratorEntry("chi", chi(spec))]
                return done(7, "Z2", gens, lambda g: _imc_case7(g, lam))
            b, B = chi_prime_exponents(spec)
            if b == 1 and B == 1:
                caveats.append("B = b = 1: chi o sigma^-1 is an isometry, the quotient is "
                               "generated by sigma")
                gens = [GeneratorEntry("sigma", sigma(spec))]
                return done(6, "Z", gens, lambda g: _imc_rank1(
                    g[0].report.defect.C, 2.0 / lam, lam, "(2/Lambda)Z", "2 Lambda Z"))
            g_, u, v = gcd_ext(B, b)
            m = compose(power(sigma(spec), v), power(chi(spec), u))
            name = _word(("sigma", v), ("chi", u))
            gens = [GeneratorEntry(name, AffineMapSpec(m.steps, name, {"u": u, "v": v,
                                                                       "b": b, "B": B},
                                                       m.expected_C))]
            return done(6, "Z", gens, lambda g: _imc_rank1(
                g[0].report.defect.C, 2.0 * g_ / (b * lam), lam,
                f"(2 gcd(B,b)/(b Lambda))Z with (b, B) = ({b}, {B})",
                "(2 Lambda n / b)(B ∧ b) Z"))
        gens = [GeneratorEntry("sigma", sigma(spec))]
        return done(4, "Z", gens, lambda g: _imc_rank1(
            g[0].report.defect.C, 2.0 / lam, lam, "(2/Lambda)Z", "2 Lambda Z"))

    if n != 0 and nf.mu.depends_on_y(CONST_TOL):
        found = find_period(nf)
        decl = ncerts.period_decl
        if decl is not None:
            if decl[0] > 1 and is_period(nf, *decl):
                if found is not None and found[0] > decl[0]:
                    caveats.append(f"declared period P = {decl[0]} is not the largest; "
                                   f"P = {found[0]} also works and is used")
                else:
                    found = decl
            else:
                caveats.append(f"declared period {list(decl)} is not a period of (L, mu)")
        if found is not None:
            P, Pp = found
            g_, u, v = gcd_ext(n, P)
            m = compose(power(sigma(spec), v), power(psi(spec, (P, Pp)), u))
            name = _word(("sigma", v), ("psi", u))
            gens = [GeneratorEntry(name, AffineMapSpec(m.steps, name,
                                                       {"u": u, "v": v, "P": P, "Pp": Pp},
                                                       m.expected_C))]
            return done(5, "Z", gens, lambda g: _imc_rank1(
                g[0].report.defect.C, 2.0 * g_ / (P * lam), lam,
                f"(2 gcd(n,P)/(P Lambda))Z with P = {P}", "(2 Lambda n / P)(n ∧ P) Z"))
    gens = [GeneratorEntry("sigma", sigma(spec))]
    return done(4, "Z", gens, lambda g: _imc_rank1(
        g[0].report.defect.C, 2.0 / lam, lam, "(2/Lambda)Z", "2 Lambda Z"))


def _imc_case7(gens: list[GeneratorEntry], lam: float) -> dict:
    cs, cc = gens[0].report.defect.C, gens[1].report.defect.C
    return {"symbolic": "(2/Lambda)(Z + alpha Z), alpha irrational",
            "unnormalized": "2 Lambda (Z + alpha Z)",
            "measured_C_sigma": cs, "measured_C_chi": cc, "alpha": cc / cs,
            "independence": "alpha = q(2k + q Lcal)/(2 Lambda) is irrational because k/Lambda "
                            "is certified irrational and Lcal/Lambda rational"}


def classify(source: MetricSpec | NormalForm, certs: ArithCertificates | None = None,
             grid_n: int = 64, verify_grid: int = 12) -> ClassReport:
    """Classify a metric spec or a normal form; undecided branches name the missing data."""
    if isinstance(source, MetricSpec):
        spec = source
        certs = certs if certs is not None else spec.certs
        if spec.lattice.kind != "gamma":
            return _with_spec(_torus_report(spec, grid_n), spec)
        if spec.theta.is_rational:
            nf = reduce(spec)
        else:
            try:
                nf = reduce(spec)
            except (IncompatibleNormalForm, LolightError):
                nf = None
            if nf is None or isinstance(nf, NormalFormDio):
                base = nf.to_spec() if nf is not None else spec
                return _with_spec(_dio_report(nf, spec, grid_n, verify_grid), base)
    else:
        nf = source
        certs = certs or ArithCertificates()
    if isinstance(nf, NormalFormDio):
        return _with_spec(_dio_report(nf, nf.to_spec(), grid_n, verify_grid), nf.to_spec())
    try:
        base = nf.to_spec(normal_form_certs(nf, certs))
    except CertificateMissing:
        base = nf.to_spec()
    return _with_spec(_closed_report(nf, certs, grid_n, verify_grid), base)


def _with_spec(report: ClassReport, spec: MetricSpec) -> ClassReport:
    report.spec = spec
    return report


def imC_description(report: ClassReport) -> dict:
    return dict(report.imC)


def case_generators(report: ClassReport) -> list[AffineMapSpec]:
    return [g.map for g in report.generators]


__all__ = [
    "ClassReport", "GeneratorEntry", "classify", "isom_compactness", "imC_description",
    "find_period", "is_period", "is_flat", "flow_linearity", "normal_form_certs",
    "case_generators", "FLAT_TORUS", "UNDECIDED",
]
