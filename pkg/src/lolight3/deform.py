"""Deformation of a metric to a flat one through metrics sharing an affine map.

The standard path interpolates the leaf length and the last diagonal entry,

    L_t^2 = (1 - t) + t L^2,    mu_t = t mu,

keeping the remaining constants fixed. It ends at a flat metric for t = 0 and
keeps the maps sigma, phi0, the Y-flow and psi affine for every t.

Maps that shift y along z (the chi family) are not affine along that path. For
them ``case_iv=True`` selects a second family, built from the map itself: with
chi(x, y, z) = (x + F(z) + A y, y + Q(z), z) and a fixed defect C, the metric

    2 a dx dz + b dy^2 + 2 c dy dz + e dz^2

satisfies chi^* g = g + C (a dz)^2 exactly when a = -b Q'/A and
c = (C a^2 - 2 a F' - b Q'^2) / (2 Q'). Taking b_u = (1 - u) + u L^2 and
e_u = u mu gives a path from a flat metric to the input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curvature import r_on_grid
from .errors import IncompatibleNormalForm, PositivityLoss, VerificationFailed
from .model import MetricSpec
from .normalform import NormalFormClosed, NormalFormDio
from .periodic import PeriodicFn1D, PeriodicFn2D, PolyPeriodic
from .transforms import AffineDefect, AffineMapSpec, affine_defect

DEFAULT_SAMPLES = (0.0, 0.25, 0.5, 0.75, 1.0)
PATH_TOL = 1e-8
COLLINEAR_TOL = 1e-9
POSITIVITY_GRID = 128
# Fourier resolution of the chi-family coefficients
CHI_MODES = 96


def _as_spec(source) -> MetricSpec:
    if isinstance(source, (NormalFormClosed, NormalFormDio)):
        return source.to_spec()
    if isinstance(source, MetricSpec):
        return source
    raise TypeError(f"expected a metric spec or normal form, got {type(source).__name__}")


def _check_t(t: float) -> float:
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"path parameter must lie in [0, 1], got {t}")
    return t


def _interp_L2(L2: PeriodicFn2D, t: float) -> PeriodicFn2D:
    out = PeriodicFn2D.const(1.0 - t) + L2 * t
    if out.on_grid(POSITIVITY_GRID).min() <= 0.0:
        raise PositivityLoss(f"L^2 loses positivity at t = {t}")
    return out


def deform_path(source, t: float) -> MetricSpec:
    """Member t of the standard path; t = 1 returns the input metric."""
    spec = _as_spec(source)
    t = _check_t(t)
    if t == 1.0:
        return spec
    if not spec.nu.is_constant():
        raise IncompatibleNormalForm("the deformation path needs a constant nu (a normal form)")
    return spec.with_(L2=_interp_L2(spec.L2, t), mu=spec.mu * t)


# ---------------------------------------------------------------------------
# the chi family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShearData:
    """Jets of a map (x + F(z) + A y, y + Q(z), z): A and the sampled F', Q'."""

    A: float
    z: np.ndarray
    dF: np.ndarray
    dQ: np.ndarray


def shear_data(phi: AffineMapSpec, n_samples: int = 512) -> ShearData:
    z = np.arange(n_samples) / n_samples
    J = {}
    for y0 in (0.0, 0.37):
        pts = np.stack([np.full_like(z, 0.21), np.full_like(z, y0), z], axis=-1)
        J[y0] = phi.jac(pts)
    Ja = J[0.0]
    expected = np.broadcast_to(np.eye(3), Ja.shape).copy()
    expected[:, 0, 1:] = Ja[:, 0, 1:]
    expected[:, 1, 2] = Ja[:, 1, 2]
    scale = 1.0 + float(np.abs(Ja).max())
    if (np.abs(Ja - expected).max() > 1e-10 * scale
            or np.abs(J[0.37] - Ja).max() > 1e-10 * scale):
        raise IncompatibleNormalForm(f"{phi.label} is not of the form (x + F(z) + A y, y + Q(z), z)")
    A = Ja[:, 0, 1]
    if np.ptp(A) > 1e-10 * scale or abs(A[0]) < 1e-12:
        raise IncompatibleNormalForm(f"{phi.label} needs a constant nonzero y-shear")
    dQ = Ja[:, 1, 2]
    if np.abs(dQ).min() < 1e-12:
        raise IncompatibleNormalForm(f"{phi.label} has a y-shift with vanishing derivative")
    return ShearData(float(A[0]), z, Ja[:, 0, 2], dQ)


def _fit(values: np.ndarray) -> PeriodicFn1D:
    m = min(CHI_MODES, values.size // 2 - 1)
    return PeriodicFn1D.from_samples(values, m).trim(1e-15 * (1.0 + float(np.abs(values).max())))


@dataclass(frozen=True)
class ChiFamily:
    spec: MetricSpec
    data: ShearData
    C: float

    def member(self, u: float) -> MetricSpec:
        u = _check_t(u)
        if u == 1.0:
            return self.spec
        d, C = self.data, self.C
        L2 = self.spec.L2.fiber_mean("y").on_grid(d.z.size)
        b = (1.0 - u) + u * L2
        if b.min() <= 0.0:
            raise PositivityLoss(f"L^2 loses positivity at u = {u}")
        a = -b * d.dQ / d.A
        c = (C * a * a - 2.0 * a * d.dF - b * d.dQ ** 2) / (2.0 * d.dQ)
        lift = PeriodicFn2D.lift_z
        return MetricSpec(self.spec.lattice, self.spec.theta, self.spec.Lambda, lift(_fit(b)),
                          lift(_fit(c)), self.spec.mu * u, self.spec.certs,
                          overrides={(0, 2): PolyPeriodic.of(lift(_fit(a)))})


def chi_family(source, phi: AffineMapSpec, grid_n: int = 12) -> ChiFamily:
    """The metric family on which ``phi`` keeps its defect; member 1 is the input."""
    spec = _as_spec(source)
    if spec.n != 0 or spec.lattice.kind != "gamma" or spec.theta.value != 0.0:
        raise IncompatibleNormalForm("the chi family is built for closed leaves with n = 0")
    if spec.L2.depends_on_y() or not spec.nu.is_constant() or spec.mu.depends_on_y():
        raise IncompatibleNormalForm("the chi family needs L = L(z), constant nu and mu = mu(z)")
    data = shear_data(phi)
    C = affine_defect(spec, phi, grid_n).C
    fam = ChiFamily(spec, data, C)
    # member 1 computed from the formulas must reproduce the input
    L2 = spec.L2.fiber_mean("y").on_grid(data.z.size)
    a1 = -L2 * data.dQ / data.A
    c1 = (C * a1 * a1 - 2.0 * a1 * data.dF - L2 * data.dQ ** 2) / (2.0 * data.dQ)
    gap = max(float(np.abs(a1 - spec.Lambda).max()), float(np.abs(c1 - spec.nu.mean()).max()))
    if gap > 1e-7:
        raise IncompatibleNormalForm(f"{phi.label} is not affine for this metric (gap {gap:.3e})")
    return fam


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


def _moves_y_along_z(phi: AffineMapSpec) -> bool:
    z = np.linspace(0.0, 1.0, 17)
    pts = np.stack([np.zeros_like(z), np.zeros_like(z), z], axis=-1)
    return bool(np.abs(phi.jac(pts)[:, 1, 2]).max() > 1e-12)


def _require_gate(phi: AffineMapSpec, case_iv: bool) -> None:
    if not case_iv and _moves_y_along_z(phi):
        raise IncompatibleNormalForm(f"{phi.label} shifts y along z; pass case_iv=True to use "
                                     "the chi family (needs the Lcal/Lambda certificate)")


def path_member(source, phi: AffineMapSpec | None, t: float, case_iv: bool = False) -> MetricSpec:
    if case_iv:
        if phi is None:
            raise ValueError("the chi family is defined by a map")
        return chi_family(source, phi).member(t)
    return deform_path(source, t)


def collinearity(ts, values) -> float:
    """Largest deviation of (t, value) samples from the line through the end samples."""
    ts = np.asarray(ts, dtype=float)
    vs = np.asarray(values, dtype=float)
    if ts.size < 3:
        return 0.0
    order = np.argsort(ts)
    ts, vs = ts[order], vs[order]
    slope = (vs[-1] - vs[0]) / (ts[-1] - ts[0])
    return float(np.abs(vs - (vs[0] + slope * (ts - ts[0]))).max())


def verify_along_path(source, phi: AffineMapSpec, t_samples=DEFAULT_SAMPLES,
                      case_iv: bool = False, grid_n: int = 12,
                      tol: float = PATH_TOL) -> list[AffineDefect]:
    """Affine defect of ``phi`` at each sampled member; raises on the first failure."""
    _require_gate(phi, case_iv)
    family = chi_family(source, phi) if case_iv else None
    out = []
    for t in t_samples:
        spec = family.member(t) if family is not None else deform_path(source, t)
        d = affine_defect(spec, phi, grid_n)
        if not d.ok(tol):
            raise VerificationFailed(f"{phi.label} fails at t = {t}: residual {d.residual:.3e}, "
                                     f"spread {d.spread:.3e}")
        out.append(d)
    dev = collinearity(list(t_samples), [d.C for d in out])
    if dev > COLLINEAR_TOL:
        raise VerificationFailed(f"C(t) of {phi.label} is not affine in t (deviation {dev:.3e})")
    return out


def flat_endpoint(source, phi: AffineMapSpec | None = None, case_iv: bool = False,
                  grid_n: int = 64) -> float:
    """sup |r| of the t = 0 member."""
    return float(np.abs(r_on_grid(path_member(source, phi, 0.0, case_iv), grid_n)).max())


def path_report(source, phi: AffineMapSpec, t_samples=DEFAULT_SAMPLES, case_iv: bool = False,
                grid_n: int = 12) -> dict:
    """JSON-ready summary; never raises VerificationFailed."""
    _require_gate(phi, case_iv)
    rows = []
    for t in t_samples:
        spec = path_member(source, phi, t, case_iv)
        d = affine_defect(spec, phi, grid_n)
        rows.append({"t": float(t), **d.to_json(), "passed": d.ok(PATH_TOL)})
    dev = collinearity(list(t_samples), [r["C"] for r in rows])
    r0 = flat_endpoint(source, phi, case_iv)
    return {"map": phi.describe(), "family": "chi" if case_iv else "standard",
            "samples": rows, "C_collinearity": dev, "r_sup_at_0": r0,
            "passed": all(r["passed"] for r in rows) and dev <= COLLINEAR_TOL and r0 < PATH_TOL}


__all__ = [
    "deform_path", "chi_family", "ChiFamily", "ShearData", "shear_data", "path_member",
    "verify_along_path", "collinearity", "flat_endpoint", "path_report", "DEFAULT_SAMPLES",
]
