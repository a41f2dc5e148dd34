"""Structured diffeomorphisms of R^3, pullbacks and the affine defect.

A map is a chain of primitives, each with an exact differential and inverse:

* ``Affine``: p -> M p + t
* ``XFun``: (x, y, z) -> (x + f(y, z), y, z) with f a :class:`PolyPeriodic`
* ``YFun``: (x, y, z) -> (x, y + h(z), z) with h a :class:`PolyPeriodic` in z
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import CertificateMissing, IncompatibleNormalForm, NotLatticeNormalizing
from .model import IRRATIONAL, LatticeSpec, MetricSpec, metric_coords_at
from .periodic import PeriodicFn1D, PeriodicFn2D, PolyPeriodic, eval_poly_many, grid_points

NORMALIZER_TOL = 1e-9


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Affine:
    mat: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mat", np.array(self.mat, dtype=float).reshape(3, 3))
        object.__setattr__(self, "shift", np.array(self.shift, dtype=float).reshape(3))

    def apply(self, p):
        return p @ self.mat.T + self.shift

    def jac(self, p):
        return np.broadcast_to(self.mat, p.shape[:-1] + (3, 3))

    def inverse(self):
        inv = np.linalg.inv(self.mat)
        return Affine(inv, -inv @ self.shift)

    def describe(self) -> dict:
        return {"affine": {"matrix": self.mat.tolist(), "shift": self.shift.tolist()}}


@dataclass(frozen=True, eq=False)
class XFun:
    f: PolyPeriodic

    def __post_init__(self):
        object.__setattr__(self, "_d", (self.f, self.f.dy(), self.f.dz()))

    def apply(self, p):
        out = p.copy()
        out[..., 0] += self.f.eval(p[..., 1], p[..., 2])
        return out

    def jac(self, p):
        vals = eval_poly_many(self._d[1:], p[..., 1], p[..., 2])
        J = np.broadcast_to(np.eye(3), p.shape[:-1] + (3, 3)).copy()
        J[..., 0, 1] = vals[0]
        J[..., 0, 2] = vals[1]
        return J

    def inverse(self):
        return XFun(-self.f)

    def describe(self) -> dict:
        return {"x_shift": {"degree": self.f.degree}}


@dataclass(frozen=True, eq=False)
class YFun:
    h: PolyPeriodic

    def __post_init__(self):
        if any(part.depends_on_y() for part in self.h.parts):
            raise ValueError("y-shift must depend on z only")
        object.__setattr__(self, "_dh", self.h.dz())

    def apply(self, p):
        out = p.copy()
        out[..., 1] += self.h.eval(np.zeros_like(p[..., 2]), p[..., 2])
        return out

    def jac(self, p):
        J = np.broadcast_to(np.eye(3), p.shape[:-1] + (3, 3)).copy()
        J[..., 1, 2] = self._dh.eval(np.zeros_like(p[..., 2]), p[..., 2])
        return J

    def inverse(self):
        return YFun(-self.h)

    def describe(self) -> dict:
        return {"y_shift": {"degree": self.h.degree}}


@dataclass(frozen=True, eq=False)
class XPoly:
    """(x, y, z) -> (x + sum c_ij y^i z^j, y, z)."""

    coeffs: dict

    def _value(self, y, z):
        return sum(c * y ** i * z ** j for (i, j), c in self.coeffs.items())

    def _grad(self, y, z):
        gy = sum(c * i * y ** (i - 1) * z ** j for (i, j), c in self.coeffs.items() if i)
        gz = sum(c * j * y ** i * z ** (j - 1) for (i, j), c in self.coeffs.items() if j)
        return gy, gz

    def apply(self, p):
        out = p.copy()
        out[..., 0] += self._value(p[..., 1], p[..., 2])
        return out

    def jac(self, p):
        J = np.broadcast_to(np.eye(3), p.shape[:-1] + (3, 3)).copy()
        gy, gz = self._grad(p[..., 1], p[..., 2])
        J[..., 0, 1] = gy
        J[..., 0, 2] = gz
        return J

    def inverse(self):
        return XPoly({k: -v for k, v in self.coeffs.items()})

    def describe(self) -> dict:
        return {"x_poly": {f"y^{i} z^{j}": c for (i, j), c in sorted(self.coeffs.items())}}


# ---------------------------------------------------------------------------
# maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AffineMapSpec:
    """phi = steps[0] o steps[1] o ... ; the last step acts first."""

    steps: tuple = ()
    label: str = "id"
    params: dict = field(default_factory=dict)
    expected_C: float | None = None

    @classmethod
    def identity(cls) -> "AffineMapSpec":
        return cls((), "id", {}, 0.0)

    @classmethod
    def affine(cls, mat, shift, label: str = "affine", **kw) -> "AffineMapSpec":
        return cls((Affine(mat, shift),), label, **kw)

    def __call__(self, pts):
        return self.apply(pts)

    def apply(self, pts) -> np.ndarray:
        p = np.array(pts, dtype=float)
        for step in reversed(self.steps):
            p = step.apply(p)
        return p

    def apply_with_jac(self, pts) -> tuple[np.ndarray, np.ndarray]:
        p = np.array(pts, dtype=float)
        J = np.broadcast_to(np.eye(3), p.shape[:-1] + (3, 3)).copy()
        for step in reversed(self.steps):
            J = np.einsum("...ij,...jk->...ik", step.jac(p), J)
            p = step.apply(p)
        return p, J

    def jac(self, pts) -> np.ndarray:
        return self.apply_with_jac(pts)[1]

    def inverse(self) -> "AffineMapSpec":
        neg = None if self.expected_C is None else -self.expected_C
        return AffineMapSpec(tuple(s.inverse() for s in reversed(self.steps)),
                             f"({self.label})^-1", dict(self.params), neg)

    def describe(self) -> dict:
        out = {"kind": self.label}
        if self.params:
            out["params"] = {k: (float(v) if isinstance(v, (float, np.floating)) else v)
                             for k, v in self.params.items()}
        if self.expected_C is not None:
            out["expected_C"] = float(self.expected_C)
        return out


def compose(*maps: AffineMapSpec) -> AffineMapSpec:
    """compose(f, g, h) = f o g o h."""
    steps = tuple(s for m in maps for s in m.steps)
    label = " o ".join(m.label for m in maps) if maps else "id"
    if all(m.expected_C is not None for m in maps):
        c = float(sum(m.expected_C for m in maps))
    else:
        c = None
    return AffineMapSpec(steps, label, {}, c)


def power(phi: AffineMapSpec, k: int) -> AffineMapSpec:
    if k == 0:
        return AffineMapSpec.identity()
    base = phi if k > 0 else phi.inverse()
    out = compose(*([base] * abs(k)))
    return AffineMapSpec(out.steps, f"({phi.label})^{k}", dict(phi.params),
                         None if phi.expected_C is None else k * phi.expected_C)


# ---------------------------------------------------------------------------
# lattice normalizer test
# ---------------------------------------------------------------------------


def _lattice_coords(lattice: LatticeSpec, p: np.ndarray, q: np.ndarray):
    """Real coordinates (a, b, c) of the lattice element sending p to q, or None."""
    d = q - p
    if lattice.kind == "gamma":
        c = d[..., 2]
        b = d[..., 1]
        # tau_x^a tau_y^b tau_z^c (x, y, z) = (x + a + b c1 + c n y + c c2, y + b, z + c)
        a = d[..., 0] - b * lattice.c1 - c * lattice.n * p[..., 1] - c * lattice.c2
        return a, b, c
    if lattice.kind == "torusA":
        c = d[..., 2]
        a = d[..., 0] - c * lattice.r1
        b = d[..., 1] - a * lattice.tau - c * lattice.r2
        return a, b, c
    b = d[..., 1]
    a = d[..., 0] - b * lattice.r1
    c = d[..., 2] - a * lattice.tau - b * lattice.r2
    return a, b, c


def _is_lattice_element(lattice, p, q, tol) -> bool:
    parts = _lattice_coords(lattice, p, q)
    for comp in parts:
        r = np.round(comp[0])
        if np.abs(comp - r).max() > tol:
            return False
    # gamma: a depends on the order of generators only through integer shifts
    return True


def normalizes_lattice(phi: AffineMapSpec, lattice: LatticeSpec, n_points: int = 24,
                       tol: float = NORMALIZER_TOL, seed: int = 7) -> bool:
    """True iff phi gamma phi^-1 and phi^-1 gamma phi are lattice elements for each generator."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.5, 1.5, size=(n_points, 3))
    inv = phi.inverse()
    for gen in lattice.generators().values():
        for outer, inner in ((phi, inv), (inv, phi)):
            q = outer.apply(gen.apply(inner.apply(pts)))
            if not _is_lattice_element(lattice, pts, q, tol):
                return False
    return True


# ---------------------------------------------------------------------------
# pullback and defect
# ---------------------------------------------------------------------------


def sample_points(grid_n: int, xs: Sequence[float] = (0.0, 0.5)) -> np.ndarray:
    y, z = grid_points(grid_n)
    pts = [np.stack([np.full_like(y, x), y, z], axis=-1) for x in xs]
    return np.concatenate(pts, axis=0)


def pullback_at(spec: MetricSpec, phi: AffineMapSpec, pts: np.ndarray) -> np.ndarray:
    img, J = phi.apply_with_jac(pts)
    G = metric_coords_at(spec, img[..., 1], img[..., 2])
    return np.einsum("...ai,...ab,...bj->...ij", J, G, J)


def pullback(spec: MetricSpec, phi: AffineMapSpec, grid_n: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """(points, phi^* g at the points) on a grid in (y, z) with x in {0, 1/2}."""
    pts = sample_points(grid_n)
    return pts, pullback_at(spec, phi, pts)


@dataclass(frozen=True)
class AffineDefect:
    C: float
    residual: float
    spread: float
    lam: float

    def ok(self, tol: float = 1e-8) -> bool:
        return self.residual < tol and self.spread < tol

    def to_json(self) -> dict:
        return {"C": self.C, "residual": self.residual, "spread": self.spread, "lambda": self.lam}


def affine_defect(spec: MetricSpec, phi: AffineMapSpec, grid_n: int = 16,
                  check_lattice: bool = True) -> AffineDefect:
    """Fit phi^* g - g = C X_flat (x) X_flat pointwise and report the constant C."""
    if check_lattice and not normalizes_lattice(phi, spec.lattice):
        raise NotLatticeNormalizing(f"{phi.label} does not normalize the lattice")
    pts = sample_points(grid_n)
    G = metric_coords_at(spec, pts[:, 1], pts[:, 2])
    delta = pullback_at(spec, phi, pts) - G
    xi = G[:, 0, :]
    xx = np.einsum("pi,pj->pij", xi, xi)
    cp = np.einsum("pij,pij->p", delta, xx) / np.einsum("pij,pij->p", xx, xx)
    C = float(np.mean(cp))
    residual = float(np.abs(delta - C * xx).max())
    spread = float(cp.max() - cp.min())
    lam = float(phi.jac(pts[:1])[0, 0, 0])
    return AffineDefect(C, residual, spread, lam)


def decompose_E(spec: MetricSpec, phi: AffineMapSpec, point) -> tuple[np.ndarray, np.ndarray]:
    """E with phi^* g(u, v) = g(E u, v) and N = E - Id."""
    p = np.asarray(point, dtype=float).reshape(-1, 3)
    G = metric_coords_at(spec, p[:, 1], p[:, 2])
    E = np.linalg.solve(G, pullback_at(spec, phi, p))
    N = E - np.eye(3)
    if np.asarray(point).ndim == 1:
        return E[0], N[0]
    return E, N


def nilpotency_residual(spec: MetricSpec, phi: AffineMapSpec, grid_n: int = 8) -> tuple[float, float]:
    """(sup |N^2|, sup |N - C X xi^T|) on a grid."""
    pts = sample_points(grid_n)
    _, N = decompose_E(spec, phi, pts)
    d = affine_defect(spec, phi, grid_n, check_lattice=False)
    G = metric_coords_at(spec, pts[:, 1], pts[:, 2])
    X = np.array([1.0, 0.0, 0.0])
    target = d.C * np.einsum("i,pj->pij", X, G[:, 0, :])
    return float(np.abs(N @ N).max()), float(np.abs(N - target).max())


def isometry_residual(src: MetricSpec, dst: MetricSpec, psi: AffineMapSpec,
                      grid_n: int = 12) -> float:
    """sup |psi^* g_dst - g_src| on a grid: zero iff psi is an isometry src -> dst."""
    pts = sample_points(grid_n)
    G = metric_coords_at(src, pts[:, 1], pts[:, 2])
    return float(np.abs(pullback_at(dst, psi, pts) - G).max())


def conjugates_lattice(psi: AffineMapSpec, src: LatticeSpec, dst: LatticeSpec,
                       n_points: int = 24, tol: float = NORMALIZER_TOL, seed: int = 11) -> bool:
    """True iff psi gamma psi^-1 lies in ``dst`` for every generator gamma of ``src``."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.5, 1.5, size=(n_points, 3))
    inv = psi.inverse()
    return all(_is_lattice_element(dst, pts, psi.apply(g.apply(inv.apply(pts))), tol)
               for g in src.generators().values())


def check_r_invariance(spec: MetricSpec, phi: AffineMapSpec, grid_n: int = 16) -> float:
    """sup |r o phi - lambda^2 r| on a grid."""
    from .curvature import curvature_r_at

    pts = sample_points(grid_n, xs=(0.0,))
    img, J = phi.apply_with_jac(pts)
    lam = J[:, 0, 0]
    r0 = curvature_r_at(spec, pts[:, 1], pts[:, 2])
    r1 = curvature_r_at(spec, img[:, 1], img[:, 2])
    return float(np.abs(r1 - lam ** 2 * r0).max())


# ---------------------------------------------------------------------------
# normal-form quantities used by the generators
# ---------------------------------------------------------------------------


def _closed_data(spec: MetricSpec):
    if spec.theta.value != 0.0:
        raise IncompatibleNormalForm("closed-leaf generators need theta = 0")
    if spec.L2.depends_on_y() or not spec.nu.is_constant():
        raise IncompatibleNormalForm("closed-leaf generators need L = L(z) and constant nu")
    return spec.L2.fiber_mean("y"), spec.nu.mean()


def lcal(L2: PeriodicFn1D, grid: int | None = None) -> float:
    """Harmonic mean 1 / mean(1/L^2), exact for trig polynomials up to quadrature."""
    n = grid or max(1024, 16 * (L2.max_freq + 1))
    return float(1.0 / np.mean(1.0 / L2.on_grid(n)))


def inverse_series(L2: PeriodicFn1D, max_freq: int | None = None) -> PeriodicFn1D:
    m = max_freq or min(12 * L2.max_freq + 32, 256)
    if L2.max_freq == 0:
        return PeriodicFn1D.const(1.0 / L2.mean())
    f = PeriodicFn1D.from_function(lambda z: 1.0 / L2.eval(z), m, 8 * (m + 1))
    return f.trim(1e-18 * float(np.abs(f.coef).max()))


def h_periodic(L2: PeriodicFn1D) -> tuple[float, PeriodicFn1D]:
    """(Lcal, H_p) with H(z) = Lcal * int_0^z L^-2 = z + H_p(z) and H_p(0) = 0."""
    inv = inverse_series(L2)
    lc = 1.0 / inv.mean()
    prim = (inv * lc - 1.0).antiderivative(tol=1e-9)
    return lc, prim - float(prim.eval(0.0))


def _lift1(f: PeriodicFn1D) -> PeriodicFn2D:
    return PeriodicFn2D.lift_z(f)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def _xshear(a_y: float, b_z: float, shift=(0.0, 0.0, 0.0)) -> Affine:
    return Affine([[1, a_y, b_z], [0, 1, 0], [0, 0, 1]], shift)


def sigma(spec: MetricSpec) -> AffineMapSpec:
    if spec.theta.value != 0.0:
        raise IncompatibleNormalForm("sigma preserves the metric form only for theta = 0")
    return AffineMapSpec((_xshear(0.0, 1.0),), "sigma", {}, 2.0 / spec.Lambda)


def flow_y(spec: MetricSpec, s: float) -> AffineMapSpec:
    n, th = spec.n, spec.theta.value
    step = Affine([[1, 0, n * s], [0, 1, 0], [0, 0, 1]], [n * th * s * s / 2.0, s, th * s])
    return AffineMapSpec((step,), "flowY", {"s": float(s)}, 2.0 * n * s / spec.Lambda)


def flow_z(spec: MetricSpec, t: float) -> AffineMapSpec:
    return AffineMapSpec((Affine(np.eye(3), [0.0, 0.0, t]),), "flowZ", {"t": float(t)}, None)


def phi0(spec: MetricSpec) -> AffineMapSpec:
    if spec.n == 0:
        raise IncompatibleNormalForm("phi0 needs n != 0")
    step = _xshear(0.0, 1.0, (0.0, 0.0, spec.theta.value / spec.n))
    return AffineMapSpec((step,), "phi0", {}, 2.0 / spec.Lambda)


def phi_lab(spec: MetricSpec, ell: int, A: float, B: float) -> AffineMapSpec:
    """x' = x + P_n(z) + eta(z) + A y + B z, y' = y - ell H(z)."""
    L2, k = _closed_data(spec)
    lam, n = spec.Lambda, spec.n
    lc, Hp = h_periodic(L2)
    inv = inverse_series(L2)
    # S0 gathers the dz^2 terms that eta must flatten
    S0 = Hp * (-2.0 * lam * n * ell) + inv * (ell * ell * lc * lc - 2.0 * k * ell * lc)
    eta = (S0 - S0.mean()).antiderivative(tol=1e-9) * (-1.0 / (2.0 * lam))
    zero = PeriodicFn2D.zero()
    xs = PolyPeriodic((_lift1(eta), _lift1(Hp * (-n * ell) + n * ell / 2.0),
                       PeriodicFn2D.const(-n * ell / 2.0)))
    ys = PolyPeriodic((_lift1(Hp * (-float(ell))), PeriodicFn2D.const(-float(ell)))) \
        if ell else PolyPeriodic((zero,))
    steps = (YFun(ys), XFun(xs.stripped()), _xshear(A, B))
    c_val = (ell * ell * lc - 2 * k * ell + n * lam * ell + 2 * lam * B
             - 2 * lam * n * ell * Hp.mean()) / lam ** 2
    affine = abs(A - ell * lc / lam) <= 1e-9 * (1 + abs(A))
    return AffineMapSpec(steps, "phi_lAB", {"ell": ell, "A": A, "B": B},
                         c_val if affine else None)


def _require_rational(value, name: str) -> Fraction:
    if value is None:
        raise CertificateMissing(f"{name} certificate required")
    if value == IRRATIONAL:
        raise IncompatibleNormalForm(f"{name} is certified irrational")
    return value


def chi(spec: MetricSpec) -> AffineMapSpec:
    """phi_{-q,-p,0} for Lcal = (p/q) Lambda."""
    ratio = _require_rational(spec.certs.Lcal_over_Lambda, "Lcal_over_Lambda")
    p, q = ratio.numerator, ratio.denominator
    L2, _ = _closed_data(spec)
    lc = lcal(L2)
    if abs(lc - float(ratio) * spec.Lambda) > 1e-9:
        raise IncompatibleNormalForm(f"declared Lcal/Lambda = {ratio} but measured {lc / spec.Lambda}")
    out = phi_lab(spec, -q, -p, 0.0)
    return AffineMapSpec(out.steps, "chi", {"p": p, "q": q}, out.expected_C)


def chi_prime_exponents(spec: MetricSpec) -> tuple[int, int]:
    """(b, B) with C(chi^b o sigma^-B) = 0 for n = 0."""
    ratio = _require_rational(spec.certs.Lcal_over_Lambda, "Lcal_over_Lambda")
    kr = _require_rational(spec.certs.k_over_Lambda, "k_over_Lambda")
    q = ratio.denominator
    # C(chi) Lambda / 2 = q (2k + q Lcal) / (2 Lambda), a rational number
    unit = Fraction(q) * (2 * kr + q * ratio) / 2
    b = unit.denominator
    return b, int(unit * b)


def chi_prime(spec: MetricSpec) -> AffineMapSpec:
    """An affine map with vanishing defect built from chi; witnesses non-compactness."""
    c_chi = chi(spec)
    if spec.n == 0:
        b, B = chi_prime_exponents(spec)
        out = compose(power(c_chi, b), power(sigma(spec), -B))
        return AffineMapSpec(out.steps, "chi_prime", {"b": b, "B": B}, out.expected_C)
    s = -c_chi.expected_C * spec.Lambda / (2.0 * spec.n)
    out = compose(c_chi, flow_y(spec, s))
    return AffineMapSpec(out.steps, "chi_prime", {"s": s}, out.expected_C)


def psi(spec: MetricSpec, period: tuple[int, int] | None = None) -> AffineMapSpec:
    """Flow of Ybar for time 1/P after the z-translation by P'/n, with the y-shear by P'."""
    if spec.n == 0:
        raise IncompatibleNormalForm("psi needs n != 0")
    if period is None:
        period = spec.certs.period_decl
    if period is None:
        raise CertificateMissing("psi needs a declared period (P, P')")
    P, Pp = period
    n = spec.n
    step = Affine([[1, Pp, n / P], [0, 1, 0], [0, 0, 1]], [Pp / P, 1.0 / P, Pp / n])
    return AffineMapSpec((step,), "psi", {"P": P, "Pp": Pp}, 2.0 * n / (P * spec.Lambda))


GENERATOR_KINDS = ("sigma", "chi", "chi_prime", "psi", "phi0", "flowY", "flowZ", "phi_lAB")


def make_generator(kind: str, params: dict | None, spec: MetricSpec) -> AffineMapSpec:
    params = dict(params or {})
    if kind == "sigma":
        return sigma(spec)
    if kind == "chi":
        return chi(spec)
    if kind == "chi_prime":
        return chi_prime(spec)
    if kind == "psi":
        per = params.get("P"), params.get("Pp")
        return psi(spec, None if per[0] is None else (int(per[0]), int(per[1] or 0)))
    if kind == "phi0":
        return phi0(spec)
    if kind == "flowY":
        return flow_y(spec, float(params.get("s", 1.0)))
    if kind == "flowZ":
        return flow_z(spec, float(params.get("t", 1.0)))
    if kind == "phi_lAB":
        return phi_lab(spec, int(params.get("ell", 1)), float(params.get("A", 0.0)),
                       float(params.get("B", 0.0)))
    raise ValueError(f"unknown generator kind {kind!r}")


@dataclass(frozen=True)
class GeneratorReport:
    label: str
    normalizes: bool
    defect: AffineDefect
    n_squared: float
    n_shape: float
    r_invariance: float

    def passed(self, tol_defect: float = 1e-8, tol_r: float = 1e-7) -> bool:
        return (self.normalizes and self.defect.ok(tol_defect) and self.n_squared < tol_defect
                and self.n_shape < tol_defect and self.r_invariance < tol_r)

    def to_json(self) -> dict:
        return {"label": self.label, "normalizes_lattice": self.normalizes,
                "defect": self.defect.to_json(), "N_squared": self.n_squared,
                "N_shape": self.n_shape, "r_invariance": self.r_invariance,
                "passed": self.passed()}


def verify_generator(spec: MetricSpec, phi: AffineMapSpec, grid_n: int = 16) -> GeneratorReport:
    norm = normalizes_lattice(phi, spec.lattice)
    defect = affine_defect(spec, phi, grid_n, check_lattice=False)
    n2, nshape = nilpotency_residual(spec, phi, max(4, grid_n // 2))
    rinv = check_r_invariance(spec, phi, grid_n)
    return GeneratorReport(phi.label, norm, defect, n2, nshape, rinv)


__all__ = [
    "Affine", "XFun", "XPoly", "YFun", "AffineMapSpec", "AffineDefect", "GeneratorReport",
    "compose", "power", "normalizes_lattice", "pullback", "pullback_at", "affine_defect",
    "decompose_E", "isometry_residual", "conjugates_lattice", "nilpotency_residual", "check_r_invariance", "make_generator",
    "verify_generator", "sigma", "chi", "chi_prime", "psi", "phi0", "flow_y", "flow_z",
    "phi_lab", "lcal", "h_periodic", "inverse_series", "GENERATOR_KINDS",
]
