"""Normal forms, their residual group actions and isometry testing.

Every coordinate change ``Psi`` recorded here satisfies ``Psi^* g_out = g_in``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import least_squares

from .errors import (
    IncompatibleNormalForm,
    NonConstantL,
    NonUnimodular,
    NotInNormalForm,
)
from .model import LatticeSpec, MetricSpec
from .periodic import (
    PeriodicFn1D,
    PeriodicFn2D,
    PolyPeriodic,
    ThetaSpec,
    gcd_ext,
    max_coef_diff,
    solve_cohomological,
    solve_directional,
)
from .transforms import (
    Affine,
    AffineMapSpec,
    XFun,
    XPoly,
    YFun,
    compose,
    h_periodic,
    inverse_series,
    isometry_residual,
    conjugates_lattice,
)

# quantities below this (relative) are treated as already normalized
EXACT_TOL = 1e-13
# default tolerance for comparing normal-form tuples
TUPLE_TOL = 1e-9


# ---------------------------------------------------------------------------
# normal-form containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NormalFormDio:
    """Constant L, constant nu = k, Diophantine slope."""

    n: int
    theta: ThetaSpec
    Lambda: float
    L: float
    k: float
    mu: PeriodicFn2D
    change: AffineMapSpec | None = field(default=None, compare=False)

    def to_spec(self, certs=None) -> MetricSpec:
        from .model import ArithCertificates

        return MetricSpec(LatticeSpec.gamma(self.n), self.theta, self.Lambda,
                          PeriodicFn2D.const(self.L ** 2), PeriodicFn2D.const(self.k), self.mu,
                          certs or ArithCertificates())

    def scalars(self) -> tuple:
        return (self.n, self.theta.value, self.Lambda, self.L, self.k)

    def to_json(self) -> dict:
        return {"family": "diophantine", "n": self.n, "theta": self.theta.to_json(),
                "Lambda": self.Lambda, "L": self.L, "k": self.k, "mu": self.mu.to_json()}


@dataclass(frozen=True, eq=False)
class NormalFormClosed:
    """theta = 0, L = L(z), constant nu = k, mu with constant y-fiber mean."""

    n: int
    Lambda: float
    k: float
    L2: PeriodicFn1D
    mu: PeriodicFn2D
    change: AffineMapSpec | None = field(default=None, compare=False)

    @property
    def theta(self) -> ThetaSpec:
        return ThetaSpec.rational(0)

    @property
    def Lcal(self) -> float:
        return float(1.0 / inverse_series(self.L2).mean())

    def H(self, z) -> np.ndarray:
        lc, hp = h_periodic(self.L2)
        return np.asarray(z, dtype=float) + hp.eval(z)

    def to_spec(self, certs=None) -> MetricSpec:
        from .model import ArithCertificates

        return MetricSpec(LatticeSpec.gamma(self.n), ThetaSpec.rational(0), self.Lambda,
                          PeriodicFn2D.lift_z(self.L2), PeriodicFn2D.const(self.k), self.mu,
                          certs or ArithCertificates())

    def scalars(self) -> tuple:
        return (self.n, self.Lambda, self.k)

    def to_json(self) -> dict:
        return {"family": "closed", "n": self.n, "Lambda": self.Lambda, "k": self.k,
                "L2": self.L2.to_json(), "mu": self.mu.to_json(), "Lcal": self.Lcal}


NormalForm = NormalFormDio | NormalFormClosed


def fiber_mean_of(mu: PeriodicFn2D) -> PeriodicFn1D:
    return mu.fiber_mean("y")


def check_ranges(nf: NormalForm, tol: float = 1e-12) -> list[str]:
    """Violated normal-form range conditions (empty when all hold)."""
    bad = []
    if nf.Lambda <= 0:
        bad.append("Lambda > 0")
    if nf.n != 0:
        if abs(nf.k) > tol:
            bad.append("k = 0")
        if isinstance(nf, NormalFormClosed):
            if np.abs(fiber_mean_of(nf.mu).coef).max() > tol:
                bad.append("fiber mean of mu = 0")
        elif abs(nf.mu.mean()) > tol:
            bad.append("mean of mu = 0")
    else:
        if not (-tol <= nf.k < nf.Lambda + tol):
            bad.append("k in [0, Lambda)")
        m = nf.mu.mean()
        if not (-tol <= m < 2 * nf.Lambda + tol):
            bad.append("mean of mu in [0, 2 Lambda)")
    if isinstance(nf, NormalFormClosed) and not fiber_mean_of(nf.mu).is_constant(1e-11):
        bad.append("fiber mean of mu constant")
    return bad


# ---------------------------------------------------------------------------
# elementary coordinate changes on specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Moved:
    spec: MetricSpec
    change: AffineMapSpec


def _then(prev: Moved, step: Moved) -> Moved:
    return Moved(step.spec, compose(step.change, prev.change))


def _resample2(func, like: tuple[int, int], extra: tuple[int, int] = (0, 48)) -> PeriodicFn2D:
    m = like[0] + extra[0]
    n = min(like[1] + extra[1], 160)
    f = PeriodicFn2D.from_function(func, (m, n), (max(4 * m + 4, 16), max(4 * n + 4, 64)))
    scale = float(np.abs(f.coef).max()) if f.coef.size else 0.0
    return f.trim(1e-16 * (1.0 + scale))


def _is_small(x: float, scale: float = 1.0) -> bool:
    return abs(x) <= EXACT_TOL * (1.0 + abs(scale))


def move_x_function(spec: MetricSpec, N: PeriodicFn2D) -> Moved:
    """Psi = (x + N(y, z), y, z)."""
    th = spec.theta.value
    nu = spec.nu - N.directional(th) * spec.Lambda
    mu = spec.mu - N.dz() * (2.0 * spec.Lambda)
    out = replace(spec, nu=nu, mu=mu)
    return Moved(out, AffineMapSpec((XFun(PolyPeriodic.of(N)),), "x_shift"))


def move_shear(spec: MetricSpec, p: int, q: int) -> Moved:
    """Psi = (x + p y + q z, y, z)."""
    lam, th = spec.Lambda, spec.theta.value
    out = replace(spec, nu=spec.nu - lam * (p + q * th), mu=spec.mu - 2.0 * lam * q)
    step = Affine([[1, p, q], [0, 1, 0], [0, 0, 1]], [0, 0, 0])
    return Moved(out, AffineMapSpec((step,), "shear", {"p": p, "q": q}))


def move_flow_u(spec: MetricSpec, s: float) -> Moved:
    """g_out = Phi^* g_in for Phi = (x + s n z, y + s, z); Psi = Phi^-1."""
    n, lam, th = spec.n, spec.Lambda, spec.theta.value
    out = replace(spec, L2=spec.L2.shift(s, 0.0),
                  nu=spec.nu.shift(s, 0.0) + lam * n * s * th,
                  mu=spec.mu.shift(s, 0.0) + 2.0 * lam * n * s)
    phi = Affine([[1, 0, s * n], [0, 1, 0], [0, 0, 1]], [0, s, 0])
    return Moved(out, AffineMapSpec((phi.inverse(),), "flowU^-1", {"s": s}))


def move_flow_z(spec: MetricSpec, t: float) -> Moved:
    """g_out = Phi^* g_in for Phi = (x, y, z + t); Psi = Phi^-1."""
    n, lam = spec.n, spec.Lambda
    out = replace(spec, L2=spec.L2.shift(0.0, t), nu=spec.nu.shift(0.0, t) - lam * n * t,
                  mu=spec.mu.shift(0.0, t))
    return Moved(out, AffineMapSpec((Affine(np.eye(3), [0, 0, -t]),), "flowZ^-1", {"t": t}))


def move_signs(spec: MetricSpec, e1: int, e2: int, e3: int) -> Moved:
    """Psi = (e1 x, e2 y, e3 z); for n != 0 requires e1 = e2 e3."""
    if spec.n != 0 and e1 != e2 * e3:
        raise IncompatibleNormalForm("sign change does not normalize the lattice")
    th = spec.theta if e2 * e3 == 1 else spec.theta.negated()
    # out functions at (u, v) = in functions at (e2 u, e3 v)
    out = replace(spec, theta=th, Lambda=e1 * e3 * spec.Lambda,
                  L2=spec.L2.reflect(e2, e3), nu=spec.nu.reflect(e2, e3) * float(e2 * e3),
                  mu=spec.mu.reflect(e2, e3))
    step = Affine(np.diag([e1, e2, e3]), [0, 0, 0])
    return Moved(out, AffineMapSpec((step,), "signs", {"e": [e1, e2, e3]}))


def move_gl2(spec: MetricSpec, a: int, b: int, c: int, d: int) -> Moved:
    """(y, z) -> (a y + b z, c y + d z), with the x-correction that normalizes the lattice."""
    det = a * d - b * c
    if det not in (1, -1):
        raise NonUnimodular(f"determinant {det} is not +-1")
    if spec.n != 0 and det == -1:
        # flip (x, y) first so that the remaining matrix has determinant one
        first = move_signs(spec, -1, -1, 1)
        return _then(first, move_gl2(first.spec, -a, b, -c, d))
    th = spec.theta
    rho = a + b * th.value
    if rho == 0.0:
        raise NonUnimodular("degenerate slope image")
    n, lam = spec.n, spec.Lambda
    inv = [[d * det, -b * det], [-c * det, a * det]]

    def at_source(f: PeriodicFn2D) -> PeriodicFn2D:
        return f.compose_linear(inv)

    L2 = at_source(spec.L2)
    nu = at_source(spec.nu)
    mu = at_source(spec.mu)
    nu_o = (nu - L2 * (b / rho)) / det
    mu_o = (mu * rho ** 2 + L2 * b ** 2 - nu * (2.0 * b * rho)) / det ** 2
    if n != 0:
        nu_o = nu_o + 0.5 * n * lam * (a * c + th.value * b * d)
        mu_o = mu_o + n * lam * a * b * rho * (d - c)
    out = replace(spec, theta=th.mobius(a, b, c, d), Lambda=lam * rho / det, L2=L2 / rho ** 2,
                  nu=nu_o, mu=mu_o)
    steps = [Affine([[1, 0, 0], [0, a, b], [0, c, d]], [0, 0, 0])]
    if n != 0:
        steps.append(XPoly({(1, 1): n * b * c, (2, 0): 0.5 * n * a * c, (1, 0): -0.5 * n * a * c,
                            (0, 2): 0.5 * n * b * d, (0, 1): -0.5 * n * b * d}))
    return Moved(out, AffineMapSpec(tuple(steps), "gl2", {"matrix": [a, b, c, d]}))


def move_closed(spec: MetricSpec, P: PolyPeriodic, A: float, B: float,
                Q_periodic: PeriodicFn1D, Q_slope: float) -> Moved:
    """Psi = (x + P(z) + A y + B z, y + Q(z), z) on a theta = 0 spec with L = L(z).

    ``Q(z) = Q_slope * z + Q_periodic(z)``; ``Q_slope`` must be an integer and
    ``P`` must keep ``P' - n z Q'`` periodic.
    """
    if spec.theta.value != 0.0 or spec.L2.depends_on_y():
        raise NotInNormalForm("closed transforms need theta = 0 and L = L(z)")
    n, lam = spec.n, spec.Lambda
    L2 = spec.L2.fiber_mean("y")
    dQ = Q_periodic.derivative() + Q_slope
    # E = P' + B - n z Q' must be periodic in z
    dP = P.dz()
    Ez = dP - PolyPeriodic.monomial(1, float(n)) * PolyPeriodic.of(PeriodicFn2D.lift_z(dQ)) + B
    Ez = Ez.stripped()
    if Ez.degree != 0:
        raise IncompatibleNormalForm("P' - n z Q' is not periodic")
    E = Ez.parts[0]
    Qfun = lambda z: Q_slope * z + Q_periodic.eval(z)  # noqa: E731

    trivial = Q_slope == 0 and np.abs(Q_periodic.coef).max() == 0.0

    def shifted(f: PeriodicFn2D) -> PeriodicFn2D:
        if trivial or not f.depends_on_y():
            return f
        return _resample2(lambda y, z: f.eval(y - Qfun(z), z), f.max_freq)

    L2f = PeriodicFn2D.lift_z(L2)
    dQf = PeriodicFn2D.lift_z(dQ)
    nu_o = shifted(spec.nu) - lam * A - L2f * dQf
    mu_o = (shifted(spec.mu) - E * (2.0 * lam) - L2f * dQf * dQf
            - nu_o * dQf * 2.0)
    out = replace(spec, nu=_clean(nu_o), mu=_clean(mu_o))
    yshift = PolyPeriodic((PeriodicFn2D.lift_z(Q_periodic), PeriodicFn2D.const(float(Q_slope))))
    steps = (YFun(yshift.stripped()), XFun(P.stripped()),
             Affine([[1, A, B], [0, 1, 0], [0, 0, 1]], [0, 0, 0]))
    return Moved(out, AffineMapSpec(steps, "closed_change"))


def _clean(f: PeriodicFn2D) -> PeriodicFn2D:
    scale = float(np.abs(f.coef).max()) if f.coef.size else 0.0
    return f.trim(1e-16 * (1.0 + scale))


def _resample1(func, m: int = 64) -> PeriodicFn1D:
    f = PeriodicFn1D.from_function(func, m, 8 * (m + 1))
    return f.trim(1e-16 * (1.0 + float(np.abs(f.coef).max())))


# ---------------------------------------------------------------------------
# reductions
# ---------------------------------------------------------------------------


def _identity_moved(spec: MetricSpec) -> Moved:
    return Moved(spec, AffineMapSpec.identity())


def normalize_sign(m: Moved) -> Moved:
    if m.spec.Lambda > 0:
        return m
    signs = (-1, 1, 1) if m.spec.n == 0 else (-1, -1, 1)
    return _then(m, move_signs(m.spec, *signs))


def straighten_slope(ceiling: PeriodicFn1D, theta: ThetaSpec) -> tuple[float, PeriodicFn1D, float]:
    """(return time, shift psi, residual) for psi(z + theta) - psi(z) = ceiling - mean."""
    from .periodic import cohomological_residual

    psi = solve_cohomological(ceiling, theta)
    return ceiling.mean(), psi, cohomological_residual(psi, ceiling, theta)


def reduce_diophantine(spec: MetricSpec) -> NormalFormDio:
    if not spec.theta.is_diophantine:
        raise IncompatibleNormalForm("slope is not certified Diophantine")
    if not spec.L2.is_constant():
        raise NonConstantL("Diophantine reduction needs constant L^2")
    m = normalize_sign(_identity_moved(spec))
    s = m.spec
    lam = s.Lambda
    # make nu constant along the parallel direction
    if not s.nu.is_constant():
        N, _ = solve_directional(s.nu / lam, s.theta)
        m = _then(m, move_x_function(s, N))
        s = replace(m.spec, nu=PeriodicFn2D.const(m.spec.nu.mean()))
        m = Moved(s, m.change)
    k = s.nu.mean()
    total = s.mu.mean()
    th = s.theta.value
    if s.n == 0:
        q = math.floor(total / (2 * lam) + EXACT_TOL)
        p = math.floor(k / lam - q * th + EXACT_TOL)
        if p or q:
            m = _then(m, move_shear(m.spec, p, q))
    else:
        s0 = -total / (2 * s.n * lam)
        if not _is_small(s0):
            m = _then(m, move_flow_u(m.spec, s0))
        k1 = m.spec.nu.mean()
        t0 = k1 / (s.n * lam)
        if not _is_small(t0):
            m = _then(m, move_flow_z(m.spec, t0))
    s = m.spec
    return NormalFormDio(s.n, s.theta, s.Lambda, float(math.sqrt(s.L2.mean())), s.nu.mean(),
                         _clean(_snap_mean(s.mu, s.n)), m.change)


def _snap_mean(mu: PeriodicFn2D, n: int) -> PeriodicFn2D:
    if n != 0 and abs(mu.mean()) < 1e-12:
        return mu - mu.mean()
    return mu


def to_closed_chart(spec: MetricSpec) -> Moved:
    """Integer change of (y, z) sending a rational slope p/q to 0."""
    th = spec.theta
    if not th.is_rational:
        raise IncompatibleNormalForm("closed leaves need a rational slope")
    if th.p == 0:
        return _identity_moved(spec)
    p, q = th.p, th.q
    # a q + b p = 1 makes (a, b; -p, q) unimodular with image slope 0
    g, a, b = gcd_ext(q, p)
    return move_gl2(spec, a, b, -p, q)


def reduce_closed(spec: MetricSpec) -> NormalFormClosed:
    m = to_closed_chart(spec)
    if m.spec.L2.depends_on_y():
        raise NotInNormalForm("closed-leaf reduction needs L = L(z) in the closed chart")
    m = normalize_sign(m)
    s = m.spec
    lam, n = s.Lambda, s.n
    # (i) remove the y-dependence of nu
    if s.nu.depends_on_y():
        nf = s.nu.fiber_mean("y")
        N = (s.nu - PeriodicFn2D.lift_z(nf)).antiderivative_y(tol=1e-9) / lam
        m = _then(m, move_x_function(s, N))
        m = Moved(replace(m.spec, nu=PeriodicFn2D.lift_z(nf)), m.change)
        s = m.spec
    # (ii) make nu constant with a y-shift along z
    if s.nu.depends_on_z():
        nu_f = s.nu.fiber_mean("y")
        L2 = s.L2.fiber_mean("y")
        inv = inverse_series(L2)
        lc = 1.0 / inv.mean()
        mf = max(4 * (nu_f.max_freq + L2.max_freq) + 32, 64)
        ratio = _resample1(lambda z: nu_f.eval(z) / L2.eval(z), mf)
        k_o = lc * ratio.mean()
        Q = (ratio - inv * k_o).antiderivative(tol=1e-9)
        Qc = PeriodicFn2D.lift_z(Q)
        W = (Q - Q.mean()).antiderivative(tol=1e-9)
        P = PolyPeriodic((PeriodicFn2D.lift_z(W * (-float(n))), Qc * float(n)))
        m = _then(m, move_closed(s, P, 0.0, 0.0, Q, 0.0))
        m = Moved(replace(m.spec, nu=PeriodicFn2D.const(k_o)), m.change)
        s = m.spec
    # (iii) flatten the fiber mean of mu
    fm = s.mu.fiber_mean("y")
    if not fm.is_constant():
        f = (fm - fm.mean()).antiderivative(tol=1e-9) / (2.0 * lam)
        m = _then(m, move_x_function(s, PeriodicFn2D.lift_z(f)))
        s = m.spec
        s = replace(s, mu=s.mu - PeriodicFn2D.lift_z(s.mu.fiber_mean("y") - s.mu.mean()))
        m = Moved(s, m.change)
    # (iv) integer or flow normalization
    k = s.nu.mean()
    total = s.mu.mean()
    if n == 0:
        q = math.floor(total / (2 * lam) + EXACT_TOL)
        p = math.floor(k / lam + EXACT_TOL)
        if p or q:
            m = _then(m, move_shear(s, p, q))
    else:
        s0 = -total / (2 * n * lam)
        if not _is_small(s0):
            m = _then(m, move_flow_u(m.spec, s0))
        t0 = m.spec.nu.mean() / (n * lam)
        if not _is_small(t0):
            m = _then(m, move_flow_z(m.spec, t0))
    s = m.spec
    k = s.nu.mean()
    if n != 0 and abs(k) < 1e-12:
        k = 0.0
    if n == 0 and abs(k - lam) < 1e-12:
        k = 0.0
    return NormalFormClosed(n, lam, k, s.L2.fiber_mean("y"), _clean(_snap_mean(s.mu, n)),
                            m.change)


def reduce(spec: MetricSpec) -> NormalForm:
    """Dispatch on the slope: rational -> closed family, Diophantine -> constant-L family."""
    if spec.lattice.kind != "gamma":
        raise IncompatibleNormalForm("torus lattices are already in their reduced form")
    if spec.theta.is_rational:
        return reduce_closed(spec)
    return reduce_diophantine(spec)


# ---------------------------------------------------------------------------
# residual group actions
# ---------------------------------------------------------------------------


def act_gl2(nf: NormalFormDio, a: int, b: int, c: int, d: int) -> NormalFormDio:
    moved = move_gl2(nf.to_spec(), a, b, c, d)
    out = reduce_diophantine(moved.spec)
    return replace(out, change=compose(out.change, moved.change))


def act_Z(nf: NormalFormClosed, ell: int) -> NormalFormClosed:
    if ell == 0:
        return nf
    spec = nf.to_spec()
    n = nf.n
    lc, Hp = h_periodic(nf.L2)
    # P_n keeps P' - n z Q' periodic for Q = -ell H
    P = PolyPeriodic((PeriodicFn2D.zero(),
                      PeriodicFn2D.lift_z(Hp * (-n * ell) + n * ell / 2.0),
                      PeriodicFn2D.const(-n * ell / 2.0)))
    moved = move_closed(spec, P, 0.0, 0.0, Hp * (-float(ell)), -float(ell))
    out = reduce_closed(moved.spec)
    return replace(out, change=compose(out.change, moved.change))


def act_signs(nf: NormalForm, e1: int, e2: int, e3: int) -> NormalForm:
    moved = move_signs(nf.to_spec(), e1, e2, e3)
    out = reduce(moved.spec)
    return replace(out, change=compose(out.change, moved.change))


def move_translate(spec: MetricSpec, y0: float, z0: float) -> Moved:
    """g_out = T^* g_in for T = (x, y + y0, z + z0); Psi = T^-1.

    For n != 0 this normalizes the lattice only when n y0 is an integer.
    """
    n, lam = spec.n, spec.Lambda
    out = replace(spec, L2=spec.L2.shift(y0, z0), nu=spec.nu.shift(y0, z0) - n * lam * z0,
                  mu=spec.mu.shift(y0, z0))
    step = Affine(np.eye(3), [0.0, -y0, -z0])
    return Moved(out, AffineMapSpec((step,), "translate", {"y0": y0, "z0": z0}))


def act_translation(nf: NormalForm, y0: float, z0: float) -> NormalForm:
    moved = move_translate(nf.to_spec(), y0, z0)
    out = reduce(moved.spec)
    return replace(out, change=compose(out.change, moved.change))


# ---------------------------------------------------------------------------
# comparisons
# ---------------------------------------------------------------------------


def tuples_equal(a: NormalForm, b: NormalForm, tol: float = TUPLE_TOL) -> bool:
    if type(a) is not type(b) or a.n != b.n:
        return False
    if not np.allclose(a.scalars()[1:], b.scalars()[1:], rtol=0, atol=tol):
        return False
    if max_coef_diff(a.mu, b.mu) > tol:
        return False
    if isinstance(a, NormalFormClosed):
        return max_coef_diff(PeriodicFn2D.lift_z(a.L2), PeriodicFn2D.lift_z(b.L2)) <= tol
    return True


def _stack(nf: NormalForm) -> list[PeriodicFn2D]:
    if isinstance(nf, NormalFormClosed):
        return [nf.mu, PeriodicFn2D.lift_z(nf.L2)]
    return [nf.mu]


def _mode_table(fns: list[PeriodicFn2D]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    js, ks, cs = [], [], []
    for idx, f in enumerate(fns):
        m, n = f.max_freq
        for jj in range(2 * m + 1):
            for kk in range(2 * n + 1):
                js.append(jj - m)
                ks.append(kk - n)
                cs.append((idx, f.coef[jj, kk]))
    return np.array(js), np.array(ks), cs


def _translation_mismatch(a: NormalForm, b: NormalForm, y0: float, z0: float) -> float:
    fa, fb = _stack(a), _stack(b)
    worst = 0.0
    for f, g in zip(fa, fb):
        worst = max(worst, max_coef_diff(f.shift(y0, z0), g))
    return worst


def match_translation(a: NormalForm, b: NormalForm, tol: float = 1e-7,
                      grid: int = 64) -> tuple[float, float] | None:
    """(y0, z0) with a's functions shifted by (y0, z0) equal to b's, or None."""
    if a.n != 0:
        cands = [(i / a.n, j / a.n) for i in range(a.n) for j in range(a.n)]
        for y0, z0 in cands:
            if _translation_mismatch(a, b, y0, z0) <= tol:
                return (y0, z0)
        return None
    fa, fb = _stack(a), _stack(b)
    # coarse search: cross-correlation of the sampled functions
    corr = np.zeros((grid, grid))
    for f, g in zip(fa, fb):
        F = np.fft.fft2(f.on_grid(grid))
        G = np.fft.fft2(g.on_grid(grid))
        corr += np.real(np.fft.ifft2(G * np.conj(F)))
    flat = np.argsort(corr.ravel())[::-1][:8]
    best = None
    for idx in flat:
        i, j = divmod(int(idx), grid)
        start = np.array([-i / grid, -j / grid])

        def resid(v):
            out = []
            for f, g in zip(fa, fb):
                d = f.shift(v[0], v[1]).coef - g.padded(*f.max_freq) if \
                    f.max_freq[0] >= g.max_freq[0] and f.max_freq[1] >= g.max_freq[1] else None
                if d is None:
                    mm = max(f.max_freq[0], g.max_freq[0])
                    nn = max(f.max_freq[1], g.max_freq[1])
                    d = f.shift(v[0], v[1]).padded(mm, nn) - g.padded(mm, nn)
                out.append(d.real.ravel())
                out.append(d.imag.ravel())
            return np.concatenate(out)

        sol = least_squares(resid, start, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        y0, z0 = float(sol.x[0] % 1.0), float(sol.x[1] % 1.0)
        err = _translation_mismatch(a, b, y0, z0)
        if best is None or err < best[0]:
            best = (err, y0, z0)
        if err <= tol:
            return (y0, z0)
    return None


def r_moments(nf: NormalForm, grid: int = 48, orders=(2, 3)) -> np.ndarray:
    """Moments of r against the parallel density; isometry invariants."""
    from .curvature import r_on_grid

    spec = nf.to_spec()
    r = r_on_grid(spec, grid)
    dens = abs(spec.Lambda) * np.sqrt(spec.L2.on_grid(grid))
    vol = dens.mean()
    return np.array([float((r ** p * dens).mean() / vol) for p in orders] + [vol])


@dataclass(frozen=True)
class IsometryDecision:
    decision: str  # isometric | not_isometric | undecided
    witness: dict | None = None
    reason: str = ""

    def to_json(self) -> dict:
        wit = None
        if self.witness is not None:
            wit = {k: v for k, v in self.witness.items() if k != "map"}
            if "map" in self.witness:
                wit["steps"] = [st.describe() for st in self.witness["map"].steps]
        return {"decision": self.decision, "witness": wit, "reason": self.reason}


def _sign_choices(n: int, closed: bool) -> list[tuple[int, int, int]]:
    out = []
    for e in itertools.product((1, -1), repeat=3):
        e1, e2, e3 = e
        if n != 0 and e1 != e2 * e3:
            continue
        if closed and e1 != e3:
            continue
        out.append(e)
    return out


def _unimodular(m_max: int):
    rng = range(-m_max, m_max + 1)
    for a, b, c, d in itertools.product(rng, rng, rng, rng):
        if a * d - b * c in (1, -1):
            yield a, b, c, d


def are_isometric(nf1: NormalForm, nf2: NormalForm, ell_max: int = 8, m_max: int = 6,
                  tol: float = 1e-7) -> IsometryDecision:
    if type(nf1) is not type(nf2):
        return IsometryDecision("undecided", None, "different normal-form families")
    if nf1.n != nf2.n:
        return IsometryDecision("not_isometric", None, "Euler number n differs")
    closed = isinstance(nf1, NormalFormClosed)
    if closed:
        if abs(nf1.Lambda - nf2.Lambda) > tol:
            return IsometryDecision("not_isometric", None, "Lambda differs")
        if abs(nf1.Lcal - nf2.Lcal) > tol:
            return IsometryDecision("not_isometric", None, "harmonic mean of L^2 differs")
    elif abs(nf1.Lambda * nf1.L - nf2.Lambda * nf2.L) > tol:
        return IsometryDecision("not_isometric", None, "Lambda * L differs")
    m1, m2 = r_moments(nf1), r_moments(nf2)
    if not np.allclose(m1, m2, rtol=1e-6, atol=1e-9):
        return IsometryDecision("not_isometric", None, "curvature moments differ")

    src, dst = nf1.to_spec(), nf2.to_spec()
    # witnesses are measured from nf1's own coordinates
    nf1 = replace(nf1, change=AffineMapSpec.identity())

    def translated(cand: NormalForm) -> dict | None:
        if not np.allclose(cand.scalars()[1:], nf2.scalars()[1:], rtol=0, atol=tol):
            return None
        tr = match_translation(cand, nf2, tol)
        if tr is None:
            return None
        moved = move_translate(cand.to_spec(), *tr)
        if cand.n != 0:
            moved = _then(moved, move_shear(moved.spec, -round(cand.n * tr[1]), 0))
        psi = compose(moved.change, cand.change)
        resid = isometry_residual(src, dst, psi)
        if resid > 1e3 * tol or not conjugates_lattice(psi, src.lattice, dst.lattice):
            return None
        return {"translation": [float(tr[0]), float(tr[1])], "residual": resid,
                "map": psi}

    for signs in _sign_choices(nf1.n, closed):
        base = nf1 if signs == (1, 1, 1) else act_signs(nf1, *signs)
        if closed:
            for ell in sorted(range(-ell_max, ell_max + 1), key=abs):
                cand = act_Z(base, ell) if ell else base
                w = translated(cand)
                if w is not None:
                    return IsometryDecision("isometric", {"signs": list(signs), "ell": ell, **w})
        else:
            for a, b, c, d in _unimodular(m_max):
                th = base.theta.mobius(a, b, c, d)
                if abs(th.value - nf2.theta.value) > 1e-12:
                    continue
                cand = act_gl2(base, a, b, c, d)
                w = translated(cand)
                if w is not None:
                    return IsometryDecision("isometric", {"signs": list(signs),
                                                          "gl2": [a, b, c, d], **w})
    return IsometryDecision("undecided", None,
                            f"no witness within |ell| <= {ell_max}, entries <= {m_max}")
