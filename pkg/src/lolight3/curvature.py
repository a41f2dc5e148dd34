"""Levi-Civita connection, curvature invariant r, Gauss-Bonnet and leaf holonomy."""

from __future__ import annotations

import numpy as np

from .errors import NotInNormalForm
from .model import MetricSpec, frame_vectors, metric_coords_at, metric_jets
from .periodic import PeriodicFn1D, PeriodicFn2D, grid_points

# ---------------------------------------------------------------------------
# connection and curvature tensors
# ---------------------------------------------------------------------------


def _christoffel_parts(g, dg):
    ginv = np.linalg.inv(g)
    # lowered[l, j, k] = 1/2 (d_j g_lk + d_k g_lj - d_l g_jk)
    lowered = 0.5 * (np.einsum("...jlk->...ljk", dg) + np.einsum("...klj->...ljk", dg) - dg)
    gamma = np.einsum("...il,...ljk->...ijk", ginv, lowered)
    return ginv, lowered, gamma


def christoffels_at(spec: MetricSpec, y, z) -> np.ndarray:
    """Gamma^i_{jk} at points (vectorized over the shape of y, z)."""
    g, dg, _ = metric_jets(spec, y, z)
    return _christoffel_parts(g, dg)[2]


def christoffels(spec: MetricSpec, point) -> np.ndarray:
    p = np.asarray(point, dtype=float)
    return christoffels_at(spec, p[..., 1], p[..., 2])


def riemann_at(spec: MetricSpec, y, z) -> tuple[np.ndarray, np.ndarray]:
    """(R, g) with R[..., i, j, k, l] = R^i_{jkl}, R(d_k, d_l) d_j = R^i_{jkl} d_i."""
    g, dg, ddg = metric_jets(spec, y, z)
    ginv, lowered, gamma = _christoffel_parts(g, dg)
    # derivatives of the lowered symbols: d_a Gamma_{ljk}
    d_lowered = 0.5 * (np.einsum("...ajlk->...aljk", ddg) + np.einsum("...aklj->...aljk", ddg)
                       - ddg)
    d_ginv = -np.einsum("...il,...alm,...mk->...aik", ginv, dg, ginv)
    d_gamma = (np.einsum("...ail,...ljk->...aijk", d_ginv, lowered)
               + np.einsum("...il,...aljk->...aijk", ginv, d_lowered))
    # R^i_{jkl} = d_k G^i_{lj} - d_l G^i_{kj} + G^i_{km} G^m_{lj} - G^i_{lm} G^m_{kj}
    term1 = np.einsum("...kilj->...ijkl", d_gamma)
    term2 = np.einsum("...likj->...ijkl", d_gamma)
    quad = np.einsum("...ikm,...mlj->...ijkl", gamma, gamma)
    R = term1 - term2 + quad - np.einsum("...ijkl->...ijlk", quad)
    return R, g


def riemann_lowered_at(spec: MetricSpec, y, z) -> np.ndarray:
    """Rm[..., a, j, k, l] = g(R(d_k, d_l) d_j, d_a)."""
    R, g = riemann_at(spec, y, z)
    return np.einsum("...ai,...ijkl->...ajkl", g, R)


_FD_WEIGHTS = ((1, 45.0), (2, -9.0), (3, 1.0))


def _fd_metric(spec: MetricSpec, y, z, axis: int, h: float) -> np.ndarray:
    """Sixth-order central difference of the coordinate metric along y (1) or z (2)."""
    acc = 0.0
    for step, w in _FD_WEIGHTS:
        dy, dz = (step * h, 0.0) if axis == 1 else (0.0, step * h)
        acc = acc + w * (metric_coords_at(spec, y + dy, z + dz) - metric_coords_at(spec, y - dy, z - dz))
    return acc / (60.0 * h)


def metric_compatibility_residual(spec: MetricSpec, n_points: int = 16, h: float = 2e-3,
                                  seed: int = 0) -> float:
    """sup |d_a g_ij - Gamma^m_{ai} g_mj - Gamma^m_{aj} g_im| with d_a by finite differences."""
    rng = np.random.default_rng(seed)
    y, z = rng.random((2, n_points))
    g = metric_coords_at(spec, y, z)
    gam = christoffels_at(spec, y, z)
    fd = np.zeros(g.shape[:-2] + (3, 3, 3))
    fd[:, 1] = _fd_metric(spec, y, z, 1, h)
    fd[:, 2] = _fd_metric(spec, y, z, 2, h)
    conn = np.einsum("...mai,...mj->...aij", gam, g) + np.einsum("...maj,...im->...aij", gam, g)
    return float(np.abs(fd - conn).max())


# ---------------------------------------------------------------------------
# parallel field and the invariant r
# ---------------------------------------------------------------------------


def check_parallel_X(spec: MetricSpec, grid_n: int = 16) -> float:
    """sup over a (y, z) grid of |nabla_V dx| for V in the coordinate frame.

    The metric does not depend on x, so the y-z grid covers the 3D sample set.
    """
    y, z = grid_points(grid_n)
    gam = christoffels_at(spec, y, z)
    # nabla_{d_j} d_x = Gamma^i_{j x}
    return float(np.abs(gam[..., :, :, 0]).max())


def _r_from_frames(spec, y, z, Yv, Zv) -> np.ndarray:
    Rm = riemann_lowered_at(spec, y, z)
    g = metric_coords_at(spec, y, z)
    num = np.einsum("...ajkl,...k,...l,...j,...a->...", Rm, Zv, Yv, Zv, Yv)
    X = np.zeros_like(Yv)
    X[..., 0] = 1.0
    gxz = np.einsum("...i,...ij,...j->...", X, g, Zv)
    gyy = np.einsum("...i,...ij,...j->...", Yv, g, Yv)
    return num / (gxz ** 2 * gyy)


def curvature_r_at(spec: MetricSpec, y, z, frame_mix: tuple[float, float, float] | None = None
                   ) -> np.ndarray:
    """The invariant r from the full Riemann tensor.

    ``frame_mix = (a, b, c)`` replaces the frame by the admissible pair
    ``Y' = Ybar + a X`` and ``Z' = Z + b X + c Y'`` before measuring; the value
    must not depend on this choice.
    """
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    y, z = np.broadcast_arrays(y, z)
    X, Yv, Zv = frame_vectors(spec, z)
    if frame_mix is not None:
        a, b, c = frame_mix
        Yv = Yv + a * X
        Zv = Zv + b * X + c * Yv
    return _r_from_frames(spec, y, z, Yv, Zv)


def curvature_r(spec: MetricSpec, point) -> np.ndarray:
    p = np.asarray(point, dtype=float)
    return curvature_r_at(spec, p[..., 1], p[..., 2])


def r_on_grid(spec: MetricSpec, grid_n: int) -> np.ndarray:
    y, z = grid_points(grid_n)
    return curvature_r_at(spec, y, z).reshape(grid_n, grid_n)


def _require_closed_normal_form(spec: MetricSpec) -> None:
    if spec.L2.depends_on_y():
        raise NotInNormalForm("L must depend on z only")
    if not spec.nu.is_constant():
        raise NotInNormalForm("nu must be constant")


def sqrt_fn(L2: PeriodicFn1D, max_freq: int | None = None) -> PeriodicFn1D:
    """Spectral square root of a positive 1D series."""
    m = max_freq if max_freq is not None else min(8 * L2.max_freq + 24, 160)
    if L2.max_freq == 0:
        return PeriodicFn1D.const(float(np.sqrt(L2.mean())))
    f = PeriodicFn1D.from_function(lambda z: np.sqrt(L2.eval(z)), m, n_samples=8 * (m + 1))
    return f.trim(1e-17 * float(np.abs(f.coef).max()))


def curvature_r_closed_form(spec: MetricSpec) -> PeriodicFn2D:
    """r = (d_yy mu / (2 L^2) + L''/L) / Lambda^2 for closed-leaf normal forms."""
    _require_closed_normal_form(spec)
    L2 = spec.L2.fiber_mean("y")
    L = sqrt_fn(L2)
    m = max(L.max_freq, 8 * L2.max_freq + 24)
    # (1/L2) and L''/L sampled then projected: both are smooth, resolved well below m
    inv_L2 = PeriodicFn1D.from_function(lambda z: 1.0 / L2.eval(z), m, 8 * (m + 1))
    ratio = PeriodicFn1D.from_function(
        lambda z: L.derivative(2).eval(z) / L.eval(z), m, 8 * (m + 1))
    mu_yy = spec.mu.dy(2) if not spec.theta.value else spec.mu.directional(spec.theta.value) \
        .directional(spec.theta.value)
    r = mu_yy * PeriodicFn2D.lift_z(inv_L2.trim(1e-18)) * 0.5 + PeriodicFn2D.lift_z(ratio.trim(1e-18))
    return r / spec.Lambda ** 2


def gauss_bonnet(spec: MetricSpec, grid_n: int = 64) -> float:
    """Trapezoid quadrature of r against the parallel density |Lambda| L dy dz."""
    r = r_on_grid(spec, grid_n)
    L = np.sqrt(spec.L2.on_grid(grid_n))
    return float(np.mean(r * abs(spec.Lambda) * L))


# ---------------------------------------------------------------------------
# leaf holonomy
# ---------------------------------------------------------------------------


def leaf_holonomy_alpha(spec: MetricSpec, z) -> np.ndarray:
    """alpha(z) = -d_z L^2 / (2 Lambda)."""
    _require_closed_normal_form(spec)
    L2 = spec.L2.fiber_mean("y")
    return -L2.derivative().eval(z) / (2.0 * spec.Lambda)


def parallel_transport_loop(spec: MetricSpec, z: float, direction: str = "gamma2",
                            steps: int = 2 ** 14) -> np.ndarray:
    """Linear holonomy of a leaf loop, computed by RK4 parallel transport.

    The leaf at height ``z`` is spanned by ``dx`` and ``dy``; the loop
    ``gamma1`` runs along x and ``gamma2`` along y.  The returned 2x2 matrix is
    the inverse of the transport map in the ``(dx, dy)`` basis, which is the
    linear part of the leaf's affine holonomy.
    """
    _require_closed_normal_form(spec)
    if spec.theta.value != 0.0:
        raise NotInNormalForm("closed leaves need theta = 0")
    if direction in ("gamma1", "1", "x"):
        # metric is x-independent and the x-loop has constant velocity dx: Gamma(dx, .) = 0
        tangent = np.array([1.0, 0.0, 0.0])
        pts_y = lambda s: np.zeros_like(s)  # noqa: E731
    elif direction in ("gamma2", "2", "y"):
        tangent = np.array([0.0, 1.0, 0.0])
        pts_y = lambda s: s  # noqa: E731
    else:
        raise ValueError("direction must be gamma1 or gamma2")
    h = 1.0 / steps
    s_nodes = np.arange(2 * steps + 1) * (h / 2)
    gam = christoffels_at(spec, pts_y(s_nodes), np.full_like(s_nodes, z))
    # dV^i/ds = -Gamma^i_{jk} c'^j V^k
    A = -np.einsum("sijk,j->sik", gam, tangent)
    V = np.eye(3)
    for i in range(steps):
        a0, am, a1 = A[2 * i], A[2 * i + 1], A[2 * i + 2]
        k1 = a0 @ V
        k2 = am @ (V + 0.5 * h * k1)
        k3 = am @ (V + 0.5 * h * k2)
        k4 = a1 @ (V + h * k3)
        V = V + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    transport = V[:2, :2]
    return np.linalg.inv(transport)


# ---------------------------------------------------------------------------
# quotient connection
# ---------------------------------------------------------------------------


def quotient_connection_b(spec: MetricSpec, y, z) -> np.ndarray:
    """b with D_Z Z = b / L^2 Ybar on the leaf space, read from Christoffel symbols.

    With the lattice orientation used here the constant part comes out as
    ``-n Lambda``; the fluctuating part is ``Z.nu - Ybar.mu / 2``.
    """
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    gam = christoffels_at(spec, y, z)
    # nabla_Z Z = Gamma^i_{zz} d_i ; its d_y component equals the Ybar coefficient
    coeff = gam[..., 1, 2, 2]
    L2 = spec.L2.eval(y, z)
    return coeff * L2
