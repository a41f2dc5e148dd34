"""Independent finite-difference oracles used to cross-check the spectral code."""

from __future__ import annotations

import numpy as np

from lolight3.model import metric_coords_at

# 6th-order central stencil for first and second derivatives
_D1 = {1: 3 / 4, 2: -3 / 20, 3: 1 / 60}
_D2 = {0: -49 / 18, 1: 3 / 2, 2: -3 / 20, 3: 1 / 90}


def _g(spec, y, z):
    return metric_coords_at(spec, np.atleast_1d(y), np.atleast_1d(z))


def metric_jets_fd(spec, y, z, h=1e-2):
    """g, dg[c] = d_c g, ddg[c, d] = d_c d_d g at one point; c, d in (x, y, z)."""
    g = _g(spec, y, z)[0]
    dg = np.zeros((3, 3, 3))
    ddg = np.zeros((3, 3, 3, 3))
    e = {1: np.array([1.0, 0.0]), 2: np.array([0.0, 1.0])}

    def at(v):
        return _g(spec, y + v[0], z + v[1])[0]

    for c in (1, 2):
        dg[c] = sum(w * (at(k * h * e[c]) - at(-k * h * e[c])) for k, w in _D1.items()) / h
        ddg[c, c] = (_D2[0] * g + sum(w * (at(k * h * e[c]) + at(-k * h * e[c]))
                                      for k, w in _D2.items() if k)) / h ** 2
    # mixed derivative from the first-derivative stencil applied twice
    mixed = np.zeros((3, 3))
    for k, wk in _D1.items():
        for m, wm in _D1.items():
            for sk in (1, -1):
                for sm in (1, -1):
                    mixed += sk * sm * wk * wm * at(sk * k * h * e[1] + sm * m * h * e[2])
    ddg[1, 2] = ddg[2, 1] = mixed / h ** 2
    return g, dg, ddg


def christoffel_fd(spec, y, z, h=1e-2):
    """Gamma^a_{bc} from finite differences of the coordinate metric."""
    g, dg, _ = metric_jets_fd(spec, y, z, h)
    ginv = np.linalg.inv(g)
    # lower[a, b, c] = (d_b g_ac + d_c g_ab - d_a g_bc) / 2
    lower = 0.5 * (np.einsum("bac->abc", dg) + np.einsum("cab->abc", dg) - dg)
    return np.einsum("ad,dbc->abc", ginv, lower)


def riemann_lowered_fd(spec, y, z, h=1e-2):
    """R_abcd = (g_ad,bc + g_bc,ad - g_ac,bd - g_bd,ac)/2 + g_ef (G^e_bc G^f_ad - G^e_bd G^f_ac)."""
    g, dg, ddg = metric_jets_fd(spec, y, z, h)
    gam = christoffel_fd(spec, y, z, h)
    # ddg[c, d, a, b] = d_c d_d g_ab
    d = lambda a, b, c, e: ddg[c, e, a, b]  # noqa: E731
    R = np.zeros((3, 3, 3, 3))
    for a in range(3):
        for b in range(3):
            for c in range(3):
                for e in range(3):
                    second = 0.5 * (d(a, e, b, c) + d(b, c, a, e) - d(a, c, b, e) - d(b, e, a, c))
                    quad = (g @ gam[:, b, c]) @ gam[:, a, e] - (g @ gam[:, b, e]) @ gam[:, a, c]
                    R[a, b, c, e] = second + quad
    return R


def r_fd(spec, y, z, h=1e-2):
    """R(Y, Z, Z, Y) / (g(X, Z)^2 g(Y, Y)) in the frame X = dx, Y = Ybar, Z = dz."""
    n, th = spec.n, spec.theta.value
    Y = np.array([n * z, 1.0, th])
    Z = np.array([0.0, 0.0, 1.0])
    X = np.array([1.0, 0.0, 0.0])
    g = _g(spec, y, z)[0]
    R = riemann_lowered_fd(spec, y, z, h)
    num = np.einsum("abcd,a,b,c,d->", R, Y, Z, Z, Y)
    return num / ((X @ g @ Z) ** 2 * (Y @ g @ Y))


def pullback_fd(spec, phi, pts, h=1e-5):
    """J^T g(phi(p)) J with J from central differences of phi.apply."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    J = np.zeros((pts.shape[0], 3, 3))
    for c in range(3):
        step = np.zeros(3)
        step[c] = h
        J[:, :, c] = (phi.apply(pts + step) - phi.apply(pts - step)) / (2 * h)
    img = phi.apply(pts)
    G = metric_coords_at(spec, img[:, 1], img[:, 2])
    return np.einsum("pai,pab,pbj->pij", J, G, J)
