"""Lattices, metric specifications and their assembly in frame and coordinate bases.

A metric is given in the moving frame ``(X, Ybar, Z) = (dx, dy + n z dx + theta dz, dz)``
by the symmetric matrix ``[[0, 0, Lambda], [0, L2, nu], [Lambda, nu, mu]]`` whose
entries are biperiodic functions of ``(y, z)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import SpecError
from .periodic import (
    PeriodicFn2D,
    PolyPeriodic,
    ThetaSpec,
    eval_poly_many,
    exterior_density,
    solve_exterior,
)

POSITIVITY_GRID = 64


# ---------------------------------------------------------------------------
# lattices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AffineLinear:
    """p -> mat @ p + shift on R^3."""

    mat: tuple
    shift: tuple

    @classmethod
    def make(cls, mat, shift) -> "AffineLinear":
        m = tuple(tuple(float(v) for v in row) for row in np.asarray(mat, dtype=float))
        s = tuple(float(v) for v in np.asarray(shift, dtype=float))
        return cls(m, s)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.mat)

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.shift)

    def apply(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return pts @ self.matrix.T + self.vector

    def inverse(self) -> "AffineLinear":
        inv = np.linalg.inv(self.matrix)
        return AffineLinear.make(inv, -inv @ self.vector)


@dataclass(frozen=True)
class LatticeSpec:
    kind: str
    n: int = 0
    c1: float = 0.0
    c2: float = 0.0
    tau: float = 0.0
    r1: float = 0.0
    r2: float = 0.0

    def __post_init__(self):
        if self.kind not in ("gamma", "torusA", "torusB"):
            raise SpecError(f"unknown manifold type {self.kind!r}")
        if self.kind == "gamma":
            if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 0:
                raise SpecError("gamma lattice needs a non-negative integer n")
            if not (0.0 <= self.c1 < 1.0 and 0.0 <= self.c2 < 1.0):
                raise SpecError("c1, c2 must lie in [0, 1)")
        else:
            if self.n != 0:
                raise SpecError("torus lattices carry n = 0")
            if not math.isfinite(self.tau) or float(self.tau).is_integer():
                raise SpecError("tau must be a finite irrational number")

    @classmethod
    def gamma(cls, n: int = 0, c1: float = 0.0, c2: float = 0.0) -> "LatticeSpec":
        return cls("gamma", n=int(n), c1=float(c1), c2=float(c2))

    @property
    def is_gamma(self) -> bool:
        return self.kind == "gamma"

    def generators(self) -> dict[str, AffineLinear]:
        n = self.n
        if self.kind == "gamma":
            return {
                "x": AffineLinear.make(np.eye(3), [1, 0, 0]),
                "y": AffineLinear.make(np.eye(3), [self.c1, 1, 0]),
                "z": AffineLinear.make([[1, n, 0], [0, 1, 0], [0, 0, 1]], [self.c2, 0, 1]),
            }
        if self.kind == "torusA":
            return {
                "1": AffineLinear.make(np.eye(3), [1, self.tau, 0]),
                "2": AffineLinear.make(np.eye(3), [0, 1, 0]),
                "3": AffineLinear.make(np.eye(3), [self.r1, self.r2, 1]),
            }
        return {
            "1": AffineLinear.make(np.eye(3), [1, 0, self.tau]),
            "2": AffineLinear.make(np.eye(3), [self.r1, 1, self.r2]),
            "3": AffineLinear.make(np.eye(3), [0, 0, 1]),
        }

    def to_json(self) -> dict:
        if self.kind == "gamma":
            return {"type": "gamma", "n": self.n, "c1": self.c1, "c2": self.c2}
        return {"type": self.kind, "tau": self.tau, "r1": self.r1, "r2": self.r2}

    @classmethod
    def from_json(cls, obj) -> "LatticeSpec":
        if not isinstance(obj, dict) or "type" not in obj:
            raise SpecError("manifold must be an object with a type")
        kind = obj["type"]
        keys = {"gamma": {"type", "n", "c1", "c2"},
                "torusA": {"type", "tau", "r1", "r2"},
                "torusB": {"type", "tau", "r1", "r2"}}.get(kind)
        if keys is None:
            raise SpecError(f"unknown manifold type {kind!r}")
        extra = set(obj) - keys
        if extra:
            raise SpecError(f"unknown manifold keys {sorted(extra)}")
        try:
            if kind == "gamma":
                n = obj.get("n", 0)
                if isinstance(n, bool) or not isinstance(n, int):
                    raise SpecError("n must be an integer")
                return cls("gamma", n=n, c1=float(obj.get("c1", 0.0)), c2=float(obj.get("c2", 0.0)))
            return cls(kind, tau=float(obj["tau"]), r1=float(obj.get("r1", 0.0)),
                       r2=float(obj.get("r2", 0.0)))
        except (TypeError, ValueError, KeyError) as exc:
            if isinstance(exc, SpecError):
                raise
            raise SpecError(f"bad manifold entry: {exc}") from None


def lattice_action(lattice: LatticeSpec, word: str | Sequence[str], point) -> np.ndarray:
    """Apply a word of generators to ``point``; the rightmost letter acts first.

    Letters are generator names (``x``, ``y``, ``z`` or ``1``, ``2``, ``3``); an
    inverse is written with a trailing ``^-1`` or as the upper-case letter.
    """
    gens = lattice.generators()
    tokens = _tokenize(word)
    p = np.asarray(point, dtype=float)
    for tok in reversed(tokens):
        inverse = tok.endswith("^-1") or (tok.isalpha() and tok.isupper())
        name = tok[:-3] if tok.endswith("^-1") else tok.lower()
        if name not in gens:
            raise SpecError(f"unknown generator {tok!r}")
        g = gens[name].inverse() if inverse else gens[name]
        p = g.apply(p)
    return p


def _tokenize(word) -> list[str]:
    if isinstance(word, str):
        out = []
        i = 0
        while i < len(word):
            if word[i].isspace():
                i += 1
                continue
            tok = word[i]
            i += 1
            if word.startswith("^-1", i):
                tok += "^-1"
                i += 3
            out.append(tok)
        return out
    return list(word)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

IRRATIONAL = "irrational"


def _parse_cert(value):
    if value is None:
        return None
    if value == IRRATIONAL:
        return IRRATIONAL
    if (isinstance(value, (list, tuple)) and len(value) == 2
            and all(isinstance(v, int) and not isinstance(v, bool) for v in value) and value[1] != 0):
        return Fraction(value[0], value[1])
    raise SpecError(f"certificate must be [p, q] or 'irrational', got {value!r}")


def _cert_json(value):
    if value is None or value == IRRATIONAL:
        return value
    return [value.numerator, value.denominator]


@dataclass(frozen=True)
class ArithCertificates:
    """Declared arithmetic facts: rationality of script-L/Lambda and k/Lambda, case-5 period."""

    Lcal_over_Lambda: Fraction | str | None = None
    k_over_Lambda: Fraction | str | None = None
    period_decl: tuple[int, int] | None = None

    def to_json(self) -> dict:
        out = {}
        if self.Lcal_over_Lambda is not None:
            out["Lcal_over_Lambda"] = _cert_json(self.Lcal_over_Lambda)
        if self.k_over_Lambda is not None:
            out["k_over_Lambda"] = _cert_json(self.k_over_Lambda)
        if self.period_decl is not None:
            out["period_decl"] = list(self.period_decl)
        return out

    @classmethod
    def from_json(cls, obj) -> "ArithCertificates":
        if obj is None:
            return cls()
        if not isinstance(obj, dict):
            raise SpecError("arith must be an object")
        extra = set(obj) - {"Lcal_over_Lambda", "k_over_Lambda", "period_decl"}
        if extra:
            raise SpecError(f"unknown arith keys {sorted(extra)}")
        period = obj.get("period_decl")
        if period is not None:
            if (not isinstance(period, (list, tuple)) or len(period) != 2
                    or not all(isinstance(v, int) and not isinstance(v, bool) for v in period)
                    or period[0] <= 0):
                raise SpecError("period_decl must be [P, P'] with integer P > 0")
            period = (int(period[0]), int(period[1]))
        return cls(_parse_cert(obj.get("Lcal_over_Lambda")),
                   _parse_cert(obj.get("k_over_Lambda")), period)


# ---------------------------------------------------------------------------
# metric
# ---------------------------------------------------------------------------

FrameOverrides = Mapping[tuple[int, int], PolyPeriodic]


@dataclass(frozen=True, eq=False)
class MetricSpec:
    lattice: LatticeSpec
    theta: ThetaSpec
    Lambda: float
    L2: PeriodicFn2D
    nu: PeriodicFn2D
    mu: PeriodicFn2D
    certs: ArithCertificates = field(default_factory=ArithCertificates)
    # raw replacements of frame-matrix entries (i <= j); used for deformation
    # paths and deliberately broken test metrics, never serialized
    overrides: FrameOverrides = field(default_factory=dict)
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        if not self.validate:
            return
        if not math.isfinite(self.Lambda) or self.Lambda == 0.0:
            raise SpecError("Lambda must be a nonzero finite number")
        grid = self.L2.on_grid(POSITIVITY_GRID)
        if grid.min() <= 0.0:
            raise SpecError("L2 must be strictly positive")
        kind = self.lattice.kind
        if kind != "gamma" and self.theta.value != 0.0:
            raise SpecError("torus lattices use theta = 0")
        if kind == "torusA":
            if self.L2.depends_on_y() or not _is_zero(self.nu) or not _is_zero(self.mu):
                raise SpecError("torusA metrics need L2 = L2(z) and nu = mu = 0")
        if kind == "torusB":
            if not self.L2.is_constant() or not _is_zero(self.nu) or self.mu.depends_on_z():
                raise SpecError("torusB metrics need constant L2, nu = 0 and mu = mu(y)")

    # convenience --------------------------------------------------------
    @property
    def n(self) -> int:
        return self.lattice.n

    def with_(self, **changes) -> "MetricSpec":
        return replace(self, **changes)

    @classmethod
    def flat(cls, n: int = 0, theta: ThetaSpec | None = None, Lambda: float = 1.0,
             L2: float = 1.0) -> "MetricSpec":
        return cls(LatticeSpec.gamma(n), theta or ThetaSpec.rational(0), Lambda,
                   PeriodicFn2D.const(L2), PeriodicFn2D.zero(), PeriodicFn2D.zero())

    # frame matrix -------------------------------------------------------
    @cached_property
    def frame_entries(self) -> list[list[PolyPeriodic]]:
        zero = PolyPeriodic.const(0.0)
        lam = PolyPeriodic.const(self.Lambda)
        L2, nu, mu = (PolyPeriodic.of(f) for f in (self.L2, self.nu, self.mu))
        rows = [[zero, zero, lam], [zero, L2, nu], [lam, nu, mu]]
        for (i, j), val in self.overrides.items():
            rows[i][j] = val
            rows[j][i] = val
        return rows

    @cached_property
    def change_of_basis(self) -> list[list[PolyPeriodic]]:
        """Columns are the frame components of dx, dy, dz."""
        c = PolyPeriodic.const
        nz = PolyPeriodic.monomial(1, -float(self.n))
        return [[c(1.0), nz, c(0.0)],
                [c(0.0), c(1.0), c(0.0)],
                [c(0.0), c(-self.theta.value), c(1.0)]]

    @cached_property
    def coord_entries(self) -> list[list[PolyPeriodic]]:
        G = self.frame_entries
        P = self.change_of_basis
        out = [[None] * 3 for _ in range(3)]
        for i in range(3):
            for j in range(i, 3):
                acc = PolyPeriodic.const(0.0)
                for a in range(3):
                    if P[a][i].is_zero():
                        continue
                    for b in range(3):
                        if P[b][j].is_zero() or G[a][b].is_zero():
                            continue
                        acc = acc + P[a][i] * G[a][b] * P[b][j]
                out[i][j] = out[j][i] = acc
        return out

    @cached_property
    def coord_jets(self) -> dict:
        """Spectral first and second derivatives of the six coordinate entries."""
        pairs = [(i, j) for i in range(3) for j in range(i, 3)]
        base = [self.coord_entries[i][j] for i, j in pairs]
        return {
            "pairs": pairs,
            "g": base,
            "dy": [p.dy() for p in base],
            "dz": [p.dz() for p in base],
            "dyy": [p.dy().dy() for p in base],
            "dyz": [p.dy().dz() for p in base],
            "dzz": [p.dz().dz() for p in base],
        }

    # serialization ------------------------------------------------------
    def to_json(self) -> dict:
        if self.overrides:
            raise SpecError("metrics with raw frame overrides are not serializable")
        out = {"manifold": self.lattice.to_json(), "theta": self.theta.to_json(),
               "Lambda": self.Lambda, "L2": self.L2.to_json(), "nu": self.nu.to_json(),
               "mu": self.mu.to_json()}
        arith = self.certs.to_json()
        if arith:
            out["arith"] = arith
        return out

    @classmethod
    def from_json(cls, obj) -> "MetricSpec":
        if not isinstance(obj, dict):
            raise SpecError("spec must be a JSON object")
        allowed = {"manifold", "theta", "Lambda", "L2", "nu", "mu", "arith"}
        extra = set(obj) - allowed
        if extra:
            raise SpecError(f"unknown spec keys {sorted(extra)}")
        missing = {"manifold", "Lambda", "L2", "nu", "mu"} - set(obj)
        if missing:
            raise SpecError(f"missing spec keys {sorted(missing)}")
        lat = LatticeSpec.from_json(obj["manifold"])
        theta = ThetaSpec.from_json(obj["theta"]) if "theta" in obj else ThetaSpec.rational(0)
        lam = obj["Lambda"]
        if isinstance(lam, bool) or not isinstance(lam, (int, float)):
            raise SpecError("Lambda must be a number")
        return cls(lat, theta, float(lam), PeriodicFn2D.from_json(obj["L2"]),
                   PeriodicFn2D.from_json(obj["nu"]), PeriodicFn2D.from_json(obj["mu"]),
                   ArithCertificates.from_json(obj.get("arith")))

    @classmethod
    def load(cls, path) -> "MetricSpec":
        try:
            with open(path, encoding="utf-8") as fh:
                obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid JSON: {exc}") from None
        return cls.from_json(obj)


def _is_zero(f: PeriodicFn2D) -> bool:
    return float(np.abs(f.coef).max()) == 0.0


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _sym_from_pairs(vals: np.ndarray, pairs) -> np.ndarray:
    out = np.empty(vals.shape[1:] + (3, 3))
    for v, (i, j) in zip(vals, pairs):
        out[..., i, j] = v
        out[..., j, i] = v
    return out


def metric_frame(spec: MetricSpec, point) -> np.ndarray:
    """Frame matrix at ``point = (x, y, z)`` (or an array of points, last axis 3)."""
    p = np.asarray(point, dtype=float)
    y, z = p[..., 1], p[..., 2]
    pairs = [(i, j) for i in range(3) for j in range(i, 3)]
    vals = eval_poly_many([spec.frame_entries[i][j] for i, j in pairs], y, z)
    return _sym_from_pairs(vals, pairs)


def metric_coords(spec: MetricSpec) -> list[list[PolyPeriodic]]:
    return spec.coord_entries


def metric_coords_at(spec: MetricSpec, y, z) -> np.ndarray:
    jets = spec.coord_jets
    return _sym_from_pairs(eval_poly_many(jets["g"], y, z), jets["pairs"])


def metric_jets(spec: MetricSpec, y, z) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(g, dg, ddg) in coordinates with dg[..., a, i, j] = d_a g_ij and ddg[..., a, b, i, j]."""
    jets = spec.coord_jets
    pairs = jets["pairs"]
    keys = ["g", "dy", "dz", "dyy", "dyz", "dzz"]
    flat = [p for key in keys for p in jets[key]]
    vals = eval_poly_many(flat, y, z).reshape((len(keys), 6) + np.shape(np.broadcast_arrays(
        np.asarray(y, float), np.asarray(z, float))[0]))
    mats = {key: _sym_from_pairs(vals[i], pairs) for i, key in enumerate(keys)}
    g = mats["g"]
    shape = g.shape[:-2]
    dg = np.zeros(shape + (3, 3, 3))
    dg[..., 1, :, :] = mats["dy"]
    dg[..., 2, :, :] = mats["dz"]
    ddg = np.zeros(shape + (3, 3, 3, 3))
    ddg[..., 1, 1, :, :] = mats["dyy"]
    ddg[..., 1, 2, :, :] = mats["dyz"]
    ddg[..., 2, 1, :, :] = mats["dyz"]
    ddg[..., 2, 2, :, :] = mats["dzz"]
    return g, dg, ddg


def frame_vectors(spec: MetricSpec, z) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coordinate components of X, Ybar, Z at height(s) ``z``."""
    z = np.asarray(z, dtype=float)
    one = np.ones_like(z)
    zero = np.zeros_like(z)
    X = np.stack([one, zero, zero], axis=-1)
    Y = np.stack([spec.n * z, one, spec.theta.value * one], axis=-1)
    Z = np.stack([zero, zero, one], axis=-1)
    return X, Y, Z


def x_flat(spec: MetricSpec) -> np.ndarray:
    """Coordinate components of the 1-form g(X, .)."""
    return np.array([0.0, -spec.theta.value * spec.Lambda, spec.Lambda])


def check_invariance(spec: MetricSpec, n_points: int = 64, seed: int = 0) -> float:
    """sup over generators and sample points of |gamma^* g - g|."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.0, 2.0, size=(n_points, 3))
    base = metric_coords_at(spec, pts[:, 1], pts[:, 2])
    worst = 0.0
    for gen in spec.lattice.generators().values():
        for g in (gen, gen.inverse()):
            img = g.apply(pts)
            J = g.matrix
            moved = metric_coords_at(spec, img[:, 1], img[:, 2])
            pulled = np.einsum("ai,pab,bj->pij", J, moved, J)
            worst = max(worst, float(np.abs(pulled - base).max()))
    return worst


def lorentz_signature(spec: MetricSpec, grid: int = 16) -> tuple[int, int]:
    """(negative, positive) eigenvalue counts, asserting they agree over the grid."""
    g1 = np.arange(grid) / grid
    y, z = np.meshgrid(g1, g1, indexing="ij")
    g = metric_coords_at(spec, y.ravel(), z.ravel())
    ev = np.linalg.eigvalsh(g)
    neg = (ev < 0).sum(axis=1)
    pos = (ev > 0).sum(axis=1)
    if neg.min() != neg.max() or pos.min() != pos.max():
        raise SpecError("signature changes across the torus")
    return int(neg[0]), int(pos[0])


# ---------------------------------------------------------------------------
# unipotent connection data
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConnectionData:
    """Quotient-connection data: Ybar = exp(a) Y0 and D_Z Z = b exp(-2a) Ybar."""

    a: PeriodicFn2D
    b: PeriodicFn2D
    theta: ThetaSpec


def _exp_resampled(a: PeriodicFn2D, extra: int = 24) -> PeriodicFn2D:
    m, n = a.max_freq
    mf = (min(4 * m + extra, 96) if m else 0, min(4 * n + extra, 96) if n else 0)
    samples = (max(2 * mf[0] + 2, 4 * mf[0], 8), max(2 * mf[1] + 2, 4 * mf[1], 8))
    f = PeriodicFn2D.from_function(lambda y, z: np.exp(2.0 * a.eval(y, z)), mf, samples)
    return f.trim(1e-17 * float(np.abs(f.coef).max()))


def metric_from_connection(data: ConnectionData, n_choice: int | None = None) -> MetricSpec:
    C = data.b.mean()
    if C == 0.0:
        if n_choice not in (None, 0):
            raise SpecError("a vanishing total curvature forces n = 0")
        n, lam = 0, 1.0
    else:
        n = int(math.ceil(abs(C))) if n_choice is None else int(n_choice)
        if n <= 0:
            raise SpecError("nonzero total curvature needs a positive n")
        lam = C / n
    kappa = data.b - C
    nu, mu = solve_exterior(kappa, data.theta)
    return MetricSpec(LatticeSpec.gamma(n), data.theta, lam, _exp_resampled(data.a), nu, mu)


def connection_from_metric(spec: MetricSpec) -> ConnectionData:
    """Inverse of :func:`metric_from_connection`; ``a`` is defined up to a constant."""
    grid = 4 * max(max(spec.L2.max_freq) + 1, 16)
    vals = 0.5 * np.log(spec.L2.on_grid(grid))
    mf = spec.L2.max_freq
    mf = (min(mf[0] * 2 + 8, grid // 2 - 1) if mf[0] else 0,
          min(mf[1] * 2 + 8, grid // 2 - 1) if mf[1] else 0)
    a = PeriodicFn2D.from_grid_values(vals, mf)
    b = exterior_density(spec.nu, spec.mu, spec.theta) + spec.n * spec.Lambda
    return ConnectionData(a, b, spec.theta)


def load_specs(paths: Iterable) -> list[MetricSpec]:
    return [MetricSpec.load(p) for p in paths]
