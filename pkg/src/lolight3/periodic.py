"""Truncated Fourier series on the circle and the 2-torus, and spectral solvers.

Every function is stored as a Hermitian array of complex coefficients
``c[j]`` (or ``c[j, k]``) with ``f = sum c exp(2 pi i (j y + k z))``.
The real cos/sin pairs of the public JSON encoding are derived from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.signal import convolve

from .errors import (
    DegreeOverflow,
    NonDiophantineSlope,
    NonzeroMean,
    ResonantFrequency,
    SmallDivisor,
    SpecError,
)

TWO_PI = 2.0 * math.pi

# relative size below which a Fourier mode counts as inactive
ACTIVE_MODE_TOL = 1e-13


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


def _hermitian1(c: np.ndarray) -> np.ndarray:
    return 0.5 * (c + np.conj(c[::-1]))


def _hermitian2(c: np.ndarray) -> np.ndarray:
    return 0.5 * (c + np.conj(c[::-1, ::-1]))


# ---------------------------------------------------------------------------
# one variable
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PeriodicFn1D:
    coef: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coef, dtype=complex)
        if c.ndim != 1 or c.size % 2 != 1:
            raise SpecError("1D coefficient array must have odd length 2M+1")
        object.__setattr__(self, "coef", _frozen(_hermitian1(c)))

    # construction -------------------------------------------------------
    @classmethod
    def const(cls, value: float) -> "PeriodicFn1D":
        return cls(np.array([value], dtype=complex))

    @classmethod
    def zero(cls) -> "PeriodicFn1D":
        return cls.const(0.0)

    @classmethod
    def from_ab(cls, a: Sequence[float], b: Sequence[float]) -> "PeriodicFn1D":
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if a.shape != b.shape or a.ndim != 1 or a.size == 0:
            raise SpecError("a and b must be equal-length non-empty arrays")
        if b[0] != 0.0:
            raise SpecError("b_0 must vanish")
        m = a.size - 1
        c = np.zeros(2 * m + 1, dtype=complex)
        c[m] = a[0]
        c[m + 1:] = 0.5 * (a[1:] - 1j * b[1:])
        c[:m] = np.conj(c[m + 1:][::-1])
        return cls(c)

    @classmethod
    def from_modes(cls, modes: dict[int, complex]) -> "PeriodicFn1D":
        """Build from a sparse {j: c_j} map; conjugate modes are implied."""
        m = max((abs(j) for j in modes), default=0)
        c = np.zeros(2 * m + 1, dtype=complex)
        for j, v in modes.items():
            c[j + m] += v
            if j != 0:
                c[-j + m] += np.conj(v)
            else:
                c[m] = complex(v).real
        return cls(c)

    @classmethod
    def from_samples(cls, values: np.ndarray, max_freq: int | None = None) -> "PeriodicFn1D":
        values = np.asarray(values, dtype=float)
        n = values.size
        top = (n - 1) // 2
        if max_freq is None:
            max_freq = top
        if max_freq > top:
            raise SpecError("not enough samples for requested max_freq")
        spec = np.fft.fft(values) / n
        js = np.arange(-max_freq, max_freq + 1)
        return cls(spec[js % n])

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], max_freq: int,
                      n_samples: int | None = None) -> "PeriodicFn1D":
        n = n_samples or max(8 * (max_freq + 1), 256)
        z = np.arange(n) / n
        return cls.from_samples(func(z), max_freq)

    # structure ----------------------------------------------------------
    @property
    def max_freq(self) -> int:
        return (self.coef.size - 1) // 2

    @property
    def a(self) -> np.ndarray:
        m = self.max_freq
        out = 2.0 * self.coef[m:].real
        out[0] = self.coef[m].real
        return out

    @property
    def b(self) -> np.ndarray:
        m = self.max_freq
        out = -2.0 * self.coef[m:].imag
        out[0] = 0.0
        return out

    def mode(self, j: int) -> complex:
        m = self.max_freq
        return complex(self.coef[j + m]) if abs(j) <= m else 0j

    def padded(self, m: int) -> np.ndarray:
        own = self.max_freq
        if m < own:
            return self.coef[own - m: own + m + 1].copy()
        out = np.zeros(2 * m + 1, dtype=complex)
        out[m - own: m + own + 1] = self.coef
        return out

    def trim(self, tol: float = 0.0) -> "PeriodicFn1D":
        m = self.max_freq
        mags = np.abs(self.coef[m:])
        active = np.nonzero(mags > tol)[0]
        top = int(active[-1]) if active.size else 0
        return PeriodicFn1D(self.coef[m - top: m + top + 1])

    def truncate(self, max_freq: int) -> "PeriodicFn1D":
        return PeriodicFn1D(self.padded(max_freq))

    # evaluation ---------------------------------------------------------
    def __call__(self, z) -> np.ndarray:
        return self.eval(z)

    def eval(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        m = self.max_freq
        js = np.arange(-m, m + 1)
        phase = np.exp(1j * TWO_PI * z[..., None] * js)
        return (phase @ self.coef).real

    def on_grid(self, n: int) -> np.ndarray:
        arr = np.zeros(n, dtype=complex)
        m = self.max_freq
        np.add.at(arr, np.arange(-m, m + 1) % n, self.coef)
        return (np.fft.ifft(arr) * n).real

    # calculus -----------------------------------------------------------
    def mean(self) -> float:
        return float(self.coef[self.max_freq].real)

    def derivative(self, order: int = 1) -> "PeriodicFn1D":
        m = self.max_freq
        js = np.arange(-m, m + 1)
        return PeriodicFn1D(self.coef * (1j * TWO_PI * js) ** order)

    def antiderivative(self, tol: float = 1e-12) -> "PeriodicFn1D":
        """Mean-zero primitive; the input must have zero mean."""
        m = self.max_freq
        if abs(self.coef[m]) > tol * (1.0 + np.abs(self.coef).max()):
            raise NonzeroMean("antiderivative of a function with nonzero mean")
        js = np.arange(-m, m + 1)
        c = np.zeros_like(self.coef)
        nz = js != 0
        c[nz] = self.coef[nz] / (1j * TWO_PI * js[nz])
        return PeriodicFn1D(c)

    def shift(self, t: float) -> "PeriodicFn1D":
        """z -> f(z + t)."""
        m = self.max_freq
        js = np.arange(-m, m + 1)
        return PeriodicFn1D(self.coef * np.exp(1j * TWO_PI * js * t))

    def reflect(self) -> "PeriodicFn1D":
        """z -> f(-z)."""
        return PeriodicFn1D(self.coef[::-1])

    def is_constant(self, tol: float = ACTIVE_MODE_TOL) -> bool:
        m = self.max_freq
        rest = np.abs(np.delete(self.coef, m))
        return bool(rest.size == 0 or rest.max() <= tol * (1.0 + abs(self.coef[m])))

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        if np.isscalar(other):
            c = self.coef.copy()
            c[self.max_freq] += other
            return PeriodicFn1D(c)
        m = max(self.max_freq, other.max_freq)
        return PeriodicFn1D(self.padded(m) + other.padded(m))

    __radd__ = __add__

    def __neg__(self):
        return PeriodicFn1D(-self.coef)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if np.isscalar(other):
            return PeriodicFn1D(self.coef * other)
        return PeriodicFn1D(convolve(self.coef, other.coef))

    __rmul__ = __mul__

    def __truediv__(self, scalar: float):
        return PeriodicFn1D(self.coef / scalar)

    # serialization ------------------------------------------------------
    def to_json(self) -> dict:
        return {"max_freq": self.max_freq,
                "coeffs": [[float(x), float(y)] for x, y in zip(self.a, self.b)]}

    @classmethod
    def from_json(cls, obj) -> "PeriodicFn1D":
        if not isinstance(obj, dict) or set(obj) != {"max_freq", "coeffs"}:
            raise SpecError("1D Fourier object needs exactly max_freq and coeffs")
        m = obj["max_freq"]
        pairs = obj["coeffs"]
        if not isinstance(m, int) or m < 0 or len(pairs) != m + 1:
            raise SpecError("1D Fourier object: coeffs length must be max_freq + 1")
        arr = np.asarray(pairs, dtype=float)
        if arr.shape != (m + 1, 2):
            raise SpecError("1D Fourier coeffs must be [a, b] pairs")
        return cls.from_ab(arr[:, 0], arr[:, 1])


# ---------------------------------------------------------------------------
# two variables
# ---------------------------------------------------------------------------


def canonical_modes(m: int, n: int) -> list[tuple[int, int]]:
    """Real-basis mode order: j ascending, k ascending, only k >= 0 for j = 0."""
    return [(j, k) for j in range(m + 1) for k in range(-n, n + 1) if j > 0 or k >= 0]


@dataclass(frozen=True, eq=False)
class PeriodicFn2D:
    coef: np.ndarray  # shape (2M+1, 2N+1), index [j+M, k+N]

    def __post_init__(self):
        c = np.asarray(self.coef, dtype=complex)
        if c.ndim != 2 or c.shape[0] % 2 != 1 or c.shape[1] % 2 != 1:
            raise SpecError("2D coefficient array must have odd shape")
        object.__setattr__(self, "coef", _frozen(_hermitian2(c)))

    # construction -------------------------------------------------------
    @classmethod
    def const(cls, value: float) -> "PeriodicFn2D":
        return cls(np.array([[value]], dtype=complex))

    @classmethod
    def zero(cls) -> "PeriodicFn2D":
        return cls.const(0.0)

    @classmethod
    def from_modes(cls, modes: dict[tuple[int, int], complex]) -> "PeriodicFn2D":
        """Sparse {(j, k): c_jk}; the conjugate partner is implied."""
        m = max((abs(j) for j, _ in modes), default=0)
        n = max((abs(k) for _, k in modes), default=0)
        c = np.zeros((2 * m + 1, 2 * n + 1), dtype=complex)
        for (j, k), v in modes.items():
            if (j, k) == (0, 0):
                c[m, n] += complex(v).real
                continue
            c[j + m, k + n] += v
            c[-j + m, -k + n] += np.conj(v)
        return cls(c)

    @classmethod
    def cos(cls, j: int, k: int, amp: float = 1.0) -> "PeriodicFn2D":
        """amp * cos(2 pi (j y + k z))."""
        if (j, k) == (0, 0):
            return cls.const(amp)
        return cls.from_modes({(j, k): 0.5 * amp})

    @classmethod
    def sin(cls, j: int, k: int, amp: float = 1.0) -> "PeriodicFn2D":
        """amp * sin(2 pi (j y + k z))."""
        if (j, k) == (0, 0):
            return cls.zero()
        return cls.from_modes({(j, k): -0.5j * amp})

    @classmethod
    def from_real(cls, max_freq: tuple[int, int], pairs) -> "PeriodicFn2D":
        m, n = max_freq
        modes = canonical_modes(m, n)
        try:
            arr = np.asarray(pairs, dtype=float)
        except (TypeError, ValueError):
            raise SpecError("coefficients must be [cos, sin] number pairs") from None
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise SpecError("coefficients must be a list of [cos, sin] pairs")
        if not np.isfinite(arr).all():
            raise SpecError("coefficients must be finite")
        if len(arr) != len(modes):
            raise SpecError(f"expected {len(modes)} coefficient pairs, got {len(arr)}")
        c = np.zeros((2 * m + 1, 2 * n + 1), dtype=complex)
        for (j, k), (al, be) in zip(modes, arr):
            if (j, k) == (0, 0):
                if be != 0.0:
                    raise SpecError("sine coefficient of the constant mode must vanish")
                c[m, n] = al
            else:
                v = 0.5 * (al - 1j * be)
                c[j + m, k + n] = v
                c[-j + m, -k + n] = np.conj(v)
        return cls(c)

    @classmethod
    def lift_z(cls, f: PeriodicFn1D) -> "PeriodicFn2D":
        """The function (y, z) -> f(z)."""
        return cls(f.coef[None, :])

    @classmethod
    def lift_y(cls, f: PeriodicFn1D) -> "PeriodicFn2D":
        """The function (y, z) -> f(y)."""
        return cls(f.coef[:, None])

    @classmethod
    def from_grid_values(cls, values: np.ndarray, max_freq: tuple[int, int]) -> "PeriodicFn2D":
        values = np.asarray(values, dtype=float)
        ny, nz = values.shape
        m, n = max_freq
        if 2 * m + 1 > ny or 2 * n + 1 > nz:
            raise SpecError("grid too coarse for requested max_freq")
        spec = np.fft.fft2(values) / (ny * nz)
        js = np.arange(-m, m + 1) % ny
        ks = np.arange(-n, n + 1) % nz
        return cls(spec[np.ix_(js, ks)])

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray, np.ndarray], np.ndarray],
                      max_freq: tuple[int, int], n_samples: tuple[int, int] | None = None
                      ) -> "PeriodicFn2D":
        m, n = max_freq
        ny, nz = n_samples or (max(4 * (m + 1), 64), max(4 * (n + 1), 64))
        y = np.arange(ny)[:, None] / ny
        z = np.arange(nz)[None, :] / nz
        vals = np.broadcast_to(func(y, z), (ny, nz))
        return cls.from_grid_values(vals, max_freq)

    # structure ----------------------------------------------------------
    @property
    def max_freq(self) -> tuple[int, int]:
        return ((self.coef.shape[0] - 1) // 2, (self.coef.shape[1] - 1) // 2)

    def mode(self, j: int, k: int) -> complex:
        m, n = self.max_freq
        if abs(j) > m or abs(k) > n:
            return 0j
        return complex(self.coef[j + m, k + n])

    def padded(self, m: int, n: int) -> np.ndarray:
        om, on = self.max_freq
        out = np.zeros((2 * m + 1, 2 * n + 1), dtype=complex)
        sm, sn = min(m, om), min(n, on)
        out[m - sm: m + sm + 1, n - sn: n + sn + 1] = \
            self.coef[om - sm: om + sm + 1, on - sn: on + sn + 1]
        return out

    def trim(self, tol: float = 0.0) -> "PeriodicFn2D":
        m, n = self.max_freq
        mags = np.abs(self.coef)
        js, ks = np.nonzero(mags > tol)
        if js.size == 0:
            return PeriodicFn2D.zero()
        tm = int(np.abs(js - m).max())
        tn = int(np.abs(ks - n).max())
        return PeriodicFn2D(self.padded(tm, tn))

    def truncate(self, max_freq: tuple[int, int]) -> "PeriodicFn2D":
        return PeriodicFn2D(self.padded(*max_freq))

    def active_modes(self, tol: float = ACTIVE_MODE_TOL) -> list[tuple[int, int]]:
        m, n = self.max_freq
        scale = tol * (1.0 + np.abs(self.coef).max())
        js, ks = np.nonzero(np.abs(self.coef) > scale)
        return [(int(j - m), int(k - n)) for j, k in zip(js, ks)]

    def is_constant(self, tol: float = ACTIVE_MODE_TOL) -> bool:
        return all(jk == (0, 0) for jk in self.active_modes(tol))

    def depends_on_y(self, tol: float = ACTIVE_MODE_TOL) -> bool:
        return any(j != 0 for j, _ in self.active_modes(tol))

    def depends_on_z(self, tol: float = ACTIVE_MODE_TOL) -> bool:
        return any(k != 0 for _, k in self.active_modes(tol))

    # evaluation ---------------------------------------------------------
    def __call__(self, y, z) -> np.ndarray:
        return self.eval(y, z)

    def eval(self, y, z) -> np.ndarray:
        return eval_many([self], y, z)[0]

    def on_grid(self, ny: int, nz: int | None = None) -> np.ndarray:
        """Values at (i/ny, l/nz); exact for any mode content (aliasing is summed)."""
        nz = nz or ny
        m, n = self.max_freq
        arr = np.zeros((ny, nz), dtype=complex)
        js = (np.arange(-m, m + 1) % ny)[:, None]
        ks = (np.arange(-n, n + 1) % nz)[None, :]
        np.add.at(arr, (np.broadcast_to(js, self.coef.shape), np.broadcast_to(ks, self.coef.shape)),
                  self.coef)
        return (np.fft.ifft2(arr) * (ny * nz)).real

    # calculus -----------------------------------------------------------
    def mean(self) -> float:
        m, n = self.max_freq
        return float(self.coef[m, n].real)

    def fiber_mean(self, axis: str = "y") -> PeriodicFn1D:
        """Average over ``axis``; the result is a function of the other variable."""
        m, n = self.max_freq
        if axis == "y":
            return PeriodicFn1D(self.coef[m, :])
        if axis == "z":
            return PeriodicFn1D(self.coef[:, n])
        raise ValueError("axis must be 'y' or 'z'")

    def differentiate(self, axis: str, order: int = 1) -> "PeriodicFn2D":
        if order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        m, n = self.max_freq
        if axis == "y":
            factor = (1j * TWO_PI * np.arange(-m, m + 1))[:, None] ** order
        elif axis == "z":
            factor = (1j * TWO_PI * np.arange(-n, n + 1))[None, :] ** order
        else:
            raise ValueError("axis must be 'y' or 'z'")
        return PeriodicFn2D(self.coef * factor)

    def dy(self, order: int = 1) -> "PeriodicFn2D":
        return self.differentiate("y", order)

    def dz(self, order: int = 1) -> "PeriodicFn2D":
        return self.differentiate("z", order)

    def directional(self, theta: float) -> "PeriodicFn2D":
        """(d/dy + theta d/dz) f."""
        return self.dy() + self.dz() * theta

    def antiderivative_y(self, tol: float = 1e-12) -> "PeriodicFn2D":
        """F with dF/dy = f; f must have zero fiber mean in y."""
        m, n = self.max_freq
        row = self.coef[m, :]
        if np.abs(row).max() > tol * (1.0 + np.abs(self.coef).max()):
            raise NonzeroMean("y-antiderivative needs zero fiber mean")
        js = np.arange(-m, m + 1)[:, None]
        c = np.zeros_like(self.coef)
        with np.errstate(divide="ignore", invalid="ignore"):
            c = np.where(js != 0, self.coef / (1j * TWO_PI * js), 0.0)
        return PeriodicFn2D(c)

    def shift(self, dy: float = 0.0, dz: float = 0.0) -> "PeriodicFn2D":
        """(y, z) -> f(y + dy, z + dz)."""
        m, n = self.max_freq
        js = np.arange(-m, m + 1)[:, None]
        ks = np.arange(-n, n + 1)[None, :]
        return PeriodicFn2D(self.coef * np.exp(1j * TWO_PI * (js * dy + ks * dz)))

    def compose_linear(self, mat) -> "PeriodicFn2D":
        """(u, v) -> f(mat @ (u, v)) for an integer 2x2 matrix."""
        mat = np.asarray(mat, dtype=int)
        m, n = self.max_freq
        entries = {}
        big = np.abs(self.coef) > 0
        for jj, kk in zip(*np.nonzero(big)):
            j, k = jj - m, kk - n
            # j y + k z with (y, z) = mat (u, v)
            ju = int(j * mat[0, 0] + k * mat[1, 0])
            kv = int(j * mat[0, 1] + k * mat[1, 1])
            entries[(ju, kv)] = entries.get((ju, kv), 0j) + self.coef[jj, kk]
        if not entries:
            return PeriodicFn2D.zero()
        mm = max(abs(a) for a, _ in entries)
        nn = max(abs(b) for _, b in entries)
        c = np.zeros((2 * mm + 1, 2 * nn + 1), dtype=complex)
        for (a, b), v in entries.items():
            c[a + mm, b + nn] += v
        return PeriodicFn2D(c)

    def reflect(self, ey: int = 1, ez: int = 1) -> "PeriodicFn2D":
        """(y, z) -> f(ey y, ez z) with signs ey, ez."""
        c = self.coef
        if ey < 0:
            c = c[::-1, :]
        if ez < 0:
            c = c[:, ::-1]
        return PeriodicFn2D(c)

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        if np.isscalar(other):
            c = self.coef.copy()
            m, n = self.max_freq
            c[m, n] += other
            return PeriodicFn2D(c)
        m = max(self.max_freq[0], other.max_freq[0])
        n = max(self.max_freq[1], other.max_freq[1])
        return PeriodicFn2D(self.padded(m, n) + other.padded(m, n))

    __radd__ = __add__

    def __neg__(self):
        return PeriodicFn2D(-self.coef)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if np.isscalar(other):
            return PeriodicFn2D(self.coef * other)
        return PeriodicFn2D(convolve(self.coef, other.coef))

    __rmul__ = __mul__

    def __truediv__(self, scalar: float):
        return PeriodicFn2D(self.coef / scalar)

    def allclose(self, other: "PeriodicFn2D", tol: float = 1e-12) -> bool:
        return max_coef_diff(self, other) <= tol

    # serialization ------------------------------------------------------
    def real_pairs(self) -> list[list[float]]:
        m, n = self.max_freq
        out = []
        for j, k in canonical_modes(m, n):
            c = self.coef[j + m, k + n]
            if (j, k) == (0, 0):
                out.append([float(c.real), 0.0])
            else:
                out.append([float(2 * c.real), float(-2 * c.imag)])
        return out

    def to_json(self) -> dict:
        m, n = self.max_freq
        return {"max_freq": [m, n], "coeffs": self.real_pairs()}

    @classmethod
    def from_json(cls, obj) -> "PeriodicFn2D":
        if not isinstance(obj, dict) or set(obj) != {"max_freq", "coeffs"}:
            raise SpecError("2D Fourier object needs exactly max_freq and coeffs")
        mf = obj["max_freq"]
        if (not isinstance(mf, (list, tuple)) or len(mf) != 2
                or not all(isinstance(v, int) and v >= 0 for v in mf)):
            raise SpecError("max_freq must be a pair of non-negative integers")
        return cls.from_real((mf[0], mf[1]), obj["coeffs"])


def max_coef_diff(f: PeriodicFn2D, g: PeriodicFn2D) -> float:
    m = max(f.max_freq[0], g.max_freq[0])
    n = max(f.max_freq[1], g.max_freq[1])
    return float(np.abs(f.padded(m, n) - g.padded(m, n)).max())


def eval_many(fns: Sequence[PeriodicFn2D], y, z) -> np.ndarray:
    """Evaluate several 2D series at the same points; output shape (len(fns),) + shape."""
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    y, z = np.broadcast_arrays(y, z)
    shape = y.shape
    if not fns:
        return np.zeros((0,) + shape)
    m = max(f.max_freq[0] for f in fns)
    n = max(f.max_freq[1] for f in fns)
    stack = np.stack([f.padded(m, n) for f in fns])
    yf = y.reshape(-1)
    zf = z.reshape(-1)
    ey = np.exp(1j * TWO_PI * yf[:, None] * np.arange(-m, m + 1))
    ez = np.exp(1j * TWO_PI * zf[:, None] * np.arange(-n, n + 1))
    tmp = np.einsum("pj,fjk->fpk", ey, stack, optimize=True)
    vals = np.einsum("fpk,pk->fp", tmp, ez, optimize=True).real
    return vals.reshape((len(fns),) + shape)


# ---------------------------------------------------------------------------
# polynomials in z with periodic coefficients
# ---------------------------------------------------------------------------

MAX_DEGREE = 2


@dataclass(frozen=True, eq=False)
class PolyPeriodic:
    """sum_k z^k f_k(y, z), k <= 2."""

    parts: tuple[PeriodicFn2D, ...] = field(default_factory=tuple)

    def __post_init__(self):
        parts = tuple(self.parts)
        if len(parts) > MAX_DEGREE + 1:
            raise DegreeOverflow(f"z-degree {len(parts) - 1} exceeds cap {MAX_DEGREE}")
        if not parts:
            parts = (PeriodicFn2D.zero(),)
        object.__setattr__(self, "parts", parts)

    @classmethod
    def const(cls, value: float) -> "PolyPeriodic":
        return cls((PeriodicFn2D.const(value),))

    @classmethod
    def of(cls, f: PeriodicFn2D) -> "PolyPeriodic":
        return cls((f,))

    @classmethod
    def monomial(cls, degree: int, coef: float = 1.0) -> "PolyPeriodic":
        if degree > MAX_DEGREE:
            raise DegreeOverflow("monomial degree exceeds cap")
        parts = [PeriodicFn2D.zero()] * degree + [PeriodicFn2D.const(coef)]
        return cls(tuple(parts))

    @property
    def degree(self) -> int:
        return len(self.parts) - 1

    def eval(self, y, z) -> np.ndarray:
        vals = eval_many(self.parts, y, z)
        z = np.broadcast_to(np.asarray(z, dtype=float), vals.shape[1:])
        out = np.zeros(vals.shape[1:])
        for k in range(len(self.parts) - 1, -1, -1):
            out = out * z + vals[k]
        return out

    __call__ = eval

    def __add__(self, other):
        if np.isscalar(other):
            return PolyPeriodic((self.parts[0] + other,) + self.parts[1:])
        if isinstance(other, PeriodicFn2D):
            other = PolyPeriodic.of(other)
        n = max(len(self.parts), len(other.parts))
        zero = PeriodicFn2D.zero()
        a = list(self.parts) + [zero] * (n - len(self.parts))
        b = list(other.parts) + [zero] * (n - len(other.parts))
        return PolyPeriodic(tuple(x + y for x, y in zip(a, b)))

    __radd__ = __add__

    def __neg__(self):
        return PolyPeriodic(tuple(-p for p in self.parts))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if np.isscalar(other):
            return PolyPeriodic(tuple(p * other for p in self.parts))
        if isinstance(other, PeriodicFn2D):
            other = PolyPeriodic.of(other)
        deg = self.degree + other.degree
        if deg > MAX_DEGREE:
            # tolerate identically-zero top parts
            a, b = self.stripped(), other.stripped()
            if a.degree + b.degree > MAX_DEGREE:
                raise DegreeOverflow(f"product degree {a.degree + b.degree} exceeds cap")
            return a * b
        out = [PeriodicFn2D.zero() for _ in range(deg + 1)]
        for i, p in enumerate(self.parts):
            for j, q in enumerate(other.parts):
                out[i + j] = out[i + j] + p * q
        return PolyPeriodic(tuple(out))

    __rmul__ = __mul__

    def stripped(self) -> "PolyPeriodic":
        parts = list(self.parts)
        while len(parts) > 1 and np.abs(parts[-1].coef).max() == 0.0:
            parts.pop()
        return PolyPeriodic(tuple(parts))

    def differentiate(self, axis: str, order: int = 1) -> "PolyPeriodic":
        out = self
        for _ in range(order):
            out = out._d1(axis)
        return out

    def _d1(self, axis: str) -> "PolyPeriodic":
        if axis == "y":
            return PolyPeriodic(tuple(p.dy() for p in self.parts))
        if axis != "z":
            raise ValueError("axis must be 'y' or 'z'")
        parts = [p.dz() for p in self.parts]
        for k in range(1, len(self.parts)):
            parts[k - 1] = parts[k - 1] + self.parts[k] * float(k)
        return PolyPeriodic(tuple(parts))

    def dy(self) -> "PolyPeriodic":
        return self.differentiate("y")

    def dz(self) -> "PolyPeriodic":
        return self.differentiate("z")

    def is_zero(self) -> bool:
        return all(np.abs(p.coef).max() == 0.0 for p in self.parts)


def eval_poly_many(polys: Sequence[PolyPeriodic], y, z) -> np.ndarray:
    """Batch evaluation of PolyPeriodic objects sharing one set of points."""
    flat, index = [], []
    for i, p in enumerate(polys):
        for k, part in enumerate(p.parts):
            flat.append(part)
            index.append((i, k))
    vals = eval_many(flat, y, z)
    zb = np.broadcast_to(np.asarray(z, dtype=float), vals.shape[1:])
    out = np.zeros((len(polys),) + vals.shape[1:])
    for (i, k), v in zip(index, vals):
        out[i] += v * zb ** k
    return out


# ---------------------------------------------------------------------------
# slopes
# ---------------------------------------------------------------------------


def _squarefree(d: int) -> bool:
    if d < 2:
        return False
    f = 2
    while f * f <= d:
        if d % (f * f) == 0:
            return False
        f += 1
    return True


@dataclass(frozen=True)
class ThetaSpec:
    """Slope of the projected orthogonal foliation.

    kind = "rational": p/q.  kind = "quadratic": (a + b sqrt(d))/c.
    kind = "float": a declared value; ``diophantine`` must be set for the
    small-divisor solvers and ``eps_div`` bounds the admissible divisors.
    """

    kind: str
    p: int = 0
    q: int = 1
    a: int = 0
    b: int = 0
    c: int = 1
    d: int = 0
    value_: float = 0.0
    diophantine: bool = False
    eps_div: float = 1e-8

    @classmethod
    def rational(cls, p: int, q: int = 1) -> "ThetaSpec":
        if q == 0:
            raise SpecError("rational slope with zero denominator")
        fr = Fraction(int(p), int(q))
        return cls("rational", p=fr.numerator, q=fr.denominator)

    @classmethod
    def quadratic(cls, a: int, b: int, c: int, d: int) -> "ThetaSpec":
        a, b, c, d = int(a), int(b), int(c), int(d)
        if c == 0 or b == 0:
            raise SpecError("quadratic slope needs b != 0 and c != 0")
        if not _squarefree(d):
            raise SpecError("quadratic slope needs a squarefree d > 1")
        if c < 0:
            a, b, c = -a, -b, -c
        g = math.gcd(math.gcd(abs(a), abs(b)), c)
        return cls("quadratic", a=a // g, b=b // g, c=c // g, d=d)

    @classmethod
    def golden(cls) -> "ThetaSpec":
        """(sqrt 5 - 1)/2."""
        return cls.quadratic(-1, 1, 2, 5)

    @classmethod
    def declared(cls, value: float, diophantine: bool, eps_div: float = 1e-8) -> "ThetaSpec":
        return cls("float", value_=float(value), diophantine=bool(diophantine),
                   eps_div=float(eps_div))

    @property
    def value(self) -> float:
        if self.kind == "rational":
            return self.p / self.q
        if self.kind == "quadratic":
            return (self.a + self.b * math.sqrt(self.d)) / self.c
        return self.value_

    @property
    def is_rational(self) -> bool:
        return self.kind == "rational"

    @property
    def is_diophantine(self) -> bool:
        return self.kind == "quadratic" or (self.kind == "float" and self.diophantine)

    def fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError("slope is not rational")
        return Fraction(self.p, self.q)

    def mobius(self, a: int, b: int, c: int, d: int) -> "ThetaSpec":
        """(c + d theta)/(a + b theta)."""
        if self.kind == "rational":
            num = c * self.q + d * self.p
            den = a * self.q + b * self.p
            return ThetaSpec.rational(num, den)
        if self.kind == "quadratic":
            # theta = (a0 + b0 sqrt D)/c0
            a0, b0, c0, dd = self.a, self.b, self.c, self.d
            n0, n1 = c * c0 + d * a0, d * b0          # numerator  n0 + n1 sqrt D
            m0, m1 = a * c0 + b * a0, b * b0          # denominator m0 + m1 sqrt D
            den = m0 * m0 - m1 * m1 * dd
            re = n0 * m0 - n1 * m1 * dd
            im = n1 * m0 - n0 * m1
            if den < 0:
                re, im, den = -re, -im, -den
            if im == 0:
                return ThetaSpec.rational(re, den)
            return ThetaSpec.quadratic(re, im, den, dd)
        val = (c + d * self.value) / (a + b * self.value)
        return ThetaSpec.declared(val, self.diophantine, self.eps_div)

    def negated(self) -> "ThetaSpec":
        return self.mobius(1, 0, 0, -1)

    def to_json(self) -> dict:
        if self.kind == "rational":
            return {"kind": "rational", "p": self.p, "q": self.q}
        if self.kind == "quadratic":
            return {"kind": "quadratic", "a": self.a, "b": self.b, "c": self.c, "d": self.d}
        return {"kind": "float", "value": self.value_, "diophantine": self.diophantine,
                "eps_div": self.eps_div}

    @classmethod
    def from_json(cls, obj) -> "ThetaSpec":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise SpecError("theta must be an object with a kind")
        kind = obj["kind"]
        allowed = {"rational": {"kind", "p", "q"},
                   "quadratic": {"kind", "a", "b", "c", "d"},
                   "float": {"kind", "value", "diophantine", "eps_div"}}
        if kind not in allowed:
            raise SpecError(f"unknown theta kind {kind!r}")
        extra = set(obj) - allowed[kind]
        if extra:
            raise SpecError(f"unknown theta keys {sorted(extra)}")
        try:
            if kind == "rational":
                return cls.rational(_as_int(obj["p"]), _as_int(obj["q"]))
            if kind == "quadratic":
                return cls.quadratic(*(_as_int(obj[key]) for key in "abcd"))
            return cls.declared(float(obj["value"]), bool(obj.get("diophantine", False)),
                                float(obj.get("eps_div", 1e-8)))
        except KeyError as exc:
            raise SpecError(f"theta missing key {exc}") from None


def _as_int(v) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise SpecError(f"expected integer, got {v!r}")
    return v


# ---------------------------------------------------------------------------
# small-divisor solvers
# ---------------------------------------------------------------------------


def _require_solvable(theta: ThetaSpec) -> None:
    if theta.kind == "float" and not theta.diophantine:
        raise NonDiophantineSlope("declared slope carries no Diophantine certificate")


def _is_active(c: complex, scale: float) -> bool:
    return abs(c) > ACTIVE_MODE_TOL * (1.0 + scale)


def solve_cohomological(h: PeriodicFn1D, theta: ThetaSpec) -> PeriodicFn1D:
    """psi with psi(z + theta) - psi(z) = h(z) - mean(h), mean(psi) = 0."""
    _require_solvable(theta)
    m = h.max_freq
    scale = float(np.abs(h.coef).max())
    out = np.zeros_like(h.coef)
    for j in range(-m, m + 1):
        if j == 0:
            continue
        cj = h.coef[j + m]
        if theta.is_rational and (j * theta.p) % theta.q == 0:
            if _is_active(cj, scale):
                raise ResonantFrequency(f"mode {j} resonates with theta = {theta.p}/{theta.q}")
            continue
        div = np.exp(1j * TWO_PI * j * theta.value) - 1.0
        if theta.kind == "float" and abs(div) < theta.eps_div and _is_active(cj, scale):
            raise SmallDivisor(f"|exp(2 pi i j theta) - 1| = {abs(div):.3e} below bound at j = {j}")
        out[j + m] = cj / div
    return PeriodicFn1D(out)


def cohomological_residual(psi: PeriodicFn1D, h: PeriodicFn1D, theta: ThetaSpec,
                           grid: int = 512) -> float:
    z = np.arange(grid) / grid
    lhs = psi.eval(z + theta.value) - psi.eval(z)
    rhs = h.eval(z) - h.mean()
    return float(np.abs(lhs - rhs).max())


def solve_directional(nu: PeriodicFn2D, theta: ThetaSpec) -> tuple[PeriodicFn2D, float]:
    """N with (d/dy + theta d/dz) N = nu + k where k = -mean(nu); mean(N) = 0."""
    _require_solvable(theta)
    m, n = nu.max_freq
    scale = float(np.abs(nu.coef).max())
    out = np.zeros_like(nu.coef)
    tv = theta.value
    for jj in range(2 * m + 1):
        j = jj - m
        for kk in range(2 * n + 1):
            k = kk - n
            if j == 0 and k == 0:
                continue
            c = nu.coef[jj, kk]
            if theta.is_rational and j * theta.q + k * theta.p == 0:
                if _is_active(c, scale):
                    raise ResonantFrequency(f"mode ({j},{k}) is constant along slope "
                                            f"{theta.p}/{theta.q}")
                continue
            div = j + k * tv
            if theta.kind == "float" and abs(div) < theta.eps_div and _is_active(c, scale):
                raise SmallDivisor(f"|j + k theta| = {abs(div):.3e} below bound at ({j},{k})")
            out[jj, kk] = c / (1j * TWO_PI * div)
    return PeriodicFn2D(out), -nu.mean()


def solve_exterior(kappa: PeriodicFn2D, theta: ThetaSpec,
                   tol: float = 1e-12) -> tuple[PeriodicFn2D, PeriodicFn2D]:
    """Minimal-norm mean-zero (nu, mu) with dnu/dw - (1/2)(d/dv + theta d/dw) mu = kappa.

    This is the density of d(delta) for delta = -nu dv - (mu/2)(-theta dv + dw).
    """
    if abs(kappa.mean()) > tol * (1.0 + float(np.abs(kappa.coef).max())):
        raise NonzeroMean("exterior primitive needs a mean-zero density")
    m, n = kappa.max_freq
    js = np.arange(-m, m + 1)[:, None].astype(float)
    ks = np.arange(-n, n + 1)[None, :].astype(float)
    a_nu = 1j * TWO_PI * ks * np.ones_like(js)
    a_mu = -1j * math.pi * (js + theta.value * ks)
    norm = np.abs(a_nu) ** 2 + np.abs(a_mu) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        nu = np.where(norm > 0, kappa.coef * np.conj(a_nu) / norm, 0.0)
        mu = np.where(norm > 0, kappa.coef * np.conj(a_mu) / norm, 0.0)
    return PeriodicFn2D(nu), PeriodicFn2D(mu)


def exterior_density(nu: PeriodicFn2D, mu: PeriodicFn2D, theta: ThetaSpec) -> PeriodicFn2D:
    """dnu/dw - (1/2)(d/dv + theta d/dw) mu, the inverse of solve_exterior."""
    return nu.dz() - mu.directional(theta.value) * 0.5


def gcd_ext(a: int, b: int) -> tuple[int, int, int]:
    """(g, u, v) with u a + v b = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def grid_points(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Flattened (y, z) tensor grid with n points per side."""
    g = np.arange(n) / n
    y, z = np.meshgrid(g, g, indexing="ij")
    return y.reshape(-1), z.reshape(-1)


def resample_1d(func: Callable[[np.ndarray], np.ndarray], max_freq: int = 96,
                tol: float = 1e-17) -> PeriodicFn1D:
    """Fourier approximation of a smooth periodic function, trimmed of negligible modes."""
    f = PeriodicFn1D.from_function(func, max_freq, n_samples=8 * (max_freq + 1))
    return f.trim(tol * (1.0 + float(np.abs(f.coef).max())))


__all__ = [
    "PeriodicFn1D", "PeriodicFn2D", "PolyPeriodic", "ThetaSpec",
    "solve_cohomological", "solve_directional", "solve_exterior", "exterior_density",
    "cohomological_residual", "eval_many", "eval_poly_many", "canonical_modes",
    "max_coef_diff", "gcd_ext", "grid_points", "resample_1d",
]
