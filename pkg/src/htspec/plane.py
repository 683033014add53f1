"""Function backends on the plane R^{2n} (identified with C^n).

Three interchangeable representations:

* ``RadialFunction``  -- radial functions at any n, held as a vectorized
  callable of the radius with Gaussian-decay metadata; Laguerre-series
  analysis/synthesis and norms go through adaptive Gauss-Legendre
  quadrature in the squared-radius variable.
* ``LaguerreSeries``  -- radial functions given by coefficients against the
  scaled Laguerre functions at a fixed scale.
* ``GridFunction2D``  -- complex samples on a uniform square lattice,
  permitted only for n=1 (cost control); quadrature is the lattice sum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import gamma as _gamma

import numpy as np

from .errors import BackendMismatch, TruncationError
from .laguerre import phi_radial_all

DEFAULT_DECAY = 0.125  # conservative |u(r)| <~ exp(-c r^2) rate when unknown


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere S^{d-1} in R^d."""
    return 2.0 * np.pi ** (d / 2.0) / _gamma(d / 2.0)


@lru_cache(maxsize=64)
def _leggauss(n_nodes: int):
    return np.polynomial.legendre.leggauss(n_nodes)


def _s_rule(n: int, rate: float, n_osc: float, tail: float = 42.0):
    """Gauss-Legendre nodes/weights in s = r^2 for integrands bounded by
    poly * exp(-rate*s) with about n_osc oscillations over the support."""
    s_max = tail / rate
    n_nodes = int(max(160, 3.2 * n_osc + 80))
    n_nodes = -(-n_nodes // 32) * 32  # quantize so the cache can hit
    x, w = _leggauss(n_nodes)
    s = 0.5 * s_max * (x + 1.0)
    ws = 0.5 * s_max * w
    return s, ws


class RadialFunction:
    """Radial function on R^{2n} wrapped around a vectorized callable u(r).

    ``decay_rate`` is a lower bound c with |u(r)| <~ exp(-c r^2); it sizes
    the quadrature support for norms and Laguerre analysis.
    """

    backend = "radial"

    def __init__(self, fn, n: int, decay_rate: float = DEFAULT_DECAY, label: str = ""):
        self.fn = fn
        self.n = int(n)
        self.decay_rate = float(decay_rate)
        self.label = label

    def __call__(self, r):
        return self.fn(np.asarray(r, dtype=float))

    # -- quadrature ---------------------------------------------------
    def _volume_rule(self, extra_rate: float = 0.0, n_osc: float = 0.0):
        rate = max(self.decay_rate + extra_rate, 1e-3)
        s, ws = _s_rule(self.n, rate, n_osc)
        # integral over R^{2n} of F(|z|): (omega/2) * int F(sqrt(s)) s^{n-1} ds
        w_vol = 0.5 * sphere_area(2 * self.n) * ws * s ** (self.n - 1)
        return np.sqrt(s), w_vol

    def l2_norm_sq(self) -> float:
        r, w = self._volume_rule(extra_rate=self.decay_rate)
        vals = self(r)
        return float(np.sum(w * np.abs(vals) ** 2).real)

    def l2_norm(self) -> float:
        return np.sqrt(self.l2_norm_sq())

    def lp_norm(self, p: float) -> float:
        r, w = self._volume_rule(extra_rate=self.decay_rate * (p - 1.0))
        vals = np.abs(self(r)) ** p
        return float(np.sum(w * vals) ** (1.0 / p))

    def inner(self, other: "RadialFunction") -> complex:
        if other.n != self.n:
            raise BackendMismatch("radial operands must share n")
        rate = self.decay_rate + other.decay_rate
        s, ws = _s_rule(self.n, max(rate, 1e-3), 0.0)
        r = np.sqrt(s)
        w = 0.5 * sphere_area(2 * self.n) * ws * s ** (self.n - 1)
        return complex(np.sum(w * self(r) * np.conj(other(r))))

    def tail_mass(self, radius: float) -> float:
        """Integral of |u| outside the given radius (truncation diagnostic)."""
        rate = max(self.decay_rate, 1e-3)
        s_lo = radius**2
        s_hi = s_lo + 42.0 / rate
        x, wq = np.polynomial.legendre.leggauss(200)
        s = 0.5 * (s_hi - s_lo) * (x + 1.0) + s_lo
        ws = 0.5 * (s_hi - s_lo) * wq
        w = 0.5 * sphere_area(2 * self.n) * ws * s ** (self.n - 1)
        return float(np.sum(w * np.abs(self(np.sqrt(s)))))

    # -- Laguerre analysis --------------------------------------------
    def laguerre_coeffs(self, lam: float, kmax: int) -> np.ndarray:
        """Coefficients c_k with u = sum_k c_k phi_k^lam, k <= kmax."""
        if lam <= 0:
            raise ValueError("scale must be positive")
        n = self.n
        rate = self.decay_rate + lam / 4.0
        # oscillation count of the weighted Laguerre factor over the support
        x_max = lam * (42.0 / rate) / 2.0
        n_osc = np.sqrt(max(kmax, 1) * x_max) / np.pi * 2.0
        s, ws = _s_rule(n, rate, n_osc)
        r = np.sqrt(s)
        vals = self(r)
        psi = phi_radial_all(kmax, n, lam, r)  # (kmax+1, len(s))
        w_vol = 0.5 * sphere_area(2 * n) * ws * s ** (n - 1)
        inner = psi @ (w_vol * vals)
        k = np.arange(kmax + 1)
        norms = (2.0 * np.pi / lam) ** n * _binom_row(k, n)
        return inner / norms

    def to_series(self, lam: float, kmax: int) -> "LaguerreSeries":
        return LaguerreSeries(lam=lam, n=self.n, coeffs=self.laguerre_coeffs(lam, kmax))

    @staticmethod
    def gaussian(n: int, c: float, amplitude: complex = 1.0) -> "RadialFunction":
        """amplitude * exp(-c |z|^2)."""
        return RadialFunction(
            lambda r, c=c, A=amplitude: A * np.exp(-c * r**2),
            n=n,
            decay_rate=c,
            label=f"gauss(c={c})",
        )


def _binom_row(k: np.ndarray, n: int) -> np.ndarray:
    """C(k+n-1, k) for an array of k, in floating point."""
    out = np.ones(len(k))
    for j in range(1, n):
        out *= (k + j) / j
    return out


@dataclass
class LaguerreSeries:
    """Radial function sum_k coeffs[k] * phi_k^lam on R^{2n}."""

    lam: float
    n: int
    coeffs: np.ndarray

    backend = "laguerre"

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs)

    @property
    def kmax(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        psi = phi_radial_all(self.kmax, self.n, self.lam, np.atleast_1d(r))
        vals = np.tensordot(self.coeffs, psi, axes=(0, 0))
        return vals.reshape(r.shape) if r.ndim else complex(vals[0])

    def l2_norm_sq(self) -> float:
        k = np.arange(self.kmax + 1)
        norms = (2.0 * np.pi / self.lam) ** self.n * _binom_row(k, self.n)
        return float(np.sum(np.abs(self.coeffs) ** 2 * norms))

    def l2_norm(self) -> float:
        return np.sqrt(self.l2_norm_sq())

    def as_radial(self) -> RadialFunction:
        return RadialFunction(self.__call__, self.n, decay_rate=self.lam / 4.0)

    def laguerre_coeffs(self, lam: float, kmax: int) -> np.ndarray:
        if lam == self.lam:
            out = np.zeros(kmax + 1, dtype=self.coeffs.dtype)
            upto = min(kmax, self.kmax) + 1
            out[:upto] = self.coeffs[:upto]
            return out
        return self.as_radial().laguerre_coeffs(lam, kmax)


class GridFunction2D:
    """Complex samples on the uniform lattice [-R, R)^2, n=1 only.

    Lattice points are x_q = -R + q*h with h = 2R/N, so the origin is a
    sample when N is even. Quadrature is the plain lattice sum times h^2,
    spectrally accurate for smooth decaying integrands.
    """

    backend = "grid"

    def __init__(self, extent: float, values: np.ndarray):
        values = np.asarray(values)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise BackendMismatch("grid values must be square (N, N)")
        self.extent = float(extent)
        self.values = values.astype(complex)
        self.N = values.shape[0]
        self.h = 2.0 * self.extent / self.N

    @classmethod
    def from_callable(cls, fn, extent: float, N: int) -> "GridFunction2D":
        x = cls.axis(extent, N)
        X, Y = np.meshgrid(x, x, indexing="ij")
        return cls(extent, np.asarray(fn(X, Y), dtype=complex))

    @staticmethod
    def axis(extent: float, N: int) -> np.ndarray:
        return -extent + 2.0 * extent * np.arange(N) / N

    @property
    def x(self) -> np.ndarray:
        return self.axis(self.extent, self.N)

    def like(self, values: np.ndarray) -> "GridFunction2D":
        return GridFunction2D(self.extent, values)

    def integral(self) -> complex:
        return complex(np.sum(self.values) * self.h**2)

    def l2_norm_sq(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.h**2)

    def l2_norm(self) -> float:
        return np.sqrt(self.l2_norm_sq())

    def lp_norm(self, p: float) -> float:
        return float((np.sum(np.abs(self.values) ** p) * self.h**2) ** (1.0 / p))

    def inner(self, other: "GridFunction2D") -> complex:
        self._check_compatible(other)
        return complex(np.sum(self.values * np.conj(other.values)) * self.h**2)

    def boundary_mass_fraction(self) -> float:
        """Largest |value| on the lattice boundary relative to the peak."""
        v = np.abs(self.values)
        peak = v.max()
        if peak == 0:
            return 0.0
        edge = max(v[0, :].max(), v[-1, :].max(), v[:, 0].max(), v[:, -1].max())
        return float(edge / peak)

    def require_contained(self, tol: float = 1e-6) -> None:
        frac = self.boundary_mass_fraction()
        if frac > tol:
            raise TruncationError(
                f"boundary mass fraction {frac:.2e} exceeds {tol:.1e}; enlarge the grid"
            )

    def _check_compatible(self, other: "GridFunction2D") -> None:
        if not isinstance(other, GridFunction2D):
            raise BackendMismatch("expected another grid function")
        if other.N != self.N or abs(other.extent - self.extent) > 1e-12:
            raise BackendMismatch("grids must share extent and resolution")


def default_extent(lam: float, base: float = 8.0) -> float:
    """Truncation radius: base for lam >= 1, scaled like lam^(-1/2) below."""
    return base / np.sqrt(lam) if lam < 1 else base
