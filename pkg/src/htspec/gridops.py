"""Differential operators on tensor-grid samples over the group.

Functions live on a periodic tensor lattice in (z, t) with Gaussian-decay
margins; derivatives are spectral. Practical for small total dimension
(the reference configuration is n = m = 1).
"""

from __future__ import annotations

import numpy as np

from .errors import AliasingError, GridTooCoarse, ShapeMismatch
from .groups import HTypeGroup
from .plane import GridFunction2D

Z_EXTENT, Z_POINTS = 8.0, 64
T_EXTENT, T_POINTS = 16.0, 64


class GroupGridFunction:
    """Complex samples on a uniform lattice of R^{2n} x R^m."""

    def __init__(self, G: HTypeGroup, values: np.ndarray,
                 z_extent: float = Z_EXTENT, t_extent: float = T_EXTENT):
        self.G = G
        self.values = np.asarray(values, dtype=complex)
        d = 2 * G.n + G.m
        if self.values.ndim != d:
            raise ShapeMismatch(f"expected {d} axes, got {self.values.ndim}")
        self.z_extent = float(z_extent)
        self.t_extent = float(t_extent)
        self.z_N = self.values.shape[0]
        self.t_N = self.values.shape[-1]

    # -- construction ---------------------------------------------------
    @classmethod
    def from_callable(cls, G: HTypeGroup, fn, z_extent: float = Z_EXTENT,
                      z_N: int = Z_POINTS, t_extent: float = T_EXTENT,
                      t_N: int = T_POINTS) -> "GroupGridFunction":
        """Sample fn(*coords) where coords are the 2n z-meshes then m t-meshes."""
        axes = [cls.axis(z_extent, z_N)] * (2 * G.n) + [cls.axis(t_extent, t_N)] * G.m
        mesh = np.meshgrid(*axes, indexing="ij")
        return cls(G, np.asarray(fn(*mesh), dtype=complex), z_extent, t_extent)

    @staticmethod
    def axis(extent: float, N: int) -> np.ndarray:
        return -extent + 2.0 * extent * np.arange(N) / N

    @property
    def z_axis(self) -> np.ndarray:
        return self.axis(self.z_extent, self.z_N)

    @property
    def t_axis(self) -> np.ndarray:
        return self.axis(self.t_extent, self.t_N)

    def like(self, values: np.ndarray) -> "GroupGridFunction":
        return GroupGridFunction(self.G, values, self.z_extent, self.t_extent)

    def t_frequency_lattice(self) -> np.ndarray:
        """Frequencies commensurate with the periodic t-axis (spacing pi/extent)."""
        return np.pi / self.t_extent * np.arange(-self.t_N // 2, self.t_N // 2)

    # -- calculus ---------------------------------------------------------
    def _freq(self, axis: int) -> np.ndarray:
        N = self.values.shape[axis]
        extent = self.z_extent if axis < 2 * self.G.n else self.t_extent
        h = 2.0 * extent / N
        return 2 * np.pi * np.fft.fftfreq(N, d=h)

    def deriv(self, axis: int, order: int = 1) -> np.ndarray:
        k = self._freq(axis)
        shape = [1] * self.values.ndim
        shape[axis] = len(k)
        mult = (1j * k.reshape(shape)) ** order
        return np.fft.ifft(mult * np.fft.fft(self.values, axis=axis), axis=axis)

    def spectral_tail_fraction(self) -> float:
        """Worst per-axis energy fraction in the top frequency octave."""
        worst = 0.0
        total0 = float(np.sum(np.abs(self.values) ** 2))
        if total0 == 0.0:
            return 0.0
        for axis in range(self.values.ndim):
            F = np.fft.fft(self.values, axis=axis)
            N = self.values.shape[axis]
            idx = np.abs(np.fft.fftfreq(N) * N) >= 0.5 * (N / 2)
            sl = [slice(None)] * self.values.ndim
            sl[axis] = idx
            frac = float(np.sum(np.abs(F[tuple(sl)]) ** 2) / np.sum(np.abs(F) ** 2))
            worst = max(worst, frac)
        return worst

    # -- quadrature --------------------------------------------------------
    def cell_volume(self) -> float:
        hz = 2.0 * self.z_extent / self.z_N
        ht = 2.0 * self.t_extent / self.t_N
        return hz ** (2 * self.G.n) * ht**self.G.m

    def l2_norm_sq(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.cell_volume())

    def l2_norm(self) -> float:
        return np.sqrt(self.l2_norm_sq())

    def central_transform(self, a) -> GridFunction2D | np.ndarray:
        """f^a(z) = int f(z, t) e^{+i<a,t>} dt by trapezoid over the t-lattice."""
        a = np.atleast_1d(np.asarray(a, dtype=float))
        if a.shape != (self.G.m,):
            raise ShapeMismatch(f"central frequency must have length m={self.G.m}")
        ht = 2.0 * self.t_extent / self.t_N
        nyquist = np.pi / ht
        if np.any(np.abs(a) > nyquist):
            raise AliasingError(
                f"|a| exceeds the t-grid Nyquist limit {nyquist:.4f}"
            )
        vals = self.values
        t = self.t_axis
        for k in range(self.G.m):
            phase = np.exp(1j * a[k] * t) * ht
            vals = np.tensordot(vals, phase, axes=([2 * self.G.n], [0]))
        if self.G.n == 1:
            return GridFunction2D(self.z_extent, vals)
        return vals


def _u_coefficients(G: HTypeGroup, mesh_z: list[np.ndarray]) -> np.ndarray:
    """coef[k, j] = (z^T U^k)_j as grids; shape (m, 2n) of arrays."""
    out = np.empty((G.m, 2 * G.n), dtype=object)
    for k in range(G.m):
        for j in range(2 * G.n):
            acc = 0.0
            for l in range(2 * G.n):
                if G.U[k, l, j] != 0.0:
                    acc = acc + mesh_z[l] * G.U[k, l, j]
            out[k, j] = acc
    return out


def apply_operator(G: HTypeGroup, which: str, f: GroupGridFunction,
                   coarse_tol: float = 1e-6) -> GroupGridFunction:
    """Apply one of L, T, Delta, X_j, Y_j, T_k to grid samples.

    L is assembled as the sum of its three displayed terms
    -Delta_z + |z|^2 T / 4 - sum_k <z, U^k grad_z> T_k. Raises GridTooCoarse
    when the top-octave spectral energy fraction exceeds coarse_tol.
    """
    if f.G is not G and (f.G.n != G.n or f.G.m != G.m):
        raise ShapeMismatch("function sampled on a different group")
    tail = f.spectral_tail_fraction()
    if tail > coarse_tol:
        raise GridTooCoarse(
            f"top-octave spectral energy fraction {tail:.2e} exceeds {coarse_tol:.1e}"
        )
    n, m = G.n, G.m
    nz = 2 * n
    mesh_z = []
    for l in range(nz):
        shape = [1] * f.values.ndim
        shape[l] = f.z_N
        mesh_z.append(f.z_axis.reshape(shape))

    if which.startswith("T") and which != "T":
        k = int(which[1:]) - 1
        if not 0 <= k < m:
            raise ShapeMismatch(f"no central direction {which}")
        return f.like(f.deriv(nz + k))
    if which.startswith("X") or which.startswith("Y"):
        j = int(which[1:]) - 1
        if not 0 <= j < n:
            raise ShapeMismatch(f"no horizontal direction {which}")
        col = j if which.startswith("X") else j + n
        coef = _u_coefficients(G, mesh_z)
        vals = f.deriv(col)
        for k in range(m):
            vals = vals + 0.5 * coef[k, col] * f.deriv(nz + k)
        return f.like(vals)

    if which not in ("L", "T", "Delta"):
        raise ShapeMismatch(f"unknown operator {which!r}")

    Tf = np.zeros_like(f.values)
    for k in range(m):
        Tf = Tf - f.deriv(nz + k, order=2)
    if which == "T":
        return f.like(Tf)

    lap_z = np.zeros_like(f.values)
    for l in range(nz):
        lap_z = lap_z + f.deriv(l, order=2)
    r2 = sum(mesh_z[l] ** 2 for l in range(nz))
    coef = _u_coefficients(G, mesh_z)
    mixed = np.zeros_like(f.values)
    for k in range(m):
        dtk = f.deriv(nz + k)
        gk = f.like(dtk)
        for j in range(nz):
            c = coef[k, j]
            if np.ndim(c) or c != 0.0:
                mixed = mixed + c * gk.deriv(j)
    Lf = -lap_z + 0.25 * r2 * Tf - mixed
    if which == "L":
        return f.like(Lf)
    return f.like(Lf + Tf)
