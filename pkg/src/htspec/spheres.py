"""Quadrature rules on S^{m-1} and surface-measure Fourier kernels.

Rules by center dimension: m=1 uses the two-point "sphere" {+1,-1}; m=2 an
equispaced rule on the circle (spectrally accurate); m=3 a Gauss-Legendre
(polar) x trapezoid (azimuthal) product rule; m >= 4 a seeded antithetic
quasi-Monte-Carlo rule whose accuracy is certified by node doubling.
Weights always sum to the unnormalized surface area.
"""

from __future__ import annotations

import numpy as np
from scipy.special import jv

from .plane import sphere_area


def sphere_rule(m: int, level: int = 0, seed: int = 20240 ) -> tuple[np.ndarray, np.ndarray]:
    """Nodes (M, m) and weights (M,) integrating against the surface measure."""
    if m < 1:
        raise ValueError("center dimension must be >= 1")
    if level < 0:
        raise ValueError("level must be >= 0")
    if m == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if m == 2:
        M = 16 * 2**level
        theta = 2 * np.pi * np.arange(M) / M
        nodes = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return nodes, np.full(M, 2 * np.pi / M)
    if m == 3:
        n_polar = 8 * 2**level
        n_az = 2 * n_polar
        u, wu = np.polynomial.legendre.leggauss(n_polar)  # u = cos(polar angle)
        phi = 2 * np.pi * np.arange(n_az) / n_az
        su = np.sqrt(1.0 - u**2)
        nodes = np.empty((n_polar * n_az, 3))
        weights = np.empty(n_polar * n_az)
        idx = 0
        for i in range(n_polar):
            nodes[idx : idx + n_az, 0] = su[i] * np.cos(phi)
            nodes[idx : idx + n_az, 1] = su[i] * np.sin(phi)
            nodes[idx : idx + n_az, 2] = u[i]
            weights[idx : idx + n_az] = wu[i] * 2 * np.pi / n_az
            idx += n_az
        return nodes, weights
    # m >= 4: antithetic QMC with a fixed, recorded seed
    M = 256 * 2**level
    rng = np.random.default_rng(seed + 7919 * level)
    raw = rng.standard_normal((M // 2, m))
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    nodes = np.concatenate([raw, -raw], axis=0)
    weights = np.full(M, sphere_area(m) / M)
    return nodes, weights


def surface_kernel(m: int, u) -> np.ndarray:
    """Fourier transform of the unit-sphere surface measure at radius u=|xi|:
    integral over S^{m-1} of exp(-i u <w, e>) dsigma(w); real and even."""
    u = np.abs(np.asarray(u, dtype=float))
    if m == 1:
        return 2.0 * np.cos(u)
    out = np.empty_like(u)
    small = u < 1e-6
    area = sphere_area(m)
    # series value at small u avoids the 0/0 in the Bessel form
    out[small] = area * (1.0 - u[small] ** 2 / (2.0 * m))
    ub = u[~small]
    out[~small] = (2 * np.pi) ** (m / 2.0) * ub ** (1.0 - m / 2.0) * jv(m / 2.0 - 1.0, ub)
    return out
