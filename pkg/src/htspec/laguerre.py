"""Generalized Laguerre polynomials and the scaled Laguerre functions.

Evaluation uses the upward three-term recurrence in the degree, which is
stable for x >= 0. The function ``phi_radial(k, n, lam, r)`` evaluates

    L_k^{n-1}(lam * r**2 / 2) * exp(-lam * r**2 / 4),

the radial eigenfunction generator of the scaled special Hermite expansion
on C^n; ``phi`` accepts points of R^{2n}.
"""

from __future__ import annotations

from math import comb

import numpy as np


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)):
        raise ValueError("NaN input to Laguerre evaluation")
    return x


def laguerre_poly(k: int, a: float, x) -> np.ndarray | float:
    """Value of L_k^a(x) by the degree recurrence.

    k must be a non-negative integer and a > -1; x is a scalar or array.
    """
    if k < 0 or int(k) != k:
        raise ValueError(f"degree must be a non-negative integer, got {k}")
    if a <= -1:
        raise ValueError(f"order must exceed -1, got {a}")
    x = _check_x(x)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    prev = np.ones_like(x)
    if k == 0:
        return float(prev[0]) if scalar else prev
    cur = 1.0 + a - x
    for j in range(1, k):
        prev, cur = cur, ((2 * j + 1 + a - x) * cur - (j + a) * prev) / (j + 1)
    return float(cur[0]) if scalar else cur


def laguerre_all(kmax: int, a: float, x) -> np.ndarray:
    """All values L_0^a(x) .. L_kmax^a(x), stacked along a leading axis."""
    if kmax < 0:
        raise ValueError("kmax must be >= 0")
    if a <= -1:
        raise ValueError(f"order must exceed -1, got {a}")
    x = np.atleast_1d(_check_x(x))
    out = np.empty((kmax + 1,) + x.shape)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = 1.0 + a - x
    for j in range(1, kmax):
        out[j + 1] = ((2 * j + 1 + a - x) * out[j] - (j + a) * out[j - 1]) / (j + 1)
    return out


def phi_radial(k: int, n: int, lam: float, r) -> np.ndarray | float:
    """Scaled Laguerre function at radius r = |z| on C^n."""
    if lam <= 0:
        raise ValueError(f"scale must be positive, got {lam}")
    r = np.asarray(r, dtype=float)
    x = lam * r**2 / 2.0
    return laguerre_poly(k, n - 1, x) * np.exp(-x / 2.0)


def phi_radial_all(kmax: int, n: int, lam: float, r) -> np.ndarray:
    """phi_k for all k <= kmax at radii r; shape (kmax+1,) + r.shape."""
    if lam <= 0:
        raise ValueError(f"scale must be positive, got {lam}")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    x = lam * r**2 / 2.0
    return laguerre_all(kmax, n - 1, x) * np.exp(-x / 2.0)


def phi_radial_diag(ks: np.ndarray, n: int, lams: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Rows phi_{ks[i]}^{lams[i]}(r): each row its own degree AND scale.

    One shared degree-recurrence sweep; row i is read off at degree ks[i].
    """
    ks = np.asarray(ks, dtype=int)
    lams = np.asarray(lams, dtype=float)
    r = np.asarray(r, dtype=float)
    X = 0.5 * lams[:, None] * r[None, :] ** 2
    E = np.exp(-0.5 * X)
    a = n - 1
    out = np.empty((len(ks), len(r)))
    kmax = int(ks.max())
    prev = E
    sel = ks == 0
    out[sel] = prev[sel]
    cur = (1.0 + a - X) * E
    sel = ks == 1
    out[sel] = cur[sel]
    for j in range(1, kmax):
        prev, cur = cur, ((2 * j + 1 + a - X) * cur - (j + a) * prev) / (j + 1)
        sel = ks == j + 1
        out[sel] = cur[sel]
    return out


def phi(k: int, n: int, lam: float, z) -> np.ndarray | float:
    """Scaled Laguerre function at points z of R^{2n}.

    z may be a single point of length 2n or an array whose last axis has
    length 2n; the value depends on z only through |z|.
    """
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != 2 * n:
        raise ValueError(f"points must have last axis 2n={2*n}, got {z.shape}")
    r = np.sqrt(np.sum(z**2, axis=-1))
    return phi_radial(k, n, lam, r)


def phi_at_zero(k: int, n: int) -> int:
    """phi_k^lam(0) = C(k+n-1, k), independent of the scale."""
    return comb(k + n - 1, k)


def phi_sq_norm(k: int, n: int, lam: float) -> float:
    """L^2(R^{2n}) squared norm of phi_k^lam: (2*pi/lam)^n * C(k+n-1, k)."""
    return (2.0 * np.pi / lam) ** n * comb(k + n - 1, k)
