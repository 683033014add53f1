"""Joint spectral machinery: central Fourier transform, joint eigenfunction
convolution, the spectral projector at mu, and the bounded functional
calculus built on it.

The projector at mu sums, over branches k and sphere directions, the joint
eigenfunction convolutions at |a| = lam_k(mu) with the density prefactor
(2pi)^-(n+m) lam_k^{n+m-1} |lam_k'|. Group functions enter through a small
protocol: either tensor-grid samples (GroupGridFunction, m=1) or a list of
radial parts (u_j(|z|), node-dependent scalar weights) returned by
``central_radial_parts``; the latter covers separable, center-radial, and
shifted-mixture inputs at any m.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AliasingError, DomainError, ShapeMismatch
from .gridops import GroupGridFunction
from .groups import HTypeGroup
from .laguerre import phi_radial
from .plane import LaguerreSeries, RadialFunction, sphere_area
from .profiles import SpectralProfile, lambda_solve
from .spheres import sphere_rule, surface_kernel
from .twisted import twisted_convolution

K_STOP_REL = 1e-12
K_STOP_RUN = 3
K_HARD_CAP = 500


# ---------------------------------------------------------------------------
# group-function backends (radial protocol)
# ---------------------------------------------------------------------------

class SeparableFunction:
    """f(z, t) = u(|z|) * theta(t) with theta sampled on a 1-D t-lattice (m=1)."""

    def __init__(self, u: RadialFunction, theta: np.ndarray, t_extent: float):
        self.u = u
        self.theta = np.asarray(theta, dtype=complex)
        self.t_extent = float(t_extent)
        self.n = u.n
        self.m = 1

    @property
    def t_axis(self) -> np.ndarray:
        N = len(self.theta)
        return -self.t_extent + 2.0 * self.t_extent * np.arange(N) / N

    @property
    def t_step(self) -> float:
        return 2.0 * self.t_extent / len(self.theta)

    def theta_hat_many(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        if np.any(np.abs(a) > np.pi / self.t_step):
            raise AliasingError(f"|a| exceeds Nyquist {np.pi/self.t_step:.4f}")
        phases = np.exp(1j * np.multiply.outer(a, self.t_axis))
        return (phases @ self.theta) * self.t_step

    def theta_hat(self, a: float) -> complex:
        return complex(self.theta_hat_many(np.array([a]))[0])

    def central_transform(self, a) -> RadialFunction:
        a = float(np.atleast_1d(a)[0])
        scale = self.theta_hat(a)
        return RadialFunction(lambda r: scale * self.u(r), self.n, self.u.decay_rate)

    def radial_parts_fixed(self):
        def weight_fn(lams: np.ndarray, nodes: np.ndarray) -> np.ndarray:
            return self.theta_hat_many(np.multiply.outer(lams, nodes[:, 0]))

        return [(self.u, weight_fn)]

    def values_on(self, r_z: np.ndarray) -> np.ndarray:
        return np.outer(self.u(r_z), self.theta)

    def l2_norm_sq(self) -> float:
        theta_sq = float(np.sum(np.abs(self.theta) ** 2) * self.t_step)
        return self.u.l2_norm_sq() * theta_sq


class CenterRadialFunction:
    """f(z, t) = u(|z|) * Theta(|t|) with Theta sampled on a radial t-grid."""

    def __init__(self, u: RadialFunction, rho: np.ndarray, theta: np.ndarray, m: int):
        self.u = u
        self.rho = np.asarray(rho, dtype=float)
        self.theta = np.asarray(theta, dtype=complex)
        self.m = int(m)
        self.n = u.n
        if self.rho.ndim != 1 or self.rho.shape != self.theta.shape:
            raise ShapeMismatch("rho and theta must be equal-length vectors")
        self._w = _trapezoid_weights(self.rho) * self.rho ** (self.m - 1)
        self._hat_cache: dict[float, complex] = {}

    def theta_hat_many(self, lams) -> np.ndarray:
        """Radial central transform: int Theta(rho) Omega_m(lam rho) rho^{m-1} drho."""
        lams = np.asarray(lams, dtype=float)
        kern = surface_kernel(self.m, np.multiply.outer(lams, self.rho))
        return kern @ (self._w * self.theta)

    def theta_hat(self, lam: float) -> complex:
        key = round(float(lam), 15)
        if key not in self._hat_cache:
            self._hat_cache[key] = complex(self.theta_hat_many(np.array([lam]))[0])
        return self._hat_cache[key]

    def central_transform(self, a) -> RadialFunction:
        a = np.atleast_1d(np.asarray(a, dtype=float))
        scale = self.theta_hat(float(np.linalg.norm(a)))
        return RadialFunction(lambda r: scale * self.u(r), self.n, self.u.decay_rate)

    def radial_parts_fixed(self):
        def weight_fn(lams: np.ndarray, nodes: np.ndarray) -> np.ndarray:
            return np.repeat(self.theta_hat_many(lams)[:, None], len(nodes), axis=1)

        return [(self.u, weight_fn)]

    def l2_norm_sq(self) -> float:
        theta_sq = sphere_area(self.m) * float(np.sum(self._w * np.abs(self.theta) ** 2))
        return self.u.l2_norm_sq() * theta_sq


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    w = np.empty_like(x)
    w[1:-1] = 0.5 * (x[2:] - x[:-2])
    w[0] = 0.5 * (x[1] - x[0])
    w[-1] = 0.5 * (x[-1] - x[-2])
    return w


def central_fourier(f, a):
    """f^a(z) = int f(z, t) exp(+i<a, t>) dt, dispatched on the backend."""
    return f.central_transform(np.asarray(a, dtype=float))


# ---------------------------------------------------------------------------
# joint eigenfunction convolution (grid backend, m = 1)
# ---------------------------------------------------------------------------

def joint_eigenfunction_convolve(G: HTypeGroup, f: GroupGridFunction, k: int, a) -> GroupGridFunction:
    """f * e^a_k = exp(-i<a,t>) (f^a twisted-conv phi_k^{|a|})(z) on the lattice.

    Implemented for tensor-grid functions with m = 1 and n = 1 (the
    reference configuration); the twist sign follows the sign of a.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if G.m != 1 or G.n != 1:
        raise ShapeMismatch("grid-backend joint convolution is provided for n = m = 1")
    if a.shape != (1,) or a[0] == 0.0:
        raise ValueError("central frequency a must be a nonzero scalar")
    fa = f.central_transform(a)
    X, Y = np.meshgrid(fa.x, fa.x, indexing="ij")
    phik = fa.like(phi_radial(k, 1, abs(a[0]), np.sqrt(X**2 + Y**2)).astype(complex))
    conv = twisted_convolution(fa, phik, float(a[0]))
    t = f.t_axis
    vals = conv.values[:, :, None] * np.exp(-1j * a[0] * t)[None, None, :]
    return f.like(vals)


# ---------------------------------------------------------------------------
# projector terms and results
# ---------------------------------------------------------------------------

@dataclass
class RadialTerm:
    k: int
    lam: float
    prefactor: float
    nodes: np.ndarray  # (M, m)
    node_weights: np.ndarray  # (M,)
    coeffs: np.ndarray  # (M,) complex, gamma_{k,q}
    n: int

    def synth(self, r_z: np.ndarray, t_points: np.ndarray) -> np.ndarray:
        """Samples on (len(r_z), len(t_points)); t_points has shape (P, m)."""
        phase = np.exp(-1j * self.lam * (t_points @ self.nodes.T))  # (P, M)
        tpart = phase @ (self.node_weights * self.coeffs)  # (P,)
        zpart = phi_radial(self.k, self.n, self.lam, r_z)
        return self.prefactor * np.outer(zpart, tpart)

    def strength(self) -> float:
        """Surrogate norm: prefactor x sphere mass x L2 size of the z-part."""
        from .laguerre import phi_sq_norm

        mass = float(np.sum(self.node_weights * np.abs(self.coeffs)))
        return self.prefactor * mass * np.sqrt(phi_sq_norm(self.k, self.n, self.lam))


@dataclass
class GridTerm:
    k: int
    lam: float
    prefactor: float
    nodes: np.ndarray
    node_weights: np.ndarray
    convs: list  # GridFunction2D per node
    strength_value: float

    def synth_grid(self, t_axis: np.ndarray) -> np.ndarray:
        acc = None
        for q, conv in enumerate(self.convs):
            a = self.lam * self.nodes[q, 0]
            contrib = conv.values[:, :, None] * np.exp(-1j * a * t_axis)[None, None, :]
            contrib = contrib * self.node_weights[q]
            acc = contrib if acc is None else acc + contrib
        return self.prefactor * acc

    def strength(self) -> float:
        return self.strength_value


@dataclass
class ProjectionResult:
    """Spectral-projector output: branch terms plus convergence diagnostics."""

    mu: float
    terms: list
    k_used: int
    k_tail_estimate: float
    sphere_residual: float
    sphere_nodes: int
    n: int
    m: int
    diagnostics: dict = field(default_factory=dict)

    def evaluate_radial(self, r_z: np.ndarray, t_points: np.ndarray) -> np.ndarray:
        t_points = np.asarray(t_points, dtype=float)
        if t_points.ndim == 1:
            if self.m != 1:
                raise ShapeMismatch("t points must have shape (P, m)")
            t_points = t_points.reshape(-1, 1)
        r_z = np.asarray(r_z, dtype=float)
        if not self.terms:
            return np.zeros((len(r_z), len(t_points)), dtype=complex)
        from .laguerre import phi_radial_diag

        ks = np.array([t.k for t in self.terms])
        lams = np.array([t.lam for t in self.terms])
        prefs = np.array([t.prefactor for t in self.terms])
        Z = phi_radial_diag(ks, self.n, lams, r_z) * prefs[:, None]  # (K, R)
        dots = t_points @ self.terms[0].nodes.T  # (P, M), shared node set
        wgam = np.stack([t.node_weights * t.coeffs for t in self.terms])  # (K, M)
        T = np.exp(-1j * lams[:, None, None] * dots[None, :, :])  # (K, P, M)
        tpart = np.einsum("kpm,km->kp", T, wgam)
        return Z.T @ tpart

    def evaluate_grid(self, t_axis: np.ndarray) -> np.ndarray:
        acc = None
        for term in self.terms:
            contrib = term.synth_grid(t_axis)
            acc = contrib if acc is None else acc + contrib
        return acc


def _diag_coeffs_block(u, lams: np.ndarray, ks: np.ndarray, n: int) -> np.ndarray:
    """Laguerre coefficient of degree ks[i] of u at scale lams[i], for all i.

    One degree-recurrence sweep over a (block, nodes) matrix; row i is read
    off when the recurrence reaches degree ks[i].
    """
    from .plane import _leggauss

    lams = np.asarray(lams, dtype=float)
    ks = np.asarray(ks, dtype=int)
    kmax = int(ks.max())
    rates = u.decay_rate + lams / 4.0
    s_max = 42.0 / rates
    x_max = float(np.max(lams * s_max / 2.0))
    n_nodes = int(max(192, 3.2 * np.sqrt(max(kmax, 1) * x_max) * 2 / np.pi + 80))
    n_nodes = -(-n_nodes // 32) * 32
    x, w = _leggauss(n_nodes)
    S = 0.5 * np.outer(s_max, x + 1.0)  # (B, N)
    W = (0.25 * sphere_area(2 * n)) * s_max[:, None] * w[None, :] * S ** (n - 1)
    WU = W * u(np.sqrt(S))
    X = 0.5 * lams[:, None] * S
    E = np.exp(-0.5 * X)
    a = n - 1
    inner = np.empty(len(ks), dtype=complex)
    prev = E
    sel = ks == 0
    if np.any(sel):
        inner[sel] = np.sum(WU[sel] * prev[sel], axis=1)
    cur = (1.0 + a - X) * E
    sel = ks == 1
    if np.any(sel):
        inner[sel] = np.sum(WU[sel] * cur[sel], axis=1)
    for j in range(1, kmax):
        prev, cur = cur, ((2 * j + 1 + a - X) * cur - (j + a) * prev) / (j + 1)
        sel = ks == j + 1
        if np.any(sel):
            inner[sel] = np.sum(WU[sel] * cur[sel], axis=1)
    norms = np.ones(len(ks))
    for jj in range(1, n):
        norms *= (ks + jj) / jj
    norms = (2.0 * np.pi / lams) ** n * norms
    return inner / norms


def _radial_terms(profile, f, mu, n, m, nodes, weights, k_cap, k_min=8):
    pref_const = (2 * np.pi) ** -(n + m)
    parts = f.radial_parts_fixed() if hasattr(f, "radial_parts_fixed") else None
    terms = []
    strengths = []
    small_run = 0
    stop = False
    k0 = 0
    chunk = 24
    while not stop and k0 <= k_cap:
        k1 = min(k0 + chunk, k_cap + 1)
        ks = np.arange(k0, k1)
        lams, dlams = lambda_solve(profile, ks, n, mu)
        prefs = pref_const * lams ** (n + m - 1) * np.abs(dlams)
        gam = np.zeros((len(ks), len(nodes)), dtype=complex)
        if parts is not None:
            for u_part, weight_fn in parts:
                diag = _diag_coeffs_block(u_part, lams, ks, n)
                gam += ((2 * np.pi / lams) ** n * diag)[:, None] * weight_fn(lams, nodes)
        else:
            for i, k in enumerate(ks):
                for u_part, wts in f.central_radial_parts(float(lams[i]), nodes):
                    coef = u_part.laguerre_coeffs(float(lams[i]), int(k))[int(k)]
                    gam[i] += (2 * np.pi / lams[i]) ** n * coef * wts
        for i, k in enumerate(ks):
            term = RadialTerm(int(k), float(lams[i]), float(prefs[i]),
                              nodes, weights, gam[i], n)
            terms.append(term)
            strengths.append(term.strength())
            total = float(np.sum(strengths))
            if total == 0.0 or strengths[-1] < K_STOP_REL * total:
                small_run += 1
                if small_run >= K_STOP_RUN and k >= k_min:
                    stop = True
                    break
            else:
                small_run = 0
        k0 = k1
        chunk *= 2
    strengths = np.array(strengths)
    tail = _tail_estimate(strengths)
    return terms, tail


def _tail_estimate(strengths: np.ndarray) -> float:
    if len(strengths) < 2 or strengths[-1] == 0.0:
        return 0.0
    ratio = min(strengths[-1] / max(strengths[-2], 1e-300), 0.9)
    return 4.0 * strengths[-1] * ratio / (1.0 - ratio)


def restriction_apply(G: HTypeGroup, profile: SpectralProfile, f, mu: float,
                      k_cap: int = K_HARD_CAP, sphere_level: int = 0,
                      diagnostics: bool = True) -> ProjectionResult:
    """Spectral projector of f at mu for the profile's calculus.

    Branch terms are added until three consecutive contributions fall below
    1e-12 of the running total (hard cap k_cap). When ``diagnostics`` is
    set, the sphere rule is doubled once and the relative change of the
    node-weighted coefficients is reported as the quadrature residual.
    """
    n, m = G.n, G.m
    if not profile.contains(mu):
        A, B = profile.domain
        raise DomainError(f"mu={mu} outside the spectrum ({A}, {B})")
    nodes, weights = sphere_rule(m, sphere_level)

    if isinstance(f, GroupGridFunction):
        return _restriction_grid(G, profile, f, mu, k_cap, nodes, weights)

    terms, tail = _radial_terms(profile, f, mu, n, m, nodes, weights, k_cap)
    sphere_residual = 0.0
    if diagnostics and m >= 2:
        nodes2, weights2 = sphere_rule(m, sphere_level + 1)
        terms2, _ = _radial_terms(profile, f, mu, n, m, nodes2, weights2,
                                  k_cap=len(terms) - 1)
        num = den = 0.0
        for t1, t2 in zip(terms, terms2):
            s1 = np.sum(t1.node_weights * t1.coeffs)
            s2 = np.sum(t2.node_weights * t2.coeffs)
            num += abs(s1 - s2) * t1.prefactor
            den += abs(s2) * t1.prefactor
        sphere_residual = num / den if den > 0 else 0.0
    return ProjectionResult(
        mu=mu, terms=terms, k_used=len(terms) - 1, k_tail_estimate=tail,
        sphere_residual=sphere_residual, sphere_nodes=len(nodes), n=n, m=m,
    )


def _restriction_grid(G, profile, f, mu, k_cap, nodes, weights):
    n, m = G.n, G.m
    if m != 1 or n != 1:
        raise ShapeMismatch("grid-backend projection is provided for n = m = 1")
    pref_const = (2 * np.pi) ** -(n + m)
    terms = []
    strengths = []
    small_run = 0
    k = 0
    while k <= k_cap:
        lam, dlam = lambda_solve(profile, k, n, mu)
        pref = pref_const * lam ** (n + m - 1) * abs(dlam)
        convs = []
        strength = 0.0
        for q in range(len(nodes)):
            a = lam * nodes[q, 0]
            fa = f.central_transform(np.array([a]))
            X, Y = np.meshgrid(fa.x, fa.x, indexing="ij")
            phik = fa.like(phi_radial(k, 1, lam, np.sqrt(X**2 + Y**2)).astype(complex))
            conv = twisted_convolution(fa, phik, a)
            convs.append(conv)
            strength += weights[q] * conv.l2_norm()
        term = GridTerm(k, lam, pref, nodes, weights, convs, pref * strength)
        terms.append(term)
        strengths.append(term.strength())
        total = float(np.sum(strengths))
        if total == 0.0 or strengths[-1] < K_STOP_REL * total:
            small_run += 1
            if small_run >= K_STOP_RUN and k >= 8:
                break
        else:
            small_run = 0
        k += 1
    return ProjectionResult(
        mu=mu, terms=terms, k_used=len(terms) - 1,
        k_tail_estimate=_tail_estimate(np.array(strengths)),
        sphere_residual=0.0, sphere_nodes=len(nodes), n=n, m=m,
    )


# ---------------------------------------------------------------------------
# bounded functional calculus
# ---------------------------------------------------------------------------

@dataclass
class OutputLattice:
    """Evaluation lattice: radial z nodes with volume weights, and central
    points (P, m) with quadrature weights."""

    r_z: np.ndarray
    w_z: np.ndarray
    t_points: np.ndarray
    w_t: np.ndarray

    def norm_l2(self, samples: np.ndarray) -> float:
        return float(np.sqrt(np.sum(self.w_z[:, None] * self.w_t[None, :]
                                    * np.abs(samples) ** 2)))

    def norm_lp(self, samples: np.ndarray, p: float) -> float:
        return float(np.sum(self.w_z[:, None] * self.w_t[None, :]
                            * np.abs(samples) ** p) ** (1.0 / p))


def radial_z_lattice(n: int, r_max: float = 12.0, count: int = 160):
    """Gauss-Legendre radial nodes with R^{2n} volume weights."""
    x, w = np.polynomial.legendre.leggauss(count)
    r = 0.5 * r_max * (x + 1.0)
    wr = 0.5 * r_max * w * sphere_area(2 * n) * r ** (2 * n - 1)
    return r, wr


def lattice_for_separable(f: SeparableFunction, r_max: float = 12.0,
                          z_count: int = 160) -> OutputLattice:
    r, wr = radial_z_lattice(f.n, r_max, z_count)
    t = f.t_axis
    return OutputLattice(r, wr, t.reshape(-1, 1), np.full(len(t), f.t_step))


def simpson_log_weights(lo: float, hi: float, per_decade: int = 8):
    """Composite-Simpson nodes/weights for integrals d(mu) on [lo, hi],
    applied in log(mu)."""
    decades = np.log10(hi / lo)
    segments = max(int(np.ceil(per_decade * decades / 2.0)), 2)
    count = 2 * segments + 1
    u = np.linspace(np.log(lo), np.log(hi), count)
    h = u[1] - u[0]
    w = np.ones(count)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w *= h / 3.0
    mu = np.exp(u)
    return mu, w * mu  # d(mu) = mu d(log mu)


def calculus_window(G: HTypeGroup, profile: SpectralProfile, f,
                    rel_floor: float = 1e-10, probe_per_decade: int = 3) -> tuple[float, float]:
    """Locate the mu-window where the projector magnitude exceeds rel_floor
    of its peak, by probing a coarse log grid with term-strength surrogates."""
    A, B = profile.domain
    lo = max(A, 1e-8) * (1 + 1e-9)
    hi = min(B, 1e6) * (1 - 1e-9) if np.isfinite(B) else 1e6
    grid = np.logspace(np.log10(lo), np.log10(hi),
                       int(np.log10(hi / lo) * probe_per_decade) + 2)
    nodes, weights = sphere_rule(G.m, 0)
    vals = []
    for mu in grid:
        terms, _ = _radial_terms(profile, f, float(mu), G.n, G.m, nodes, weights, 60)
        vals.append(sum(t.strength() for t in terms))
    vals = np.array(vals)
    peak = vals.max()
    live = np.where(vals > rel_floor * peak)[0]
    i0, i1 = max(live[0] - 1, 0), min(live[-1] + 1, len(grid) - 1)
    return float(grid[i0]), float(grid[i1])


@dataclass
class CalculusResult:
    samples: np.ndarray
    lattice: OutputLattice
    mu_nodes: np.ndarray
    diagnostics: dict


def calculus_apply(G: HTypeGroup, profile: SpectralProfile, H, f,
                   lattice: OutputLattice, mu_window: tuple[float, float] | None = None,
                   per_decade: int = 8, k_cap: int = K_HARD_CAP,
                   sphere_level: int = 0) -> CalculusResult:
    """Evaluate int H(mu) P_mu f d(mu) on the lattice by log-Simpson
    quadrature over the located (or supplied) spectral window."""
    if mu_window is None:
        mu_window = calculus_window(G, profile, f)
    mu_nodes, mu_weights = simpson_log_weights(mu_window[0], mu_window[1], per_decade)
    out = np.zeros((len(lattice.r_z), len(lattice.t_points)), dtype=complex)
    per_node_norm = []
    for mu, w in zip(mu_nodes, mu_weights):
        h_val = H(mu) if callable(H) else float(H)
        if h_val == 0.0:
            per_node_norm.append(0.0)
            continue
        proj = restriction_apply(G, profile, f, float(mu), k_cap=k_cap,
                                 sphere_level=sphere_level, diagnostics=False)
        samples = proj.evaluate_radial(lattice.r_z, lattice.t_points)
        out += w * h_val * samples
        per_node_norm.append(lattice.norm_l2(samples))
    return CalculusResult(
        samples=out, lattice=lattice, mu_nodes=mu_nodes,
        diagnostics={"mu_window": mu_window, "node_count": len(mu_nodes),
                     "per_node_norm": np.array(per_node_norm)},
    )
