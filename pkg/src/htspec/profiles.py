"""Spectral profiles h(xi, eta) and the per-branch parameter solve.

For a profile h and branch index k, the equation h((2k+n)*lam, lam^2) = mu
has a unique positive solution lam_k(mu) whenever h is strictly monotone
along the branch; ``lambda_solve`` returns it together with the exact
derivative d lam_k / d mu from the implicit-function formula.

Families (parameters alpha, beta, gamma > 0):

    sum            xi^a + eta^b
    power          (xi^a + eta^b)^g
    inverse_power  (xi^a + eta^b)^(-g)
    resolvent      (1 + xi)^(-1)
    shifted        (1 + xi^a + eta^b)^(-g)
    xi             xi
    delta          xi + eta

All but resolvent/xi reduce to the monomial-sum core
c^a lam^a + lam^(2b) = v via a monotone change of variable v = v(mu);
closed forms are used for xi, delta, resolvent, and sum with a = 2b,
bracketed bisection plus safeguarded Newton otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoBracket

FAMILIES = ("sum", "power", "inverse_power", "resolvent", "shifted", "xi", "delta")
_INCREASING = {"sum": True, "power": True, "xi": True, "delta": True,
               "inverse_power": False, "resolvent": False, "shifted": False}


@dataclass(frozen=True)
class SpectralProfile:
    family: str
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if min(self.alpha, self.beta, self.gamma) <= 0:
            raise ValueError("profile parameters must be positive")

    # -- basic structure ------------------------------------------------
    @property
    def domain(self) -> tuple[float, float]:
        if self.family in ("resolvent", "shifted"):
            return (0.0, 1.0)
        return (0.0, np.inf)

    @property
    def increasing(self) -> bool:
        return _INCREASING[self.family]

    def contains(self, mu: float) -> bool:
        A, B = self.domain
        return A < mu < B

    def h(self, xi, eta):
        xi = np.asarray(xi, dtype=float)
        eta = np.asarray(eta, dtype=float)
        a, b, g = self.alpha, self.beta, self.gamma
        if self.family == "xi":
            return xi
        if self.family == "delta":
            return xi + eta
        if self.family == "resolvent":
            return 1.0 / (1.0 + xi)
        core = xi**a + eta**b
        if self.family == "sum":
            return core
        if self.family == "power":
            return core**g
        if self.family == "inverse_power":
            return core**-g
        return (1.0 + core) ** -g  # shifted

    def describe(self) -> str:
        a, b, g = self.alpha, self.beta, self.gamma
        return {
            "sum": f"sum:alpha={a:g},beta={b:g}",
            "power": f"power:alpha={a:g},beta={b:g},gamma={g:g}",
            "inverse_power": f"inverse_power:alpha={a:g},beta={b:g},gamma={g:g}",
            "resolvent": "resolvent",
            "shifted": f"shifted:alpha={a:g},beta={b:g},gamma={g:g}",
            "xi": "xi",
            "delta": "delta",
        }[self.family]

    # -- change of variable to the monomial-sum core --------------------
    def core_value(self, mu: float) -> tuple[float, float]:
        """(v, dv/dmu) with c^alpha lam^alpha + lam^(2 beta) = v."""
        g = self.gamma
        if self.family in ("sum", "delta"):
            return float(mu), 1.0
        if self.family == "power":
            v = mu ** (1.0 / g)
            return v, v / (g * mu)
        if self.family == "inverse_power":
            v = mu ** (-1.0 / g)
            return v, -v / (g * mu)
        if self.family == "shifted":
            v = np.expm1(-np.log(mu) / g)
            return float(v), -((v + 1.0) / (g * mu))
        raise ValueError(f"{self.family} has no monomial-sum core")


_PROFILE_SPEC_HELP = (
    "profile strings: 'sum:alpha=A,beta=B', 'power:alpha=A,beta=B,gamma=G', "
    "'inverse_power:alpha=A,beta=B,gamma=G', 'shifted:alpha=A,beta=B,gamma=G', "
    "'resolvent', 'xi', 'delta'"
)


def parse_profile(text: str) -> SpectralProfile:
    """Parse a profile descriptor string (strict)."""
    text = text.strip()
    head, _, rest = text.partition(":")
    head = head.strip()
    if head not in FAMILIES:
        raise ValueError(f"unknown profile family {head!r}; {_PROFILE_SPEC_HELP}")
    params = {}
    if rest:
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            key = key.strip()
            if not eq or key not in ("alpha", "beta", "gamma"):
                raise ValueError(f"bad profile parameter {item!r}; {_PROFILE_SPEC_HELP}")
            try:
                params[key] = float(val)
            except ValueError as exc:
                raise ValueError(f"bad numeric value in {item!r}") from exc
    if head in ("resolvent", "xi", "delta") and params:
        raise ValueError(f"family {head!r} takes no parameters")
    if head in ("sum",) and "gamma" in params:
        raise ValueError("sum family takes alpha and beta only")
    return SpectralProfile(family=head, **params)


# ---------------------------------------------------------------------------
# the monomial-sum solve
# ---------------------------------------------------------------------------

def solve_monomial_sum(c, alpha: float, beta: float, v: float):
    """lam with c^alpha lam^alpha + lam^(2 beta) = v, vectorized over c.

    Returns (lam, dlam_dv). Brackets come from the monomial envelopes
    (each term alone at v and at v/2); bisection narrows the bracket and
    safeguarded Newton polishes.
    """
    c = np.asarray(c, dtype=float)
    if v <= 0:
        raise DomainError(f"core value must be positive, got {v}")
    two_beta = 2.0 * beta
    ca = c**alpha
    hi = np.minimum((v / ca) ** (1.0 / alpha), v ** (1.0 / two_beta))
    lo = np.minimum((v / (2.0 * ca)) ** (1.0 / alpha), (v / 2.0) ** (1.0 / two_beta))
    if alpha == two_beta:
        lam = (v / (ca + 1.0)) ** (1.0 / alpha)
        dS = alpha * ca * lam ** (alpha - 1.0) + two_beta * lam ** (two_beta - 1.0)
        return lam, 1.0 / dS

    def S(lam):
        return ca * lam**alpha + lam**two_beta

    if np.any(S(lo) > v * (1 + 1e-12)) or np.any(S(hi) < v * (1 - 1e-12)):
        raise NoBracket("monomial envelopes failed to bracket the root")
    for _ in range(14):
        mid = 0.5 * (lo + hi)
        high = S(mid) >= v
        hi = np.where(high, mid, hi)
        lo = np.where(high, lo, mid)
    lam = 0.5 * (lo + hi)
    for _ in range(40):
        resid = S(lam) - v
        dS = alpha * ca * lam ** (alpha - 1.0) + two_beta * lam ** (two_beta - 1.0)
        step = resid / dS
        new = np.clip(lam - step, lo, hi)
        done = np.abs(resid) <= 1e-15 * v
        lam = np.where(done, lam, new)
        if np.all(np.abs(step) <= 1e-15 * np.abs(lam) + 1e-300) or np.all(done):
            break
    dS = alpha * ca * lam ** (alpha - 1.0) + two_beta * lam ** (two_beta - 1.0)
    return lam, 1.0 / dS


def lambda_solve(profile: SpectralProfile, k, n: int, mu: float):
    """Branch solutions lam_k(mu) and derivatives for k (scalar or array).

    Raises DomainError when mu is outside the profile's domain. The
    residual |h((2k+n) lam, lam^2) - mu| stays below 1e-12 * max(1, mu).
    """
    if not profile.contains(mu):
        A, B = profile.domain
        raise DomainError(f"mu={mu} outside the spectrum ({A}, {B})")
    k_arr = np.atleast_1d(np.asarray(k))
    if np.any(k_arr < 0) or not np.issubdtype(k_arr.dtype, np.integer):
        k_arr = k_arr.astype(float)
        if np.any(k_arr < 0) or np.any(k_arr != np.round(k_arr)):
            raise ValueError("branch indices must be non-negative integers")
    c = 2.0 * np.asarray(k_arr, dtype=float) + n
    scalar = np.ndim(k) == 0

    if profile.family == "xi":
        lam, dlam = mu / c, 1.0 / c
    elif profile.family == "delta":
        root = np.sqrt(4.0 * mu + c**2)
        lam = 2.0 * mu / (root + c)  # stable form of (root - c)/2
        dlam = 1.0 / root
    elif profile.family == "resolvent":
        lam = (1.0 - mu) / (mu * c)
        dlam = -1.0 / (mu**2 * c)
    else:
        v, dv = profile.core_value(mu)
        lam, dlam_dv = solve_monomial_sum(c, profile.alpha, profile.beta, v)
        dlam = dlam_dv * dv
    if scalar:
        return float(lam[0]), float(dlam[0])
    return lam, dlam
