"""Construction and validation of H-type group structures.

A group is encoded by dimensions (n, m) together with m skew-symmetric
orthogonal, pairwise anticommuting matrices U^j of size 2n x 2n. The group
law on R^{2n} x R^m is

    (z, t) (z', t') = (z + z', t + t' + bracket(z, z') / 2),
    bracket(z, z')_j = <z, U^j z'>.

Matrices are built from iterated Kronecker products of the 2x2 blocks

    I = [[1,0],[0,1]], J = [[0,-1],[1,0]], K = [[1,0],[0,-1]], L = [[0,1],[1,0]]

found by a deterministic backtracking search, with U^1 pinned to the block
form [[0,-I_n],[I_n,0]] so that <z, U^1 z'> = sum_j (x'_j y_j - y'_j x_j).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import ShapeMismatch, UnsupportedDimensionPair

CONDITION_TOL = 1e-12

_BLOCKS = {
    "I": np.eye(2),
    "J": np.array([[0.0, -1.0], [1.0, 0.0]]),
    "K": np.array([[1.0, 0.0], [0.0, -1.0]]),
    "L": np.array([[0.0, 1.0], [1.0, 0.0]]),
}


@dataclass
class HTypeGroup:
    """Dimensions (n, m) plus the m bracket matrices U^j, each 2n x 2n."""

    n: int
    m: int
    U: np.ndarray  # shape (m, 2n, 2n)

    def __post_init__(self):
        self.U = np.asarray(self.U, dtype=float)
        if self.U.shape != (self.m, 2 * self.n, 2 * self.n):
            raise ShapeMismatch(
                f"U must have shape {(self.m, 2*self.n, 2*self.n)}, got {self.U.shape}"
            )

    @property
    def dim_z(self) -> int:
        return 2 * self.n

    def bracket(self, z, zp) -> np.ndarray:
        """[z, z'] in R^m, componentwise <z, U^j z'>."""
        z = np.asarray(z, dtype=float)
        zp = np.asarray(zp, dtype=float)
        if z.shape[-1] != self.dim_z or zp.shape[-1] != self.dim_z:
            raise ShapeMismatch("point z-parts must have length 2n")
        return np.einsum("...i,jik,...k->...j", z, self.U, zp)

    def bracket_matrix(self, a) -> np.ndarray:
        """sum_j a_j U^j; orthogonal (up to |a|) exactly when the group is H-type."""
        a = np.asarray(a, dtype=float)
        if a.shape != (self.m,):
            raise ShapeMismatch(f"central vector must have length m={self.m}")
        return np.tensordot(a, self.U, axes=(0, 0))


@dataclass
class GroupPoint:
    """Point (z, t) of the group, z in R^{2n} and t in R^m."""

    z: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float)
        self.t = np.asarray(self.t, dtype=float)


@dataclass
class ConditionReport:
    """Max absolute violation per structural condition."""

    skewness: float
    orthogonality: float
    anticommutation: float
    u1_form: float
    tol: float = CONDITION_TOL
    extras: dict = field(default_factory=dict)

    @property
    def max_violation(self) -> float:
        return max(self.skewness, self.orthogonality, self.anticommutation, self.u1_form)

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol

    def as_dict(self) -> dict:
        return {
            "skewness": self.skewness,
            "orthogonality": self.orthogonality,
            "anticommutation": self.anticommutation,
            "u1_form": self.u1_form,
            "tol": self.tol,
            "passed": self.passed,
        }


def _word_matrix(word: str) -> np.ndarray:
    M = _BLOCKS[word[0]]
    for ch in word[1:]:
        M = np.kron(M, _BLOCKS[ch])
    return M


def _anticommutes(word1: str, word2: str) -> bool:
    # letters J, K, L pairwise anticommute; I commutes; equal letters commute
    odd = 0
    for c1, c2 in zip(word1, word2):
        if c1 != "I" and c2 != "I" and c1 != c2:
            odd ^= 1
    return odd == 1


def _search_words(q: int, m: int) -> list[str] | None:
    """m pairwise-anticommuting skew words of length q, first = J I..I."""
    words = ["".join(w) for w in product("IJKL", repeat=q)]
    skew = [w for w in words if w.count("J") % 2 == 1]
    first = "J" + "I" * (q - 1)
    chosen = [first]
    candidates = [w for w in skew if w != first]

    def backtrack(start: int) -> bool:
        if len(chosen) == m:
            return True
        for i in range(start, len(candidates)):
            w = candidates[i]
            if all(_anticommutes(w, c) for c in chosen):
                chosen.append(w)
                if backtrack(i + 1):
                    return True
                chosen.pop()
        return False

    if m == 1 or backtrack(0):
        return chosen[:m]
    return None


def build_htype_group(m: int, n: int) -> HTypeGroup:
    """Construct an H-type group structure for center dimension m.

    Supported whenever the tensor-word search finds m pairwise-anticommuting
    skew-orthogonal matrices in the largest power-of-two factor of 2n
    (covers m in {1,2,3} for n a multiple of 1, 2, 2 and m=7 for n a
    multiple of 4). Raises UnsupportedDimensionPair otherwise.
    """
    if m < 1 or n < 1:
        raise UnsupportedDimensionPair(f"need m >= 1 and n >= 1, got (m, n)=({m}, {n})")
    if m + 1 > 2 * n:
        raise UnsupportedDimensionPair(
            f"center dimension m={m} needs m+1 <= 2n, got 2n={2*n}"
        )
    dim = 2 * n
    q = 0
    rem = dim
    while rem % 2 == 0:
        rem //= 2
        q += 1
    words = _search_words(q, m)
    if words is None:
        raise UnsupportedDimensionPair(
            f"no anticommuting skew-orthogonal system found for (m, n)=({m}, {n})"
        )
    mats = [_word_matrix(w) for w in words]
    if rem > 1:
        mats = [np.kron(M, np.eye(rem)) for M in mats]
    if m == 1:
        warnings.warn(
            "center dimension m=1: restriction-constant estimates require m > 1",
            stacklevel=2,
        )
    return HTypeGroup(n=n, m=m, U=np.stack(mats))


def verify_htype_conditions(G: HTypeGroup) -> ConditionReport:
    """Maximum violation of skewness, orthogonality, anticommutation, and of
    the canonical spectrum of U^1 (eigenvalues +-i, n each)."""
    U = G.U
    if U.shape != (G.m, 2 * G.n, 2 * G.n):
        raise ShapeMismatch(f"expected U of shape {(G.m, 2*G.n, 2*G.n)}")
    eye = np.eye(2 * G.n)
    skew = max(np.max(np.abs(Uj.T + Uj)) for Uj in U)
    orth = max(np.max(np.abs(Uj.T @ Uj - eye)) for Uj in U)
    anti = 0.0
    for i in range(G.m):
        for j in range(i + 1, G.m):
            anti = max(anti, np.max(np.abs(U[i] @ U[j] + U[j] @ U[i])))
    # Remark-form of U^1 up to orthogonal basis change: spectrum must be +-i
    ev = np.linalg.eigvals(U[0])
    u1_form = float(np.max(np.abs(ev**2 + 1.0)))
    return ConditionReport(
        skewness=float(skew),
        orthogonality=float(orth),
        anticommutation=float(anti),
        u1_form=u1_form,
    )


def group_multiply(G: HTypeGroup, g1: GroupPoint, g2: GroupPoint) -> GroupPoint:
    """Product under (z,t)(z',t') = (z+z', t+t'+[z,z']/2)."""
    if g1.z.shape != (G.dim_z,) or g2.z.shape != (G.dim_z,):
        raise ShapeMismatch("z-parts must have length 2n")
    if g1.t.shape != (G.m,) or g2.t.shape != (G.m,):
        raise ShapeMismatch("t-parts must have length m")
    z = g1.z + g2.z
    t = g1.t + g2.t + 0.5 * G.bracket(g1.z, g2.z)
    return GroupPoint(z=z, t=t)


def group_inverse(G: HTypeGroup, g: GroupPoint) -> GroupPoint:
    return GroupPoint(z=-g.z, t=-g.t)


def group_to_json(G: HTypeGroup) -> str:
    """Descriptor {n, m, U} with 17-significant-digit floats (exact round-trip)."""
    payload = {
        "n": G.n,
        "m": G.m,
        "U": [[format(x, ".17g") for x in Uj.ravel()] for Uj in G.U],
    }
    return json.dumps(payload, indent=2)


def group_from_json(text: str) -> HTypeGroup:
    payload = json.loads(text)
    n, m = int(payload["n"]), int(payload["m"])
    U = np.array(
        [[float(x) for x in row] for row in payload["U"]], dtype=float
    ).reshape(m, 2 * n, 2 * n)
    return HTypeGroup(n=n, m=m, U=U)
