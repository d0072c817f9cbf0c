"""Exterior powers of E^n_s with the induced indefinite inner product.

Grade-k multivectors are stored densely over the lexicographically ordered
blade basis ``e_{i1} ^ ... ^ e_{ik}`` with ``i1 < ... < ik`` (0-based indices).
The inner product of two decomposables is the determinant of the matrix of
pairwise inner products; on the blade basis it is diagonal, the sign of a blade
being the product of the signs of its factors.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .algebra import AmbientVector, Signature
from .errors import GradeError, SignatureMismatch


def grade_dimension(ambient_dim: int, k: int) -> int:
    if not 0 <= k <= ambient_dim:
        raise GradeError(f"grade {k} out of range for ambient dimension {ambient_dim}")
    return math.comb(ambient_dim, k)


@lru_cache(maxsize=None)
def blades(ambient_dim: int, k: int) -> tuple[tuple[int, ...], ...]:
    grade_dimension(ambient_dim, k)
    return tuple(itertools.combinations(range(ambient_dim), k))


@lru_cache(maxsize=None)
def _rank_table(ambient_dim: int, k: int) -> dict:
    return {b: r for r, b in enumerate(blades(ambient_dim, k))}


def blade_rank(indices, ambient_dim: int) -> int:
    """Lexicographic rank of a strictly increasing index tuple."""
    idx = tuple(indices)
    if any(a >= b for a, b in zip(idx, idx[1:])):
        raise ValueError(f"blade indices must be strictly increasing: {idx}")
    try:
        return _rank_table(ambient_dim, len(idx))[idx]
    except KeyError:
        raise GradeError(f"blade {idx} out of range for dimension {ambient_dim}") from None


def permutation_parity(seq) -> int:
    """+1 for an even permutation of distinct items, -1 for odd (inversion count)."""
    seq = list(seq)
    inv = sum(1 for a in range(len(seq)) for b in range(a + 1, len(seq)) if seq[a] > seq[b])
    return -1 if inv % 2 else 1


@lru_cache(maxsize=None)
def _blade_signs(sig: Signature, k: int) -> np.ndarray:
    s = np.array([np.prod(sig.signs[list(b)]) for b in blades(sig.dimension, k)])
    s.flags.writeable = False
    return s


def blade_signs(sig: Signature, k: int) -> np.ndarray:
    """Self inner products (+1/-1) of the orthonormal blade basis."""
    return _blade_signs(sig, k)


def wedge_index(sig: Signature, k: int) -> int:
    """Index q of the exterior power viewed as E^N_q."""
    return int(np.sum(blade_signs(sig, k) < 0))


@dataclass(frozen=True, eq=False)
class MultiVector:
    grade: int
    coeffs: np.ndarray
    signature: Signature = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        n = grade_dimension(self.signature.dimension, self.grade)
        if c.shape != (n,):
            raise ValueError(f"grade-{self.grade} multivector needs {n} coefficients, got {c.shape}")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls, sig: Signature, k: int) -> "MultiVector":
        return cls(k, np.zeros(grade_dimension(sig.dimension, k)), sig)

    @classmethod
    def blade(cls, sig: Signature, indices, coeff: float = 1.0) -> "MultiVector":
        """``coeff * e_{i1} ^ ... ^ e_{ik}`` for arbitrary distinct indices."""
        idx = list(indices)
        if len(set(idx)) != len(idx):
            return cls.zero(sig, len(idx))
        mv = cls.zero(sig, len(idx))
        c = np.array(mv.coeffs)
        c[blade_rank(sorted(idx), sig.dimension)] = coeff * permutation_parity(idx)
        return cls(len(idx), c, sig)

    @classmethod
    def from_vector(cls, v: AmbientVector) -> "MultiVector":
        return cls(1, v.coords, v.signature)

    def _check(self, other):
        if other.signature != self.signature:
            raise SignatureMismatch(f"{self.signature} vs {other.signature}")
        if other.grade != self.grade:
            raise GradeError(f"grade {self.grade} vs {other.grade}")

    def __add__(self, other):
        self._check(other)
        return MultiVector(self.grade, self.coeffs + other.coeffs, self.signature)

    def __sub__(self, other):
        self._check(other)
        return MultiVector(self.grade, self.coeffs - other.coeffs, self.signature)

    def __mul__(self, k):
        return MultiVector(self.grade, self.coeffs * float(k), self.signature)

    __rmul__ = __mul__

    def __neg__(self):
        return MultiVector(self.grade, -self.coeffs, self.signature)

    def __xor__(self, other):
        return wedge(self, other)

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0


def wedge(a: MultiVector, b: MultiVector) -> MultiVector:
    if a.signature != b.signature:
        raise SignatureMismatch(f"{a.signature} vs {b.signature}")
    n = a.signature.dimension
    k = a.grade + b.grade
    if k > n:
        raise GradeError(f"grade {a.grade} + {b.grade} exceeds ambient dimension {n}")
    out = np.zeros(grade_dimension(n, k))
    rank = _rank_table(n, k)
    for i, bi in enumerate(blades(n, a.grade)):
        ca = a.coeffs[i]
        if ca == 0.0:
            continue
        for j, bj in enumerate(blades(n, b.grade)):
            cb = b.coeffs[j]
            if cb == 0.0 or set(bi) & set(bj):
                continue
            merged = bi + bj
            out[rank[tuple(sorted(merged))]] += permutation_parity(merged) * ca * cb
    return MultiVector(k, out, a.signature)


def wedge_inner(a: MultiVector, b: MultiVector) -> float:
    a._check(b)
    return float(np.sum(a.coeffs * b.coeffs * blade_signs(a.signature, a.grade)))


def decomposable_from_vectors(vs) -> MultiVector:
    vs = list(vs)
    if not vs:
        raise GradeError("need at least one vector")
    out = MultiVector.from_vector(vs[0])
    for v in vs[1:]:
        out = wedge(out, MultiVector.from_vector(v))
    return out


@lru_cache(maxsize=None)
def _minor_plan(ambient_dim: int, k: int):
    cols = np.array(blades(ambient_dim, k), dtype=int).reshape(-1, k)
    perms = [(p, permutation_parity(p)) for p in itertools.permutations(range(k))]
    return cols, perms


def wedge_coefficients(vectors, ambient_dim: int):
    """Blade coefficients of ``v_1 ^ ... ^ v_k`` by Leibniz expansion of minors.

    Works for anything indexable as ``v[..., idx]`` that supports ``*``, ``+``
    and ``-``: plain arrays of shape (..., n) or jets with the same leading
    shape. Returns an object of shape (..., C(n, k)). Permutations are summed
    in a fixed order.
    """
    k = len(vectors)
    cols, perms = _minor_plan(ambient_dim, k)
    total = None
    for p, sgn in perms:
        term = vectors[0][..., cols[:, p[0]]]
        for r in range(1, k):
            term = term * vectors[r][..., cols[:, p[r]]]
        if total is None:
            total = term if sgn > 0 else -term
        elif sgn > 0:
            total = total + term
        else:
            total = total - term
    return total
