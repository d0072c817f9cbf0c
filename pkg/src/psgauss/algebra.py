"""Pseudo-Euclidean space E^n_s: vectors, inner product, causal character and
indefinite Gram-Schmidt with pivoting.

Coordinates are laid out spacelike first, timelike last, so that

    <x, y> = x_1 y_1 + ... + x_{n-s} y_{n-s} - x_{n-s+1} y_{n-s+1} - ... - x_n y_n.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DegenerateSpan, SignatureMismatch

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class Signature:
    """Ambient dimension and index of E^dimension_index."""

    dimension: int
    index: int = 0

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError(f"dimension must be positive, got {self.dimension}")
        if not 0 <= self.index <= self.dimension:
            raise ValueError(f"index must lie in [0, {self.dimension}], got {self.index}")

    @cached_property
    def signs(self) -> np.ndarray:
        s = np.ones(self.dimension)
        s[self.dimension - self.index:] = -1.0
        s.flags.writeable = False
        return s

    def basis(self, i: int) -> "AmbientVector":
        e = np.zeros(self.dimension)
        e[i] = 1.0
        return AmbientVector(e, self)

    def __str__(self):
        return f"E^{self.dimension}_{self.index}"


@dataclass(frozen=True, eq=False)
class AmbientVector:
    coords: np.ndarray
    signature: Signature = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        if c.shape != (self.signature.dimension,):
            raise ValueError(
                f"expected {self.signature.dimension} coordinates, got shape {c.shape}"
            )
        c.flags.writeable = False
        object.__setattr__(self, "coords", c)

    def _check(self, other):
        if other.signature != self.signature:
            raise SignatureMismatch(f"{self.signature} vs {other.signature}")

    def __add__(self, other):
        self._check(other)
        return AmbientVector(self.coords + other.coords, self.signature)

    def __sub__(self, other):
        self._check(other)
        return AmbientVector(self.coords - other.coords, self.signature)

    def __mul__(self, k):
        return AmbientVector(self.coords * float(k), self.signature)

    __rmul__ = __mul__

    def __truediv__(self, k):
        return AmbientVector(self.coords / float(k), self.signature)

    def __neg__(self):
        return AmbientVector(-self.coords, self.signature)

    def __eq__(self, other):
        if not isinstance(other, AmbientVector):
            return NotImplemented
        return self.signature == other.signature and np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash((self.signature, self.coords.tobytes()))

    def norm_squared(self) -> float:
        return inner(self, self)


def vector(coords, index: int = 0) -> AmbientVector:
    """Shorthand: ``vector((0, 0, 0, 1), index=1)`` lives in E^4_1."""
    coords = np.asarray(coords, dtype=float)
    return AmbientVector(coords, Signature(len(coords), index))


def inner(u: AmbientVector, v: AmbientVector) -> float:
    if u.signature != v.signature:
        raise SignatureMismatch(f"{u.signature} vs {v.signature}")
    return float(np.dot(u.coords * u.signature.signs, v.coords))


class CausalClass(enum.Enum):
    SPACELIKE = "spacelike"
    TIMELIKE = "timelike"
    LIGHTLIKE = "lightlike"


def causal_character(v: AmbientVector, tol: float = DEFAULT_TOL) -> CausalClass:
    """Zero counts as spacelike; ``|<v,v>| <= tol`` for nonzero v is lightlike."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    q = inner(v, v)
    if q > tol or np.all(np.abs(v.coords) < tol):
        return CausalClass.SPACELIKE
    if q < -tol:
        return CausalClass.TIMELIKE
    return CausalClass.LIGHTLIKE


def _residual(w: np.ndarray, frame: list[np.ndarray], signs: list[float], metric: np.ndarray):
    for e, s in zip(frame, signs):
        w = w - s * np.dot(w * metric, e) * e
    return w


def _pick_pivot(cands, frame, signs, metric, threshold):
    """Return (pivot label, residual) maximising |<w,w>|.

    Single candidates are preferred; if every single residual is null, sums and
    differences of pairs are tried (a null pair can still span a non-degenerate
    plane).
    """
    res = {i: _residual(c, frame, signs, metric) for i, c in cands.items()}
    best, best_q = None, threshold
    for i, w in res.items():
        q = abs(np.dot(w * metric, w))
        if q > best_q:
            best, best_q = (i,), q
    if best is not None:
        return best, res[best[0]]
    keys = sorted(res)
    for a in range(len(keys)):
        for b in range(a + 1, len(keys)):
            for s in (1, -1):
                w = res[keys[a]] + s * res[keys[b]]
                q = abs(np.dot(w * metric, w))
                if q > best_q:
                    best, best_q = (keys[a], keys[b], s), q
    if best is None:
        raise DegenerateSpan("all candidate pivots are null within tolerance")
    i, j, s = best
    return best, res[i] + s * res[j]


def orthonormalize(vs, tol: float = DEFAULT_TOL):
    """Indefinite Gram-Schmidt with pivoting.

    At every step the remaining input whose component orthogonal to the frame
    built so far has the largest ``|<w,w>|`` is normalised and appended.

    Returns ``(frame, signs, pivots)``. Each pivot is ``(i,)`` for input ``i``
    or ``(i, j, s)`` when the pivot was the combination ``v_i + s v_j``.
    Raises :class:`DegenerateSpan` when the span is degenerate.
    """
    vs = list(vs)
    if not vs:
        return [], [], []
    sig = vs[0].signature
    for v in vs:
        if v.signature != sig:
            raise SignatureMismatch(f"{sig} vs {v.signature}")
    metric = sig.signs
    scale = max(float(np.max(np.abs(v.coords))) for v in vs)
    if scale == 0.0:
        raise DegenerateSpan("all input vectors vanish")
    threshold = tol * scale**2

    remaining = {i: v.coords for i, v in enumerate(vs)}
    frame, signs, pivots = [], [], []
    while remaining:
        # inputs already in the span have (near) zero residual
        res = {i: _residual(c, frame, signs, metric) for i, c in remaining.items()}
        if all(np.max(np.abs(w)) <= np.sqrt(tol) * scale for w in res.values()):
            break
        pivot, w = _pick_pivot(remaining, frame, signs, metric, threshold)
        q = float(np.dot(w * metric, w))
        s = 1.0 if q > 0 else -1.0
        frame.append(w / np.sqrt(abs(q)))
        signs.append(int(s))
        pivots.append(pivot)
        remaining.pop(pivot[0])
    return [AmbientVector(e, sig) for e in frame], signs, pivots


def complete_frame(partial, tol: float = DEFAULT_TOL):
    """Extend an orthonormal list to a basis of the whole ambient space.

    Standard basis vectors are orthonormalised against ``partial`` with the
    same pivot rule as :func:`orthonormalize`. Returns ``(frame, signs)``.
    """
    partial = list(partial)
    if not partial:
        raise ValueError("partial frame must be non-empty; use orthonormalize on the standard basis")
    sig = partial[0].signature
    metric = sig.signs
    frame = [p.coords for p in partial]
    signs = []
    for e in frame:
        q = float(np.dot(e * metric, e))
        if abs(abs(q) - 1.0) > 1e-8:
            raise ValueError(f"partial frame is not orthonormal (self inner product {q})")
        signs.append(1 if q > 0 else -1)
    for a in range(len(frame)):
        for b in range(a + 1, len(frame)):
            if abs(np.dot(frame[a] * metric, frame[b])) > 1e-8:
                raise ValueError("partial frame is not orthogonal")

    cands = {i: np.eye(sig.dimension)[i] for i in range(sig.dimension)}
    while len(frame) < sig.dimension:
        pivot, w = _pick_pivot(cands, frame, signs, metric, tol)
        q = float(np.dot(w * metric, w))
        frame.append(w / np.sqrt(abs(q)))
        signs.append(1 if q > 0 else -1)
        cands.pop(pivot[0])
    return [AmbientVector(e, sig) for e in frame], signs
