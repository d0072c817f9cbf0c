"""Bivariate truncated Taylor jets (total order <= 3).

A :class:`Jet` stores the Taylor coefficients ``c_ab`` of ``u^a v^b`` (a+b <= 3)
of a scalar function about a base point, so that

    d^{a+b} f / du^a dv^b = a! b! c_ab.

Coefficient arrays have shape ``(*shape, 10)``: any leading shape broadcasts
like a numpy array, which lets a whole grid of base points (and the coordinate
axis of ambient vectors) be processed in one pass. Every reduction runs in a
fixed order, so results per base point do not depend on how a grid is batched.

``order`` records how many orders are trustworthy: differentiation lowers it by
one, arithmetic takes the minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import Signature
from .errors import JetDomainError, SignatureMismatch

MAX_ORDER = 3
MONOMIALS = tuple((a, d - a) for d in range(MAX_ORDER + 1) for a in range(d, -1, -1))
NCOEF = len(MONOMIALS)
INDEX = {m: i for i, m in enumerate(MONOMIALS)}
DEGREE = np.array([a + b for a, b in MONOMIALS])
FACTORIAL_WEIGHT = np.array([math.factorial(a) * math.factorial(b) for a, b in MONOMIALS], float)


def _product_plan():
    plan = []
    for k, (a, b) in enumerate(MONOMIALS):
        pairs = []
        for i, (a1, b1) in enumerate(MONOMIALS):
            j = INDEX.get((a - a1, b - b1))
            if j is not None:
                pairs.append((i, j))
        plan.append(pairs)
    return plan


_PLAN = _product_plan()
_PAIR_I = np.array([i for pairs in _PLAN for i, _ in pairs])
_PAIR_J = np.array([j for pairs in _PLAN for _, j in pairs])
_PAIR_SLICES = []
_pos = 0
for _pairs in _PLAN:
    _PAIR_SLICES.append(range(_pos, _pos + len(_pairs)))
    _pos += len(_pairs)

# d/du maps c_{a,b} -> a c_{a,b} at (a-1, b); d/dv analogously
_DIFF = []
for _axis in (0, 1):
    src, dst, fac = [], [], []
    for k, (a, b) in enumerate(MONOMIALS):
        p = (a, b)[_axis]
        if p == 0:
            continue
        target = (a - 1, b) if _axis == 0 else (a, b - 1)
        src.append(k)
        dst.append(INDEX[target])
        fac.append(float(p))
    _DIFF.append((np.array(src), np.array(dst), np.array(fac)))


def _coerce(x):
    if isinstance(x, Jet):
        return x
    return Jet.constant(x)


@dataclass(frozen=True, eq=False)
class Jet:
    c: np.ndarray
    order: int = MAX_ORDER

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        if c.shape[-1:] != (NCOEF,):
            raise ValueError(f"jet coefficients need trailing axis of length {NCOEF}")
        if self.order < MAX_ORDER:
            c = np.where(DEGREE <= self.order, c, 0.0)
        object.__setattr__(self, "c", c)

    # construction -------------------------------------------------------
    @classmethod
    def constant(cls, value, order: int = MAX_ORDER) -> "Jet":
        value = np.asarray(value, dtype=float)
        c = np.zeros(value.shape + (NCOEF,))
        c[..., 0] = value
        return cls(c, order)

    @classmethod
    def variable(cls, value, axis: int) -> "Jet":
        """Seed jet ``u0 + du`` (axis 0) or ``v0 + dv`` (axis 1)."""
        j = cls.constant(value)
        j.c[..., 1 + axis] = 1.0
        return j

    @classmethod
    def from_partials(cls, partials: dict, shape=()) -> "Jet":
        """Build from ``{(a, b): d^{a+b}f/du^a dv^b}``; missing entries are zero."""
        c = np.zeros(tuple(shape) + (NCOEF,))
        for (a, b), val in partials.items():
            k = INDEX[(a, b)]
            c[..., k] = np.asarray(val, float) / FACTORIAL_WEIGHT[k]
        return cls(c)

    @staticmethod
    def stack(jets, axis: int = -1) -> "Jet":
        """Stack along a new leading axis (``axis`` counts leading axes only)."""
        jets = [_coerce(j) for j in jets]
        order = min(j.order for j in jets)
        nd = np.broadcast_shapes(*[j.shape for j in jets])
        cs = [np.broadcast_to(j.c, nd + (NCOEF,)) for j in jets]
        ax = axis if axis >= 0 else len(nd) + 1 + axis
        return Jet(np.stack(cs, axis=ax), order)

    @staticmethod
    def where(mask, a: "Jet", b: "Jet") -> "Jet":
        a, b = _coerce(a), _coerce(b)
        m = np.asarray(mask)[..., None]
        return Jet(np.where(m, a.c, b.c), min(a.order, b.order))

    # shape handling -----------------------------------------------------
    @property
    def shape(self):
        return self.c.shape[:-1]

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        return Jet(self.c[key + (slice(None),)], self.order)

    def __len__(self):
        return self.shape[0]

    def expand(self, axis: int = -1) -> "Jet":
        """Insert a length-1 leading axis (for broadcasting)."""
        ax = axis if axis >= 0 else len(self.shape) + 1 + axis
        return Jet(np.expand_dims(self.c, ax), self.order)

    def sum_last(self) -> "Jet":
        """Sum over the last leading axis, sequentially in index order."""
        n = self.shape[-1]
        acc = self.c[..., 0, :].copy()
        for i in range(1, n):
            acc += self.c[..., i, :]
        return Jet(acc, self.order)

    # values -------------------------------------------------------------
    @property
    def value(self) -> np.ndarray:
        return self.c[..., 0]

    def partial(self, a: int, b: int) -> np.ndarray:
        return extract_partial(self, (a, b))

    def d(self, axis: int) -> "Jet":
        """Partial derivative along u (axis 0) or v (axis 1); loses one order."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        src, dst, fac = _DIFF[axis]
        c = np.zeros_like(self.c)
        c[..., dst] = self.c[..., src] * fac
        return Jet(c, self.order - 1)

    @property
    def du(self):
        return self.d(0)

    @property
    def dv(self):
        return self.d(1)

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        return Jet(self.c + other.c, min(self.order, other.order))

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        return Jet(self.c - other.c, min(self.order, other.order))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __neg__(self):
        return Jet(-self.c, self.order)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            k = np.asarray(other, dtype=float)
            return Jet(self.c * k[..., None], self.order)
        order = min(self.order, other.order)
        prods = self.c[..., _PAIR_I] * other.c[..., _PAIR_J]
        shape = prods.shape[:-1]
        out = np.zeros(shape + (NCOEF,))
        for k, sl in enumerate(_PAIR_SLICES):
            if DEGREE[k] > order:
                continue
            acc = prods[..., sl[0]].copy()
            for t in sl[1:]:
                acc += prods[..., t]
            out[..., k] = acc
        return Jet(out, order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            k = np.asarray(other, dtype=float)
            return Jet(self.c / k[..., None], self.order)
        return self * reciprocal(other)

    def __rtruediv__(self, other):
        return _coerce(other) * reciprocal(self)

    def __pow__(self, n):
        return pow_int(self, n)

    def __repr__(self):
        return f"Jet(shape={self.shape}, order={self.order})"


def extract_partial(a: Jet, order) -> np.ndarray:
    p, q = order
    if p < 0 or q < 0 or p + q > a.order:
        raise ValueError(f"partial of order {(p, q)} not available from an order-{a.order} jet")
    k = INDEX[(p, q)]
    return a.c[..., k] * FACTORIAL_WEIGHT[k]


def jet_arith(a, b, op: str) -> Jet:
    a, b = _coerce(a), _coerce(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def compose(a: Jet, f0, f1, f2, f3) -> Jet:
    """``f(a)`` given f and its first three derivatives at the constant term."""
    a0 = a.value
    delta = Jet(a.c.copy(), a.order)
    delta.c[..., 0] = 0.0
    d2 = delta * delta
    d3 = d2 * delta
    out = delta * f1 + d2 * (np.asarray(f2) / 2.0) + d3 * (np.asarray(f3) / 6.0)
    out.c[..., 0] = np.broadcast_to(f0, a0.shape)
    return out


def sin(a):
    s, c = np.sin(a.value), np.cos(a.value)
    return compose(a, s, c, -s, -c)


def cos(a):
    s, c = np.sin(a.value), np.cos(a.value)
    return compose(a, c, -s, -c, s)


def sinh(a):
    s, c = np.sinh(a.value), np.cosh(a.value)
    return compose(a, s, c, s, c)


def cosh(a):
    s, c = np.sinh(a.value), np.cosh(a.value)
    return compose(a, c, s, c, s)


def exp(a):
    e = np.exp(a.value)
    return compose(a, e, e, e, e)


def log(a):
    x = a.value
    if np.any(x <= 0):
        raise JetDomainError("ln of a non-positive value")
    return compose(a, np.log(x), 1 / x, -1 / x**2, 2 / x**3)


def sqrt(a):
    x = a.value
    if np.any(x <= 0):
        raise JetDomainError("sqrt of a non-positive value (derivatives are unbounded at 0)")
    r = np.sqrt(x)
    return compose(a, r, 0.5 / r, -0.25 / (r * x), 0.375 / (r * x * x))


def reciprocal(a):
    x = a.value
    if np.any(x == 0):
        raise JetDomainError("division by a jet with zero constant term")
    return compose(a, 1 / x, -1 / x**2, 2 / x**3, -6 / x**4)


def neg(a):
    return -a


def pow_int(a: Jet, n: int) -> Jet:
    if int(n) != n:
        raise ValueError("only integer powers are supported")
    n = int(n)
    if n < 0:
        return pow_int(reciprocal(a), -n)
    result = Jet.constant(np.ones(a.shape), a.order)
    base = a
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


ELEMENTARY = {
    "sin": sin,
    "cos": cos,
    "sinh": sinh,
    "cosh": cosh,
    "exp": exp,
    "ln": log,
    "sqrt": sqrt,
    "neg": neg,
}


def jet_compose(f: str, a: Jet, n: int | None = None) -> Jet:
    if f == "pow_int":
        return pow_int(a, n)
    try:
        return ELEMENTARY[f](a)
    except KeyError:
        raise ValueError(f"unknown elementary function {f!r}") from None


@dataclass(frozen=True, eq=False)
class JetVector:
    """Jet-valued ambient vector(s): ``components`` has leading shape (..., dimension)."""

    components: Jet
    signature: Signature

    def __post_init__(self):
        if self.components.shape[-1:] != (self.signature.dimension,):
            raise ValueError("component count does not match the signature")

    def inner(self, other: "JetVector") -> Jet:
        if other.signature != self.signature:
            raise SignatureMismatch(f"{self.signature} vs {other.signature}")
        return inner(self.components, other.components, self.signature.signs)

    @property
    def value(self) -> np.ndarray:
        return self.components.value


def inner(a: Jet, b: Jet, signs) -> Jet:
    """Indefinite inner product over the last leading axis of two jet vectors."""
    return (a * b * np.asarray(signs)).sum_last()
