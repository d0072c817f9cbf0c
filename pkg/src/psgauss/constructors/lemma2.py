"""Closed-form flat Lorentzian minimal surfaces in S^3_1(1) and S^3_2(1).

``index2`` is the general solution of

    x_uu = a xi,   x_uv = x,   x_vv = -xi / a

(xi a unit timelike normal, a > 0) in null coordinates, with alpha = sqrt(a/2),
p = alpha u + v/(2 alpha), q = alpha u - v/(2 alpha):

    x = e^p (cos q c1 + sin q c2) + e^{-p} (cos q c3 + sin q c4).

``deSitter`` is the Lorentzian Clifford torus (1/sqrt 2)(cos u, sin u, cosh v, sinh v).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import dsl, geometry
from ..algebra import Signature
from ..errors import ValidationError

C_VECTORS = (
    (0.5, 0.0, 0.5, 0.0),
    (0.0, 0.5, 0.0, 0.5),
    (0.5, 0.0, -0.5, 0.0),
    (0.0, 0.5, 0.0, -0.5),
)

DESITTER_SOURCE = """\
dim = 4
index = 1
surface_index = 1
domain = u in [0, 2*pi], v in [-1, 1]
param r = 1/sqrt(2)
x1 = r*cos(u)
x2 = r*sin(u)
x3 = r*cosh(v)
x4 = r*sinh(v)
"""

BRANCHES = ("deSitter", "index2")


def _index2(a: float, u_range, v_range) -> dsl.ImmersionSpec:
    alpha = math.sqrt(a / 2.0)
    p = "(alpha*u + v/(2*alpha))"
    q = "(alpha*u - v/(2*alpha))"
    params = {"alpha": alpha}
    comps = []
    for i in range(4):
        terms = []
        for coef, expr in zip((c[i] for c in C_VECTORS), (
            f"exp({p})*cos({q})", f"exp({p})*sin({q})", f"exp(-{p})*cos({q})", f"exp(-{p})*sin({q})",
        )):
            if coef:
                terms.append(f"{coef!r}*{expr}")
        comps.append(dsl.parse_expression(" + ".join(terms).replace("+ -", "- "), params))
    return dsl.ImmersionSpec(
        signature=Signature(4, 2),
        surface_index=1,
        u_range=tuple(u_range),
        v_range=tuple(v_range),
        components=tuple(comps),
        params=params,
        name=f"lemma2_index2_a{a:g}",
    )


def lemma2_closed_form(a: float = 2.0, branch: str = "index2", u_range=(-1.0, 1.0), v_range=(-1.0, 1.0)):
    """Immersion spec for the chosen branch; ``a`` must be positive.

    The domain arguments apply to ``index2`` only; ``deSitter`` carries its
    own standard chart.
    """
    if not a > 0 or not math.isfinite(a):
        raise ValidationError(f"a must be a positive number, got {a}")
    if branch == "index2":
        return _index2(float(a), u_range, v_range)
    if branch == "deSitter":
        return dsl.parse(DESITTER_SOURCE, name="lorentz_clifford")
    raise ValidationError(f"unknown branch {branch!r}; expected one of {BRANCHES}")


@dataclass(frozen=True)
class SystemResiduals:
    """Max residuals of the defining system and the flatness identity."""

    uu: float         # |x_uu - a xi|
    uv: float         # |x_uv - x|
    vv: float         # |x_vv + xi / a|
    xi_unit: float    # |<xi, xi> + 1|
    h_product: float  # |<h(d_u, d_u), h(d_v, d_v)> - 1|

    def max(self) -> float:
        return max(self.uu, self.uv, self.vv, self.xi_unit, self.h_product)


def system_residuals(spec: dsl.ImmersionSpec, a: float, u, v) -> SystemResiduals:
    """Check the null-coordinate system with xi rebuilt as the unit timelike
    normal of the surface in S^3_2, oriented so that <x_uu, xi> has the sign
    of -a (h(d_u, d_u) = a xi with <xi, xi> = -1)."""
    x = dsl.evaluate(spec, u, v)
    metric = geometry.first_fundamental_form(x)
    frame = geometry.normal_frame(x, geometry.tangent_frame(x, metric))
    _, _, geo = geometry.analyze(x, frame=frame, metric=metric)
    signs = spec.signature.signs
    if len(frame.normals) != 1:
        raise ValidationError("expected a single sphere normal in S^3_2")
    xi = frame.normals[0].value
    xuu = x.components.partial(2, 0)
    flip = np.where(np.sum(xuu * xi * signs, axis=-1) > 0, -1.0, 1.0)
    xi = xi * flip[:, None]
    X = x.components.value

    def worst(r):
        return float(np.max(np.abs(r)))

    h_uu = geometry.h_on(geo, (1, 0), (1, 0))
    h_vv = geometry.h_on(geo, (0, 1), (0, 1))
    return SystemResiduals(
        uu=worst(xuu - a * xi),
        uv=worst(x.components.partial(1, 1) - X),
        vv=worst(x.components.partial(0, 2) + xi / a),
        xi_unit=worst(np.sum(xi * xi * signs, axis=-1) + 1.0),
        h_product=worst(np.sum(h_uu * h_vv * signs, axis=-1) - 1.0),
    )
