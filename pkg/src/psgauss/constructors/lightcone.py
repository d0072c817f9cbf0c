"""Lorentzian surfaces with harmonic Gauss map built from a light-cone curve.

Given a spacelike curve z(u) in the light cone of E^n_1 with constant speed 2,
``<z'', z''> = 0`` and ``z''' != 0``, the surface

    x(u, v) = z(u) / (u + v) - z'(u) / 2

lies in S^{n-1}_1(1) away from the line u + v = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import dsl, jets
from ..errors import ValidationError

EXAMPLE_CURVE = """\
# spacelike curve of speed 2 in the light cone of E^4_1
dim = 4
index = 1
domain = u in [0.1, 1]
param k = sqrt(2)
z1 = cos(k*u)
z2 = sin(k*u)
z3 = sinh(k*u)
z4 = cosh(k*u)
"""


def example_curve() -> dsl.CurveSpec:
    return dsl.parse_curve(EXAMPLE_CURVE, name="lightcone_example")


@dataclass(frozen=True)
class LightconeValidation:
    null: float          # max |<z, z>|
    speed: float         # max |<z', z'> - 4|
    acceleration: float  # max |<z'', z''>|
    min_jerk: float      # min Euclidean |z'''|
    tol: float

    @property
    def passed(self) -> bool:
        return not self.failures()

    def failures(self) -> list[str]:
        out = []
        if self.null > self.tol:
            out.append(f"<z,z> = 0 violated by {self.null:.3g}")
        if self.speed > self.tol:
            out.append(f"<z',z'> = 4 violated by {self.speed:.3g}")
        if self.acceleration > self.tol:
            out.append(f"<z'',z''> = 0 violated by {self.acceleration:.3g}")
        if not self.min_jerk > self.tol:
            out.append(f"z''' vanishes (min norm {self.min_jerk:.3g})")
        return out


def curve_jets(curve: dsl.CurveSpec, u) -> jets.Jet:
    """Jets of the components at ``u`` (leading shape (B, n)); v is inert."""
    u = np.atleast_1d(np.asarray(u, float))
    ju, jv = dsl.seeds(u, np.zeros_like(u))
    return jets.Jet.stack([dsl.evaluate_jet(c, ju, jv) for c in curve.components])


def lightcone_validate(curve: dsl.CurveSpec, u=None, tol: float = 1e-9) -> LightconeValidation:
    """Check the light-cone curve constraints at the samples ``u``
    (default: 101 points across the curve's domain)."""
    if u is None:
        u = np.linspace(*curve.u_range, 101)
    z = curve_jets(curve, u)
    signs = curve.signature.signs
    d = [z.partial(k, 0) for k in range(4)]

    def ip(a, b):
        return np.sum(a * b * signs, axis=-1)

    return LightconeValidation(
        null=float(np.max(np.abs(ip(d[0], d[0])))),
        speed=float(np.max(np.abs(ip(d[1], d[1]) - 4.0))),
        acceleration=float(np.max(np.abs(ip(d[2], d[2])))),
        min_jerk=float(np.min(np.linalg.norm(d[3], axis=-1))),
        tol=tol,
    )


def lightcone_build(curve: dsl.CurveSpec, v_range=None, tol: float = 1e-9, check: bool = True) -> dsl.ImmersionSpec:
    """Immersion ``z/(u+v) - z'/2`` as expression trees, excluding u + v = 0.

    ``v_range`` defaults to the curve's u-domain.
    """
    if curve.signature.index != 1:
        raise ValidationError(f"the light-cone construction needs an index-1 ambient, got {curve.signature}")
    if check:
        report = lightcone_validate(curve, tol=tol)
        if not report.passed:
            raise ValidationError("curve rejected: " + "; ".join(report.failures()))
    u, v = dsl.Var("u"), dsl.Var("v")
    s = dsl.BinOp("+", u, v)
    half = dsl.num(0.5)
    comps = tuple(
        dsl.BinOp("-", dsl.BinOp("/", z, s), dsl.BinOp("*", half, dsl.diff(z, "u"))) for z in curve.components
    )
    return dsl.ImmersionSpec(
        signature=curve.signature,
        surface_index=1,
        u_range=curve.u_range,
        v_range=tuple(v_range) if v_range is not None else curve.u_range,
        components=comps,
        excludes=((s, dsl.num(0.0)),),
        name=curve.name or "lightcone",
    )
