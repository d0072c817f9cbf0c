"""Built-in surfaces with their expected classification.

Entries are stored in their smallest ambient. :func:`pad` re-embeds a surface
into a larger E^n_s by inserting zero spacelike coordinates before the
timelike block and zero timelike coordinates ahead of the existing ones, which
keeps the spacelike-first layout.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from . import dsl
from .algebra import Signature
from .constructors.lemma2 import DESITTER_SOURCE
from .constructors.lightcone import example_curve, lightcone_build
from .errors import CatalogError, ValidationError
from .gaussmap import Verdict

DEFAULT_GRID = (21, 21)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    spec: dsl.ImmersionSpec
    expected: Verdict
    expected_values: dict = field(default_factory=dict)  # e.g. {"H": 0.0, "K": 0.0, "S_h": 2.0, "lambda": 2.0}
    provenance: str = ""
    endpoint: bool = True   # include the far edge of the chart in the default grid

    def grid(self, nu: int = DEFAULT_GRID[0], nv: int = DEFAULT_GRID[1], u_range=None, v_range=None):
        return dsl.make_grid(u_range or self.spec.u_range, v_range or self.spec.v_range, nu, nv, self.endpoint)

    def source(self) -> str:
        return dsl.spec_to_source(self.spec, comment=f"{self.name}: {self.provenance}")


_CLIFFORD = """\
dim = 4
domain = u in [0, 2*pi], v in [0, 2*pi]
param r = 1/sqrt(2)
x1 = r*cos(u)
x2 = r*sin(u)
x3 = r*cos(v)
x4 = r*sin(v)
"""

_TENSOR_PRODUCT = """\
dim = 4
index = 2
surface_index = 1
domain = u in [-1, 1], v in [0, 2*pi]
x1 = cosh(u)*cos(v)
x2 = cosh(u)*sin(v)
x3 = sinh(u)*cos(v)
x4 = sinh(u)*sin(v)
"""

_GEODESIC_SPHERE = """\
dim = 5
index = 1
domain = u in [0, 2*pi], v in [-1.2, 1.2]
x1 = cos(u)*cos(v)
x2 = sin(u)*cos(v)
x3 = sin(v)
x4 = 0
x5 = 0
"""

_SMALL_SPHERE = """\
dim = 4
domain = u in [0, 2*pi], v in [-1.2, 1.2]
param r = 1/sqrt(2)
x1 = r*cos(u)*cos(v)
x2 = r*sin(u)*cos(v)
x3 = r*sin(v)
x4 = sqrt(1 - r^2)
"""


def _lightcone_example() -> dsl.ImmersionSpec:
    return dataclasses.replace(lightcone_build(example_curve()), name="lightcone_example")


def _build() -> dict:
    entries = [
        CatalogEntry(
            "clifford",
            dsl.parse(_CLIFFORD, "clifford"),
            Verdict.ONE_TYPE,
            {"H": 0.0, "K": 0.0, "S_h": 2.0, "lambda": 2.0},
            "Clifford torus in S^3; 1-type, non-harmonic, Delta nu = 2 nu",
            endpoint=False,
        ),
        CatalogEntry(
            "lorentz_clifford",
            dsl.parse(DESITTER_SOURCE, "lorentz_clifford"),
            Verdict.ONE_TYPE,
            {"H": 0.0, "K": 0.0, "S_h": 2.0, "lambda": 2.0},
            "flat Lorentzian minimal surface in S^3_1 (Lorentzian Clifford torus); Delta nu = 2 nu",
        ),
        CatalogEntry(
            "tensor_product",
            dsl.parse(_TENSOR_PRODUCT, "tensor_product"),
            Verdict.ONE_TYPE,
            {"H": 0.0, "K": 0.0, "S_h": 2.0, "lambda": 2.0},
            "tensor product of (cosh u, sinh u) and (cos v, sin v) in S^3_2; Delta nu = 2 nu",
        ),
        CatalogEntry(
            "lightcone_example",
            _lightcone_example(),
            Verdict.HARMONIC,
            {"H": 0.0, "K": 1.0, "S_h": 0.0, "lambda": 0.0},
            "z/(u+v) - z'/2 for z = (cos su, sin su, sinh su, cosh su), s = sqrt 2; harmonic Gauss map",
        ),
        CatalogEntry(
            "geodesic_sphere",
            dsl.parse(_GEODESIC_SPHERE, "geodesic_sphere"),
            Verdict.HARMONIC,
            {"H": 0.0, "K": 1.0, "S_h": 0.0, "lambda": 0.0},
            "totally geodesic S^2 in S^4_1; harmonic with S_h = 0",
        ),
        CatalogEntry(
            "small_sphere",
            dsl.parse(_SMALL_SPHERE, "small_sphere"),
            Verdict.INCONCLUSIVE,
            {"H": 1.0, "K": 2.0},
            "sphere of radius 1/sqrt 2 in S^3 (negative control: |H| = 1, not of 1-type)",
        ),
    ]
    return {e.name: e for e in entries}


_ENTRIES = _build()


def list_names() -> list[str]:
    return list(_ENTRIES)


def get(name: str) -> CatalogEntry:
    try:
        return _ENTRIES[name]
    except KeyError:
        raise CatalogError(f"unknown catalog entry {name!r}; known: {', '.join(_ENTRIES)}") from None


def export(name: str) -> str:
    """The entry as an immersion source file."""
    return get(name).source()


def pad(spec: dsl.ImmersionSpec, dimension: int, index: int) -> dsl.ImmersionSpec:
    """Re-embed into E^dimension_index (both must be at least the current ones)."""
    sig = spec.signature
    n_space, n_time = sig.dimension - sig.index, sig.index
    extra_space = (dimension - index) - n_space
    extra_time = index - n_time
    if extra_space < 0 or extra_time < 0:
        raise ValidationError(f"cannot pad {sig} into E^{dimension}_{index}")
    zero = dsl.num(0.0)
    comps = (
        spec.components[:n_space]
        + (zero,) * extra_space
        + (zero,) * extra_time
        + spec.components[n_space:]
    )
    return dataclasses.replace(spec, signature=Signature(dimension, index), components=comps)


def expected_label(entry: CatalogEntry) -> str:
    if entry.expected is Verdict.ONE_TYPE:
        return f"OneType({entry.expected_values['lambda']:.12g})"
    return entry.expected.value


def matches(entry: CatalogEntry, verdict, tol: float = 1e-7) -> bool:
    """Whether a ClassificationVerdict agrees with the entry's expectation."""
    if verdict.verdict is not entry.expected:
        return False
    if entry.expected is Verdict.ONE_TYPE:
        return bool(np.isclose(verdict.lam, entry.expected_values["lambda"], rtol=0, atol=max(tol, 1e-7)))
    return True
