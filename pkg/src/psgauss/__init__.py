"""Pseudo-spherical Gauss maps of surfaces in pseudo-spheres S^m_s(1):
computation, Laplacian, harmonic / 1-type classification and constructors."""

__version__ = "0.1.0"

from .algebra import AmbientVector, CausalClass, Signature, causal_character, inner, orthonormalize, vector
from .dsl import ImmersionSpec, load, make_grid, parse
from .errors import PsgaussError
from .exterior import MultiVector, wedge, wedge_inner
from .gaussmap import ClassificationVerdict, Verdict, classify
from .jets import Jet, JetVector

__all__ = [
    "AmbientVector",
    "CausalClass",
    "ClassificationVerdict",
    "ImmersionSpec",
    "Jet",
    "JetVector",
    "MultiVector",
    "PsgaussError",
    "Signature",
    "Verdict",
    "__version__",
    "causal_character",
    "classify",
    "inner",
    "load",
    "make_grid",
    "orthonormalize",
    "parse",
    "vector",
    "wedge",
    "wedge_inner",
]
