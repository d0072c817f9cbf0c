"""Constructors for the surfaces covered by the classification."""

from .frobenius import (
    CONSTRAINTS,
    FrobeniusState,
    FrobeniusSurface,
    endpoint,
    frobenius_integrate,
    frobenius_sweep,
    initial_data_validate,
    lift_jets,
    reference_setup,
)
from .lemma2 import lemma2_closed_form, system_residuals
from .lightcone import EXAMPLE_CURVE, example_curve, lightcone_build, lightcone_validate
from .liouville import (
    LiouvilleSolution,
    conformal_curvature,
    liouville_residual,
    liouville_solve,
    stereographic_mu,
    stereographic_w,
)

__all__ = [
    "CONSTRAINTS",
    "EXAMPLE_CURVE",
    "FrobeniusState",
    "FrobeniusSurface",
    "LiouvilleSolution",
    "conformal_curvature",
    "endpoint",
    "example_curve",
    "frobenius_integrate",
    "frobenius_sweep",
    "initial_data_validate",
    "lemma2_closed_form",
    "lift_jets",
    "lightcone_build",
    "lightcone_validate",
    "liouville_residual",
    "liouville_solve",
    "reference_setup",
    "stereographic_mu",
    "stereographic_w",
    "system_residuals",
]
