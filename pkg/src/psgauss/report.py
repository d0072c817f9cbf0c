"""Flat, schema-versioned JSON verification reports."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import __version__
from .gaussmap import ClassificationVerdict

SCHEMA = 1
INVARIANTS = (
    "sphere",
    "frame",
    "gauss",
    "codazzi",
    "ricci",
    "scalar_identity",
    "nu_norm",
    "delta_nu_closed_vs_numeric",
    "delta_nu_minus_lambda_nu",
)
VOLATILE = ("wall_time",)


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _mean(a) -> float:
    a = np.asarray(a, float).ravel()
    return math.fsum(a.tolist()) / len(a) if len(a) else 0.0


@dataclass
class VerificationReport:
    schema: int
    tool_version: str
    surface: str
    provenance: str
    signature: str
    dimension: int
    index: int
    grid_u: int
    grid_v: int
    u_min: float
    u_max: float
    v_min: float
    v_max: float
    points: int
    tol: float
    verdict: str
    label: str
    lam: float
    expected: str | None
    matched: bool | None
    pred_zero_mean_curvature: bool
    pred_flat_normal_connection: bool
    pred_constant_scalar_curvature: bool
    pred_scalar_curvature_two: bool
    max_sphere: float
    mean_sphere: float
    max_frame: float
    mean_frame: float
    max_gauss: float
    mean_gauss: float
    max_codazzi: float
    mean_codazzi: float
    max_ricci: float
    mean_ricci: float
    max_scalar_identity: float
    mean_scalar_identity: float
    max_nu_norm: float
    mean_nu_norm: float
    max_delta_nu_closed_vs_numeric: float
    mean_delta_nu_closed_vs_numeric: float
    max_delta_nu_minus_lambda_nu: float
    mean_delta_nu_minus_lambda_nu: float
    max_mean_curvature: float
    max_normal_curvature: float
    scalar_curvature_deviation: float
    K_min: float
    K_max: float
    S_h_min: float
    S_h_max: float
    surface_index: int
    null_seed_points: int
    construct_kind: str | None = None
    construct_max_drift: float | None = None
    construct_steps: int | None = None
    construct_iterations: int | None = None
    construct_max_error: float | None = None
    construct_residual: float | None = None
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, include_volatile: bool = True) -> str:
        d = self.to_dict()
        if not include_volatile:
            for k in VOLATILE:
                d.pop(k, None)
        return json.dumps(d, sort_keys=True, indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        d = json.loads(text)
        if d.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {d.get('schema')!r}")
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown report fields {sorted(unknown)}")
        return cls(**d)


def body(text: str) -> str:
    """Report text with the volatile fields removed (for determinism checks)."""
    d = json.loads(text)
    for k in VOLATILE:
        d.pop(k, None)
    return json.dumps(d, sort_keys=True, indent=2) + "\n"


def build_report(
    result: ClassificationVerdict,
    *,
    surface: str,
    provenance: str,
    signature,
    grid,
    u_range,
    v_range,
    tol: float,
    expected: str | None = None,
    matched: bool | None = None,
    null_seed_points: int = 0,
    wall_time: float = 0.0,
    **construct,
) -> VerificationReport:
    pts, res = result.points, result.residuals
    inv = {}
    for name in INVARIANTS:
        inv[f"max_{name}"] = _num(res[name])
        inv[f"mean_{name}"] = _num(_mean(pts[name]))
    t = np.asarray(pts["t"])
    extra = {k: (_num(v) if isinstance(v, float) else v) for k, v in construct.items()}
    return VerificationReport(
        schema=SCHEMA,
        tool_version=__version__,
        surface=surface,
        provenance=provenance,
        signature=str(signature),
        dimension=int(signature.dimension),
        index=int(signature.index),
        grid_u=int(grid[0]),
        grid_v=int(grid[1]),
        u_min=_num(u_range[0]),
        u_max=_num(u_range[1]),
        v_min=_num(v_range[0]),
        v_max=_num(v_range[1]),
        points=int(len(t)),
        tol=_num(tol),
        verdict=result.verdict.value,
        label=result.label(),
        lam=_num(result.lam),
        expected=expected,
        matched=matched,
        pred_zero_mean_curvature=bool(result.predicates["zero_mean_curvature"]),
        pred_flat_normal_connection=bool(result.predicates["flat_normal_connection"]),
        pred_constant_scalar_curvature=bool(result.predicates["constant_scalar_curvature"]),
        pred_scalar_curvature_two=bool(result.predicates["scalar_curvature_two"]),
        max_mean_curvature=_num(res["mean_curvature"]),
        max_normal_curvature=_num(res["normal_curvature"]),
        scalar_curvature_deviation=_num(res["scalar_curvature_deviation"]),
        K_min=_num(np.min(pts["K"])),
        K_max=_num(np.max(pts["K"])),
        S_h_min=_num(np.min(pts["S_h"])),
        S_h_max=_num(np.max(pts["S_h"])),
        surface_index=int(t[0]) if len(t) and np.all(t == t[0]) else -1,
        null_seed_points=int(null_seed_points),
        wall_time=float(wall_time),
        **inv,
        **extra,
    )
