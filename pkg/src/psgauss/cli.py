"""Command-line front end.

Exit codes: 0 success, 1 verdict does not match the expectation,
2 parse / validation / unknown-name errors, 3 numerical degeneracy or
constructor failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import catalog, dsl, gaussmap
from .constructors import frobenius, lemma2, lightcone, liouville
from .csvio import write_surface
from .errors import (
    CatalogError,
    DegenerateMetric,
    DegenerateSpan,
    DomainError,
    IntegrationUnstable,
    JetDomainError,
    LiouvilleNonConvergence,
    LiouvilleResidualError,
    ParseError,
    PsgaussError,
    ValidationError,
)
from .report import build_report

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
NUMERIC_ERRORS = (
    DegenerateMetric,
    DegenerateSpan,
    JetDomainError,
    LiouvilleNonConvergence,
    LiouvilleResidualError,
    IntegrationUnstable,
)


class InputError(Exception):
    """Bad command-line value (exit 2)."""


def _grid(text: str):
    try:
        a, b = text.lower().split("x")
        nu, nv = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must read NxM, got {text!r}") from None
    if nu < 1 or nv < 1:
        raise argparse.ArgumentTypeError("grid sizes must be positive")
    return nu, nv


def _interval(text: str):
    try:
        a, b = (float(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"interval must read a:b, got {text!r}") from None
    if not a <= b:
        raise argparse.ArgumentTypeError("interval needs a <= b")
    return a, b


def _pair(text: str):
    try:
        a, b = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}") from None
    return a, b


def _ambient(text: str):
    try:
        a, b = (int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"ambient must read DIM,INDEX, got {text!r}") from None
    return a, b


def _emit(text: str, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run_report(source, spec_like, args, *, name, provenance, grid, u_range, v_range,
                u=None, v=None, endpoint=True, expected_entry=None, expected_label=None, expected_check=None,
                started, **construct):
    """Classify, write the report (and optional CSV) and return the exit code."""
    if u is None:
        u, v = dsl.make_grid(u_range, v_range, grid[0], grid[1], endpoint)
    result = gaussmap.classify(source, u, v, tol=args.tol, threads=args.threads)
    if args.csv:
        x = dsl.evaluate(source, u, v).value if isinstance(source, dsl.ImmersionSpec) else source(u, v).value
        write_surface(args.csv, u, v, x)
    matched = None
    expected = None
    if expected_entry is not None:
        expected = catalog.expected_label(expected_entry)
        matched = catalog.matches(expected_entry, result, args.tol)
    elif expected_label is not None:
        expected = expected_label
        matched = bool(expected_check(result))
    rep = build_report(
        result,
        surface=name,
        provenance=provenance,
        signature=spec_like.signature,
        grid=grid,
        u_range=u_range,
        v_range=v_range,
        tol=args.tol,
        expected=expected,
        matched=matched,
        null_seed_points=int(np.sum(result.points["null_seed"])),
        wall_time=time.perf_counter() - started,
        **construct,
    )
    _emit(rep.to_json(), args.out)
    return EXIT_MISMATCH if matched is False else EXIT_OK


# --------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    started = time.perf_counter()
    entry = None
    if os.path.exists(args.surface):
        spec = dsl.load(args.surface)
        name, provenance = os.path.basename(args.surface), "file"
        endpoint = True
    else:
        entry = catalog.get(args.surface)
        spec, name, provenance, endpoint = entry.spec, entry.name, entry.provenance, entry.endpoint
    if args.ambient:
        spec = catalog.pad(spec, *args.ambient)
    grid = args.grid or catalog.DEFAULT_GRID
    u_range = args.u or spec.u_range
    v_range = args.v or spec.v_range
    return _run_report(
        spec, spec, args, name=name, provenance=provenance, grid=grid, u_range=u_range, v_range=v_range,
        endpoint=endpoint, expected_entry=entry, started=started,
    )


# --------------------------------------------------------------------------
# construct


def _expect(verdict, lam=None):
    def check(result):
        if result.verdict is not verdict:
            return False
        return lam is None or abs(result.lam - lam) <= 1e-7
    label = verdict.value if lam is None else f"OneType({lam:.12g})"
    return label, check


def cmd_construct_lightcone(args) -> int:
    started = time.perf_counter()
    if args.curve:
        with open(args.curve, encoding="utf-8") as fh:
            curve = dsl.parse_curve(fh.read(), name=os.path.basename(args.curve))
    else:
        curve = lightcone.example_curve()
    spec = lightcone.lightcone_build(curve, v_range=args.v)
    u_range = args.u or spec.u_range
    v_range = args.v or spec.v_range
    label, check = _expect(gaussmap.Verdict.HARMONIC)
    return _run_report(
        spec, spec, args, name=curve.name or "lightcone", provenance="light-cone construction z/(u+v) - z'/2",
        grid=args.grid or catalog.DEFAULT_GRID, u_range=u_range, v_range=v_range,
        expected_label=label, expected_check=check, started=started, construct_kind="lightcone",
    )


def cmd_construct_lemma2(args) -> int:
    started = time.perf_counter()
    spec = lemma2.lemma2_closed_form(args.a, args.branch)
    u_range = args.u or spec.u_range
    v_range = args.v or spec.v_range
    label, check = _expect(gaussmap.Verdict.ONE_TYPE, 2.0)
    return _run_report(
        spec, spec, args, name=spec.name, provenance=f"flat Lorentzian minimal surface, branch {args.branch}",
        grid=args.grid or catalog.DEFAULT_GRID, u_range=u_range, v_range=v_range,
        expected_label=label, expected_check=check, started=started, construct_kind="lemma2",
    )


def cmd_construct_frobenius(args) -> int:
    started = time.perf_counter()
    if args.mu in frobenius.MU_PRESETS:
        mu = frobenius.MU_PRESETS[args.mu]()
    else:
        mu = dsl.parse_expression(args.mu)
    _, c, ref, sig = frobenius.reference_setup()
    mu0 = float(dsl.evaluate_float(mu, 0.0, 0.0))
    e = np.eye(sig.dimension)
    initial = frobenius.FrobeniusState(x=ref.x, xu=mu0 * e[1], xv=mu0 * e[2], c=c)
    tu, tv = args.to
    path = [(tu, 0.0), (tu, tv)] if args.order == "uv" else [(0.0, tv), (tu, tv)]
    surf = frobenius.frobenius_integrate(mu, c, initial, path, step=args.step, signature=sig,
                                         sample_every=args.sample_every)
    if args.csv:
        surf.to_csv(args.csv)
        args.csv = None
    label, check = _expect(gaussmap.Verdict.HARMONIC)
    return _run_report(
        surf, surf, args, name=f"frobenius_{args.mu}" if args.mu in frobenius.MU_PRESETS else "frobenius",
        provenance="integrated total system with null c in E^5_1", grid=(len(surf.u), 1),
        u_range=(float(surf.u.min()), float(surf.u.max())), v_range=(float(surf.v.min()), float(surf.v.max())),
        u=surf.u, v=surf.v, expected_label=label, expected_check=check, started=started,
        construct_kind="frobenius", construct_max_drift=surf.max_drift, construct_steps=surf.steps,
    )


def cmd_construct_liouville(args) -> int:
    """Solve, optionally write ``u,v,w,residual``, and print a JSON summary of
    the Newton run (its own small schema, not a VerificationReport)."""
    started = time.perf_counter()
    u_range = args.u or (-1.0, 1.0)
    v_range = args.v or (-1.0, 1.0)
    if args.boundary_constant is not None:
        w0 = args.boundary_constant
        sol = liouville.liouville_solve(lambda U, V: np.full_like(U, w0), u_range, v_range, n=args.n,
                                        scheme=args.scheme, max_iter=args.max_iter)
    else:
        sol = liouville.liouville_solve(None, u_range, v_range, n=args.n, scheme=args.scheme,
                                        closed_form=args.alpha, max_iter=args.max_iter)
    if args.csv:
        sol.to_csv(args.csv)
    rep = {
        "schema": 1,
        "construct_kind": "liouville",
        "scheme": sol.scheme,
        "grid_u": len(sol.u),
        "grid_v": len(sol.v),
        "u_min": u_range[0], "u_max": u_range[1], "v_min": v_range[0], "v_max": v_range[1],
        "construct_iterations": sol.iterations,
        "construct_residual": sol.interior_residual(),
        "construct_max_error": sol.max_error,
        "closed_form_alpha": sol.closed_form,
        "wall_time": time.perf_counter() - started,
    }
    _emit(json.dumps(rep, sort_keys=True, indent=2) + "\n", args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# catalog


def cmd_catalog(args) -> int:
    if args.action == "list":
        lines = [f"{n}\t{catalog.expected_label(catalog.get(n))}\t{catalog.get(n).provenance}" for n in catalog.list_names()]
        _emit("\n".join(lines) + "\n", args.out)
        return EXIT_OK
    if not args.name:
        raise InputError("catalog export needs an entry name")
    spec = catalog.get(args.name).spec
    if args.ambient:
        spec = catalog.pad(spec, *args.ambient)
    _emit(dsl.spec_to_source(spec, comment=f"{args.name}: {catalog.get(args.name).provenance}"), args.out)
    return EXIT_OK


# --------------------------------------------------------------------------


def _common(p, grid=True):
    if grid:
        p.add_argument("--grid", type=_grid, help="sample grid NxM (default 21x21)")
    p.add_argument("--u", type=_interval, help="u interval a:b")
    p.add_argument("--v", type=_interval, help="v interval a:b")
    p.add_argument("--tol", type=float, default=1e-7, help="predicate tolerance (default 1e-7)")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--threads", type=int, default=1, help="worker threads for grid evaluation")
    p.add_argument("--csv", help="also write the sampled surface as CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="psgauss", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="classify a catalog entry or surface file")
    p.add_argument("surface", help="catalog name or path to a surface file")
    p.add_argument("--ambient", type=_ambient, help="pad into E^DIM_INDEX, e.g. 6,1")
    _common(p)
    p.set_defaults(func=cmd_verify)

    pc = sub.add_parser("construct", help="run a constructor")
    csub = pc.add_subparsers(dest="kind", required=True)

    q = csub.add_parser("lightcone")
    q.add_argument("--curve", help="curve file (default: built-in example curve)")
    _common(q)
    q.set_defaults(func=cmd_construct_lightcone)

    q = csub.add_parser("lemma2")
    q.add_argument("--branch", choices=lemma2.BRANCHES, default="index2")
    q.add_argument("--a", type=float, default=2.0)
    _common(q)
    q.set_defaults(func=cmd_construct_lemma2)

    q = csub.add_parser("frobenius")
    q.add_argument("--mu", default="stereographic", help="'stereographic' or an expression in u, v")
    q.add_argument("--step", type=float, default=1e-3)
    q.add_argument("--to", type=_pair, default=(0.5, 0.5), help="endpoint u,v")
    q.add_argument("--order", choices=("uv", "vu"), default="uv", help="which axis to follow first")
    q.add_argument("--sample-every", type=int, default=10)
    _common(q, grid=False)
    q.set_defaults(func=cmd_construct_frobenius)

    q = csub.add_parser("liouville")
    q.add_argument("--alpha", type=float, default=1.0, help="closed-form family parameter for boundary data")
    q.add_argument("--boundary-constant", type=float, help="use constant boundary data instead")
    q.add_argument("--n", type=int, default=65)
    q.add_argument("--scheme", choices=liouville.SCHEMES, default="compact")
    q.add_argument("--max-iter", type=int, default=30)
    _common(q, grid=False)
    q.set_defaults(func=cmd_construct_liouville)

    p = sub.add_parser("catalog", help="list or export built-in surfaces")
    p.add_argument("action", choices=("list", "export"))
    p.add_argument("name", nargs="?")
    p.add_argument("--ambient", type=_ambient, help="pad into E^DIM_INDEX on export")
    p.add_argument("--out")
    p.set_defaults(func=cmd_catalog)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    constructing = args.command == "construct"
    try:
        return args.func(args)
    except (ParseError, CatalogError, DomainError, InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValidationError, PsgaussError) as exc:
        print(f"{'constructor' if constructing else 'validation'} error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC if constructing else EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
