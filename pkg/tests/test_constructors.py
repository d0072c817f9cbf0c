import dataclasses
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psgauss import catalog, dsl, gaussmap
from psgauss.algebra import Signature
from psgauss.constructors import frobenius as fb
from psgauss.constructors import lemma2, lightcone, liouville
from psgauss.errors import (
    DomainError,
    IntegrationUnstable,
    LiouvilleNonConvergence,
    LiouvilleResidualError,
    ValidationError,
)
from psgauss.gaussmap import Verdict

R2 = math.sqrt(2)


# --- Liouville -----------------------------------------------------------

@pytest.mark.parametrize("alpha", [1.0, 2.0])
def test_liouville_closed_form_family(alpha):
    sol = liouville.liouville_solve(closed_form=alpha, n=65)
    assert sol.max_error <= 1e-6
    assert sol.iterations <= 12
    assert sol.interior_residual() <= 1e-8
    assert np.all(sol.mu > 0)
    exact = liouville.stereographic_w(alpha)
    U, V = np.meshgrid(sol.u, sol.v, indexing="ij")
    rim = np.ones_like(U, bool)
    rim[1:-1, 1:-1] = False
    np.testing.assert_array_equal(sol.w[rim], exact(U, V)[rim])


def test_liouville_boundary_callable_without_tag():
    w = liouville.stereographic_w(1.0)
    sol = liouville.liouville_solve(boundary=w, n=33, initial=w)
    U, V = np.meshgrid(sol.u, sol.v, indexing="ij")
    assert np.max(np.abs(sol.w - w(U, V))) <= 1e-5
    assert sol.max_error is None


def test_liouville_discretization_orders():
    # error ratios under grid halving: about 4 (five-point) and 16 (compact)
    for scheme, low in (("five_point", 3.5), ("compact", 12.0)):
        errs = [liouville.liouville_solve(closed_form=1.0, n=n, scheme=scheme).max_error for n in (17, 33, 65)]
        assert errs[0] / errs[1] >= low and errs[1] / errs[2] >= low


def test_liouville_blow_up_is_reported():
    with pytest.raises(LiouvilleNonConvergence) as info:
        liouville.liouville_solve(boundary=lambda u, v: np.full(np.shape(u), 10.0), u_range=(-5, 5), v_range=(-5, 5))
    hist = info.value.history
    assert len(hist) >= 2 and hist[-1] > hist[0]


def test_liouville_max_iter_reported():
    with pytest.raises(LiouvilleNonConvergence):
        liouville.liouville_solve(closed_form=1.0, n=17, max_iter=1, initial=lambda u, v: np.zeros(np.shape(u)))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n": 7, "closed_form": 1.0},
        {"scheme": "nine", "closed_form": 1.0},
        {"closed_form": 1.0, "v_range": (-2, 2)},
        {"boundary": lambda u, v: np.full(np.shape(u), np.inf)},
        {},
    ],
)
def test_liouville_input_validation(kwargs):
    with pytest.raises(ValidationError):
        liouville.liouville_solve(**kwargs)


def test_liouville_csv(tmp_path):
    sol = liouville.liouville_solve(closed_form=1.0, n=9)
    buf = io.StringIO()
    sol.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "u,v,w,residual"
    assert len(lines) == 1 + 81


@given(st.floats(0.3, 3.0))
@settings(max_examples=15)
def test_closed_form_metric_has_curvature_one(alpha):
    mu = liouville.stereographic_mu(alpha)
    u, v = dsl.make_grid((-1, 1), (-1, 1), 5, 5)
    np.testing.assert_allclose(liouville.conformal_curvature(mu, u, v), 1.0, atol=1e-5)
    np.testing.assert_allclose(liouville.liouville_residual(mu, u, v), 0.0, atol=1e-10)


def test_liouville_residual_detects_wrong_factor():
    mu = dsl.parse_expression("1/(1 + u^2 + v^2)")
    assert np.max(np.abs(liouville.liouville_residual(mu, np.array([0.2]), np.array([0.1])))) > 0.1


# --- Frobenius -----------------------------------------------------------

def test_reference_initial_data_passes():
    mu, c, s, sig = fb.reference_setup()
    check = fb.initial_data_validate(s.x, s.xu, s.xv, c, 2.0, sig)
    assert check.passed and check.null_c == 0.0
    assert all(v == 0.0 for v in check.residuals.values())


def test_zero_c_rejected():
    mu, c, s, sig = fb.reference_setup()
    check = fb.initial_data_validate(s.x, s.xu, s.xv, np.zeros(5), 2.0, sig)
    assert not check.passed
    assert "<c,c>=0" in check.failures()[0]


def test_timelike_c_rejected():
    mu, c, s, sig = fb.reference_setup()
    check = fb.initial_data_validate(s.x, s.xu, s.xv, [0, 0, 0, 0, 1.0], 2.0, sig)
    assert not check.passed
    assert any(f.startswith("<c,c>=0") for f in check.failures())


def test_metric_constraint_rejected():
    mu, c, s, sig = fb.reference_setup()
    xu = s.xu * math.sqrt(4.1) / 2.0  # <x_u, x_u> = mu0^2 + 0.1
    check = fb.initial_data_validate(s.x, xu, s.xv, c, 2.0, sig)
    assert [f.split(" ")[0] for f in check.failures()] == ["<x_u,x_u>=mu^2"]


@pytest.fixture(scope="module")
def reference_run():
    mu, c, s, sig = fb.reference_setup()
    return fb.frobenius_integrate(mu, c, s, [(0.5, 0.0), (0.5, 0.5)], step=1e-3)


def test_reference_run_drift(reference_run):
    assert reference_run.max_drift <= 1e-8
    assert reference_run.steps == 1000
    assert (reference_run.u[-1], reference_run.v[-1]) == (0.5, 0.5)


def test_reference_run_is_harmonic(reference_run):
    r = gaussmap.classify(reference_run, reference_run.u, reference_run.v, tol=1e-4)
    assert r.verdict is Verdict.HARMONIC
    assert max(r.residuals["mean_curvature"], r.residuals["normal_curvature"]) <= 1e-4


def test_samples_stay_on_sphere(reference_run):
    x = reference_run.x
    np.testing.assert_allclose(np.sum(x * x * Signature(5, 1).signs, axis=1), 1.0, atol=1e-10)


def test_lifted_jets_match_integrated_state(reference_run):
    j = reference_run(reference_run.u[5:8], reference_run.v[5:8])
    n = 5
    np.testing.assert_array_equal(j.value, reference_run.states[5:8, :n])
    np.testing.assert_allclose(j.components.partial(1, 0), reference_run.states[5:8, n:2 * n], atol=1e-14)
    with pytest.raises(DomainError):
        reference_run(0.123, 0.456)


def test_drift_fourth_order_trend():
    mu, c, s, sig = fb.reference_setup()
    d = [fb.frobenius_integrate(mu, c, s, [(0.5, 0.0), (0.5, 0.5)], step=h, sample_every=0).max_drift
         for h in (8e-3, 4e-3)]
    assert d[0] / d[1] >= 8.0


def test_path_independence_coarse():
    mu, c, s, sig = fb.reference_setup()
    a = fb.endpoint(mu, c, s, [(0.3, 0.0), (0.3, 0.4)], step=2e-3)
    b = fb.endpoint(mu, c, s, [(0.0, 0.4), (0.3, 0.4)], step=2e-3)
    assert np.max(np.abs(a - b)) <= 1e-7


def test_loop_closes():
    mu, c, s, sig = fb.reference_setup()
    end = fb.endpoint(mu, c, s, [(0.2, 0.0), (0.2, 0.2), (0.0, 0.2), (0.0, 0.0)], step=2e-3)
    assert np.max(np.abs(end - s.stacked())) <= 1e-9


def test_sweep_grid_is_harmonic():
    mu, c, s, sig = fb.reference_setup()
    vals = np.linspace(-0.3, 0.3, 5)
    surf = fb.frobenius_sweep(mu, c, s, vals, vals, step=5e-3)
    assert surf.states.shape == (25, 15)
    r = gaussmap.classify(surf, surf.u, surf.v, tol=1e-4)
    assert r.verdict is Verdict.HARMONIC


def test_non_liouville_mu_rejected():
    _, c, s, _ = fb.reference_setup()
    mu = dsl.parse_expression("2 + 0*u")
    with pytest.raises(LiouvilleResidualError):
        fb.frobenius_integrate(mu, c, s, [(0.1, 0.0)], step=1e-2)


def test_diagonal_path_rejected():
    mu, c, s, _ = fb.reference_setup()
    with pytest.raises(ValidationError):
        fb.frobenius_integrate(mu, c, s, [(0.1, 0.1)])


def test_unstable_step_detected():
    _, c, s, _ = fb.reference_setup()
    alpha = 20.0
    e = np.eye(5)
    state = fb.FrobeniusState(s.x, 2 * alpha * e[1], 2 * alpha * e[2], c)
    with pytest.raises(IntegrationUnstable):
        fb.frobenius_integrate(liouville.stereographic_mu(alpha), c, state, [(0.5, 0.0)], step=0.1)


def test_frobenius_csv(reference_run):
    buf = io.StringIO()
    reference_run.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "u,v,x1,x2,x3,x4,x5"
    assert len(lines) == 1 + len(reference_run.u)


# --- light-cone construction --------------------------------------------

def test_example_curve_constraints():
    rep = lightcone.lightcone_validate(lightcone.example_curve())
    assert rep.passed
    assert rep.null <= 1e-12 and rep.speed <= 1e-12 and rep.acceleration <= 1e-12
    assert rep.min_jerk > 1.0


def curve(src_components, domain="[0, 1]"):
    lines = ["dim = 4", "index = 1", f"domain = u in {domain}"]
    lines += [f"z{i} = {c}" for i, c in enumerate(src_components, 1)]
    return dsl.parse_curve("\n".join(lines) + "\n")


def test_circle_curve_fails_acceleration():
    rep = lightcone.lightcone_validate(curve(["cos(2*u)", "sin(2*u)", "0", "1"]))
    assert rep.acceleration == pytest.approx(16.0, abs=1e-12)
    assert not rep.passed


def test_null_line_fails_speed():
    rep = lightcone.lightcone_validate(curve(["1 + u", "0", "0", "1 + u"]))
    assert rep.speed == pytest.approx(4.0, abs=1e-12)
    assert not rep.passed


def test_scaled_curve_rejected_by_build():
    z = lightcone.example_curve()
    scaled = dataclasses.replace(z, components=tuple(dsl.BinOp("*", dsl.num(2.0), c) for c in z.components))
    rep = lightcone.lightcone_validate(scaled)
    assert rep.speed == pytest.approx(12.0, abs=1e-9)  # <z',z'> = 16
    with pytest.raises(ValidationError):
        lightcone.lightcone_build(scaled)


def test_build_requires_index_one():
    z = dsl.parse_curve("dim = 4\nindex = 2\ndomain = u in [0, 1]\nz1 = u\nz2 = 0\nz3 = 0\nz4 = u\n")
    with pytest.raises(ValidationError):
        lightcone.lightcone_build(z)


def test_built_surface_value_at_0_1():
    z = dataclasses.replace(lightcone.example_curve(), u_range=(0.0, 2.0))
    s = lightcone.lightcone_build(z)
    x = dsl.evaluate(s, 0.0, 1.0).value
    np.testing.assert_allclose(x, [1, -R2 / 2, -R2 / 2, 1], atol=1e-15)
    assert float(np.sum(x * x * s.signature.signs)) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(DomainError):
        dsl.evaluate(dataclasses.replace(s, v_range=(-1.0, 2.0)), 0.5, -0.5)


def lorentz_moved_curve(theta, phi, shift):
    """Example curve transformed by a rotation of (z1, z2, z3) and a boost of (z3, z4)."""
    k = "sqrt(2)"
    base = [f"cos({k}*(u + {shift!r}))", f"sin({k}*(u + {shift!r}))",
            f"sinh({k}*(u + {shift!r}))", f"cosh({k}*(u + {shift!r}))"]
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s, 0, 0], [s * 0.6, c * 0.6, 0.8, 0], [s * 0.8, c * 0.8, -0.6, 0], [0, 0, 0, 1]])
    ch, sh = math.cosh(phi), math.sinh(phi)
    boost = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, ch, sh], [0, 0, sh, ch]])
    M = boost @ rot
    comps = [" + ".join(f"({float(M[i, j])!r})*{base[j]}" for j in range(4)) for i in range(4)]
    return curve(comps, "[0.1, 1]")


@given(st.floats(-math.pi, math.pi), st.floats(-0.8, 0.8), st.floats(-0.5, 0.5))
@settings(max_examples=15)
def test_built_surfaces_lie_on_the_pseudo_sphere(theta, phi, shift):
    z = lorentz_moved_curve(theta, phi, shift)
    assert lightcone.lightcone_validate(z, tol=1e-9).passed
    s = lightcone.lightcone_build(z)
    u, v = dsl.make_grid(s.u_range, s.v_range, 9, 9)
    res, ok = dsl.validate_on_sphere(s, u, v, tol=1e-9)
    assert ok, res


# --- closed-form flat surfaces ------------------------------------------

def test_index2_base_point():
    s = lemma2.lemma2_closed_form(2.0, "index2")
    x = dsl.evaluate(s, 0.0, 0.0).value
    np.testing.assert_allclose(x, np.add(lemma2.C_VECTORS[0], lemma2.C_VECTORS[2]))
    np.testing.assert_allclose(x, [1, 0, 0, 0])
    assert float(np.sum(x * x * s.signature.signs)) == 1.0


@pytest.mark.parametrize("a", [0.7, 2.0, 5.0])
def test_index2_system_residuals(a):
    s = lemma2.lemma2_closed_form(a, "index2")
    u, v = dsl.make_grid(s.u_range, s.v_range, 9, 9)
    r = lemma2.system_residuals(s, a, u, v)
    assert r.max() <= 1e-9


def test_desitter_branch_is_catalog_surface():
    s = lemma2.lemma2_closed_form(3.0, "deSitter")
    assert s == catalog.get("lorentz_clifford").spec


@pytest.mark.parametrize("a", [0.0, -1.0, float("nan"), float("inf")])
def test_lemma2_rejects_bad_a(a):
    with pytest.raises(ValidationError):
        lemma2.lemma2_closed_form(a)


def test_lemma2_rejects_unknown_branch():
    with pytest.raises(ValidationError):
        lemma2.lemma2_closed_form(1.0, "anti")


@given(st.floats(0.25, 8.0))
@settings(max_examples=15)
def test_index2_flatness_identity(a):
    s = lemma2.lemma2_closed_form(a, "index2", u_range=(-0.5, 0.5), v_range=(-0.5, 0.5))
    u, v = dsl.make_grid(s.u_range, s.v_range, 4, 4)
    assert lemma2.system_residuals(s, a, u, v).h_product <= 1e-9
