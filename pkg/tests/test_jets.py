import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from psgauss import jets
from psgauss.errors import JetDomainError
from psgauss.jets import MONOMIALS, Jet, extract_partial, jet_arith, jet_compose

U = Jet.variable(0.0, 0)
V = Jet.variable(0.0, 1)


def coeff(j, a, b):
    return float(j.c[jets.INDEX[(a, b)]])


def test_product_of_seeds():
    p = jet_arith(U, V, "mul")
    expected = np.zeros(len(MONOMIALS))
    expected[jets.INDEX[(1, 1)]] = 1.0
    np.testing.assert_array_equal(p.c, expected)


def test_self_division_is_one():
    a = 1.0 + U
    q = jet_arith(a, a, "div")
    np.testing.assert_allclose(q.c, Jet.constant(1.0).c, atol=1e-15)


def test_geometric_series_truncates_to_one():
    p = (1.0 + U) * (1.0 - U + U * U - U * U * U)
    np.testing.assert_array_equal(p.c, Jet.constant(1.0).c)


def test_division_by_zero_constant_term():
    with pytest.raises(JetDomainError):
        jet_arith(1.0, U, "div")


def test_unknown_operation():
    with pytest.raises(ValueError):
        jet_arith(U, V, "pow")


def test_sin_maclaurin():
    s = jet_compose("sin", U)
    assert [coeff(s, k, 0) for k in range(4)] == pytest.approx([0, 1, 0, -1 / 6], abs=1e-16)


def test_exp_of_zero():
    np.testing.assert_array_equal(jet_compose("exp", Jet.constant(0.0)).c, Jet.constant(1.0).c)


def test_cosh_maclaurin():
    c = jet_compose("cosh", U)
    assert [coeff(c, k, 0) for k in range(4)] == pytest.approx([1, 0, 0.5, 0], abs=1e-16)


@pytest.mark.parametrize("name, value", [("ln", 0.0), ("ln", -1.0), ("sqrt", -2.0)])
def test_domain_violation(name, value):
    with pytest.raises(JetDomainError):
        jet_compose(name, Jet.constant(value))


def test_pow_int_negative_and_fractional():
    j = jet_compose("pow_int", 2.0 + U, n=-2)
    assert extract_partial(j, (1, 0)) == pytest.approx(-2 / 8)
    with pytest.raises(ValueError):
        jet_compose("pow_int", U, n=0.5)


def test_extract_u2v():
    assert extract_partial(U * U * V, (2, 1)) == 2.0


def test_extract_constant_term():
    j = jets.exp(Jet.variable(0.3, 0))
    assert extract_partial(j, (0, 0)) == pytest.approx(math.exp(0.3), abs=0)


def test_extract_sin_second_derivative_at_half_pi():
    j = jets.sin(Jet.variable(math.pi / 2, 0))
    assert extract_partial(j, (2, 0)) == pytest.approx(-1.0, abs=1e-15)


def test_extract_order_overflow():
    with pytest.raises(ValueError):
        extract_partial(U, (2, 2))


def test_batched_shapes():
    u = Jet.variable(np.linspace(0, 1, 5), 0)
    assert jets.sin(u).shape == (5,)
    np.testing.assert_allclose(jets.sin(u).partial(1, 0), np.cos(np.linspace(0, 1, 5)))


# --- exact polynomial arithmetic ----------------------------------------

small_int = st.integers(-5, 5)
poly = st.lists(small_int, min_size=len(MONOMIALS), max_size=len(MONOMIALS))


def poly_jet(cs):
    return Jet(np.array(cs, float))


def truncated_product(a, b):
    out = {}
    for (i, j), x in zip(MONOMIALS, a):
        for (k, l), y in zip(MONOMIALS, b):
            if i + j + k + l <= 3:
                out[(i + k, j + l)] = out.get((i + k, j + l), 0) + x * y
    return np.array([out.get(m, 0) for m in MONOMIALS], float)


@given(poly, poly)
def test_polynomial_arithmetic_exact(a, b):
    ja, jb = poly_jet(a), poly_jet(b)
    np.testing.assert_array_equal((ja + jb).c, np.add(a, b))
    np.testing.assert_array_equal((ja - jb).c, np.subtract(a, b))
    np.testing.assert_array_equal((ja * jb).c, truncated_product(a, b))


@given(poly, poly)
def test_leibniz_rule_exact(a, b):
    f, g = poly_jet(a), poly_jet(b)
    for axis in (0, 1):
        lhs = (f * g).d(axis)
        rhs = f.d(axis) * g + f * g.d(axis)
        np.testing.assert_array_equal(lhs.c, rhs.c)


# --- smooth compositions against finite differences ---------------------

UNARY = ["sin", "cos", "sinh", "cosh", "exp"]
LD = {name: getattr(np, name) for name in UNARY}


@st.composite
def smooth_case(draw):
    f1, f2, f3 = (draw(st.sampled_from(UNARY)) for _ in range(3))
    a, b, c, d = (draw(st.floats(-1.2, 1.2)) for _ in range(4))
    u0, v0 = draw(st.floats(-1, 1)), draw(st.floats(-1, 1))
    return (f1, f2, f3, a, b, c, d), (u0, v0)


def build(fs, u, v, mode):
    f1, f2, f3, a, b, c, d = fs
    if mode == "jet":
        F = {name: getattr(jets, name) for name in UNARY}
        ln, sq = jets.log, jets.sqrt
    else:
        F, ln, sq = LD, np.log, np.sqrt
    return (
        F[f1](u * a + v * b) * F[f2](u * c - v * d)
        + F[f3](u * v) / (2.0 + u * u)
        + ln(3.0 + v) * sq(1.0 + u * u)
    )


@given(smooth_case())
def test_partials_match_central_differences(case):
    fs, (u0, v0) = case
    j = build(fs, Jet.variable(u0, 0), Jet.variable(v0, 1), "jet")
    # extended precision keeps rounding out of the h = 1e-4 stencils
    h = np.longdouble("1e-4")
    u0l, v0l = np.longdouble(u0), np.longdouble(v0)

    def F(du, dv):
        return build(fs, u0l + du * h, v0l + dv * h, "float")

    fd = {
        (1, 0): (F(1, 0) - F(-1, 0)) / (2 * h),
        (0, 1): (F(0, 1) - F(0, -1)) / (2 * h),
        (2, 0): (F(1, 0) - 2 * F(0, 0) + F(-1, 0)) / h**2,
        (0, 2): (F(0, 1) - 2 * F(0, 0) + F(0, -1)) / h**2,
        (1, 1): (F(1, 1) - F(1, -1) - F(-1, 1) + F(-1, -1)) / (4 * h**2),
        (3, 0): (F(2, 0) - 2 * F(1, 0) + 2 * F(-1, 0) - F(-2, 0)) / (2 * h**3),
        (0, 3): (F(0, 2) - 2 * F(0, 1) + 2 * F(0, -1) - F(0, -2)) / (2 * h**3),
        (2, 1): (F(1, 1) - 2 * F(0, 1) + F(-1, 1) - F(1, -1) + 2 * F(0, -1) - F(-1, -1)) / (2 * h**3),
        (1, 2): (F(1, 1) - 2 * F(1, 0) + F(1, -1) - F(-1, 1) + 2 * F(-1, 0) - F(-1, -1)) / (2 * h**3),
    }
    assert float(F(0, 0)) == pytest.approx(float(j.value), rel=1e-13, abs=1e-13)
    for (a, b), approx in fd.items():
        exact = float(j.partial(a, b))
        tol = 1e-6 if a + b <= 2 else 1e-4
        assert abs(float(approx) - exact) <= tol * max(abs(exact), 1.0), (a, b)
