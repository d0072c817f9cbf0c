import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from psgauss.algebra import Signature, vector
from psgauss.errors import GradeError
from psgauss.exterior import (
    MultiVector,
    blade_rank,
    blade_signs,
    blades,
    decomposable_from_vectors,
    grade_dimension,
    permutation_parity,
    wedge,
    wedge_coefficients,
    wedge_inner,
)

E41 = Signature(4, 1)


def e(i, sig=E41):
    return MultiVector.from_vector(sig.basis(i))


@pytest.mark.parametrize("n, k, expected", [(4, 3, 4), (5, 3, 10), (4, 0, 1)])
def test_grade_dimension(n, k, expected):
    assert grade_dimension(n, k) == expected


def test_grade_dimension_out_of_range():
    with pytest.raises(GradeError):
        grade_dimension(3, 4)


def test_wedge_basis_order():
    np.testing.assert_array_equal((e(0) ^ e(1)).coeffs, MultiVector.blade(E41, (0, 1)).coeffs)
    np.testing.assert_array_equal((e(1) ^ e(0)).coeffs, -MultiVector.blade(E41, (0, 1)).coeffs)


def test_wedge_bilinear_expansion():
    a = MultiVector.from_vector(E41.basis(0) + E41.basis(1))
    b = MultiVector.from_vector(E41.basis(0) - E41.basis(1))
    np.testing.assert_array_equal(wedge(a, b).coeffs, (MultiVector.blade(E41, (0, 1)) * -2).coeffs)


def test_wedge_grade_overflow():
    with pytest.raises(GradeError):
        wedge(MultiVector.blade(E41, (0, 1, 2)), MultiVector.blade(E41, (1, 3)))


def test_wedge_inner_spacelike_plane():
    b = e(0) ^ e(1)
    assert wedge_inner(b, b) == 1.0


def test_wedge_inner_mixed_plane():
    b = e(0) ^ e(3)
    assert wedge_inner(b, b) == -1.0


def test_wedge_inner_orthonormal_spacelike_triple(rng):
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    vs = [vector(np.append(col, 0.0), 1) for col in q.T]
    nu = decomposable_from_vectors(vs)
    assert wedge_inner(nu, nu) == pytest.approx(1.0, abs=1e-12)


def test_decomposable_standard_triple():
    nu = decomposable_from_vectors([E41.basis(i) for i in range(3)])
    np.testing.assert_array_equal(nu.coeffs, MultiVector.blade(E41, (0, 1, 2)).coeffs)


def test_decomposable_dependent_pair_vanishes():
    nu = decomposable_from_vectors([E41.basis(0), E41.basis(0)])
    assert nu.norm_inf() == 0.0


def test_decomposable_shear_invariance():
    nu = decomposable_from_vectors([E41.basis(0) + E41.basis(1), E41.basis(1), E41.basis(2)])
    np.testing.assert_array_equal(nu.coeffs, MultiVector.blade(E41, (0, 1, 2)).coeffs)


def test_blade_rank_lexicographic():
    assert [blade_rank(b, 5) for b in blades(5, 3)] == list(range(10))
    with pytest.raises(ValueError):
        blade_rank((2, 1), 5)


@given(st.permutations(range(6)))
def test_permutation_parity_matches_determinant(p):
    assert permutation_parity(p) == round(np.linalg.det(np.eye(6)[list(p)]))


@st.composite
def setting(draw):
    n = draw(st.integers(3, 7))
    s = draw(st.integers(0, n))
    k = draw(st.integers(1, n))
    seed = draw(st.integers(0, 2**32 - 1))
    return Signature(n, s), k, np.random.default_rng(seed)


@given(setting())
def test_wedge_inner_is_gram_determinant(args):
    sig, k, rng = args
    us = [vector(rng.normal(size=sig.dimension), sig.index) for _ in range(k)]
    vs = [vector(rng.normal(size=sig.dimension), sig.index) for _ in range(k)]
    G = np.array([[np.dot(a.coords * sig.signs, b.coords) for b in vs] for a in us])
    got = wedge_inner(decomposable_from_vectors(us), decomposable_from_vectors(vs))
    assert got == pytest.approx(np.linalg.det(G), rel=1e-10, abs=1e-10)


@given(setting(), st.integers(1, 3))
def test_wedge_graded_antisymmetry(args, j):
    sig, k, rng = args
    j = min(j, sig.dimension - 1)
    k = min(k, sig.dimension - j)
    a = MultiVector(j, rng.normal(size=grade_dimension(sig.dimension, j)), sig)
    b = MultiVector(k, rng.normal(size=grade_dimension(sig.dimension, k)), sig)
    np.testing.assert_allclose(wedge(a, b).coeffs, (-1) ** (j * k) * wedge(b, a).coeffs, atol=1e-12)


@given(st.integers(1, 8).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n), st.integers(0, n))))
def test_blade_sign_count(args):
    n, s, k = args
    sig = Signature(n, s)
    timelike = set(range(n - s, n))
    expected = sum(1 for b in itertools.combinations(range(n), k) if len(timelike & set(b)) % 2)
    assert int(np.sum(blade_signs(sig, k) < 0)) == expected


@given(setting())
def test_wedge_coefficients_matches_iterated_wedge(args):
    sig, k, rng = args
    k = min(k, 3)
    vs = rng.normal(size=(k, sig.dimension))
    direct = decomposable_from_vectors([vector(v, sig.index) for v in vs]).coeffs
    np.testing.assert_allclose(wedge_coefficients(list(vs), sig.dimension), direct, atol=1e-12)
