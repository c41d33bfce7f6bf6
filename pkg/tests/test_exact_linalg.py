import warnings
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from chainhodge.errors import DependentBasis, SingularMatrix
from chainhodge.exact_linalg import (
    DENSIFY_LIMIT,
    IncrementalRank,
    IntMatrix,
    RatMatrix,
    determinant,
    gram_covolume_sq,
    image_basis,
    inverse_exact,
    kernel_basis,
    quotient_map,
    rational_rank,
    saturated_image_basis,
    smith_normal_form,
    solve_exact,
    torsion_order,
)


@st.composite
def int_matrices(draw, max_dim=5, entry=4, square=False):
    r = draw(st.integers(1, max_dim))
    c = r if square else draw(st.integers(1, max_dim))
    vals = draw(st.lists(st.integers(-entry, entry), min_size=r * c, max_size=r * c))
    return IntMatrix([vals[i * c:(i + 1) * c] for i in range(r)], c)


def test_snf_small_example():
    m = IntMatrix([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    snf = smith_normal_form(m)
    assert snf.diag == (2, 6, 12)
    assert snf.left @ m @ snf.right == snf.diagonal_matrix()


def test_snf_zero_and_empty():
    assert smith_normal_form(IntMatrix.zeros(2, 3)).diag == ()
    assert smith_normal_form(IntMatrix.zeros(0, 3)).rank == 0
    assert torsion_order(IntMatrix.zeros(0, 0)) == 1


@settings(max_examples=60, deadline=None)
@given(int_matrices())
def test_snf_is_a_factorization(m):
    snf = smith_normal_form(m)
    assert snf.left @ m @ snf.right == snf.diagonal_matrix()
    assert snf.left @ snf.left_inverse == IntMatrix.identity(m.nrows)
    assert snf.right @ snf.right_inverse == IntMatrix.identity(m.ncols)
    assert all(d > 0 for d in snf.diag)
    assert all(b % a == 0 for a, b in zip(snf.diag, snf.diag[1:]))


@settings(max_examples=40, deadline=None)
@given(int_matrices(max_dim=4))
def test_snf_matches_sympy(m):
    ref = sympy_snf(sympy.Matrix(m.to_list()), domain=sympy.ZZ)
    ref_diag = [abs(int(ref[i, i])) for i in range(min(m.shape)) if ref[i, i] != 0]
    assert list(smith_normal_form(m).diag) == ref_diag


@settings(max_examples=60, deadline=None)
@given(int_matrices(square=True))
def test_determinant_matches_sympy(m):
    ref = int(sympy.Matrix(m.to_list()).det())
    assert determinant(m) == ref
    assert determinant(RatMatrix.from_int(m)) == ref


@settings(max_examples=60, deadline=None)
@given(int_matrices())
def test_rank_matches_numpy(m):
    assert rational_rank(m) == np.linalg.matrix_rank(m.to_numpy())
    assert rational_rank(m) == smith_normal_form(m).rank


@settings(max_examples=40, deadline=None)
@given(int_matrices(square=True))
def test_torsion_order_of_square_is_abs_det(m):
    det = determinant(m)
    if det != 0:
        assert torsion_order(m) == abs(det)


@settings(max_examples=40, deadline=None)
@given(int_matrices())
def test_lattice_bases(m):
    K = kernel_basis(m)
    assert K.ncols == m.ncols - rational_rank(m)
    assert (m @ K).is_zero()
    G = saturated_image_basis(m)
    Q = quotient_map(m)
    assert G.ncols == rational_rank(m)
    assert (Q @ m).is_zero()
    assert Q.nrows + G.ncols == m.nrows
    # image lattice has index prod(diag) in its saturation
    if G.ncols:
        assert gram_covolume_sq(image_basis(m)) == torsion_order(m) ** 2 * gram_covolume_sq(G)


def test_solve_and_inverse():
    m = RatMatrix([[2, 1], [1, 3]])
    inv = inverse_exact(m)
    assert inv == RatMatrix([[Fraction(3, 5), Fraction(-1, 5)], [Fraction(-1, 5), Fraction(2, 5)]])
    x = solve_exact(m, RatMatrix([[1], [2]]))
    assert x.column(0) == (Fraction(1, 5), Fraction(3, 5))
    with pytest.raises(SingularMatrix):
        inverse_exact(IntMatrix([[1, 2], [2, 4]]))


def test_float_entries_convert_exactly():
    m = RatMatrix([[0.1]])
    assert m[0, 0] == Fraction(0.1)
    assert m[0, 0] != Fraction(1, 10)


def test_int_matrix_rejects_non_integers():
    with pytest.raises(TypeError):
        IntMatrix([[0.5]])


def test_incremental_rank_is_unchanged_on_reject():
    inc = IncrementalRank()
    assert inc.try_add([1, 2, 3])
    assert not inc.try_add([2, 4, 6])
    assert inc.rank == 1
    assert inc.try_add([0, 0, 1])


def test_gram_covolume_rejects_dependent():
    with pytest.raises(DependentBasis):
        gram_covolume_sq(IntMatrix([[1, 2], [2, 4]]))


def test_from_sparse_and_densify_warning():
    m = IntMatrix.from_sparse(2, 3, {(0, 1): 5, (1, 2): -1})
    assert m.to_list() == [[0, 5, 0], [0, 0, -1]]
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        IntMatrix.from_sparse(DENSIFY_LIMIT + 1, 1, {})
    assert w


def test_serialization_round_trip():
    m = IntMatrix([[10**30, -1], [0, 7]])
    assert IntMatrix.from_dict(m.to_dict()) == m
    r = RatMatrix([[Fraction(1, 3), 2]])
    assert RatMatrix.from_dict(r.to_dict()) == r


def test_transpose_and_products():
    m = IntMatrix([[1, 2, 3], [4, 5, 6]])
    assert m.T.shape == (3, 2)
    assert (m @ m.T).to_list() == [[14, 32], [32, 77]]
    assert m.apply([1, 0, -1]) == (-2, -2)
