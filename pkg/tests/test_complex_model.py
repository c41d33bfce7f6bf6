import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chainhodge import corpus
from chainhodge.complex_model import (
    ChainComplex,
    ScalarStructure,
    betti_numbers,
    brute_force_betti,
    check_cycle,
    dual_two_stage,
    homology,
    is_homologous,
    modified_inner_product,
    quotient_complex,
    reduce_two_stage,
    subcomplex,
)
from chainhodge.errors import DegreeOutOfRange, MissingScalar, NotAComplex, NotACycle
from chainhodge.exact_linalg import IntMatrix


def test_rejects_nonzero_composite():
    with pytest.raises(NotAComplex) as err:
        ChainComplex([["p"], ["a"], ["f"]], {1: IntMatrix([[1]]), 2: IntMatrix([[1]])})
    assert err.value.degree == 2


def test_rejects_bad_shape_and_duplicates():
    with pytest.raises(NotAComplex):
        ChainComplex([["p", "q"], ["a"]], {1: IntMatrix([[1, 0]])})
    with pytest.raises(NotAComplex):
        ChainComplex([["p", "p"], []], {})


def test_torus_homology():
    c = corpus.torus_2x2()
    assert betti_numbers(c) == [1, 2, 1]
    assert all(homology(c, k).torsion == 1 for k in range(3))
    assert homology(c, 1).cycle_basis.shape == (8, 5)


def test_projective_plane_and_moore_torsion():
    rp2 = corpus.projective_plane()
    h1 = homology(rp2, 1)
    assert (h1.betti, h1.torsion, h1.torsion_invariants) == (0, 2, (2,))
    assert homology(rp2, 2).betti == 0
    m = corpus.moore_mod2()
    assert homology(m, 0).torsion == 2
    assert homology(m, 0).betti == 0


def test_graph_homology():
    assert betti_numbers(corpus.theta_graph()) == [1, 2]
    assert betti_numbers(corpus.circle()) == [1, 1]
    assert betti_numbers(corpus.complete_graph(4)) == [1, 3]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_betti_matches_rank_count(seed):
    c = corpus.random_complex(np.random.default_rng(seed), top=3, max_cells=5)
    for k in range(c.dim + 1):
        assert homology(c, k).betti == brute_force_betti(c, k)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_free_generators_and_class_map(seed):
    c = corpus.random_complex(np.random.default_rng(seed), top=3, max_cells=5)
    for k in range(c.dim + 1):
        h = homology(c, k)
        R = h.free_generators
        assert (c.boundary(k) @ R).is_zero()
        # class map sends the generators to the standard basis
        assert h.class_map @ R == IntMatrix.identity(h.betti)
        # and kills boundaries
        if k + 1 <= c.dim:
            assert (h.class_map @ c.boundary(k + 1)).is_zero()


def test_check_cycle_and_homologous():
    c = corpus.torus_2x2()
    x = corpus.torus_meridian(c)
    assert check_cycle(c, 1, x) == x
    with pytest.raises(NotACycle):
        check_cycle(c, 1, c.chain(1, {"y00": 1}))
    shifted = tuple(a + b for a, b in zip(x, c.boundary(2).column(0)))
    assert is_homologous(c, 1, x, shifted)
    assert not is_homologous(c, 1, x, tuple(2 * v for v in x))


def test_homologous_over_z_versus_q():
    rp2 = corpus.projective_plane()
    # a is 2-torsion: a ~ 0 over Q but not over Z
    assert is_homologous(rp2, 1, (1,), (0,), over="Q")
    assert not is_homologous(rp2, 1, (1,), (0,))
    assert is_homologous(rp2, 1, (2,), (0,))


def test_degree_checks():
    c = corpus.theta_graph()
    with pytest.raises(DegreeOutOfRange):
        c.boundary(2)
    with pytest.raises(DegreeOutOfRange):
        c.check_degree(0)


def test_scalar_structure():
    c = corpus.two_vertex_edge()
    s = ScalarStructure(2.0, {0: {"v0": 0.0, "v1": 1.0}})
    assert np.allclose(modified_inner_product(c, s, 0), [1.0, np.exp(2.0)])
    with pytest.raises(MissingScalar):
        s.values(c, 1)
    with pytest.raises(MissingScalar):
        ScalarStructure(1.0, {0: {"v0": 0.0}}).values(c, 0)
    assert ScalarStructure.zero(c).is_zero(c, 0)
    assert s.with_energy(1, "e", 3.0).values(c, 1)[0] == 3.0
    with pytest.raises(ValueError):
        ScalarStructure(0.0)


def test_reduce_two_stage_keeps_top_boundary():
    c = corpus.torus_2x2()
    r = reduce_two_stage(c, 2)
    assert r.boundary(2) == c.boundary(2)
    assert r.size(0) == 0
    assert r.cells(1) == c.cells(1)
    # every 1-chain is a cycle after reduction; H_1 of the pair has rank 8 - 3
    assert homology(r, 1).betti == 5


def test_dual_two_stage_transposes():
    c = corpus.theta_graph()
    y = dual_two_stage(c, 1)
    assert y.boundary(1) == c.boundary(1).T
    assert y.cells(1) == c.cells(0)


def test_subcomplex_and_quotient():
    c = corpus.theta_graph()
    sub = subcomplex(c, {1: ["e1"]})
    assert sub.size(1) == 1 and sub.size(0) == 2
    q = quotient_complex(c, {0: ["v0"]})
    assert q.size(0) == 1
    # relative homology of (theta, v0) in degree 0 vanishes
    assert homology(q, 0).betti == 0
    with pytest.raises(NotAComplex):
        subcomplex(c, {0: ["v0"]})


def test_hash_and_equality():
    assert corpus.torus_2x2() == corpus.torus_2x2()
    assert hash(corpus.theta_graph()) == hash(corpus.theta_graph())
    assert corpus.theta_graph() != corpus.two_gon()
