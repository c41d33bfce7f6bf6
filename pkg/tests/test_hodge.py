from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chainhodge import corpus
from chainhodge.complex_model import ScalarStructure, boundary_lattice, homology
from chainhodge.errors import DegenerateEnergy, NotACycle, NotSurjective, RankDeficientBothWays
from chainhodge.exact_linalg import RatMatrix
from chainhodge.forests import enumerate_cotrees, enumerate_trees
from chainhodge.hodge import (
    boltzmann_distribution,
    boltzmann_oracle,
    boltzmann_splitting,
    cotree_projection,
    kirchhoff_boltzmann,
    kirchhoff_projection,
    low_temperature_limit,
    mp_pseudoinverse_oracle,
    mp_summation_injective,
    mp_summation_surjective,
    relative_error,
)


def _case(seed, max_cells=5):
    rng = np.random.default_rng(seed)
    while True:
        c = corpus.random_complex(rng, top=3, max_cells=max_cells)
        d = int(rng.integers(1, c.dim + 1))
        if len(enumerate_trees(c, d)) * len(enumerate_cotrees(c, d)) <= 300:
            s = ScalarStructure(float(rng.uniform(0.2, 2.0)), corpus.random_energies(rng, c, [d - 1, d]))
            return rng, c, d, s


# --- generic summation formulas ---------------------------------------------

def test_oracle_shapes_and_identities():
    A = np.array([[1.0, 2.0, 0.0], [0.0, 1.0, 1.0]])
    P = mp_pseudoinverse_oracle(A, source_weights=[1.0, 2.0, 3.0])
    assert P.shape == (3, 2)
    assert np.allclose(A @ P, np.eye(2))
    P = mp_pseudoinverse_oracle(A.T, target_weights=[1.0, 2.0, 3.0])
    assert np.allclose(P @ A.T, np.eye(2))
    with pytest.raises(RankDeficientBothWays):
        mp_pseudoinverse_oracle(np.ones((2, 3)))
    G = mp_pseudoinverse_oracle(np.ones((2, 3)), general=True)
    assert np.allclose(G, np.linalg.pinv(np.ones((2, 3))))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_summation_surjective_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 4))
    A = rng.normal(size=(m, m + int(rng.integers(0, 3))))
    w = rng.uniform(0.1, 5.0, size=A.shape[1])
    op = mp_summation_surjective(A, w)
    assert relative_error(op.as_float(), mp_pseudoinverse_oracle(A, source_weights=w)) < 1e-10
    assert op.certificate_error() < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_summation_injective_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    A = rng.normal(size=(n + int(rng.integers(0, 3)), n))
    w = rng.uniform(0.1, 5.0, size=A.shape[0])
    op = mp_summation_injective(A, w)
    assert relative_error(op.as_float(), mp_pseudoinverse_oracle(A, target_weights=w)) < 1e-10


def test_summation_exact_for_integer_input():
    op = mp_summation_surjective(RatMatrix([[1, 1]]))
    assert op.exact
    assert op.matrix == RatMatrix([[Fraction(1, 2)], [Fraction(1, 2)]])
    assert op.recompute() == op.matrix


def test_summation_rejects_rank_deficiency():
    with pytest.raises(NotSurjective):
        mp_summation_surjective(np.array([[1.0, 2.0], [2.0, 4.0]]))
    with pytest.raises(RankDeficientBothWays):
        mp_summation_injective(np.array([[1.0, 2.0], [2.0, 4.0]]))


# --- operators on a complex -------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_projections_match_oracles(seed):
    _, c, d, s = _case(seed)
    G, K = boundary_lattice(c, d)
    mu = np.exp(s.beta * s.values(c, d))
    nu = np.exp(s.beta * s.values(c, d - 1))
    D = c.boundary(d).to_numpy()
    kb = kirchhoff_boltzmann(c, d, s)
    assert relative_error(kb.as_float(), mp_pseudoinverse_oracle(D, mu, nu, general=True)) < 1e-10
    assert kb.certificate_error() < 1e-12
    if K.nrows:
        kp = kirchhoff_projection(c, d, s).as_float()
        cp = cotree_projection(c, d, s).as_float()
        assert relative_error(kp, mp_pseudoinverse_oracle(K, source_weights=mu)) < 1e-10
        assert relative_error(cp, mp_pseudoinverse_oracle(G, target_weights=nu)) < 1e-10
        # p_W^+ is a right inverse of d in G-coordinates; i_E^+ a left inverse of G
        assert np.allclose(K.to_numpy() @ kp, np.eye(K.nrows))
        assert np.allclose(cp @ G.to_numpy(), np.eye(K.nrows))


def test_exact_mode_on_theta_graph():
    c = corpus.theta_graph()
    s = ScalarStructure.zero(c)
    kb = kirchhoff_boltzmann(c, 1, s)
    assert kb.exact
    # unweighted pseudo-inverse of [-1 -1 -1; 1 1 1]
    third = Fraction(1, 6)
    assert kb.matrix == RatMatrix([[-third, third]] * 3)
    assert kb.recompute() == kb.matrix


def test_splitting_columns_are_coclosed_cycles():
    c = corpus.torus_2x2()
    s = ScalarStructure(1.0, corpus.random_energies(np.random.default_rng(0), c, [1, 2]))
    psi = boltzmann_splitting(c, 2, s)
    assert psi.as_float().shape == (8, 2)
    M = psi.as_float()
    assert np.allclose(c.boundary(1).to_numpy() @ M, 0)
    wE = np.exp(s.values(c, 1))
    assert np.allclose(c.boundary(2).to_numpy().T @ (wE[:, None] * M), 0)
    h = homology(c, 1)
    assert np.allclose(h.class_map.to_numpy() @ M, np.eye(2))


def test_torus_meridian_unweighted_is_harmonic():
    c = corpus.torus_2x2()
    x = corpus.torus_meridian(c)
    res = boltzmann_distribution(c, 2, ScalarStructure.zero(c), x)
    assert res.exact
    half = Fraction(1, 2)
    assert res.cycle_exact == (0, 0, 0, 0, half, half, half, half)
    assert np.allclose(res.cycle, boltzmann_oracle(c, 2, ScalarStructure.zero(c), x))


def test_graph_gives_classical_boltzmann():
    c = corpus.complete_graph(4)
    E = {"v0": 0.0, "v1": 0.3, "v2": -1.0, "v3": 2.0}
    s = ScalarStructure(1.7, {0: E, 1: {n: 0.0 for n in c.cells(1)}})
    rho = boltzmann_distribution(c, 1, s, c.chain(0, {"v2": 1})).cycle
    ref = np.exp(-1.7 * np.array(list(E.values())))
    assert np.allclose(rho, ref / ref.sum(), rtol=1e-13)


def test_two_vertex_exact_values():
    c = corpus.two_vertex_edge()
    res = boltzmann_distribution(c, 1, ScalarStructure.zero(c), (1, 0))
    assert res.cycle_exact == (Fraction(1, 2), Fraction(1, 2))


def test_boundary_cycle_gives_zero():
    c = corpus.theta_graph()
    s = ScalarStructure(1.0, {0: {"v0": 0.2, "v1": -0.4}})
    # a difference of vertices is a boundary in degree 0
    res = boltzmann_distribution(c, 1, s, (1, -1))
    assert np.allclose(res.cycle, 0)


def test_degenerate_when_no_free_homology():
    c = corpus.moore_mod2()
    res = boltzmann_distribution(c, 1, ScalarStructure.zero(c), (1,))
    assert res.degenerate and res.cycle_exact == (0,)


def test_rejects_non_cycle():
    c = corpus.torus_2x2()
    with pytest.raises(NotACycle):
        boltzmann_distribution(c, 2, ScalarStructure.zero(c), c.chain(1, {"x00": 1}))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_distribution_postconditions(seed):
    rng, c, d, s = _case(seed)
    h = homology(c, d - 1)
    if not h.betti:
        return
    x = [int(v) for v in h.free_generators.column(int(rng.integers(0, h.betti)))]
    res = boltzmann_distribution(c, d, s, x)
    # each term is supported on its co-tree and homologous to x
    for cells, _, vec in res.terms:
        support = {c.cells(d - 1)[i] for i, v in enumerate(vec) if v}
        assert support <= set(cells)
        assert h.class_map.apply(vec) == tuple(Fraction(v) for v in h.class_map.apply(x))
    exact = res.exact_cycle()
    if d >= 2:
        assert all(v == 0 for v in c.boundary(d - 1).apply(exact))
    assert relative_error(res.cycle, boltzmann_oracle(c, d, s, x)) < 1e-10


def test_certificate_can_be_dropped():
    c = corpus.theta_graph()
    op = cotree_projection(c, 1, ScalarStructure.zero(c), retain=False)
    assert op.terms is None
    with pytest.raises(ValueError):
        op.recompute()


# --- low temperature --------------------------------------------------------

def test_low_temperature_on_torus():
    c = corpus.torus_2x2()
    E = dict(zip(c.cells(1), [0.1 * k for k in range(8)]))
    s = ScalarStructure(1.0, {1: E, 2: {n: 0.0 for n in c.cells(2)}})
    rep = low_temperature_limit(c, 2, s, [1.0, 10.0, 50.0, 100.0], xhat=corpus.torus_meridian(c))
    assert rep.greedy_matches_argmin
    assert rep.increasing
    assert all(rep.bound_holds)
    assert rep.minimizer_share[-1] > 1 - 1e-3
    assert np.allclose(rep.table.sum(axis=1), 1.0)
    # the limit representative lives on the minimizing co-tree
    support = {c.cells(1)[i] for i, v in enumerate(rep.limit_cycle) if v}
    assert support <= set(rep.minimizer.cells)


def test_low_temperature_requires_injective_energy():
    c = corpus.theta_graph()
    s = ScalarStructure(1.0, {0: {"v0": 0.0, "v1": 0.0}})
    with pytest.raises(DegenerateEnergy):
        low_temperature_limit(c, 1, s, [1.0])
