"""Spanning trees and spanning co-trees of a boundary map.

For a degree d, a spanning tree is a set of d-cells whose boundary columns
form a basis of B_{d-1} over Q; a spanning co-tree is a set of (d-1)-cells
whose span maps isomorphically (over Q) onto C_{d-1}/B_{d-1}.  Both are
bases of column matroids, so enumeration is a depth-first search over
index subsets with an incremental rank test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .complex_model import ChainComplex, ScalarStructure, boundary_lattice, dual_two_stage
from .errors import BudgetExceeded, DegenerateEnergy
from .exact_linalg import IncrementalRank, IntMatrix, determinant, quotient_map, torsion_order

DEFAULT_BUDGET = 10**7


@dataclass(frozen=True)
class SpanningTree:
    cells: tuple[str, ...]
    indices: tuple[int, ...]
    theta: int

    @property
    def dCells(self):  # noqa: N802
        return self.cells


@dataclass(frozen=True)
class SpanningCoTree:
    cells: tuple[str, ...]
    indices: tuple[int, ...]
    a: int

    @property
    def dMinus1Cells(self):  # noqa: N802
        return self.cells

    @property
    def aL(self):  # noqa: N802
        return self.a


def enumerate_bases(columns: Sequence[Sequence], rank: int, budget: int = DEFAULT_BUDGET,
                    order: Sequence[int] | None = None) -> Iterator[tuple[int, ...]]:
    """Yield every ``rank``-subset of column indices that is independent over Q.

    Subsets come out in lexicographic order of positions in ``order``
    (default: natural order).  A dependent prefix prunes its whole subtree.
    ``budget`` bounds the number of search nodes; exceeding it raises
    BudgetExceeded instead of returning a partial list.
    """
    n = len(columns)
    order = list(range(n)) if order is None else list(order)
    visited = 0

    def search(pos, chosen, state):
        nonlocal visited
        need = rank - len(chosen)
        if need == 0:
            yield tuple(sorted(chosen))
            return
        for p in range(pos, n - need + 1):
            visited += 1
            if visited > budget:
                raise BudgetExceeded(f"subset search exceeded the budget of {budget} nodes")
            nxt = state.copy()
            if nxt.try_add(columns[order[p]]):
                yield from search(p + 1, chosen + (order[p],), nxt)

    yield from search(0, (), IncrementalRank())


def _lex_bases(columns, rank, budget):
    return sorted(enumerate_bases(columns, rank, budget))


@lru_cache(maxsize=128)
def _cotree_matroid(c: ChainComplex, d: int) -> IntMatrix:
    """Columns whose bases are exactly the co-trees: a presentation of C_{d-1}/B_{d-1}."""
    return quotient_map(c.boundary(d))


def theta_tree(c: ChainComplex, d: int, indices: Sequence[int]) -> int:
    """Torsion order of coker(Z^T -> C_{d-1}), i.e. of H_{d-1} of the tree."""
    return torsion_order(c.boundary(d).submatrix(None, list(indices)))


def theta_tree_by_determinant(c: ChainComplex, d: int, indices: Sequence[int]) -> int:
    """Same number as ``theta_tree`` via |det| in the saturated basis of B_{d-1}."""
    _, K = boundary_lattice(c, d)
    return abs(determinant(K.submatrix(None, list(indices))))


def theta_complex(c: ChainComplex, d: int) -> int:
    """Order of the torsion subgroup of H_{d-1}(X; Z)."""
    return torsion_order(c.boundary(d))


def a_cotree(c: ChainComplex, d: int, indices: Sequence[int]) -> int:
    """a_L = theta_X * |det G[L^⊥, :]| with G a saturated basis of B_{d-1}."""
    G, _ = boundary_lattice(c, d)
    comp = [i for i in range(c.size(d - 1)) if i not in set(indices)]
    return theta_complex(c, d) * abs(determinant(G.submatrix(comp, None)))


def a_cotree_relative(c: ChainComplex, d: int, indices: Sequence[int]) -> int:
    """a_L = |H_{d-1}(X, L; Z)| = |coker(d_d restricted to the rows outside L)|."""
    keep = set(indices)
    comp = [i for i in range(c.size(d - 1)) if i not in keep]
    return torsion_order(c.boundary(d).submatrix(comp, None))


def tree_rank(c: ChainComplex, d: int) -> int:
    _, K = boundary_lattice(c, d)
    return K.nrows


@lru_cache(maxsize=128)
def _trees(c: ChainComplex, d: int, budget: int) -> tuple[SpanningTree, ...]:
    dd = c.boundary(d)
    r = tree_rank(c, d)
    names = c.cells(d)
    out = []
    for idx in _lex_bases(dd.columns(), r, budget):
        out.append(SpanningTree(tuple(names[i] for i in idx), idx, theta_tree(c, d, idx)))
    return tuple(out)


@lru_cache(maxsize=128)
def _cotrees(c: ChainComplex, d: int, budget: int) -> tuple[SpanningCoTree, ...]:
    Q = _cotree_matroid(c, d)
    names = c.cells(d - 1)
    out = []
    for idx in _lex_bases(Q.columns(), Q.nrows, budget):
        out.append(SpanningCoTree(tuple(names[i] for i in idx), idx, a_cotree(c, d, idx)))
    return tuple(out)


def enumerate_trees(c: ChainComplex, d: int, budget: int = DEFAULT_BUDGET) -> list[SpanningTree]:
    """All d-dimensional spanning trees, lexicographic in cell order."""
    c.check_degree(d)
    return list(_trees(c, d, budget))


def enumerate_cotrees(c: ChainComplex, d: int, budget: int = DEFAULT_BUDGET) -> list[SpanningCoTree]:
    """All (d-1)-dimensional spanning co-trees, lexicographic in cell order."""
    c.check_degree(d)
    return list(_cotrees(c, d, budget))


def greedy_cotree(c: ChainComplex, d: int, s: ScalarStructure | None = None) -> SpanningCoTree:
    """Matroid greedy co-tree.

    With a scalar structure, (d-1)-cells are scanned by increasing energy and
    the result is the unique co-tree minimizing the summed energy; the energy
    must then be injective.  Without one, cells are scanned in cell order.
    """
    c.check_degree(d)
    n = c.size(d - 1)
    order = list(range(n))
    if s is not None:
        E = s.values(c, d - 1)
        if len(set(E.tolist())) != n:
            raise DegenerateEnergy("energy on (d-1)-cells is not injective")
        order = sorted(order, key=lambda i: E[i])
    Q = _cotree_matroid(c, d)
    cols = Q.columns()
    state = IncrementalRank()
    chosen = []
    for i in order:
        if state.rank == Q.nrows:
            break
        if state.try_add(cols[i]):
            chosen.append(i)
    idx = tuple(sorted(chosen))
    names = c.cells(d - 1)
    return SpanningCoTree(tuple(names[i] for i in idx), idx, a_cotree(c, d, idx))


# ---------------------------------------------------------------------------
# Weights
# ---------------------------------------------------------------------------

def _logsumexp(x: np.ndarray) -> float:
    if len(x) == 0:
        return -math.inf
    m = float(np.max(x))
    return m + math.log(float(np.sum(np.exp(x - m))))


@dataclass(frozen=True)
class ForestWeights:
    """Weights of trees (w_T) and co-trees (tau_L), kept in the log domain.

    ``exact`` is set when every exponential factor is 1; then ``tree_exact``
    and ``cotree_exact`` hold the integer weights theta_T^2 and a_L^2.
    """

    trees: tuple[SpanningTree, ...]
    cotrees: tuple[SpanningCoTree, ...]
    log_tree: np.ndarray
    log_cotree: np.ndarray
    exact: bool
    tree_exact: tuple[int, ...] | None = None
    cotree_exact: tuple[int, ...] | None = None

    @property
    def per_tree(self) -> np.ndarray:
        return np.exp(self.log_tree)

    @property
    def per_cotree(self) -> np.ndarray:
        return np.exp(self.log_cotree)

    @property
    def log_delta(self) -> float:
        return _logsumexp(self.log_tree)

    @property
    def log_nabla(self) -> float:
        return _logsumexp(self.log_cotree)

    @property
    def delta(self):
        """Sum of tree weights (exact integer in exact mode)."""
        return sum(self.tree_exact) if self.exact else math.exp(self.log_delta)

    @property
    def nabla(self):
        """Sum of co-tree weights (exact integer in exact mode)."""
        return sum(self.cotree_exact) if self.exact else math.exp(self.log_nabla)

    @property
    def DeltaW(self):  # noqa: N802
        return self.delta

    @property
    def NablaE(self):  # noqa: N802
        return self.nabla

    def tree_probabilities(self):
        if self.exact:
            tot = sum(self.tree_exact)
            return [Fraction(w, tot) for w in self.tree_exact]
        return np.exp(self.log_tree - self.log_delta)

    def cotree_probabilities(self):
        if self.exact:
            tot = sum(self.cotree_exact)
            return [Fraction(w, tot) for w in self.cotree_exact]
        return np.exp(self.log_cotree - self.log_nabla)


def tree_log_weight(c, d, s: ScalarStructure, tree: SpanningTree) -> float:
    W = s.values(c, d)
    return 2.0 * math.log(tree.theta) - s.beta * float(sum(W[i] for i in tree.indices))


def cotree_log_weight(c, d, s: ScalarStructure, cotree: SpanningCoTree) -> float:
    E = s.values(c, d - 1)
    return 2.0 * math.log(cotree.a) - s.beta * float(sum(E[i] for i in cotree.indices))


def weights(c: ChainComplex, d: int, trees: Sequence[SpanningTree],
            cotrees: Sequence[SpanningCoTree], s: ScalarStructure) -> ForestWeights:
    """w_T = theta_T^2 prod e^{-beta W_b},  tau_L = a_L^2 prod e^{-beta E_b}."""
    log_t = np.array([tree_log_weight(c, d, s, t) for t in trees], dtype=float)
    log_l = np.array([cotree_log_weight(c, d, s, L) for L in cotrees], dtype=float)
    exact = s.is_zero(c, d) and s.is_zero(c, d - 1)
    return ForestWeights(
        trees=tuple(trees),
        cotrees=tuple(cotrees),
        log_tree=log_t,
        log_cotree=log_l,
        exact=exact,
        tree_exact=tuple(t.theta ** 2 for t in trees) if exact else None,
        cotree_exact=tuple(L.a ** 2 for L in cotrees) if exact else None,
    )


def forest_weights(c: ChainComplex, d: int, s: ScalarStructure,
                   budget: int = DEFAULT_BUDGET) -> ForestWeights:
    return weights(c, d, enumerate_trees(c, d, budget), enumerate_cotrees(c, d, budget), s)


# ---------------------------------------------------------------------------
# Duality
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DualPair:
    tree: SpanningTree
    dual_cotree: SpanningCoTree


def dualize(c: ChainComplex, d: int, budget: int = DEFAULT_BUDGET) -> list[DualPair]:
    """Pair each tree T of d_d with the co-tree T^⊥ of the transpose.

    The dual co-tree is looked up in an independent enumeration of the dual
    complex, so a missing partner raises rather than being fabricated.
    """
    dual = dual_two_stage(c, d)
    dual_cotrees = {L.indices: L for L in enumerate_cotrees(dual, 1, budget)}
    pairs = []
    m = c.size(d)
    for T in enumerate_trees(c, d, budget):
        comp = tuple(i for i in range(m) if i not in set(T.indices))
        if comp not in dual_cotrees:
            raise AssertionError(f"complement of tree {T.cells} is not a dual co-tree")
        pairs.append(DualPair(T, dual_cotrees[comp]))
    if len(pairs) != len(dual_cotrees):
        raise AssertionError("dual has co-trees that are not complements of trees")
    return pairs
