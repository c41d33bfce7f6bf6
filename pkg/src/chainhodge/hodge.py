"""Weighted pseudo-inverses as forest sums, and the higher Boltzmann distribution.

Every operator here is an average of exact per-forest pieces:

* ``kirchhoff_projection``  p_W^+ : B_{d-1} -> C_d, averaged over spanning trees;
* ``cotree_projection``     i_E^+ : C_{d-1} -> B_{d-1}, averaged over co-trees;
* ``kirchhoff_boltzmann``   the pseudo-inverse of d_d, averaged over pairs;
* ``boltzmann_splitting``   Psi : H_{d-1} -> Z_{d-1}, averaged over co-trees.

B_{d-1} is represented in coordinates of a saturated integral basis ``G``
(see ``complex_model.boundary_lattice``).  Forest pieces are computed over Q
once per complex and cached; the weights are combined in the log domain so
large beta does not underflow.  When all relevant energies vanish the
weights are integers and the result stays exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Sequence

import numpy as np

from .complex_model import (
    ChainComplex,
    ScalarStructure,
    boundary_lattice,
    check_cycle,
    homology,
    modified_inner_product,
)
from .errors import DegenerateEnergy, NotSurjective, RankDeficientBothWays
from .exact_linalg import (
    IntMatrix,
    RatMatrix,
    determinant,
    inverse_exact,
    quotient_map,
    rational_rank,
)
from .forests import (
    DEFAULT_BUDGET,
    cotree_log_weight,
    enumerate_bases,
    enumerate_cotrees,
    enumerate_trees,
    forest_weights,
    greedy_cotree,
)

# ---------------------------------------------------------------------------
# Operator container
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CertificateTerm:
    """One summand: ``weight * summand`` with ``log_weight`` kept for large beta."""

    label: Any
    log_weight: float
    summand: RatMatrix
    exact_weight: int | Fraction | None = None


@dataclass(frozen=True)
class SplittingOperator:
    """A linear map given as a normalized weighted sum of exact pieces.

    ``matrix`` is a float ndarray, or a RatMatrix when ``exact``.
    ``terms`` is the certificate (None when retention was switched off).
    """

    matrix: Any
    source: str
    target: str
    exact: bool
    terms: tuple[CertificateTerm, ...] | None = None
    basis: IntMatrix | None = None

    def as_float(self) -> np.ndarray:
        return self.matrix.to_numpy() if self.exact else np.asarray(self.matrix, dtype=float)

    def recompute(self):
        """Reassemble the matrix from the certificate alone."""
        if self.terms is None:
            raise ValueError("certificate was not retained")
        if self.exact:
            return _exact_average([(t.exact_weight, t.summand) for t in self.terms],
                                  self.matrix.shape)
        return _float_average([t.log_weight for t in self.terms],
                              [t.summand for t in self.terms], self.as_float().shape)

    def certificate_error(self) -> float:
        """Relative distance between ``matrix`` and the certificate recomputation."""
        again = self.recompute()
        if self.exact:
            return 0.0 if again == self.matrix else math.inf
        return relative_error(again, self.as_float())


def relative_error(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    scale = max(np.max(np.abs(b), initial=0.0), 1e-300)
    return float(np.max(np.abs(a - b), initial=0.0) / scale)


def _normalized(log_w: Sequence[float]) -> np.ndarray:
    log_w = np.asarray(log_w, dtype=float)
    m = np.max(log_w)
    p = np.exp(log_w - m)
    return p / p.sum()


def _float_average(log_w, pieces, shape) -> np.ndarray:
    out = np.zeros(shape)
    if len(pieces) == 0:
        return out
    for p, piece in zip(_normalized(log_w), pieces):
        out += p * (piece.to_numpy() if isinstance(piece, RatMatrix) else piece)
    return out


def _exact_average(weighted, shape) -> RatMatrix:
    total = sum(w for w, _ in weighted)
    nr, nc = shape
    acc = [[Fraction(0)] * nc for _ in range(nr)]
    for w, piece in weighted:
        if not w:
            continue
        for i, row in enumerate(piece.rows):
            a = acc[i]
            for j, x in enumerate(row):
                if x:
                    a[j] += w * x
    return RatMatrix([[x / total for x in r] for r in acc], nc)


def _assemble(labels, log_w, exact_w, pieces, shape, source, target, exact, retain, basis=None):
    if exact:
        matrix = _exact_average(list(zip(exact_w, pieces)), shape)
    else:
        matrix = _float_average(log_w, pieces, shape)
    terms = None
    if retain:
        terms = tuple(
            CertificateTerm(lab, float(lw), piece, ew)
            for lab, lw, ew, piece in zip(labels, log_w, exact_w if exact else [None] * len(pieces),
                                          pieces)
        )
    return SplittingOperator(matrix, source, target, exact, terms, basis)


# ---------------------------------------------------------------------------
# Generic weighted Moore-Penrose inverse
# ---------------------------------------------------------------------------

def mp_pseudoinverse_oracle(a, source_weights=None, target_weights=None,
                            general: bool = False) -> np.ndarray:
    """Weighted Moore-Penrose inverse from the normal equations.

    ``source_weights`` / ``target_weights`` are the diagonal inner-product
    weights on the domain / codomain of ``a``.  Full row rank uses
    A^+ = M^-1 Aᵀ (A M^-1 Aᵀ)^-1, full column rank A^+ = (Aᵀ N A)^-1 Aᵀ N.
    Other ranks raise unless ``general`` is set, in which case the weighted
    problem is rescaled to an unweighted one and handed to numpy's SVD pinv.
    """
    a = np.asarray(a.to_numpy() if hasattr(a, "to_numpy") else a, dtype=float)
    m, n = a.shape
    mu = np.ones(n) if source_weights is None else np.asarray(source_weights, dtype=float)
    nu = np.ones(m) if target_weights is None else np.asarray(target_weights, dtype=float)
    if m == 0 or n == 0:
        return np.zeros((n, m))
    rank = np.linalg.matrix_rank(a)
    if rank == m:
        am = a / mu
        return np.linalg.solve(am @ a.T, am).T
    if rank == n:
        an = a * nu[:, None]
        return np.linalg.solve(a.T @ an, an.T)
    if not general:
        raise RankDeficientBothWays("matrix has neither full row nor full column rank")
    sm, sn = np.sqrt(mu), np.sqrt(nu)
    scaled = (a * sn[:, None]) / sm[None, :]
    return (np.linalg.pinv(scaled) / sm[:, None]) * sn[None, :]


def _as_rational(a) -> RatMatrix:
    if isinstance(a, RatMatrix):
        return a
    if isinstance(a, IntMatrix):
        return RatMatrix.from_int(a)
    arr = np.asarray(a)
    return RatMatrix(arr.tolist(), arr.shape[1])


def _log_weights(w, n):
    if w is None:
        return np.zeros(n), True
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    return np.log(w), bool(np.all(w == 1.0))


def mp_summation_surjective(a, source_weights=None, retain: bool = True,
                            budget: int = DEFAULT_BUDGET) -> SplittingOperator:
    """A^+ = (1/nabla) sum_S t_S i_S (A_S)^-1 over invertible column blocks S.

    t_S = det(A_S)^2 / prod_{i in S} mu_i.  Entries of ``a`` are taken
    exactly (floats convert to their exact binary value).
    """
    A = _as_rational(a)
    m, n = A.shape
    if rational_rank(A) != m:
        raise NotSurjective("matrix does not have full row rank")
    log_mu, unit = _log_weights(source_weights, n)
    labels, log_w, exact_w, pieces = [], [], [], []
    for S in enumerate_bases(A.columns(), m, budget):
        block = A.submatrix(None, S)
        det = determinant(block)
        inv = inverse_exact(block)
        rows = [[Fraction(0)] * m for _ in range(n)]
        for k, i in enumerate(S):
            rows[i] = list(inv.row(k))
        labels.append(S)
        log_w.append(2 * math.log(abs(det)) - float(sum(log_mu[i] for i in S)))
        exact_w.append(det * det)
        pieces.append(RatMatrix(rows, m))
    return _assemble(labels, log_w, exact_w, pieces, (n, m), "target", "source", unit, retain)


def mp_summation_injective(a, target_weights=None, retain: bool = True,
                           budget: int = DEFAULT_BUDGET) -> SplittingOperator:
    """Full-column-rank counterpart: sum over invertible row blocks S, t_S = det^2 prod nu_S."""
    A = _as_rational(a)
    m, n = A.shape
    if rational_rank(A) != n:
        raise RankDeficientBothWays("matrix does not have full column rank")
    log_nu, unit = _log_weights(target_weights, m)
    labels, log_w, exact_w, pieces = [], [], [], []
    for S in enumerate_bases(A.rows, n, budget):
        block = A.submatrix(S, None)
        det = determinant(block)
        inv = inverse_exact(block)
        rows = [[Fraction(0)] * m for _ in range(n)]
        for k, i in enumerate(S):
            for r in range(n):
                rows[r][i] = inv[r, k]
        labels.append(S)
        log_w.append(2 * math.log(abs(det)) + float(sum(log_nu[i] for i in S)))
        exact_w.append(det * det)
        pieces.append(RatMatrix(rows, m))
    return _assemble(labels, log_w, exact_w, pieces, (n, m), "target", "source", unit, retain)


# ---------------------------------------------------------------------------
# Exact per-forest pieces (cached per complex and degree)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _tree_pieces(c: ChainComplex, d: int, budget: int) -> tuple[RatMatrix, ...]:
    """phi_T : B_{d-1} (G-coordinates) -> C_d, the inverse of d_d on C_d(T)."""
    _, K = boundary_lattice(c, d)
    r, m = K.shape
    out = []
    for T in enumerate_trees(c, d, budget):
        inv = inverse_exact(K.submatrix(None, T.indices))
        rows = [[Fraction(0)] * r for _ in range(m)]
        for k, i in enumerate(T.indices):
            rows[i] = list(inv.row(k))
        out.append(RatMatrix(rows, r))
    return tuple(out)


@lru_cache(maxsize=64)
def _cotree_pieces(c: ChainComplex, d: int, budget: int) -> tuple[RatMatrix, ...]:
    """zeta_L : C_{d-1} -> B_{d-1}, projection along C_{d-1}(L) in G-coordinates."""
    G, _ = boundary_lattice(c, d)
    n, r = G.shape
    out = []
    for L in enumerate_cotrees(c, d, budget):
        comp = [i for i in range(n) if i not in set(L.indices)]
        inv = inverse_exact(G.submatrix(comp, None))
        rows = [[Fraction(0)] * n for _ in range(r)]
        for k, i in enumerate(comp):
            for q in range(r):
                rows[q][i] = inv[q, k]
        out.append(RatMatrix(rows, n))
    return tuple(out)


def _weights(c, d, s, budget):
    fw = forest_weights(c, d, s, budget)
    exact_trees = s.is_zero(c, d)
    exact_cotrees = s.is_zero(c, d - 1)
    return fw, exact_trees, exact_cotrees


def kirchhoff_projection(c: ChainComplex, d: int, s: ScalarStructure, retain: bool = True,
                         budget: int = DEFAULT_BUDGET) -> SplittingOperator:
    """p_W^+ = (1/Delta_W) sum_T w_T phi_T, a right inverse of d_d onto B_{d-1}."""
    c.check_degree(d)
    fw, exact, _ = _weights(c, d, s, budget)
    G, K = boundary_lattice(c, d)
    pieces = _tree_pieces(c, d, budget)
    ex = [t.theta ** 2 for t in fw.trees]
    return _assemble([t.cells for t in fw.trees], fw.log_tree, ex, pieces,
                     (c.size(d), K.nrows), "B", "C_d", exact, retain, basis=G)


def cotree_projection(c: ChainComplex, d: int, s: ScalarStructure, retain: bool = True,
                      budget: int = DEFAULT_BUDGET) -> SplittingOperator:
    """i_E^+ = (1/nabla_E) sum_L tau_L zeta_L, the E-orthogonal projection onto B_{d-1}."""
    c.check_degree(d)
    fw, _, exact = _weights(c, d, s, budget)
    G, _ = boundary_lattice(c, d)
    pieces = _cotree_pieces(c, d, budget)
    ex = [L.a ** 2 for L in fw.cotrees]
    return _assemble([L.cells for L in fw.cotrees], fw.log_cotree, ex, pieces,
                     (G.ncols, c.size(d - 1)), "C_{d-1}", "B", exact, retain, basis=G)


def kirchhoff_boltzmann(c: ChainComplex, d: int, s: ScalarStructure, retain: bool = True,
                        budget: int = DEFAULT_BUDGET) -> SplittingOperator:
    """Pseudo-inverse of d_d for the E/W inner products, summed over (co-tree, tree) pairs.

    sigma_{L,T} = phi_T ∘ zeta_L is weighted by tau_L w_T.
    """
    c.check_degree(d)
    fw, ex_t, ex_l = _weights(c, d, s, budget)
    exact = ex_t and ex_l
    tp = _tree_pieces(c, d, budget)
    lp = _cotree_pieces(c, d, budget)
    labels, log_w, exact_w, pieces = [], [], [], []
    for L, lw, zeta in zip(fw.cotrees, fw.log_cotree, lp):
        for T, tw, phi in zip(fw.trees, fw.log_tree, tp):
            labels.append((L.cells, T.cells))
            log_w.append(lw + tw)
            exact_w.append(L.a ** 2 * T.theta ** 2)
            pieces.append(phi @ zeta)
    shape = (c.size(d), c.size(d - 1))
    if not pieces:
        return SplittingOperator(RatMatrix.zeros(*shape) if exact else np.zeros(shape),
                                 "C_{d-1}", "C_d", exact, () if retain else None)
    return _assemble(labels, log_w, exact_w, pieces, shape, "C_{d-1}", "C_d", exact, retain)


# ---------------------------------------------------------------------------
# Boltzmann splitting
# ---------------------------------------------------------------------------

def _psi_on(c, d, budget, cycles: IntMatrix) -> tuple[RatMatrix, ...]:
    """psi_L applied to the columns of ``cycles``: the representative supported on L."""
    G, _ = boundary_lattice(c, d)
    Gr = RatMatrix.from_int(G)
    X = RatMatrix.from_int(cycles)
    return tuple(X - Gr @ (zeta @ X) for zeta in _cotree_pieces(c, d, budget))


def boltzmann_splitting(c: ChainComplex, d: int, s: ScalarStructure, retain: bool = True,
                        budget: int = DEFAULT_BUDGET) -> SplittingOperator:
    """Psi : H_{d-1}(X; R) -> Z_{d-1}(X; R), the co-closed splitting of Z -> H.

    The source is written in the free generators of ``homology(c, d-1)``
    (stored in ``basis``); columns of the matrix are the co-closed
    representatives of those generators.
    """
    c.check_degree(d)
    h = homology(c, d - 1)
    fw, _, exact = _weights(c, d, s, budget)
    pieces = _psi_on(c, d, budget, h.free_generators)
    ex = [L.a ** 2 for L in fw.cotrees]
    return _assemble([L.cells for L in fw.cotrees], fw.log_cotree, ex, pieces,
                     (c.size(d - 1), h.betti), "H_{d-1}", "Z_{d-1}", exact, retain,
                     basis=h.free_generators)


@dataclass(frozen=True)
class BoltzmannDistribution:
    """The co-closed real cycle in the class of ``homology_class_input``.

    ``cycle`` is always a float vector; ``cycle_exact`` holds Fractions in
    exact mode.  ``terms`` lists (co-tree cells, normalized weight, psi_L(x)).
    """

    cycle: np.ndarray
    homology_class_input: tuple[int, ...]
    beta: float
    exact: bool
    cycle_exact: tuple[Fraction, ...] | None = None
    terms: tuple | None = None
    degenerate: bool = False
    note: str = ""

    @property
    def homologyClassInput(self):  # noqa: N802
        return self.homology_class_input

    @property
    def betaUsed(self):  # noqa: N802
        return self.beta

    def exact_cycle(self) -> tuple[Fraction, ...]:
        """The cycle as exact rationals: float weights are converted exactly.

        Since every psi_L(x) is an exact cycle, the result is an exact cycle
        whatever rounding the weights carry.
        """
        if self.cycle_exact is not None:
            return self.cycle_exact
        n = len(self.cycle)
        acc = [Fraction(0)] * n
        for _, p, vec in self.terms or ():
            fp = Fraction(float(p))
            for i, x in enumerate(vec):
                acc[i] += fp * x
        return tuple(acc)


def boltzmann_distribution(c: ChainComplex, d: int, s: ScalarStructure, xhat: Sequence[int],
                           budget: int = DEFAULT_BUDGET) -> BoltzmannDistribution:
    """Higher Boltzmann distribution of the integer (d-1)-cycle ``xhat``."""
    c.check_degree(d)
    x = check_cycle(c, d - 1, [int(v) for v in xhat])
    n = c.size(d - 1)
    h = homology(c, d - 1)
    exact = s.is_zero(c, d - 1)
    if h.betti == 0:
        zero = tuple(Fraction(0) for _ in range(n))
        return BoltzmannDistribution(np.zeros(n), x, s.beta, exact, zero if exact else None,
                                     (), True, "H_{d-1} has rank 0; the distribution is zero")
    cotrees = enumerate_cotrees(c, d, budget)
    col = IntMatrix([[v] for v in x], 1)
    psis = [tuple(p.column(0)) for p in _psi_on(c, d, budget, col)]
    if exact:
        w = [L.a ** 2 for L in cotrees]
        tot = sum(w)
        probs = [Fraction(wi, tot) for wi in w]
        vec = tuple(sum((p * v[i] for p, v in zip(probs, psis)), Fraction(0)) for i in range(n))
        cyc = np.array([float(v) for v in vec])
    else:
        probs = _normalized([cotree_log_weight(c, d, s, L) for L in cotrees])
        vec = None
        cyc = np.zeros(n)
        for p, v in zip(probs, psis):
            cyc += p * np.array([float(t) for t in v])
    terms = tuple((L.cells, p, v) for L, p, v in zip(cotrees, probs, psis))
    return BoltzmannDistribution(cyc, x, s.beta, exact, vec, terms)


def boltzmann_oracle(c: ChainComplex, d: int, s: ScalarStructure, xhat: Sequence[int]) -> np.ndarray:
    """Independent route: weighted pseudo-inverse of the quotient C_{d-1} -> C_{d-1}/B_{d-1}.

    The quotient is surjective, so the normal-equation formula applies with
    the E-weights on C_{d-1}; the splitting applied to the class of ``xhat``
    is the co-closed representative.
    """
    Q = quotient_map(c.boundary(d)).to_numpy()
    x = np.asarray(xhat, dtype=float)
    if Q.shape[0] == 0:
        return np.zeros_like(x)
    w = modified_inner_product(c, s, d - 1)
    return mp_pseudoinverse_oracle(Q, source_weights=w) @ (Q @ x)


# ---------------------------------------------------------------------------
# Low temperature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LowTemperatureReport:
    minimizer: Any
    greedy_matches_argmin: bool
    betas: tuple[float, ...]
    table: np.ndarray
    minimizer_share: tuple[float, ...]
    gap: float
    prefactor: float
    beta0: float
    bound_holds: tuple[bool, ...]
    increasing: bool
    limit_cycle: tuple[Fraction, ...] | None = None
    cotrees: tuple = field(default=())


def low_temperature_limit(c: ChainComplex, d: int, s: ScalarStructure, betas: Sequence[float],
                          xhat: Sequence[int] | None = None,
                          budget: int = DEFAULT_BUDGET) -> LowTemperatureReport:
    """Normalized co-tree weights tau_L/nabla across ``betas`` for an injective E.

    With gap delta between the two smallest co-tree energies and
    C = sum_{L != L_min} (a_L / a_min)^2, the minimizer's share is at least
    1 - C e^{-beta delta}, hence at least 1 - e^{-beta delta / 2} once
    beta >= beta0 = 2 ln(C) / delta.
    """
    c.check_degree(d)
    E = s.values(c, d - 1)
    if len(set(E.tolist())) != len(E):
        raise DegenerateEnergy("energy on (d-1)-cells is not injective")
    cotrees = enumerate_cotrees(c, d, budget)
    energy = np.array([float(sum(E[i] for i in L.indices)) for L in cotrees])
    greedy = greedy_cotree(c, d, s)
    k = int(np.argmin(energy))
    matches = cotrees[k].indices == greedy.indices
    others = [i for i in range(len(cotrees)) if i != k]
    gap = float(min(energy[others] - energy[k])) if others else math.inf
    pref = float(sum((cotrees[i].a / cotrees[k].a) ** 2 for i in others))
    beta0 = max(0.0, 2 * math.log(pref) / gap) if pref > 1 and others else 0.0
    log_a2 = np.array([2 * math.log(L.a) for L in cotrees])
    rows, share, holds = [], [], []
    for b in betas:
        p = _normalized(log_a2 - b * energy)
        rows.append(p)
        share.append(float(p[k]))
        holds.append(bool(b < beta0 or p[k] >= 1 - math.exp(-b * gap / 2)))
    order = np.argsort(betas)
    srt = [share[i] for i in order]
    increasing = all(x <= y for x, y in zip(srt, srt[1:]))
    limit = None
    if xhat is not None:
        x = check_cycle(c, d - 1, [int(v) for v in xhat])
        col = IntMatrix([[v] for v in x], 1)
        limit = tuple(_psi_on(c, d, budget, col)[k].column(0))
    return LowTemperatureReport(
        minimizer=cotrees[k],
        greedy_matches_argmin=matches,
        betas=tuple(float(b) for b in betas),
        table=np.array(rows),
        minimizer_share=tuple(share),
        gap=gap,
        prefactor=pref,
        beta0=beta0,
        bound_holds=tuple(holds),
        increasing=increasing,
        limit_cycle=limit,
        cotrees=tuple(cotrees),
    )
