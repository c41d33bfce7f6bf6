"""Biased Laplacian on B_{d-1} and its forest expansion."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .complex_model import ChainComplex, ScalarStructure, boundary_lattice, dual_two_stage
from .errors import NotATreeComplex
from .exact_linalg import (
    IntMatrix,
    RatMatrix,
    determinant,
    gram_covolume_sq,
    image_basis,
    inverse_exact,
    rational_rank,
    solve_exact,
    torsion_order,
)
from .forests import DEFAULT_BUDGET, enumerate_cotrees, forest_weights, theta_complex


@dataclass(frozen=True)
class BiasedLaplacian:
    """L = d D_W dᵀ D_E restricted to B_{d-1}, with D_W = e^{-beta W}, D_E = e^{beta E}.

    ``matrix_on_b`` is written in the saturated basis ``basis`` of B_{d-1};
    ``dual_matrix`` is dᵀ D_E d D_W on B^d in the saturated basis of im dᵀ.
    Both have the same determinant.

    With d = G K, the matrix on B is (K D_W Kᵀ)(Gᵀ D_E G), a product of two
    Gram matrices.  In float mode ``factors`` holds their square roots
    (sqrt(D_W) Kᵀ, sqrt(D_E) G) and ``dual_factors`` the same for the dual;
    determinants are taken from QR of these so conditioning is not squared.
    """

    matrix_on_b: object
    dual_matrix: object
    basis: IntMatrix
    dual_basis: IntMatrix
    exact: bool
    factors: tuple = ()
    dual_factors: tuple = ()

    @property
    def matrixOnB(self):  # noqa: N802
        return self.matrix_on_b

    @property
    def dualMatrix(self):  # noqa: N802
        return self.dual_matrix

    def logdet(self) -> tuple[float, float]:
        """(sign, log|det|) of the operator on B_{d-1}."""
        if not self.exact:
            return 1.0, sum(_gram_logdet(f) for f in self.factors)
        m = self.matrix_on_b.to_numpy()
        if m.shape[0] == 0:
            return 1.0, 0.0
        sign, ld = np.linalg.slogdet(m)
        return float(sign), float(ld)

    def det(self):
        if self.exact:
            return determinant(self.matrix_on_b)
        sign, ld = self.logdet()
        return sign * math.exp(ld)

    def dual_det(self):
        if self.exact:
            return determinant(self.dual_matrix)
        return math.exp(sum(_gram_logdet(f) for f in self.dual_factors))


def _gram_logdet(f: np.ndarray) -> float:
    """log det(fᵀ f) for f of full column rank."""
    if f.shape[1] == 0:
        return 0.0
    r = np.linalg.qr(f, mode="r")
    return float(2 * np.log(np.abs(np.diag(r))).sum())


def _restrict(op, basis):
    """Matrix of ``op`` (which preserves span(basis)) in the columns of ``basis``."""
    if isinstance(op, RatMatrix):
        Gr = RatMatrix.from_int(basis)
        return solve_exact(Gr.T @ Gr, Gr.T @ (op @ Gr))
    G = basis.to_numpy()
    if G.shape[1] == 0:
        return np.zeros((0, 0))
    return np.linalg.solve(G.T @ G, G.T @ op @ G)


def _diag_rat(values) -> RatMatrix:
    n = len(values)
    return RatMatrix([[values[i] if i == j else 0 for j in range(n)] for i in range(n)], n)


def biased_laplacian(c: ChainComplex, d: int, s: ScalarStructure) -> BiasedLaplacian:
    c.check_degree(d)
    dd = c.boundary(d)
    G, K = boundary_lattice(c, d)
    Gd, Kd = boundary_lattice(dual_two_stage(c, d), 1)
    exact = s.is_zero(c, d) and s.is_zero(c, d - 1)
    if exact:
        D = RatMatrix.from_int(dd)
        return BiasedLaplacian(_restrict(D @ D.T, G), _restrict(D.T @ D, Gd), G, Gd, True)
    DW = np.exp(-s.beta * s.values(c, d))
    DE = np.exp(s.beta * s.values(c, d - 1))
    g, k, gd, kd = (m.to_numpy() for m in (G, K, Gd, Kd))
    # d D_W dᵀ D_E G = G (K D_W Kᵀ)(Gᵀ D_E G), and likewise on the dual side
    on_b = ((k * DW) @ k.T) @ ((g.T * DE) @ g)
    dual = ((kd * DE) @ kd.T) @ ((gd.T * DW) @ gd)
    factors = (np.sqrt(DW)[:, None] * k.T, np.sqrt(DE)[:, None] * g)
    dual_factors = (np.sqrt(DE)[:, None] * kd.T, np.sqrt(DW)[:, None] * gd)
    return BiasedLaplacian(on_b, dual, G, Gd, False, factors, dual_factors)


@dataclass(frozen=True)
class MatrixTreeReport:
    """Both sides of the forest expansion of det L.

    ``*_stated`` compares det L with (1/theta_X^2) nabla_E Delta_W.
    ``*_gauged`` multiplies that by exp(beta * sum of E over (d-1)-cells),
    the factor contributed by D_E on the complement of each co-tree.
    """

    lhs: float | Fraction
    rhs_stated: float | Fraction
    rhs_gauged: float | Fraction
    log_lhs: float
    log_rhs_stated: float
    log_gauge: float
    rel_error_stated: float
    rel_error_gauged: float
    exact: bool
    theta_x: int
    sign: float

    def ok_stated(self, tol: float = 1e-9) -> bool:
        return self.rel_error_stated <= tol

    def ok_gauged(self, tol: float = 1e-9) -> bool:
        return self.rel_error_gauged <= tol


def verify_matrix_tree(c: ChainComplex, d: int, s: ScalarStructure,
                       budget: int = DEFAULT_BUDGET, tree_factor: float = 1.0) -> MatrixTreeReport:
    """Compare det L with its forest expansion.

    ``tree_factor`` multiplies the weight of the first tree; anything but 1
    is a deliberate fault used to check that the comparison can fail.
    """
    lap = biased_laplacian(c, d, s)
    fw = forest_weights(c, d, s, budget)
    theta = theta_complex(c, d)
    log_tree = fw.log_tree.copy()
    if tree_factor != 1.0 and len(log_tree):
        log_tree[0] += math.log(tree_factor)
    m = max(log_tree)
    log_delta = m + math.log(float(np.sum(np.exp(log_tree - m))))
    log_rhs = fw.log_nabla + log_delta - 2 * math.log(theta)
    log_gauge = s.beta * float(np.sum(s.values(c, d - 1)))
    if lap.exact and tree_factor == 1.0:
        lhs = lap.det()
        rhs = Fraction(fw.nabla * fw.delta, theta ** 2)
        err = 0.0 if lhs == rhs else abs(float(lhs / rhs) - 1)
        return MatrixTreeReport(lhs, rhs, rhs, math.log(lhs) if lhs > 0 else -math.inf,
                                log_rhs, 0.0, err, err, True, theta, 1.0 if lhs > 0 else -1.0)
    sign, log_lhs = lap.logdet()
    err_s = abs(math.expm1(log_lhs - log_rhs)) if sign > 0 else math.inf
    err_g = abs(math.expm1(log_lhs - log_rhs - log_gauge)) if sign > 0 else math.inf
    return MatrixTreeReport(
        lhs=sign * math.exp(log_lhs),
        rhs_stated=math.exp(log_rhs),
        rhs_gauged=math.exp(log_rhs + log_gauge),
        log_lhs=log_lhs,
        log_rhs_stated=log_rhs,
        log_gauge=log_gauge,
        rel_error_stated=err_s,
        rel_error_gauged=err_g,
        exact=False,
        theta_x=theta,
        sign=sign,
    )


def pseudo_inverse_A(c: ChainComplex, d: int, s: ScalarStructure):  # noqa: N802
    """A = D_W dᵀ D_E L^{-1} : B_{d-1} -> C_d in G-coordinates (a right inverse of d)."""
    lap = biased_laplacian(c, d, s)
    G = lap.basis
    dd = c.boundary(d)
    if lap.exact:
        D = RatMatrix.from_int(dd)
        return D.T @ RatMatrix.from_int(G) @ inverse_exact(lap.matrix_on_b)
    DW = np.exp(-s.beta * s.values(c, d))
    DE = np.exp(s.beta * s.values(c, d - 1))
    left = (dd.to_numpy().T * DE[None, :]) @ G.to_numpy() * DW[:, None]
    if G.ncols == 0:
        return np.zeros((c.size(d), 0))
    return np.linalg.solve(lap.matrix_on_b.T, left.T).T


def log_det_gradient_W(c: ChainComplex, d: int, s: ScalarStructure) -> np.ndarray:  # noqa: N802
    """d(ln det L)/dW_b = -beta (A d)_{bb}."""
    A = pseudo_inverse_A(c, d, s)
    _, K = boundary_lattice(c, d)
    A = A.to_numpy() if isinstance(A, RatMatrix) else A
    return -s.beta * np.diag(A @ K.to_numpy())


@dataclass(frozen=True)
class LemmaReport:
    """Identities for an injective boundary d: C_d -> C_{d-1} and its transpose Y."""

    det_laplacian: int | Fraction
    mu_x: int
    theta_x: int
    theta_y: int
    mu_y: int
    cotree_sum: int
    a_vs_dual_theta: tuple[tuple[tuple[str, ...], int, int], ...]

    @property
    def checks(self) -> dict[str, bool]:
        return {
            "det_equals_mu_x": self.det_laplacian == self.mu_x,
            "theta_x_equals_theta_y": self.theta_x == self.theta_y,
            "mu_y_equals_theta_y_sq": self.mu_y == self.theta_y ** 2,
            "a_equals_dual_theta": all(a == t for _, a, t in self.a_vs_dual_theta),
            "mu_x_equals_cotree_sum": self.mu_x == self.cotree_sum,
        }

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def verify_lemma_final(c: ChainComplex, d: int = 1, budget: int = DEFAULT_BUDGET) -> LemmaReport:
    """Check the identities that hold when d_d is injective over Q (unweighted)."""
    c.check_degree(d)
    dd = c.boundary(d)
    if rational_rank(dd) != dd.ncols:
        raise NotATreeComplex("boundary is not injective over Q; X is not its own spanning tree")
    lap = biased_laplacian(c, d, ScalarStructure.zero(c, 1.0))
    det_l = lap.det()
    mu_x = gram_covolume_sq(dd)
    theta_x = theta_complex(c, d)
    y = dual_two_stage(c, d)
    dy = y.boundary(1)
    theta_y = torsion_order(dy)
    mu_y = gram_covolume_sq(image_basis(dy)) if dy.ncols and rational_rank(dy) else 1
    rows = []
    for L in enumerate_cotrees(c, d, budget):
        comp = [i for i in range(c.size(d - 1)) if i not in set(L.indices)]
        rows.append((L.cells, L.a, torsion_order(dy.submatrix(None, comp))))
    return LemmaReport(det_l, mu_x, theta_x, theta_y, mu_y,
                       sum(a * a for _, a, _ in rows), tuple(rows))
