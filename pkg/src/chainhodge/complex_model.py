"""Finite chain complexes with named cells, scalar structures and homology."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Mapping, Sequence

import numpy as np

from .errors import DegreeOutOfRange, MissingScalar, NotAComplex, NotACycle
from .exact_linalg import (
    IntMatrix,
    kernel_basis,
    rational_rank,
    saturated_image_basis,
    smith_normal_form,
)


class ChainComplex:
    """Cells per degree 0..D plus integer boundary matrices.

    ``boundary(k)`` has one column per k-cell and one row per (k-1)-cell.
    Degree 0 has the zero boundary.  Construction validates d∘d = 0, so an
    instance is always a genuine complex.  Instances are immutable and
    hashable, which lets derived data be cached per complex.
    """

    def __init__(self, cell_names: Sequence[Sequence[str]], boundaries: Mapping[int, IntMatrix],
                 validate: bool = True):
        self._cells = tuple(tuple(str(c) for c in names) for names in cell_names)
        bd = {}
        for k in range(1, len(self._cells)):
            m = boundaries.get(k)
            if m is None:
                m = IntMatrix.zeros(len(self._cells[k - 1]), len(self._cells[k]))
            elif not isinstance(m, IntMatrix):
                m = IntMatrix(m, len(self._cells[k]))
            bd[k] = m
        extra = set(boundaries) - set(bd)
        if extra:
            raise NotAComplex(f"boundary given for degrees {sorted(extra)} outside 1..{self.dim}",
                              degree=min(extra))
        self._boundaries = bd
        self._index = tuple({name: i for i, name in enumerate(names)} for names in self._cells)
        if validate:
            self.validate()

    # basic data -----------------------------------------------------------
    @property
    def dim(self) -> int:
        return len(self._cells) - 1

    @property
    def cell_names(self) -> tuple[tuple[str, ...], ...]:
        return self._cells

    def cells(self, k: int) -> tuple[str, ...]:
        if k < 0 or k > self.dim:
            return ()
        return self._cells[k]

    def size(self, k: int) -> int:
        return len(self.cells(k))

    def index(self, k: int, name: str) -> int:
        try:
            return self._index[k][name]
        except (IndexError, KeyError):
            raise KeyError(f"no cell {name!r} in degree {k}") from None

    def boundary(self, k: int) -> IntMatrix:
        """Matrix of d_k: C_k -> C_{k-1} (zero-row matrix for k = 0)."""
        if k < 0 or k > self.dim:
            raise DegreeOutOfRange(f"degree {k} outside 0..{self.dim}")
        if k == 0:
            return IntMatrix.zeros(0, self.size(0))
        return self._boundaries[k]

    def validate(self) -> bool:
        for k, names in enumerate(self._cells):
            if len(set(names)) != len(names):
                raise NotAComplex(f"duplicate cell names in degree {k}", degree=k)
        for k, m in self._boundaries.items():
            if m.shape != (self.size(k - 1), self.size(k)):
                raise NotAComplex(
                    f"boundary {k} has shape {m.shape}, expected {(self.size(k - 1), self.size(k))}",
                    degree=k)
        for k in range(2, self.dim + 1):
            prod = self._boundaries[k - 1] @ self._boundaries[k]
            for i, row in enumerate(prod.rows):
                for j, x in enumerate(row):
                    if x:
                        raise NotAComplex(
                            f"d{k - 1}∘d{k} ≠ 0 at ({self._cells[k - 2][i]}, {self._cells[k][j]})",
                            degree=k, entry=(i, j))
        return True

    def check_degree(self, d: int, low: int = 1) -> None:
        if d < low or d > self.dim:
            raise DegreeOutOfRange(f"degree {d} outside {low}..{self.dim}")

    def chain(self, k: int, coefficients: Mapping[str, int]) -> tuple[int, ...]:
        """Integer k-chain from a ``{cell name: coefficient}`` mapping."""
        vec = [0] * self.size(k)
        for name, c in coefficients.items():
            vec[self.index(k, name)] += int(c)
        return tuple(vec)

    def is_cycle(self, k: int, vec: Sequence) -> bool:
        return all(x == 0 for x in self.boundary(k).apply(vec))

    # identity -------------------------------------------------------------
    def _key(self):
        return self._cells, tuple(self._boundaries[k] for k in sorted(self._boundaries))

    def __eq__(self, other):
        return isinstance(other, ChainComplex) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        sizes = ", ".join(str(len(c)) for c in self._cells)
        return f"ChainComplex(cells per degree: [{sizes}])"


@dataclass(frozen=True)
class ScalarStructure:
    """Inverse temperature plus per-degree cell energies.

    ``energies[k]`` maps k-cell names to reals.  In degree d the energy on
    (d-1)-cells is conventionally called E and the one on d-cells W.
    """

    beta: float = 1.0
    energies: Mapping[int, Mapping[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    def values(self, c: ChainComplex, k: int) -> np.ndarray:
        """Energies of the k-cells in cell order; raises MissingScalar on gaps."""
        emap = self.energies.get(k)
        names = c.cells(k)
        if emap is None:
            if not names:
                return np.zeros(0)
            raise MissingScalar(f"no energies given for degree {k}")
        missing = [n for n in names if n not in emap]
        if missing:
            raise MissingScalar(f"degree {k} cells without energy: {missing}")
        return np.array([float(emap[n]) for n in names], dtype=float)

    def is_zero(self, c: ChainComplex, k: int) -> bool:
        emap = self.energies.get(k, {})
        return all(float(emap.get(n, 0.0)) == 0.0 for n in c.cells(k))

    def with_energy(self, k: int, name: str, value: float) -> "ScalarStructure":
        energies = {kk: dict(v) for kk, v in self.energies.items()}
        energies.setdefault(k, {})[name] = float(value)
        return ScalarStructure(self.beta, energies)

    def with_beta(self, beta: float) -> "ScalarStructure":
        return ScalarStructure(beta, self.energies)

    @classmethod
    def zero(cls, c: ChainComplex, beta: float = 1.0) -> "ScalarStructure":
        return cls(beta, {k: {n: 0.0 for n in c.cells(k)} for k in range(c.dim + 1)})

    @classmethod
    def from_arrays(cls, c: ChainComplex, beta: float, arrays: Mapping[int, Sequence[float]]):
        energies = {}
        for k, vals in arrays.items():
            if len(vals) != c.size(k):
                raise ValueError(f"degree {k}: expected {c.size(k)} energies, got {len(vals)}")
            energies[k] = dict(zip(c.cells(k), (float(v) for v in vals)))
        return cls(beta, energies)


def modified_inner_product(c: ChainComplex, s: ScalarStructure, k: int) -> np.ndarray:
    """Diagonal weights e^{beta E_k(b)} of the modified inner product on C_k."""
    return np.exp(s.beta * s.values(c, k))


def validate(c: ChainComplex) -> bool:
    return c.validate()


# ---------------------------------------------------------------------------
# Homology
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HomologySummary:
    """Integral homology of one degree.

    ``cycle_basis`` columns are a saturated Z-basis of Z_k.  ``boundary_generators``
    spans B_k (the image lattice).  ``presentation`` maps Z_k-basis
    coordinates to the SNF coordinates of H_k = Z_k/B_k: the first
    ``len(torsion_invariants) + units`` coordinates are torsion or trivial,
    the trailing ``betti`` coordinates are free.
    """

    degree: int
    betti: int
    torsion: int
    torsion_invariants: tuple[int, ...]
    cycle_basis: IntMatrix
    boundary_generators: IntMatrix
    presentation: IntMatrix
    class_map: IntMatrix
    free_generators: IntMatrix

    @property
    def bettiNumber(self) -> int:  # noqa: N802
        return self.betti

    @property
    def torsionOrder(self) -> int:  # noqa: N802
        return self.torsion

    def free_coordinates(self, cycle: Sequence) -> tuple:
        """Coordinates of the class of ``cycle`` in H_k ⊗ Q (free part)."""
        return self.class_map.apply(cycle)


@lru_cache(maxsize=256)
def homology(c: ChainComplex, k: int) -> HomologySummary:
    c.check_degree(k, low=0)
    dk = c.boundary(k)
    n = c.size(k)
    snf_k = smith_normal_form(dk)
    r = snf_k.rank
    K = snf_k.right.submatrix(None, range(r, n))
    left_inv = snf_k.right_inverse.submatrix(range(r, n), None)  # Z_k -> Z^z coordinates
    if k + 1 <= c.dim:
        up = c.boundary(k + 1)
    else:
        up = IntMatrix.zeros(n, 0)
    M = left_inv @ up  # boundaries in cycle coordinates
    snf_m = smith_normal_form(M)
    z = n - r
    rr = snf_m.rank
    invariants = tuple(x for x in snf_m.diag if x != 1)
    free_rows = range(rr, z)
    class_map = snf_m.left.submatrix(free_rows, None) @ left_inv if z else IntMatrix.zeros(0, n)
    gens = K @ snf_m.left_inverse.submatrix(None, free_rows) if z else IntMatrix.zeros(n, 0)
    return HomologySummary(
        degree=k,
        betti=z - rr,
        torsion=math.prod(snf_m.diag),
        torsion_invariants=invariants,
        cycle_basis=K,
        boundary_generators=up,
        presentation=snf_m.left,
        class_map=class_map,
        free_generators=gens,
    )


def betti_numbers(c: ChainComplex) -> list[int]:
    return [homology(c, k).betti for k in range(c.dim + 1)]


def check_cycle(c: ChainComplex, k: int, vec: Sequence) -> tuple:
    vec = tuple(vec)
    if len(vec) != c.size(k):
        raise NotACycle(f"chain has length {len(vec)}, expected {c.size(k)}")
    if not c.is_cycle(k, vec):
        raise NotACycle(f"the given {k}-chain has nonzero boundary")
    return vec


def is_homologous(c: ChainComplex, k: int, x: Sequence, y: Sequence, over: str = "Z") -> bool:
    """Whether cycles x and y have the same class (over Z, or over Q with ``over='Q'``)."""
    diff = [Fraction(a) - Fraction(b) for a, b in zip(x, y)]
    if not c.is_cycle(k, diff):
        return False
    h = homology(c, k)
    if over == "Q":
        return all(v == 0 for v in h.class_map.apply(diff))
    if any(v.denominator != 1 for v in diff):
        return False
    up = h.boundary_generators
    if up.ncols == 0:
        return all(v == 0 for v in diff)
    # diff ∈ im(up) over Z  <=>  every SNF coordinate divisible by its invariant, free part zero
    snf = smith_normal_form(up)
    coords = snf.left.apply([int(v) for v in diff])
    for i, v in enumerate(coords):
        if i < snf.rank:
            if v % snf.diag[i]:
                return False
        elif v:
            return False
    return True


# ---------------------------------------------------------------------------
# Derived complexes
# ---------------------------------------------------------------------------

def reduce_two_stage(c: ChainComplex, d: int) -> ChainComplex:
    """The subquotient X^(d)/X^(d-2), as a reduced chain complex.

    Keeps the d- and (d-1)-cells and d_d; lower degrees are emptied and
    d_{d-1} becomes zero, so every (d-1)-chain is a cycle.  Spanning trees,
    co-trees and their torsion numbers depend only on d_d and are therefore
    unchanged.
    """
    c.check_degree(d)
    names = [() for _ in range(d - 1)] + [c.cells(d - 1), c.cells(d)]
    bd = {d: c.boundary(d)}
    return ChainComplex(names, bd)


def dual_two_stage(c: ChainComplex, d: int) -> ChainComplex:
    """Two-stage dual: degree 1 holds the (d-1)-cells, degree 0 the d-cells, d_1 = d_dᵀ."""
    c.check_degree(d)
    return ChainComplex([c.cells(d), c.cells(d - 1)], {1: c.boundary(d).T})


def subcomplex(c: ChainComplex, keep: Mapping[int, Sequence[str]]) -> ChainComplex:
    """Subcomplex on the listed cells (degrees absent from ``keep`` are kept whole).

    Raises NotAComplex if a kept cell has a face that was dropped.
    """
    idx = []
    for k in range(c.dim + 1):
        if k in keep:
            wanted = set(keep[k])
            idx.append([i for i, n in enumerate(c.cells(k)) if n in wanted])
        else:
            idx.append(list(range(c.size(k))))
    bd = {}
    for k in range(1, c.dim + 1):
        m = c.boundary(k)
        kept_rows = set(idx[k - 1])
        for j in idx[k]:
            for i in range(m.nrows):
                if m[i, j] and i not in kept_rows:
                    raise NotAComplex(f"cell {c.cells(k)[j]} has a face outside the subcomplex",
                                      degree=k)
        bd[k] = m.submatrix(idx[k - 1], idx[k])
    names = [[c.cells(k)[i] for i in idx[k]] for k in range(c.dim + 1)]
    return ChainComplex(names, bd, validate=False)


def quotient_complex(c: ChainComplex, sub: Mapping[int, Sequence[str]]) -> ChainComplex:
    """Relative chain complex C(X)/C(A) for a subcomplex A given by its cells per degree."""
    idx = []
    for k in range(c.dim + 1):
        drop = set(sub.get(k, ()))
        idx.append([i for i, n in enumerate(c.cells(k)) if n not in drop])
    bd = {k: c.boundary(k).submatrix(idx[k - 1], idx[k]) for k in range(1, c.dim + 1)}
    names = [[c.cells(k)[i] for i in idx[k]] for k in range(c.dim + 1)]
    return ChainComplex(names, bd, validate=False)


def skeleton_cells(c: ChainComplex, upto: int) -> dict[int, tuple[str, ...]]:
    return {k: c.cells(k) for k in range(0, min(upto, c.dim) + 1)}


def brute_force_betti(c: ChainComplex, k: int) -> int:
    """Betti number from ranks alone: dim C_k - rank d_k - rank d_{k+1}."""
    up = rational_rank(c.boundary(k + 1)) if k + 1 <= c.dim else 0
    return c.size(k) - rational_rank(c.boundary(k)) - up


@lru_cache(maxsize=256)
def boundary_lattice(c: ChainComplex, d: int) -> tuple[IntMatrix, IntMatrix]:
    """Saturated basis ``G`` of B_{d-1} and integer coordinates ``K`` with d_d = G K."""
    c.check_degree(d)
    dd = c.boundary(d)
    G = saturated_image_basis(dd)
    snf = smith_normal_form(dd)
    # G = U^{-1}[:, :r]; coordinates are the first r rows of U @ d_d
    K = snf.left.submatrix(range(snf.rank), None) @ dd
    return G, K


def cycle_lattice_basis(c: ChainComplex, k: int) -> IntMatrix:
    return kernel_basis(c.boundary(k))
