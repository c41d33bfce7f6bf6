"""Jump process on integral cycles and its cycle-incidence graph.

From an integral (d-1)-cycle z, a jump picks a (d-1)-cell f in the support
of z and a d-cell e with <de, f> != 0, and moves to
    z' = z - z_f <de, f> de.
This stays in the homology class and kills the f-coordinate exactly when the
incidence is +-1, which is why pseudo-regularity is required.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .complex_model import ChainComplex, ScalarStructure, check_cycle
from .errors import NotPseudoRegular, WrongDimension
from .hodge import boltzmann_distribution


def check_pseudo_regular(c: ChainComplex, d: int) -> list[tuple[str, str, int]]:
    """Incidences <de, f> with |value| > 1, as (d-cell, (d-1)-cell, value)."""
    c.check_degree(d)
    dd = c.boundary(d)
    lo, hi = c.cells(d - 1), c.cells(d)
    return [(hi[j], lo[i], dd[i, j]) for i in range(dd.nrows) for j in range(dd.ncols)
            if abs(dd[i, j]) > 1]


def is_pseudo_regular(c: ChainComplex, d: int) -> bool:
    return not check_pseudo_regular(c, d)


@dataclass(frozen=True)
class CycleEdge:
    source: int
    target: int
    f: str
    e: str
    rate: float


@dataclass
class CycleGraph:
    """Explored part of the cycle-incidence graph.

    ``vertices[k]`` is an integer cycle, ``depth[k]`` its BFS depth.
    ``truncated`` is set when a cap stopped the search before it closed.
    """

    complex: ChainComplex
    degree: int
    vertices: list[tuple[int, ...]]
    depth: list[int]
    edges: list[CycleEdge] = field(default_factory=list)
    truncated: bool = False
    truncated_by: str | None = None

    def index(self, cycle: Sequence[int]) -> int | None:
        try:
            return self.vertices.index(tuple(cycle))
        except ValueError:
            return None

    def out_edges(self, k: int) -> list[CycleEdge]:
        return [e for e in self.edges if e.source == k]

    def to_json(self) -> str:
        names = self.complex.cells(self.degree - 1)
        return json.dumps({
            "degree": self.degree,
            "cells": list(names),
            "vertices": [list(v) for v in self.vertices],
            "depth": self.depth,
            "edges": [{"source": e.source, "target": e.target, "f": e.f, "e": e.e, "rate": e.rate}
                      for e in self.edges],
            "truncated": self.truncated,
            "truncated_by": self.truncated_by,
        }, indent=2)


def _rate_values(c, d, s):
    if s is None:
        return None, None
    return s.values(c, d - 1), s.values(c, d)


def _rate(beta, E, W, fi, ej):
    if E is None:
        return 1.0
    return math.exp(beta * (E[fi] - W[ej]))


def jumps(c: ChainComplex, d: int, z: Sequence[int]):
    """Yield (f index, e index, target cycle) for every jump out of ``z`` in (f, e) order."""
    dd = c.boundary(d)
    cols = dd.columns()
    for fi, zf in enumerate(z):
        if zf == 0:
            continue
        for ej in range(dd.ncols):
            inc = dd[fi, ej]
            if inc == 0:
                continue
            k = zf * inc
            yield fi, ej, tuple(zi - k * ci for zi, ci in zip(z, cols[ej]))


def explore(c: ChainComplex, d: int, xhat: Sequence[int], s: ScalarStructure | None = None,
            max_vertices: int = 1000, max_depth: int | None = None) -> CycleGraph:
    """Breadth-first exploration of the cycle-incidence graph from ``xhat``.

    The rate of the jump (f, e) is exp(beta (E(f) - W(e))) with E on
    (d-1)-cells and W on d-cells.  Without ``s`` all rates are 1.
    """
    c.check_degree(d)
    bad = check_pseudo_regular(c, d)
    if bad:
        raise NotPseudoRegular(f"{len(bad)} incidences with |value| > 1", bad)
    start = check_cycle(c, d - 1, [int(v) for v in xhat])
    E, W = _rate_values(c, d, s)
    beta = s.beta if s is not None else 1.0
    fn, en = c.cells(d - 1), c.cells(d)
    g = CycleGraph(c, d, [start], [0])
    seen = {start: 0}
    queue = deque([0])
    while queue:
        k = queue.popleft()
        if max_depth is not None and g.depth[k] >= max_depth:
            g.truncated, g.truncated_by = True, g.truncated_by or "max_depth"
            continue
        for fi, ej, z in jumps(c, d, g.vertices[k]):
            if z not in seen:
                if len(g.vertices) >= max_vertices:
                    g.truncated, g.truncated_by = True, "max_vertices"
                    continue
                seen[z] = len(g.vertices)
                g.vertices.append(z)
                g.depth.append(g.depth[k] + 1)
                queue.append(seen[z])
            g.edges.append(CycleEdge(k, seen[z], fn[fi], en[ej],
                                     _rate(beta, E, W, fi, ej)))
    return g


def follow_path(c: ChainComplex, d: int, xhat: Sequence[int], steps: Sequence[tuple[str, str]]):
    """Apply named jumps (f, e) in order, checking each is a legal move.

    Returns the list of visited cycles, starting with ``xhat``.
    """
    bad = check_pseudo_regular(c, d)
    if bad:
        raise NotPseudoRegular(f"{len(bad)} incidences with |value| > 1", bad)
    z = check_cycle(c, d - 1, [int(v) for v in xhat])
    out = [z]
    for f, e in steps:
        fi, ej = c.index(d - 1, f), c.index(d, e)
        legal = {(a, b): t for a, b, t in jumps(c, d, z)}
        if (fi, ej) not in legal:
            raise ValueError(f"jump ({f}, {e}) is not available from {z}")
        z = legal[(fi, ej)]
        out.append(z)
    return out


def master_operator_d1(c: ChainComplex, s: ScalarStructure):
    """Generator H of the vertex process on a graph (columns sum to 0).

    H[j, i] sums the rates of all jumps from vertex i to vertex j.
    """
    if c.dim != 1:
        raise WrongDimension(f"the master operator is built for graphs, got dimension {c.dim}")
    n = c.size(0)
    if check_pseudo_regular(c, 1):
        raise NotPseudoRegular("graph boundary has entries beyond +-1", check_pseudo_regular(c, 1))
    E, W = _rate_values(c, 1, s)
    H = np.zeros((n, n))
    for i in range(n):
        z = tuple(1 if k == i else 0 for k in range(n))
        for fi, ej, t in jumps(c, 1, z):
            if t == z:
                continue
            j = t.index(1)
            r = _rate(s.beta, E, W, fi, ej)
            H[j, i] += r
            H[i, i] -= r
    return H


def stationary_vector(H: np.ndarray) -> np.ndarray:
    """Probability vector spanning ker H (assumes H is irreducible).

    Grassmann-Taksar-Heyman elimination: only off-diagonal rates are used and
    nothing is subtracted, so every entry keeps full relative accuracy.
    """
    n = H.shape[0]
    Q = np.array(H, dtype=float).T.copy()  # Q[i, j] = rate i -> j
    np.fill_diagonal(Q, 0.0)
    for k in range(n - 1, 0, -1):
        out = Q[k, :k].sum()
        if out <= 0:
            raise ValueError("generator is not irreducible")
        Q[:k, k] /= out
        Q[:k, :k] += np.outer(Q[:k, k], Q[k, :k])
    pi = np.zeros(n)
    pi[0] = 1.0
    for k in range(1, n):
        pi[k] = pi[:k] @ Q[:k, k]
    return pi / pi.sum()


@dataclass(frozen=True)
class StationaryComparison:
    stationary: np.ndarray
    boltzmann: np.ndarray
    max_rel_error: float


def compare_stationary_d1(c: ChainComplex, s: ScalarStructure,
                          start: str | None = None) -> StationaryComparison:
    """Stationary law of the graph process against the Boltzmann distribution of a vertex."""
    if c.dim != 1:
        raise WrongDimension(f"stationarity comparison is for graphs (dimension 1), got {c.dim}")
    H = master_operator_d1(c, s)
    pi = stationary_vector(H)
    v = start if start is not None else c.cells(0)[0]
    rho = boltzmann_distribution(c, 1, s, c.chain(0, {v: 1})).cycle
    err = float(np.max(np.abs(pi - rho) / np.abs(rho)))
    return StationaryComparison(pi, rho, err)
