"""Small named complexes and seeded random generators used by tests and the CLI."""

from __future__ import annotations

import itertools

import numpy as np

from .complex_model import ChainComplex
from .exact_linalg import IntMatrix, kernel_basis


def graph(vertices, edges) -> ChainComplex:
    """1-dimensional complex; ``edges`` is a list of (name, tail, head).

    The boundary of an edge is head - tail; a loop has zero boundary.
    """
    vertices = list(vertices)
    vidx = {v: i for i, v in enumerate(vertices)}
    rows = [[0] * len(edges) for _ in vertices]
    for j, (_, tail, head) in enumerate(edges):
        rows[vidx[tail]][j] -= 1
        rows[vidx[head]][j] += 1
    return ChainComplex([vertices, [e[0] for e in edges]], {1: IntMatrix(rows, len(edges))})


def two_vertex_edge() -> ChainComplex:
    return graph(["v0", "v1"], [("e", "v0", "v1")])


def theta_graph() -> ChainComplex:
    return graph(["v0", "v1"], [("e1", "v0", "v1"), ("e2", "v0", "v1"), ("e3", "v0", "v1")])


def circle() -> ChainComplex:
    return graph(["v"], [("loop", "v", "v")])


def two_gon() -> ChainComplex:
    return graph(["v0", "v1"], [("a", "v0", "v1"), ("b", "v1", "v0")])


def complete_graph(n: int = 4) -> ChainComplex:
    verts = [f"v{i}" for i in range(n)]
    edges = [(f"e{i}{j}", verts[i], verts[j]) for i, j in itertools.combinations(range(n), 2)]
    return graph(verts, edges)


def moore_mod2() -> ChainComplex:
    """Two-stage complex Z --x2--> Z (use with d = 1)."""
    return ChainComplex([["a"], ["e"]], {1: IntMatrix([[2]])})


def projective_plane() -> ChainComplex:
    """Minimal CW structure on RP^2: one cell per degree, d_2 = 2 (use with d = 2)."""
    return ChainComplex([["p"], ["a"], ["e"]], {1: IntMatrix([[0]]), 2: IntMatrix([[2]])})


def torus_2x2() -> ChainComplex:
    """The 2x2 square torus: 4 vertices, 8 edges, 4 faces.

    Vertex ``p{i}{j}`` sits at (i, j), indices mod 2.  Edge ``x{i}{j}`` runs
    from (i, j) to (i+1, j) and ``y{i}{j}`` from (i, j) to (i, j+1).  Faces:
    e1 top-left, e2 top-right, e3 bottom-left, e4 bottom-right.  e1, e3 and
    e4 are counter-clockwise and e2 is clockwise, which makes the alternating
    jump sequence from the meridian y00 + y01 read x + k(de1 - de2).
    """
    verts = [f"p{i}{j}" for j in range(2) for i in range(2)]
    edges = [f"x{i}{j}" for j in range(2) for i in range(2)] + \
            [f"y{i}{j}" for j in range(2) for i in range(2)]
    vi = {v: k for k, v in enumerate(verts)}
    ei = {e: k for k, e in enumerate(edges)}
    d1 = [[0] * len(edges) for _ in verts]
    for i in range(2):
        for j in range(2):
            x = ei[f"x{i}{j}"]
            d1[vi[f"p{i}{j}"]][x] -= 1
            d1[vi[f"p{(i + 1) % 2}{j}"]][x] += 1
            y = ei[f"y{i}{j}"]
            d1[vi[f"p{i}{j}"]][y] -= 1
            d1[vi[f"p{i}{(j + 1) % 2}"]][y] += 1
    faces = [("e1", 0, 1, 1), ("e2", 1, 1, -1), ("e3", 0, 0, 1), ("e4", 1, 0, 1)]
    d2 = [[0] * len(faces) for _ in edges]
    for col, (_, i, j, sign) in enumerate(faces):
        d2[ei[f"x{i}{j}"]][col] += sign
        d2[ei[f"y{(i + 1) % 2}{j}"]][col] += sign
        d2[ei[f"x{i}{(j + 1) % 2}"]][col] -= sign
        d2[ei[f"y{i}{j}"]][col] -= sign
    return ChainComplex([verts, edges, [f[0] for f in faces]],
                        {1: IntMatrix(d1, len(edges)), 2: IntMatrix(d2, len(faces))})


def torus_meridian(c: ChainComplex) -> tuple[int, ...]:
    return c.chain(1, {"y00": 1, "y01": 1})


# ---------------------------------------------------------------------------
# Random generators (all driven by an explicit numpy Generator)
# ---------------------------------------------------------------------------

def random_connected_graph(rng: np.random.Generator, n_vertices: int,
                           extra_edges: int | None = None, loops: bool = True) -> ChainComplex:
    """Random spanning tree plus extra (possibly parallel) edges, random orientations."""
    verts = [f"v{i}" for i in range(n_vertices)]
    edges = []
    order = rng.permutation(n_vertices)
    for k in range(1, n_vertices):
        a = int(order[k])
        b = int(order[rng.integers(0, k)])
        edges.append((a, b))
    if extra_edges is None:
        extra_edges = int(rng.integers(0, n_vertices + 1))
    for _ in range(extra_edges):
        a, b = (int(x) for x in rng.integers(0, n_vertices, size=2))
        if a == b and not loops:
            continue
        edges.append((a, b))
    named = []
    for k, (a, b) in enumerate(edges):
        if rng.random() < 0.5:
            a, b = b, a
        named.append((f"e{k}", verts[a], verts[b]))
    return graph(verts, named)


def _random_columns_in_kernel(rng, lower: IntMatrix, n_new: int, coeff: int, n_rows: int):
    """Columns that are small random integer combinations of a kernel basis of ``lower``."""
    if lower.nrows == 0:
        K = IntMatrix.identity(n_rows)
    else:
        K = kernel_basis(lower)
    if K.ncols == 0:
        return IntMatrix.zeros(n_rows, n_new)
    coeffs = rng.integers(-coeff, coeff + 1, size=(K.ncols, n_new))
    # zero out some coefficients for sparser boundaries
    coeffs = coeffs * (rng.random(size=coeffs.shape) < 0.6)
    return K @ IntMatrix(coeffs.tolist(), n_new)


def random_complex(rng: np.random.Generator, top: int = 3, max_cells: int = 6,
                   coeff: int = 2) -> ChainComplex:
    """Random chain complex in degrees 0..top with at most ``max_cells`` cells per degree.

    Each boundary is built from the integral kernel of the one below it, so
    d∘d = 0 holds by construction; torsion arises from the random coefficients.
    """
    sizes = [int(rng.integers(1, max_cells + 1)) for _ in range(top + 1)]
    names = [[f"c{k}_{i}" for i in range(n)] for k, n in enumerate(sizes)]
    bd = {}
    for k in range(1, top + 1):
        lower = bd.get(k - 1, IntMatrix.zeros(0, sizes[0]))
        bd[k] = _random_columns_in_kernel(rng, lower, sizes[k], coeff, sizes[k - 1])
    return ChainComplex(names, bd)


def random_two_stage(rng: np.random.Generator, max_cells: int = 6, entry: int = 2,
                     n_rows: int | None = None, n_cols: int | None = None) -> ChainComplex:
    """Two-stage complex (degrees 0, 1) with a random integer boundary; use d = 1."""
    nr = int(rng.integers(1, max_cells + 1)) if n_rows is None else n_rows
    nc = int(rng.integers(1, max_cells + 1)) if n_cols is None else n_cols
    m = rng.integers(-entry, entry + 1, size=(nr, nc))
    return ChainComplex([[f"q{i}" for i in range(nr)], [f"p{j}" for j in range(nc)]],
                        {1: IntMatrix(m.tolist(), nc)})


def random_injective_two_stage(rng: np.random.Generator, max_rows: int = 5,
                               entry: int = 3) -> ChainComplex:
    """Two-stage complex whose boundary has full column rank over Q (entries in [-entry, entry])."""
    from .exact_linalg import rational_rank

    while True:
        nr = int(rng.integers(1, max_rows + 1))
        nc = int(rng.integers(1, nr + 1))
        m = IntMatrix(rng.integers(-entry, entry + 1, size=(nr, nc)).tolist(), nc)
        if rational_rank(m) == nc:
            return ChainComplex([[f"q{i}" for i in range(nr)], [f"p{j}" for j in range(nc)]],
                                {1: m})


def random_energies(rng: np.random.Generator, c: ChainComplex, degrees, low=-2.0, high=2.0):
    return {k: {n: float(rng.uniform(low, high)) for n in c.cells(k)} for k in degrees}


BUNDLED = {
    "two_vertex_edge": (two_vertex_edge, 1),
    "theta_graph": (theta_graph, 1),
    "circle": (circle, 1),
    "k4": (lambda: complete_graph(4), 1),
    "torus": (torus_2x2, 2),
    "moore_mod2": (moore_mod2, 1),
}
