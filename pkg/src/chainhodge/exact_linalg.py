"""Exact integer and rational linear algebra.

Everything here works on Python ``int`` and ``fractions.Fraction`` so that
torsion orders and determinants never overflow or round.  Matrices are
small (desk-scale complexes), so dense row-major tuples are used throughout.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, prod
from typing import Iterable, Sequence

import numpy as np

from .errors import DependentBasis, SingularMatrix

DENSIFY_LIMIT = 512


def _shape_of(rows, ncols):
    nrows = len(rows)
    if ncols is None:
        if nrows == 0:
            raise ValueError("ncols is required for a matrix with no rows")
        ncols = len(rows[0])
    for r in rows:
        if len(r) != ncols:
            raise ValueError("ragged matrix rows")
    return nrows, ncols


class _ExactMatrix:
    """Immutable dense matrix with exact entries (shared Int/Rat behaviour)."""

    __slots__ = ("_rows", "_nrows", "_ncols", "_hash")

    def __init__(self, rows: Iterable[Sequence], ncols: int | None = None):
        rows = tuple(tuple(self._coerce(x) for x in r) for r in rows)
        self._nrows, self._ncols = _shape_of(rows, ncols)
        self._rows = rows
        self._hash = None

    @staticmethod
    def _coerce(x):
        raise NotImplementedError

    # construction -------------------------------------------------------
    @classmethod
    def zeros(cls, nrows: int, ncols: int):
        return cls([[0] * ncols for _ in range(nrows)], ncols)

    @classmethod
    def identity(cls, n: int):
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], n)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], nrows: int):
        return cls([[c[i] for c in columns] for i in range(nrows)], len(columns))

    @classmethod
    def from_sparse(cls, nrows: int, ncols: int, entries: dict):
        """Densify ``{(i, j): value}``.  Large inputs are still densified, with a warning."""
        if nrows > DENSIFY_LIMIT or ncols > DENSIFY_LIMIT:
            warnings.warn(
                f"densifying a {nrows}x{ncols} matrix; dense exact algebra will be slow",
                stacklevel=2,
            )
        rows = [[0] * ncols for _ in range(nrows)]
        for (i, j), v in entries.items():
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise IndexError(f"entry ({i}, {j}) outside {nrows}x{ncols}")
            rows[i][j] = v
        return cls(rows, ncols)

    # access -------------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return self._nrows, self._ncols

    @property
    def nrows(self) -> int:
        return self._nrows

    @property
    def ncols(self) -> int:
        return self._ncols

    @property
    def rows(self) -> tuple[tuple, ...]:
        return self._rows

    def __getitem__(self, ij):
        i, j = ij
        if not (0 <= i < self._nrows and 0 <= j < self._ncols):
            raise IndexError(f"({i}, {j}) outside {self._nrows}x{self._ncols}")
        return self._rows[i][j]

    def row(self, i: int) -> tuple:
        return self._rows[i]

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self._rows)

    def columns(self) -> list[tuple]:
        return [self.column(j) for j in range(self._ncols)]

    def to_list(self) -> list[list]:
        return [list(r) for r in self._rows]

    def to_numpy(self, dtype=float) -> np.ndarray:
        out = np.zeros(self.shape, dtype=dtype)
        for i, r in enumerate(self._rows):
            for j, x in enumerate(r):
                out[i, j] = float(x) if dtype is float else x
        return out

    def is_zero(self) -> bool:
        return all(x == 0 for r in self._rows for x in r)

    # algebra ------------------------------------------------------------
    @property
    def T(self):
        return type(self)([[r[j] for r in self._rows] for j in range(self._ncols)], self._nrows)

    def submatrix(self, rows: Sequence[int] | None = None, cols: Sequence[int] | None = None):
        rows = range(self._nrows) if rows is None else rows
        cols = range(self._ncols) if cols is None else cols
        cols = list(cols)
        return type(self)([[self._rows[i][j] for j in cols] for i in rows], len(cols))

    def __matmul__(self, other):
        if not isinstance(other, _ExactMatrix):
            return NotImplemented
        if self._ncols != other._nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        cls = RatMatrix if RatMatrix in (type(self), type(other)) else IntMatrix
        ocols = other.columns()
        out = [[sum(a * b for a, b in zip(r, c)) for c in ocols] for r in self._rows]
        return cls(out, other._ncols)

    def __neg__(self):
        return type(self)([[-x for x in r] for r in self._rows], self._ncols)

    def __add__(self, other):
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        cls = RatMatrix if RatMatrix in (type(self), type(other)) else IntMatrix
        return cls([[a + b for a, b in zip(r, s)] for r, s in zip(self._rows, other._rows)], self._ncols)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        cls = RatMatrix if isinstance(c, Fraction) or isinstance(self, RatMatrix) else IntMatrix
        return cls([[c * x for x in r] for r in self._rows], self._ncols)

    def apply(self, vec: Sequence) -> tuple:
        if len(vec) != self._ncols:
            raise ValueError("vector length mismatch")
        return tuple(sum(a * b for a, b in zip(r, vec)) for r in self._rows)

    # identity -----------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, _ExactMatrix):
            return NotImplemented
        return self.shape == other.shape and self._rows == other._rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.shape, self._rows))
        return self._hash

    def __repr__(self):
        body = ", ".join("[" + ", ".join(str(x) for x in r) + "]" for r in self._rows)
        return f"{type(self).__name__}({self._nrows}x{self._ncols}: [{body}])"

    # serialization ------------------------------------------------------
    def to_dict(self) -> dict:
        return {"rows": self._nrows, "cols": self._ncols,
                "entries": [[str(x) for x in r] for r in self._rows]}

    @classmethod
    def from_dict(cls, data: dict):
        return cls([[cls._parse(x) for x in r] for r in data["entries"]], int(data["cols"]))

    @staticmethod
    def _parse(text):
        raise NotImplementedError


class IntMatrix(_ExactMatrix):
    """Arbitrary-precision integer matrix."""

    __slots__ = ()

    @staticmethod
    def _coerce(x):
        if isinstance(x, bool):
            return int(x)
        if isinstance(x, (int, np.integer)):
            return int(x)
        if isinstance(x, Fraction) and x.denominator == 1:
            return x.numerator
        raise TypeError(f"IntMatrix entries must be integers, got {x!r}")

    @staticmethod
    def _parse(text):
        return int(text)


class RatMatrix(_ExactMatrix):
    """Exact rational matrix; entries are normalized ``Fraction`` objects."""

    __slots__ = ()

    @staticmethod
    def _coerce(x):
        if isinstance(x, (float, np.floating)):
            # binary floats convert exactly; this is intentional
            return Fraction(float(x))
        if isinstance(x, np.integer):
            return Fraction(int(x))
        return Fraction(x)

    @staticmethod
    def _parse(text):
        return Fraction(text)

    @classmethod
    def from_int(cls, m: IntMatrix) -> "RatMatrix":
        return cls(m.rows, m.ncols)


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmithForm:
    """``left @ m @ right`` is diagonal with entries ``diag`` (then zeros).

    ``left_inverse`` and ``right_inverse`` are the exact inverses of the two
    unimodular transforms; they are needed for lattice bases.
    """

    diag: tuple[int, ...]
    left: IntMatrix
    right: IntMatrix
    left_inverse: IntMatrix
    right_inverse: IntMatrix
    shape: tuple[int, int]

    @property
    def rank(self) -> int:
        return len(self.diag)

    # camelCase aliases
    @property
    def leftBasis(self) -> IntMatrix:  # noqa: N802
        return self.left

    @property
    def rightBasis(self) -> IntMatrix:  # noqa: N802
        return self.right

    def diagonal_matrix(self) -> IntMatrix:
        m, n = self.shape
        rows = [[0] * n for _ in range(m)]
        for i, d in enumerate(self.diag):
            rows[i][i] = d
        return IntMatrix(rows, n)


def _identity_rows(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def smith_normal_form(m: IntMatrix) -> SmithForm:
    """Smith normal form with unimodular transforms.

    Pivot rule: the nonzero entry of smallest absolute value in the active
    block.  Row operations are mirrored on ``U`` (and inversely on ``U^-1``),
    column operations on ``V`` (and inversely on ``V^-1``).
    """
    nr, nc = m.shape
    A = m.to_list()
    U, Ui = _identity_rows(nr), _identity_rows(nr)
    V, Vi = _identity_rows(nc), _identity_rows(nc)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]
        for r in Ui:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, q):
        # row_dst += q * row_src
        a, b = A[dst], A[src]
        for k in range(nc):
            a[k] += q * b[k]
        a, b = U[dst], U[src]
        for k in range(nr):
            a[k] += q * b[k]
        for r in Ui:
            r[src] -= q * r[dst]

    def neg_row(i):
        A[i] = [-x for x in A[i]]
        U[i] = [-x for x in U[i]]
        for r in Ui:
            r[i] = -r[i]

    def swap_cols(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]
        Vi[i], Vi[j] = Vi[j], Vi[i]

    def add_col(dst, src, q):
        # col_dst += q * col_src
        for r in A:
            r[dst] += q * r[src]
        for r in V:
            r[dst] += q * r[src]
        a, b = Vi[src], Vi[dst]
        for k in range(nc):
            a[k] -= q * b[k]

    diag = []
    t = 0
    while t < min(nr, nc):
        while True:
            best = None
            for i in range(t, nr):
                row = A[i]
                for j in range(t, nc):
                    x = row[j]
                    if x and (best is None or abs(x) < best[0]):
                        best = (abs(x), i, j)
                        if best[0] == 1:
                            break
                if best is not None and best[0] == 1:
                    break
            if best is None:
                break
            _, i, j = best
            if i != t:
                swap_rows(i, t)
            if j != t:
                swap_cols(j, t)
            p = A[t][t]
            clean = True
            for i in range(t + 1, nr):
                if A[i][t]:
                    q = A[i][t] // p
                    if q:
                        add_row(i, t, -q)
                    if A[i][t]:
                        clean = False
            for j in range(t + 1, nc):
                if A[t][j]:
                    q = A[t][j] // p
                    if q:
                        add_col(j, t, -q)
                    if A[t][j]:
                        clean = False
            if not clean:
                continue
            bad = None
            for i in range(t + 1, nr):
                if any(A[i][j] % p for j in range(t + 1, nc)):
                    bad = i
                    break
            if bad is not None:
                add_row(t, bad, 1)
                continue
            break
        if best is None:
            break
        if A[t][t] < 0:
            neg_row(t)
        diag.append(A[t][t])
        t += 1

    return SmithForm(
        diag=tuple(diag),
        left=IntMatrix(U, nr),
        right=IntMatrix(V, nc),
        left_inverse=IntMatrix(Ui, nr),
        right_inverse=IntMatrix(Vi, nc),
        shape=(nr, nc),
    )


def torsion_order(m: IntMatrix) -> int:
    """Order of the torsion subgroup of coker(m): product of the SNF invariants."""
    return prod(smith_normal_form(m).diag)


# ---------------------------------------------------------------------------
# Rank, determinant, solve
# ---------------------------------------------------------------------------

def _reduce_int_row(vec, basis):
    """Fraction-free reduction of ``vec`` against echelon ``basis`` [(pivot, row)]."""
    v = list(vec)
    for p, row in basis:
        if v[p]:
            a, b = row[p], v[p]
            v = [a * x - b * y for x, y in zip(v, row)]
            g = 0
            for x in v:
                if x:
                    g = gcd(g, x)
            if g > 1:
                v = [x // g for x in v]
    return v


def _to_int_rows(rows):
    """Scale each rational row to a primitive integer row."""
    out = []
    for r in rows:
        den = 1
        for x in r:
            if isinstance(x, Fraction):
                den = den * x.denominator // gcd(den, x.denominator)
        out.append([int(x * den) for x in r])
    return out


class IncrementalRank:
    """Echelon basis over Q that accepts vectors one at a time.

    ``try_add`` returns False (and leaves the state untouched) when the
    vector is dependent on those already accepted.
    """

    __slots__ = ("basis",)

    def __init__(self, basis=None):
        self.basis = list(basis) if basis else []

    def copy(self) -> "IncrementalRank":
        return IncrementalRank(self.basis)

    def try_add(self, vec) -> bool:
        v = _reduce_int_row(_to_int_rows([vec])[0], self.basis)
        for p, x in enumerate(v):
            if x:
                self.basis.append((p, v))
                return True
        return False

    @property
    def rank(self) -> int:
        return len(self.basis)


def rational_rank(m) -> int:
    """Rank over Q by fraction-free elimination (independent of the SNF code)."""
    rows = m.rows if isinstance(m, _ExactMatrix) else m
    inc = IncrementalRank()
    for r in rows:
        inc.try_add(r)
    return inc.rank


def determinant(m: _ExactMatrix):
    """Exact determinant (Bareiss for integers, Gaussian elimination for rationals)."""
    n, k = m.shape
    if n != k:
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        return 1
    if isinstance(m, IntMatrix):
        A = m.to_list()
        sign, prev = 1, 1
        for t in range(n - 1):
            if A[t][t] == 0:
                for i in range(t + 1, n):
                    if A[i][t]:
                        A[t], A[i] = A[i], A[t]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(t + 1, n):
                for j in range(t + 1, n):
                    A[i][j] = (A[i][j] * A[t][t] - A[i][t] * A[t][j]) // prev
            prev = A[t][t]
        return sign * A[n - 1][n - 1]
    A = [list(r) for r in m.rows]
    det = Fraction(1)
    for t in range(n):
        piv = next((i for i in range(t, n) if A[i][t] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != t:
            A[t], A[piv] = A[piv], A[t]
            det = -det
        p = A[t][t]
        det *= p
        for i in range(t + 1, n):
            if A[i][t]:
                f = A[i][t] / p
                A[i] = [a - f * b for a, b in zip(A[i], A[t])]
    return det


def solve_exact(m: _ExactMatrix, rhs: _ExactMatrix) -> RatMatrix:
    """Solve ``m @ X = rhs`` exactly over Q; ``m`` must be square and invertible."""
    n, k = m.shape
    if n != k:
        raise ValueError("solve_exact needs a square matrix")
    if rhs.nrows != n:
        raise ValueError("right-hand side has the wrong number of rows")
    w = rhs.ncols
    A = [[Fraction(x) for x in r] + [Fraction(y) for y in s] for r, s in zip(m.rows, rhs.rows)]
    for t in range(n):
        piv = next((i for i in range(t, n) if A[i][t] != 0), None)
        if piv is None:
            raise SingularMatrix("matrix is singular over Q")
        if piv != t:
            A[t], A[piv] = A[piv], A[t]
        p = A[t][t]
        if p != 1:
            A[t] = [x / p for x in A[t]]
        rt = A[t]
        for i in range(n):
            if i != t and A[i][t]:
                f = A[i][t]
                A[i] = [a - f * b for a, b in zip(A[i], rt)]
    return RatMatrix([r[n:] for r in A], w)


def inverse_exact(m: _ExactMatrix) -> RatMatrix:
    return solve_exact(m, IntMatrix.identity(m.nrows))


# ---------------------------------------------------------------------------
# Lattices
# ---------------------------------------------------------------------------

def kernel_basis(m: IntMatrix) -> IntMatrix:
    """Saturated Z-basis of ker(m) as columns (the trailing columns of V)."""
    snf = smith_normal_form(m)
    cols = list(range(snf.rank, m.ncols))
    return snf.right.submatrix(None, cols)


def saturated_image_basis(m: IntMatrix) -> IntMatrix:
    """Z-basis (columns) of (image of m over Q) ∩ Z^rows."""
    snf = smith_normal_form(m)
    return snf.left_inverse.submatrix(None, range(snf.rank))


def image_basis(m: IntMatrix) -> IntMatrix:
    """Z-basis (columns) of the image lattice m(Z^cols)."""
    snf = smith_normal_form(m)
    cols = [[d * x for x in snf.left_inverse.column(i)] for i, d in enumerate(snf.diag)]
    return IntMatrix.from_columns(cols, m.nrows)


def quotient_map(m: IntMatrix) -> IntMatrix:
    """Integer matrix whose kernel over Q is exactly the column space of ``m``.

    These are the trailing rows of the SNF left transform; they present the
    free part of coker(m).
    """
    snf = smith_normal_form(m)
    return snf.left.submatrix(range(snf.rank, m.nrows), None)


def gram_covolume_sq(basis: _ExactMatrix):
    """Squared covolume det(BᵀB) of the lattice spanned by the columns of ``basis``."""
    if rational_rank(basis.T) != basis.ncols:
        raise DependentBasis("lattice basis columns are linearly dependent")
    g = basis.T @ basis
    return determinant(g)
