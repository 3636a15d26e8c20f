"""Exact linear algebra over the rational numbers.

Everything in this module works with `fractions.Fraction`, so no operation
ever rounds and equality of results is decidable.  Vectors are plain tuples
of Fractions; `Matrix` and `Subspace` are small immutable wrappers.  A
subspace is stored as its reduced row-echelon basis, which is the unique
canonical representative: two subspaces are equal iff their bases compare
equal, and a ray (one-dimensional subspace) has a canonical generator whose
first nonzero coordinate is 1.

Scalars serialize as "p/q" strings ("p" when the denominator is 1) and
round-trip exactly.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import Iterable, Sequence

from untensor.errors import DimensionMismatch

Scalar = Fraction
Vector = tuple[Fraction, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


def frac(value) -> Fraction:
    """Coerce an int, a "p/q" string, or a Fraction to a Fraction."""
    return value if isinstance(value, Fraction) else Fraction(value)


def format_scalar(value: Fraction) -> str:
    return str(value)


def parse_scalar(text) -> Fraction:
    return Fraction(text)


def vector(entries: Iterable) -> Vector:
    return tuple(frac(x) for x in entries)


def vzero(n: int) -> Vector:
    return (ZERO,) * n


def vadd(u: Vector, v: Vector) -> Vector:
    if len(u) != len(v):
        raise ValueError("vector lengths differ")
    return tuple(a + b for a, b in zip(u, v))


def vsub(u: Vector, v: Vector) -> Vector:
    if len(u) != len(v):
        raise ValueError("vector lengths differ")
    return tuple(a - b for a, b in zip(u, v))


def vscale(t, v: Vector) -> Vector:
    t = frac(t)
    return tuple(t * a for a in v)


def is_zero_vector(v: Sequence[Fraction]) -> bool:
    return all(a == 0 for a in v)


def first_nonzero_index(v: Sequence[Fraction]) -> int | None:
    for i, a in enumerate(v):
        if a != 0:
            return i
    return None


def linear_combination(vectors: Sequence[Vector], coeffs: Sequence) -> Vector:
    """Sum of coeffs[i] * vectors[i]; the vectors must share a length."""
    if not vectors:
        raise ValueError("empty vector list")
    acc = [ZERO] * len(vectors[0])
    for c, v in zip(coeffs, vectors):
        c = frac(c)
        if c != 0:
            acc = [x + c * y for x, y in zip(acc, v)]
    return tuple(acc)


def proportionality_ratio(base: Vector, candidate: Vector) -> Fraction | None:
    """Return t with candidate == t*base, or None if no such scalar exists.

    `base` must be nonzero; the zero candidate yields t == 0.
    """
    lead = first_nonzero_index(base)
    if lead is None:
        raise ValueError("base vector must be nonzero")
    t = candidate[lead] / base[lead]
    if all(c == t * b for b, c in zip(base, candidate)):
        return t
    return None


class Matrix:
    """Immutable rectangular matrix of Fractions.

    Instances are hashable and compare by entries.  An explicit column
    count is required when constructing a matrix with zero rows.
    """

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows: Iterable[Iterable], ncols: int | None = None):
        materialized = tuple(tuple(frac(x) for x in row) for row in rows)
        if materialized:
            width = len(materialized[0])
            if any(len(r) != width for r in materialized):
                raise ValueError("ragged rows")
            if ncols is not None and ncols != width:
                raise ValueError("declared column count does not match rows")
            ncols = width
        elif ncols is None:
            raise ValueError("a matrix with no rows needs an explicit column count")
        self.rows = materialized
        self.nrows = len(materialized)
        self.ncols = ncols

    # -- constructors ----------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls(tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)), n)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "Matrix":
        return cls(tuple((ZERO,) * ncols for _ in range(nrows)), ncols)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], nrows: int | None = None) -> "Matrix":
        cols = [vector(c) for c in columns]
        if cols:
            nrows = len(cols[0])
        elif nrows is None:
            raise ValueError("a matrix with no columns needs an explicit row count")
        return cls(tuple(tuple(col[i] for col in cols) for i in range(nrows)), len(cols))

    @classmethod
    def vstack(cls, top: "Matrix", bottom: "Matrix") -> "Matrix":
        if top.ncols != bottom.ncols:
            raise ValueError("column counts differ")
        return cls(top.rows + bottom.rows, top.ncols)

    # -- basic accessors ---------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def row(self, i: int) -> Vector:
        return self.rows[i]

    def column(self, j: int) -> Vector:
        return tuple(r[j] for r in self.rows)

    def columns(self) -> list[Vector]:
        return [self.column(j) for j in range(self.ncols)]

    def entry(self, i: int, j: int) -> Fraction:
        return self.rows[i][j]

    # -- arithmetic --------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Matrix)
            and self.ncols == other.ncols
            and self.rows == other.rows
        )

    def __hash__(self) -> int:
        return hash((self.rows, self.ncols))

    def __add__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ValueError("shapes differ")
        return Matrix(
            tuple(tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(self.rows, other.rows)),
            self.ncols,
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ValueError("shapes differ")
        return Matrix(
            tuple(tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(self.rows, other.rows)),
            self.ncols,
        )

    def __neg__(self) -> "Matrix":
        return self.scale(-1)

    def scale(self, t) -> "Matrix":
        t = frac(t)
        return Matrix(tuple(tuple(t * a for a in row) for row in self.rows), self.ncols)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.ncols != other.nrows:
            raise ValueError("inner dimensions differ")
        cols = [other.column(j) for j in range(other.ncols)]
        out = []
        for row in self.rows:
            out.append(tuple(sum((a * b for a, b in zip(row, col)), ZERO) for col in cols))
        return Matrix(tuple(out), other.ncols)

    def apply(self, v: Sequence[Fraction]) -> Vector:
        """Matrix-vector product."""
        if len(v) != self.ncols:
            raise ValueError("vector length does not match column count")
        return tuple(sum((a * b for a, b in zip(row, v)), ZERO) for row in self.rows)

    def transpose(self) -> "Matrix":
        return Matrix(
            tuple(tuple(self.rows[i][j] for i in range(self.nrows)) for j in range(self.ncols)),
            self.nrows,
        )

    def kron(self, other: "Matrix") -> "Matrix":
        """Kronecker product, row-major block layout."""
        out = []
        for ra in self.rows:
            for rb in other.rows:
                out.append(tuple(a * b for a in ra for b in rb))
        return Matrix(tuple(out), self.ncols * other.ncols)

    # -- elimination-based queries ------------------------------------------

    def rank(self) -> int:
        _, pivots = _reduced_rows([list(r) for r in self.rows], self.ncols)
        return len(pivots)

    def det(self) -> Fraction:
        return determinant(self)

    def inverse(self) -> "Matrix":
        if self.nrows != self.ncols:
            raise ValueError("only square matrices invert")
        n = self.nrows
        aug = [list(r) + [ONE if i == j else ZERO for j in range(n)] for i, r in enumerate(self.rows)]
        reduced, pivots = _reduced_rows(aug, 2 * n)
        if pivots[:n] != list(range(n)) or len(pivots) != n:
            raise ValueError("matrix is singular")
        return Matrix(tuple(tuple(row[n:]) for row in reduced[:n]), n)

    def is_invertible(self) -> bool:
        return self.nrows == self.ncols and self.rank() == self.nrows

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in row) for row in self.rows)
        return f"Matrix[{self.nrows}x{self.ncols}: {body}]"


def _reduced_rows(rows: list[list[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    """Gauss-Jordan on a row list, in place.  Returns (rows, pivot columns)."""
    nrows = len(rows)
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = None
        for i in range(r, nrows):
            if rows[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        if pivot_row != r:
            rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        pv = rows[r][c]
        if pv != 1:
            rows[r] = [x / pv for x in rows[r]]
        lead = rows[r]
        for i in range(nrows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], lead)]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return rows, pivots


def rref(m: Matrix) -> Matrix:
    """Unique reduced row-echelon form; the shape (zero rows included) is kept."""
    rows, _ = _reduced_rows([list(r) for r in m.rows], m.ncols)
    return Matrix(tuple(tuple(r) for r in rows), m.ncols)


def determinant(m: Matrix) -> Fraction:
    """Determinant by fraction-free (Bareiss) elimination.

    On integer input every intermediate value stays integral, which keeps
    entry growth polynomial; rational input works too since the divisions
    are exact either way.
    """
    if m.nrows != m.ncols:
        raise ValueError("determinant needs a square matrix")
    n = m.nrows
    if n == 0:
        return ONE
    a = [list(r) for r in m.rows]
    sign = 1
    prev = ONE
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return ZERO
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        pivot = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i = a[i]
            row_k = a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - aik * row_k[j]) / prev
            row_i[k] = ZERO
        prev = pivot
    return sign * a[n - 1][n - 1]


def solve_linear(a: Matrix, rhs: Sequence[Fraction]) -> Vector | None:
    """One solution of a·x = rhs, or None when rhs is outside the column space."""
    if len(rhs) != a.nrows:
        raise ValueError("right-hand side length does not match row count")
    aug = [list(row) + [frac(b)] for row, b in zip(a.rows, rhs)]
    reduced, pivots = _reduced_rows(aug, a.ncols + 1)
    if pivots and pivots[-1] == a.ncols:
        return None
    x = [ZERO] * a.ncols
    for r, c in enumerate(pivots):
        x[c] = reduced[r][a.ncols]
    return tuple(x)


class Subspace:
    """A linear subspace held by its canonical reduced-echelon basis."""

    __slots__ = ("basis", "ambient_dim")

    def __init__(self, vectors: Iterable[Sequence], ambient_dim: int):
        rows = [list(vector(v)) for v in vectors]
        for r in rows:
            if len(r) != ambient_dim:
                raise DimensionMismatch.of(ambient_dim, len(r))
        reduced, pivots = _reduced_rows(rows, ambient_dim)
        self.basis = Matrix(tuple(tuple(r) for r in reduced[: len(pivots)]), ambient_dim)
        self.ambient_dim = ambient_dim

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls((), ambient_dim)

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(Matrix.identity(ambient_dim).rows, ambient_dim)

    @property
    def dim(self) -> int:
        return self.basis.nrows

    def basis_vectors(self) -> tuple[Vector, ...]:
        return self.basis.rows

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Subspace)
            and self.ambient_dim == other.ambient_dim
            and self.basis == other.basis
        )

    def __hash__(self) -> int:
        return hash((self.basis, self.ambient_dim))

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"

    def contains(self, v: Sequence[Fraction]) -> bool:
        if len(v) != self.ambient_dim:
            raise DimensionMismatch.of(self.ambient_dim, len(v))
        residual = list(v)
        for row in self.basis.rows:
            lead = first_nonzero_index(row)
            coeff = residual[lead]
            if coeff != 0:
                residual = [a - coeff * b for a, b in zip(residual, row)]
        return all(a == 0 for a in residual)

    def coordinates(self, v: Sequence[Fraction]) -> Vector | None:
        """Coefficients of v against the canonical basis, or None if outside."""
        if len(v) != self.ambient_dim:
            raise DimensionMismatch.of(self.ambient_dim, len(v))
        residual = list(v)
        coords = []
        for row in self.basis.rows:
            lead = first_nonzero_index(row)
            coeff = residual[lead]
            coords.append(coeff)
            if coeff != 0:
                residual = [a - coeff * b for a, b in zip(residual, row)]
        if any(a != 0 for a in residual):
            return None
        return tuple(coords)

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains(row) for row in other.basis.rows)

    def add(self, other: "Subspace") -> "Subspace":
        self._check_ambient(other)
        return Subspace(self.basis.rows + other.basis.rows, self.ambient_dim)

    def intersect(self, other: "Subspace") -> "Subspace":
        """Largest subspace contained in both.

        Stack both bases into M; a left-kernel vector y of M splits as
        (u, -w) with u'A = w'B, so u'A runs over the intersection.
        """
        self._check_ambient(other)
        a = self.basis.rows
        stacked = Matrix(a + other.basis.rows, self.ambient_dim)
        if stacked.nrows == 0:
            return Subspace.zero(self.ambient_dim)
        left_kernel = kernel(stacked.transpose())
        members = []
        for y in left_kernel.basis.rows:
            combo = [ZERO] * self.ambient_dim
            for coeff, row in zip(y[: len(a)], a):
                if coeff != 0:
                    combo = [acc + coeff * b for acc, b in zip(combo, row)]
            members.append(combo)
        return Subspace(members, self.ambient_dim)

    def _check_ambient(self, other: "Subspace") -> None:
        if self.ambient_dim != other.ambient_dim:
            raise DimensionMismatch.of(self.ambient_dim, other.ambient_dim)


def kernel(m: Matrix) -> Subspace:
    """The solution space {x : m·x = 0}; dimension = ncols - rank."""
    reduced, pivots = _reduced_rows([list(r) for r in m.rows], m.ncols)
    pivot_set = set(pivots)
    free = [c for c in range(m.ncols) if c not in pivot_set]
    basis = []
    for f in free:
        x = [ZERO] * m.ncols
        x[f] = ONE
        for r, p in enumerate(pivots):
            x[p] = -reduced[r][f]
        basis.append(x)
    return Subspace(basis, m.ncols)


def ray_generator(sub: Subspace) -> Vector:
    """Canonical generator of a one-dimensional subspace."""
    if sub.dim != 1:
        raise ValueError("not a ray")
    return sub.basis.rows[0]


def integer_sqrt_exact(n: int) -> int | None:
    """The integer r with r*r == n, or None when n is not a perfect square."""
    if n < 0:
        raise ValueError("negative input")
    r = isqrt(n)
    return r if r * r == n else None


def fraction_sqrt_exact(q: Fraction) -> Fraction | None:
    """Exact rational square root, or None if q is not a rational square."""
    if q < 0:
        return None
    num = integer_sqrt_exact(q.numerator)
    if num is None:
        return None
    den = integer_sqrt_exact(q.denominator)
    if den is None:
        return None
    return Fraction(num, den)


def rank_one_gauge(m: Matrix) -> tuple[Vector, Vector, Fraction] | None:
    """Write a rank-one matrix as scale * outer(col, row).

    Both returned vectors have leading coordinate 1 and the scale carries
    the rest, so the gauge is canonical.  Returns None when m has rank 0
    or at least 2.
    """
    lead = None
    for i, row in enumerate(m.rows):
        j = first_nonzero_index(row)
        if j is not None:
            lead = (i, j)
            break
    if lead is None:
        return None
    i0, j0 = lead
    scale = m.rows[i0][j0]
    col = tuple(m.rows[i][j0] / scale for i in range(m.nrows))
    row = tuple(m.rows[i0][j] / scale for j in range(m.ncols))
    for i in range(m.nrows):
        for j in range(m.ncols):
            if m.rows[i][j] != scale * col[i] * row[j]:
                return None
    return col, row, scale


def factor_rank_one(m: Matrix) -> tuple[Vector, Vector] | None:
    """Split a rank-one matrix as outer(col, row) with col leading 1.

    The zero matrix factors as (0, 0).  Returns None on rank >= 2.
    """
    gauge = rank_one_gauge(m)
    if gauge is None:
        if all(is_zero_vector(r) for r in m.rows):
            return vzero(m.nrows), vzero(m.ncols)
        return None
    col, row, scale = gauge
    return col, vscale(scale, row)
