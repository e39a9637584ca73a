"""Exact integer linear algebra and the conformal order.

Vectors are plain tuples of Python ints, so arithmetic never overflows.
Bounds use ``math.inf`` / ``-math.inf`` for the infinite values of the
extended integers; these compare correctly against ints of any size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

INF = math.inf

ExtInt = Union[int, float]
IntVector = tuple


class DimensionError(ValueError):
    """Raised when vector or matrix shapes do not line up."""


def is_finite(value: ExtInt) -> bool:
    return not isinstance(value, float)


def ext_int(value) -> ExtInt:
    """Coerce ``value`` to an extended integer (int, inf or -inf)."""
    if isinstance(value, str):
        token = value.strip().lower()
        if token in ("inf", "+inf", "infinity"):
            return INF
        if token in ("-inf", "-infinity"):
            return -INF
        return int(token)
    if isinstance(value, float):
        if math.isinf(value):
            return value
        if value.is_integer():
            return int(value)
        raise ValueError(f"not an integer: {value!r}")
    if isinstance(value, bool):
        raise ValueError(f"not an integer: {value!r}")
    return int(value)


def format_ext(value: ExtInt) -> str:
    if value == INF:
        return "inf"
    if value == -INF:
        return "-inf"
    return str(value)


@dataclass(frozen=True)
class IntMatrix:
    """Immutable integer matrix stored row-major.

    Zero rows or zero columns are allowed; ``ncols`` is stored explicitly so
    a ``0 x t`` block keeps its width.
    """

    nrows: int
    ncols: int
    rows: tuple

    def __post_init__(self):
        if len(self.rows) != self.nrows or any(len(r) != self.ncols for r in self.rows):
            raise DimensionError("row data does not match the declared shape")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]], ncols: int | None = None) -> IntMatrix:
        data = tuple(tuple(int(v) for v in row) for row in rows)
        if ncols is None:
            if not data:
                raise DimensionError("width of an empty matrix must be given")
            ncols = len(data[0])
        return cls(len(data), ncols, data)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> IntMatrix:
        return cls(nrows, ncols, tuple((0,) * ncols for _ in range(nrows)))

    @classmethod
    def identity(cls, n: int) -> IntMatrix:
        return cls(n, n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, index):
        i, j = index
        return self.rows[i][j]

    def column(self, j: int) -> IntVector:
        return tuple(row[j] for row in self.rows)

    def columns(self) -> list[IntVector]:
        return [self.column(j) for j in range(self.ncols)]

    def transpose(self) -> IntMatrix:
        return IntMatrix(self.ncols, self.nrows, tuple(zip(*self.rows)) if self.nrows else
                         tuple(() for _ in range(self.ncols)))

    def matvec(self, x: Sequence[int]) -> IntVector:
        if len(x) != self.ncols:
            raise DimensionError(f"vector of length {len(x)} against {self.ncols} columns")
        return tuple(sum(a * b for a, b in zip(row, x) if a) for row in self.rows)

    def matmul(self, other: IntMatrix) -> IntMatrix:
        if self.ncols != other.nrows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        cols = other.columns()
        return IntMatrix(self.nrows, other.ncols,
                         tuple(tuple(sum(a * b for a, b in zip(row, c)) for c in cols)
                               for row in self.rows))

    def select_columns(self, indices: Sequence[int]) -> IntMatrix:
        return IntMatrix(self.nrows, len(indices),
                         tuple(tuple(row[j] for j in indices) for row in self.rows))

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def __repr__(self) -> str:
        return f"IntMatrix({self.nrows}x{self.ncols}, {self.tolist()})"


def hstack(blocks: Sequence[IntMatrix]) -> IntMatrix:
    nrows = {b.nrows for b in blocks}
    if len(nrows) != 1:
        raise DimensionError("hstack needs equal row counts")
    m = nrows.pop()
    rows = tuple(sum((b.rows[i] for b in blocks), ()) for i in range(m))
    return IntMatrix(m, sum(b.ncols for b in blocks), rows)


def vstack(blocks: Sequence[IntMatrix]) -> IntMatrix:
    ncols = {b.ncols for b in blocks}
    if len(ncols) != 1:
        raise DimensionError("vstack needs equal column counts")
    return IntMatrix(sum(b.nrows for b in blocks), ncols.pop(),
                     sum((b.rows for b in blocks), ()))


def block_diag(blocks: Sequence[IntMatrix]) -> IntMatrix:
    total = sum(b.ncols for b in blocks)
    rows = []
    offset = 0
    for b in blocks:
        for row in b.rows:
            rows.append((0,) * offset + row + (0,) * (total - offset - b.ncols))
        offset += b.ncols
    return IntMatrix(len(rows), total, tuple(rows))


@dataclass(frozen=True)
class BoundsBox:
    """Componentwise bounds ``lower <= x <= upper`` over the extended integers."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        if len(self.lower) != len(self.upper):
            raise DimensionError("lower and upper bounds differ in length")

    @classmethod
    def of(cls, lower: Iterable, upper: Iterable) -> BoundsBox:
        return cls(tuple(ext_int(v) for v in lower), tuple(ext_int(v) for v in upper))

    @classmethod
    def nonnegative(cls, n: int) -> BoundsBox:
        return cls((0,) * n, (INF,) * n)

    @classmethod
    def free(cls, n: int) -> BoundsBox:
        return cls((-INF,) * n, (INF,) * n)

    def __len__(self) -> int:
        return len(self.lower)

    def contains(self, x: Sequence[int]) -> bool:
        return len(x) == len(self.lower) and all(
            lo <= v <= hi for lo, v, hi in zip(self.lower, x, self.upper))

    def is_finite(self) -> bool:
        return all(is_finite(v) for v in self.lower + self.upper)

    def concat(self, other: BoundsBox) -> BoundsBox:
        return BoundsBox(self.lower + other.lower, self.upper + other.upper)


def conformal_leq(x: Sequence[int], y: Sequence[int]) -> bool:
    """True iff ``x`` lies in the orthant of ``y`` and ``|x_i| <= |y_i|``."""
    if len(x) != len(y):
        raise DimensionError(f"lengths {len(x)} and {len(y)} differ")
    return all(a * b >= 0 and abs(a) <= abs(b) for a, b in zip(x, y))


def _col_op(M: list[list[int]], target: int, source: int, factor: int) -> None:
    # column[target] += factor * column[source]
    if factor:
        for row in M:
            row[target] += factor * row[source]


def hermite_normal_form(A: IntMatrix) -> tuple[IntMatrix, IntMatrix]:
    """Column-style Hermite normal form.

    Returns ``(H, U)`` with ``U`` unimodular and ``A @ U == H``. ``H`` has a
    lower-triangular echelon profile: each pivot is positive, entries to the
    left of a pivot lie in ``[0, pivot)``, and all columns after the last
    pivot are zero.
    """
    m, n = A.shape
    H = [list(r) for r in A.rows]
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    k = 0
    for i in range(m):
        if k == n:
            break
        # Euclid on row i across columns k..n-1 until one nonzero entry remains.
        while True:
            nonzero = [j for j in range(k, n) if H[i][j] != 0]
            if len(nonzero) <= 1:
                break
            p = min(nonzero, key=lambda j: abs(H[i][j]))
            for j in nonzero:
                if j != p:
                    q = H[i][j] // H[i][p]
                    _col_op(H, j, p, -q)
                    _col_op(U, j, p, -q)
        nonzero = [j for j in range(k, n) if H[i][j] != 0]
        if not nonzero:
            continue
        p = nonzero[0]
        if p != k:
            for M in (H, U):
                for row in M:
                    row[k], row[p] = row[p], row[k]
        if H[i][k] < 0:
            for M in (H, U):
                for row in M:
                    row[k] = -row[k]
        pivot = H[i][k]
        for j in range(k):
            q = H[i][j] // pivot
            _col_op(H, j, k, -q)
            _col_op(U, j, k, -q)
        k += 1
    return (IntMatrix(m, n, tuple(map(tuple, H))), IntMatrix(n, n, tuple(map(tuple, U))))


def _pivots(H: IntMatrix) -> list[tuple[int, int]]:
    """(row, column) of each pivot of a column-style HNF."""
    out = []
    k = 0
    for i in range(H.nrows):
        if k < H.ncols and H[i, k] != 0:
            out.append((i, k))
            k += 1
    return out


def solve_diophantine(A: IntMatrix, b: Sequence[int]) -> IntVector | None:
    """Some integer ``x`` with ``A x = b``, or ``None`` when none exists."""
    if len(b) != A.nrows:
        raise DimensionError(f"right-hand side of length {len(b)} against {A.nrows} rows")
    H, U = hermite_normal_form(A)
    pivots = _pivots(H)
    y = [0] * A.ncols
    pivot_rows = {i: k for i, k in pivots}
    for i in range(A.nrows):
        residual = b[i] - sum(H[i, j] * y[j] for j in range(A.ncols) if H[i, j])
        if i in pivot_rows:
            k = pivot_rows[i]
            # y[k] is still zero here, so residual excludes the pivot term.
            q, rem = divmod(residual, H[i, k])
            if rem:
                return None
            y[k] = q
        elif residual:
            return None
    return U.matvec(y)


def lattice_kernel_basis(A: IntMatrix) -> list[IntVector]:
    """A basis of the integer lattice ``{x : A x = 0}``."""
    H, U = hermite_normal_form(A)
    rank = len(_pivots(H))
    return [U.column(j) for j in range(rank, A.ncols)]


def determinant(M: IntMatrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    n = M.nrows
    if n != M.ncols:
        raise DimensionError("determinant of a non-square matrix")
    if n == 0:
        return 1
    a = [list(r) for r in M.rows]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]
