"""Exact rational vectors, matrices and the elimination kernels built on them.

Scalars are :class:`fractions.Fraction`. Vectors are plain tuples of
Fractions. :class:`Matrix` is a small immutable row-major container that
supports ``@``, ``+``, ``-`` and transposition, which is all the algebra the
workload construction needs.

Every elimination routine uses the same pivot rule: scan columns left to
right and take the lowest-indexed row with a nonzero entry. Outputs are
therefore deterministic.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "Fraction",
    "Matrix",
    "NotFullRowRank",
    "parse_rational",
    "format_rational",
    "as_vector",
    "dot",
    "rank",
    "solve_linear",
    "null_space_basis",
    "right_inverse",
    "rref",
]

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


class NotFullRowRank(ValueError):
    """Raised when a right inverse is requested for a rank-deficient matrix."""


def parse_rational(token: str) -> Fraction:
    """Parse ``[sign]integer[/positive integer]`` into a Fraction.

    Decimal points and exponents are rejected so that the text form
    round-trips bit-exactly through :func:`format_rational`.
    """
    token = token.strip()
    if not _RATIONAL_RE.match(token):
        raise ValueError(f"not a rational literal: {token!r}")
    if "/" in token and int(token.split("/")[1]) == 0:
        raise ValueError(f"zero denominator: {token!r}")
    return Fraction(token)


def format_rational(x: Fraction) -> str:
    return str(Fraction(x))


def as_vector(values: Iterable) -> tuple[Fraction, ...]:
    return tuple(Fraction(v) for v in values)


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    if len(u) != len(v):
        raise ValueError(f"length mismatch {len(u)} != {len(v)}")
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


class Matrix:
    """Immutable dense matrix of Fractions."""

    __slots__ = ("_rows", "nrows", "ncols")

    def __init__(self, rows: Iterable[Iterable], ncols: int | None = None):
        data = tuple(tuple(Fraction(v) for v in row) for row in rows)
        if data:
            width = len(data[0])
            if any(len(row) != width for row in data):
                raise ValueError("ragged rows")
            if ncols is not None and ncols != width:
                raise ValueError(f"expected {ncols} columns, got {width}")
        else:
            width = ncols if ncols is not None else 0
        self._rows = data
        self.nrows = len(data)
        self.ncols = width

    # construction helpers
    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "Matrix":
        return cls([[0] * ncols for _ in range(nrows)], ncols=ncols)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], ncols=n)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], nrows: int) -> "Matrix":
        if not columns:
            return cls([[] for _ in range(nrows)], ncols=0)
        return cls(list(zip(*columns)), ncols=len(columns))

    @classmethod
    def row_vector(cls, v: Sequence) -> "Matrix":
        return cls([v])

    @classmethod
    def hstack(cls, blocks: Sequence["Matrix"]) -> "Matrix":
        nrows = blocks[0].nrows
        if any(b.nrows != nrows for b in blocks):
            raise ValueError("hstack: row counts differ")
        width = sum(b.ncols for b in blocks)
        return cls([sum((b._rows[i] for b in blocks), ()) for i in range(nrows)], ncols=width)

    @classmethod
    def vstack(cls, blocks: Sequence["Matrix"]) -> "Matrix":
        ncols = blocks[0].ncols
        if any(b.ncols != ncols for b in blocks):
            raise ValueError("vstack: column counts differ")
        return cls([row for b in blocks for row in b._rows], ncols=ncols)

    # access
    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def rows(self) -> tuple[tuple[Fraction, ...], ...]:
        return self._rows

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self._rows[i]

    def col(self, j: int) -> tuple[Fraction, ...]:
        return tuple(row[j] for row in self._rows)

    def columns(self, idx: Sequence[int]) -> "Matrix":
        return Matrix([[row[j] for j in idx] for row in self._rows], ncols=len(idx))

    def select_rows(self, idx: Sequence[int]) -> "Matrix":
        return Matrix([self._rows[i] for i in idx], ncols=self.ncols)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self._rows[i][j]

    def entries(self) -> Iterable[Fraction]:
        for row in self._rows:
            yield from row

    @property
    def T(self) -> "Matrix":
        return Matrix([[row[j] for row in self._rows] for j in range(self.ncols)], ncols=self.nrows)

    # algebra
    def __matmul__(self, other):
        if isinstance(other, Matrix):
            if self.ncols != other.nrows:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            cols = [other.col(j) for j in range(other.ncols)]
            return Matrix([[dot(row, c) for c in cols] for row in self._rows], ncols=other.ncols)
        vec = as_vector(other)
        if len(vec) != self.ncols:
            raise ValueError(f"shape mismatch {self.shape} @ ({len(vec)},)")
        return tuple(dot(row, vec) for row in self._rows)

    def __rmatmul__(self, other):
        # row vector times matrix
        vec = as_vector(other)
        if len(vec) != self.nrows:
            raise ValueError(f"shape mismatch ({len(vec)},) @ {self.shape}")
        return tuple(dot(vec, self.col(j)) for j in range(self.ncols))

    def _zip(self, other: "Matrix", op) -> "Matrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        return Matrix([[op(a, b) for a, b in zip(r, s)] for r, s in zip(self._rows, other._rows)],
                      ncols=self.ncols)

    def __add__(self, other: "Matrix") -> "Matrix":
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other: "Matrix") -> "Matrix":
        return self._zip(other, lambda a, b: a - b)

    def __neg__(self) -> "Matrix":
        return Matrix([[-v for v in row] for row in self._rows], ncols=self.ncols)

    def scale(self, c) -> "Matrix":
        c = Fraction(c)
        return Matrix([[c * v for v in row] for row in self._rows], ncols=self.ncols)

    def is_nonnegative(self) -> bool:
        return all(v >= 0 for v in self.entries())

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.entries())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self._rows == other._rows

    def __hash__(self) -> int:
        return hash((self.shape, self._rows))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(format_rational(v) for v in row) for row in self._rows)
        return f"Matrix({self.nrows}x{self.ncols}: [{body}])"

    def tolist(self) -> list[list[Fraction]]:
        return [list(row) for row in self._rows]

    def to_float(self):
        import numpy as np

        return np.array([[float(v) for v in row] for row in self._rows], dtype=float).reshape(self.shape)


def rref(m: Matrix | Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns.

    Pivots are taken leftmost column first, lowest row index first.
    """
    rows = [list(r) for r in (m.rows if isinstance(m, Matrix) else m)]
    rows = [[Fraction(v) for v in r] for r in rows]
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pv = rows[r][c]
        if pv != 1:
            rows[r] = [v / pv for v in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return rows, pivots


def rank(m: Matrix | Sequence[Sequence]) -> int:
    """Rank over the rationals by fraction-free (Bareiss) elimination."""
    rows = [[Fraction(v) for v in r] for r in (m.rows if isinstance(m, Matrix) else m)]
    if not rows or not rows[0]:
        return 0
    # clear denominators row by row so the elimination runs on integers
    ints = []
    for r in rows:
        den = 1
        for v in r:
            den = den * v.denominator // _gcd(den, v.denominator)
        ints.append([int(v * den) for v in r])
    nrows, ncols = len(ints), len(ints[0])
    prev = 1
    k = 0
    for c in range(ncols):
        if k == nrows:
            break
        p = next((i for i in range(k, nrows) if ints[i][c] != 0), None)
        if p is None:
            continue
        ints[k], ints[p] = ints[p], ints[k]
        piv = ints[k][c]
        for i in range(k + 1, nrows):
            a = ints[i][c]
            ints[i] = [(piv * ints[i][j] - a * ints[k][j]) // prev for j in range(ncols)]
        prev = piv
        k += 1
    return k


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def solve_linear(a: Matrix, b: Sequence) -> tuple[Fraction, ...] | None:
    """One exact solution of ``a x = b``, or None if the system is inconsistent.

    Free variables are set to zero.
    """
    b = as_vector(b)
    if a.nrows != len(b):
        raise ValueError(f"a has {a.nrows} rows but b has {len(b)} entries")
    aug = [list(row) + [bi] for row, bi in zip(a.rows, b)]
    if not aug:
        return tuple(Fraction(0) for _ in range(a.ncols))
    red, pivots = rref(aug)
    if a.ncols in pivots:
        return None
    x = [Fraction(0)] * a.ncols
    for i, c in enumerate(pivots):
        x[c] = red[i][-1]
    return tuple(x)


def null_space_basis(m: Matrix) -> Matrix:
    """Matrix whose columns form a basis of ``{y : m y = 0}``."""
    if m.nrows == 0:
        return Matrix.identity(m.ncols)
    red, pivots = rref(m)
    free = [c for c in range(m.ncols) if c not in pivots]
    cols = []
    for f in free:
        y = [Fraction(0)] * m.ncols
        y[f] = Fraction(1)
        for i, c in enumerate(pivots):
            y[c] = -red[i][f]
        cols.append(y)
    return Matrix.from_columns(cols, m.ncols)


def right_inverse(m: Matrix) -> Matrix:
    """X with ``m @ X == I``; free variables of each column solve are zero."""
    if rank(m) < m.nrows:
        raise NotFullRowRank(f"rank {rank(m)} < {m.nrows} rows")
    cols = []
    for i in range(m.nrows):
        e = [0] * m.nrows
        e[i] = 1
        cols.append(solve_linear(m, e))
    return Matrix.from_columns(cols, m.ncols)
