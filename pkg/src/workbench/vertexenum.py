"""Exact vertex enumeration for small polyhedra ``{x : E x = f, C x <= d}``.

Vertices are found by brute force over active sets: every equality plus a
linearly independent choice of inequality rows that pins down a single point.
The search extends active sets one row at a time and drops a branch as soon as
a row is dependent on the rows already chosen, so only independent sets are
ever solved. The returned vertex list is sorted lexicographically.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .ratmath import Matrix, as_vector, rank
from .simplex import LinearProgram, solve_lp

__all__ = ["Polyhedron", "VertexSet", "TooLarge", "enumerate_vertices", "recession_direction",
           "DEFAULT_BUDGET", "active_rank"]

DEFAULT_BUDGET = 5_000_000
BUDGET_ENV = "WORKBENCH_ENUM_BUDGET"


class TooLarge(RuntimeError):
    """The active-set search visited more subsets than the budget allows."""


@dataclass(frozen=True)
class Polyhedron:
    dim: int
    equalities: tuple[Matrix, tuple[Fraction, ...]]
    inequalities: tuple[Matrix, tuple[Fraction, ...]]

    def __post_init__(self):
        for name in ("equalities", "inequalities"):
            mat, rhs = getattr(self, name)
            rhs = as_vector(rhs)
            if mat.ncols != self.dim or mat.nrows != len(rhs):
                raise ValueError(f"{name}: shape {mat.shape} with {len(rhs)} rhs entries, dim {self.dim}")
            object.__setattr__(self, name, (mat, rhs))

    def contains(self, x: Sequence[Fraction]) -> bool:
        E, f = self.equalities
        C, d = self.inequalities
        return tuple(E @ x) == f and all(a <= b for a, b in zip(C @ x, d))


@dataclass(frozen=True)
class VertexSet:
    vertices: tuple[tuple[Fraction, ...], ...]
    bounded: bool
    recession_witness: tuple[Fraction, ...] | None = None
    subsets_visited: int = 0

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)


def _budget(budget: int | None) -> int:
    if budget is not None:
        return budget
    env = os.environ.get(BUDGET_ENV)
    return int(env) if env else DEFAULT_BUDGET


def _reduce(row: list[Fraction], basis: list[tuple[int, list[Fraction]]]) -> list[Fraction]:
    for pc, brow in basis:
        f = row[pc]
        if f != 0:
            row = [a - f * b for a, b in zip(row, brow)]
    return row


def _leading(row: list[Fraction], dim: int) -> int | None:
    return next((j for j in range(dim) if row[j] != 0), None)


def enumerate_vertices(p: Polyhedron, budget: int | None = None) -> VertexSet:
    """All vertices of ``p``, each exactly once, in lexicographic order.

    ``budget`` caps the number of partial active sets visited; the default is
    5,000,000 or the value of the ``WORKBENCH_ENUM_BUDGET`` environment variable.
    """
    limit = _budget(budget)
    dim = p.dim
    E, f = p.equalities
    C, d = p.inequalities
    witness = recession_direction(p)

    # echelon basis of the equality rows, as augmented rows [a | b]
    base: list[tuple[int, list[Fraction]]] = []
    for row, rhs in zip(E.rows, f):
        red = _reduce(list(row) + [rhs], base)
        pc = _leading(red, dim)
        if pc is None:
            if red[-1] != 0:
                return VertexSet((), witness is None, witness, 0)
            continue
        pv = red[pc]
        base.append((pc, [v / pv for v in red]))

    need = dim - len(base)
    ineq_rows = [list(r) + [rhs] for r, rhs in zip(C.rows, d)]
    found: set[tuple[Fraction, ...]] = set()
    visited = 0

    def solve(basis):
        x = [Fraction(0)] * dim
        for pc, row in reversed(basis):
            x[pc] = row[-1] - sum((row[j] * x[j] for j in range(dim) if j != pc and row[j] != 0),
                                  Fraction(0))
        return tuple(x)

    def feasible(x):
        return all(sum((a * b for a, b in zip(r, x)), Fraction(0)) <= rhs
                   for r, rhs in zip(C.rows, d))

    def extend(start: int, basis, left: int):
        nonlocal visited
        if left == 0:
            x = solve(basis)
            if feasible(x):
                found.add(x)
            return
        for i in range(start, len(ineq_rows) - left + 1):
            visited += 1
            if visited > limit:
                raise TooLarge(f"vertex enumeration exceeded {limit} active subsets "
                               f"(dim {dim}, {len(ineq_rows)} inequalities)")
            red = _reduce(ineq_rows[i], basis)
            pc = _leading(red, dim)
            if pc is None:
                continue
            pv = red[pc]
            extend(i + 1, basis + [(pc, [v / pv for v in red])], left - 1)

    if need >= 0 and rank(Matrix.vstack([E, C]) if C.nrows else E) == dim:
        extend(0, base, need)
    verts = tuple(sorted(found))
    return VertexSet(verts, witness is None, witness, visited)


def recession_direction(p: Polyhedron) -> tuple[Fraction, ...] | None:
    """A nonzero y with ``E y = 0`` and ``C y <= 0``, or None if the cone is trivial."""
    dim = p.dim
    E, _ = p.equalities
    C, _ = p.inequalities
    zeros_e = (Fraction(0),) * E.nrows
    for i in range(dim):
        for s in (1, -1):
            unit = [0] * dim
            unit[i] = s
            cap = Matrix.vstack([C, Matrix.row_vector(unit)])
            lp = LinearProgram(tuple(unit), "max", (E, zeros_e),
                               (cap, (Fraction(0),) * C.nrows + (Fraction(1),)), (True,) * dim)
            sol = solve_lp(lp)
            if sol.optimal and sol.objective_value > 0:
                return sol.primal
    return None


def active_rank(p: Polyhedron, x: Sequence[Fraction]) -> int:
    """Rank of the constraint rows active at ``x`` (equalities always count)."""
    E, _ = p.equalities
    C, d = p.inequalities
    rows = list(E.rows)
    rows += [r for r, lhs, rhs in zip(C.rows, C @ x, d) if lhs == rhs]
    return rank(rows) if rows else 0
