"""Exact two-phase primal simplex over Fractions with Bland's anti-cycling rule.

Dual values follow one convention everywhere: ``dual[i]`` is the rate of
change of the optimal objective value with respect to the right-hand side of
constraint ``i``. For a minimization this makes multipliers on ``<=`` rows
nonpositive; for a maximization, nonnegative. Equality rows are free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .ratmath import Matrix, as_vector, dot

__all__ = [
    "Status",
    "LinearProgram",
    "LPSolution",
    "solve_lp",
    "optimal_variable_range",
    "check_solution",
]

ZERO = Fraction(0)


class Status(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """``sense c.x`` subject to ``E x = f``, ``C x <= d`` and per-variable bounds.

    ``free[j]`` True means variable j is unbounded below; otherwise ``x_j >= 0``.
    """

    objective: tuple[Fraction, ...]
    sense: str = "min"
    eq: tuple[Matrix, tuple[Fraction, ...]] | None = None
    ineq: tuple[Matrix, tuple[Fraction, ...]] | None = None
    free: tuple[bool, ...] = ()

    def __post_init__(self):
        n = len(self.objective)
        object.__setattr__(self, "objective", as_vector(self.objective))
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")
        if not self.free:
            object.__setattr__(self, "free", (False,) * n)
        if len(self.free) != n:
            raise ValueError("free flags must match the number of variables")
        for name in ("eq", "ineq"):
            block = getattr(self, name)
            if block is None:
                object.__setattr__(self, name, (Matrix.zeros(0, n), ()))
                continue
            mat, rhs = block
            rhs = as_vector(rhs)
            if mat.ncols != n or mat.nrows != len(rhs):
                raise ValueError(f"{name} block has shape {mat.shape} with {len(rhs)} rhs entries; "
                                 f"expected {n} columns")
            object.__setattr__(self, name, (mat, rhs))

    @property
    def nvars(self) -> int:
        return len(self.objective)

    @property
    def n_eq(self) -> int:
        return self.eq[0].nrows

    @property
    def n_ineq(self) -> int:
        return self.ineq[0].nrows


@dataclass(frozen=True)
class LPSolution:
    status: Status
    objective_value: Fraction | None = None
    primal: tuple[Fraction, ...] = ()
    dual: tuple[Fraction, ...] = ()
    n_eq: int = 0

    @property
    def dual_eq(self) -> tuple[Fraction, ...]:
        return self.dual[: self.n_eq]

    @property
    def dual_ineq(self) -> tuple[Fraction, ...]:
        return self.dual[self.n_eq:]

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


@dataclass
class _Tableau:
    rows: list[list[Fraction]]       # constraint rows, last entry is rhs
    basis: list[int]
    n_cols: int                       # structural + slack + artificial columns
    n_art_start: int
    forbidden: set[int] = field(default_factory=set)

    def pivot(self, r: int, c: int, obj: list[Fraction]) -> None:
        row = self.rows[r]
        pv = row[c]
        if pv != 1:
            row = [v / pv for v in row]
            self.rows[r] = row
        for i, other in enumerate(self.rows):
            if i != r and other[c] != 0:
                f = other[c]
                self.rows[i] = [a - f * b for a, b in zip(other, row)]
        if obj[c] != 0:
            f = obj[c]
            obj[:] = [a - f * b for a, b in zip(obj, row)]
        self.basis[r] = c

    def run(self, obj: list[Fraction]) -> Status:
        """Minimize with reduced-cost row ``obj`` (last entry is -value)."""
        while True:
            entering = next((j for j in range(self.n_cols)
                             if obj[j] < 0 and j not in self.forbidden), None)
            if entering is None:
                return Status.OPTIMAL
            best = None
            for i, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    key = (row[-1] / a, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return Status.UNBOUNDED
            self.pivot(best[1], entering, obj)


def solve_lp(lp: LinearProgram) -> LPSolution:
    """Solve ``lp`` exactly. Deterministic: the same input gives the same output."""
    n = lp.nvars
    E, f = lp.eq
    C, d = lp.ineq
    n_eq, n_ineq = E.nrows, C.nrows

    # structural columns: x_j -> column j; free x_j also gets a negative part
    neg_col = {}
    ncol = n
    for j in range(n):
        if lp.free[j]:
            neg_col[j] = ncol
            ncol += 1
    slack_start = ncol
    ncol += n_ineq
    art_start = ncol
    m = n_eq + n_ineq
    total = ncol + m

    sign = lp.objective if lp.sense == "min" else tuple(-c for c in lp.objective)
    cost = [ZERO] * total
    for j in range(n):
        cost[j] = sign[j]
        if j in neg_col:
            cost[neg_col[j]] = -sign[j]

    rows: list[list[Fraction]] = []
    flip: list[int] = []
    for i in range(m):
        row = [ZERO] * (total + 1)
        if i < n_eq:
            src, rhs = E.row(i), f[i]
        else:
            src, rhs = C.row(i - n_eq), d[i - n_eq]
            row[slack_start + i - n_eq] = Fraction(1)
        for j in range(n):
            row[j] = src[j]
            if j in neg_col:
                row[neg_col[j]] = -src[j]
        row[-1] = rhs
        s = -1 if rhs < 0 else 1
        if s < 0:
            row = [-v for v in row]
        row[art_start + i] = Fraction(1)
        rows.append(row)
        flip.append(s)

    tab = _Tableau(rows=rows, basis=[art_start + i for i in range(m)], n_cols=total,
                   n_art_start=art_start)

    # phase I: minimize the sum of artificials
    obj = [ZERO] * (total + 1)
    for j in range(art_start, total):
        obj[j] = Fraction(1)
    for row in tab.rows:
        obj = [a - b for a, b in zip(obj, row)]
    tab.run(obj)
    if -obj[-1] != 0:
        return LPSolution(Status.INFEASIBLE, n_eq=n_eq)

    # drive zero-level artificials out of the basis where possible
    for r in range(m):
        if tab.basis[r] >= art_start:
            c = next((j for j in range(art_start) if tab.rows[r][j] != 0), None)
            if c is not None:
                tab.pivot(r, c, obj)
    tab.forbidden = set(range(art_start, total))

    # phase II
    obj = cost + [ZERO]
    for r, b in enumerate(tab.basis):
        if obj[b] != 0:
            fct = obj[b]
            obj = [a - fct * v for a, v in zip(obj, tab.rows[r])]
    status = tab.run(obj)
    if status is Status.UNBOUNDED:
        return LPSolution(Status.UNBOUNDED, n_eq=n_eq)

    z = [ZERO] * total
    for r, b in enumerate(tab.basis):
        z[b] = tab.rows[r][-1]
    x = tuple(z[j] - (z[neg_col[j]] if j in neg_col else 0) for j in range(n))

    # y = c_B B^-1, read off the artificial columns (they started as the identity)
    cb = [cost[b] for b in tab.basis]
    y = [sum((cb[r] * tab.rows[r][art_start + i] for r in range(m)), ZERO) for i in range(m)]
    out = 1 if lp.sense == "min" else -1
    dual = tuple(out * flip[i] * y[i] for i in range(m))

    value = dot(lp.objective, x)
    return LPSolution(Status.OPTIMAL, value, x, dual, n_eq)


def optimal_variable_range(lp: LinearProgram, j: int,
                           solution: LPSolution | None = None) -> tuple[Fraction | None, Fraction | None]:
    """Exact (min, max) of ``x_j`` over the optimal face of ``lp``.

    An end that is unbounded on the optimal face is reported as None.
    """
    sol = solution if solution is not None else solve_lp(lp)
    if not sol.optimal:
        raise ValueError(f"LP is {sol.status.value}; the optimal face is empty")
    n = lp.nvars
    E, f = lp.eq
    face_eq = (Matrix.vstack([E, Matrix.row_vector(lp.objective)]), f + (sol.objective_value,))
    unit = tuple(Fraction(1) if k == j else ZERO for k in range(n))
    ends = []
    for sense in ("min", "max"):
        aux = LinearProgram(unit, sense, face_eq, lp.ineq, lp.free)
        res = solve_lp(aux)
        ends.append(res.objective_value if res.optimal else None)
    return ends[0], ends[1]


def check_solution(lp: LinearProgram, sol: LPSolution) -> list[str]:
    """Verify primal feasibility, dual feasibility, complementary slackness and
    strong duality exactly. Returns a list of violations (empty when sound)."""
    problems: list[str] = []
    if not sol.optimal:
        return problems
    x = sol.primal
    E, f = lp.eq
    C, d = lp.ineq
    Ex = E @ x
    Cx = C @ x
    for i, (a, b) in enumerate(zip(Ex, f)):
        if a != b:
            problems.append(f"equality {i}: {a} != {b}")
    for i, (a, b) in enumerate(zip(Cx, d)):
        if a > b:
            problems.append(f"inequality {i}: {a} > {b}")
    for j, v in enumerate(x):
        if not lp.free[j] and v < 0:
            problems.append(f"variable {j} negative: {v}")
    # work with the min-form multipliers: c - E'y - C'w >= 0 on bounded vars, = 0 on free
    s = 1 if lp.sense == "min" else -1
    y, w = sol.dual_eq, sol.dual_ineq
    for i, wi in enumerate(w):
        if s * wi > 0:
            problems.append(f"ineq multiplier {i} has wrong sign: {wi}")
        if wi != 0 and Cx[i] != d[i]:
            problems.append(f"ineq {i} slack but multiplier {wi}")
    for j in range(lp.nvars):
        red = s * lp.objective[j] - s * (dot(E.col(j), y) + dot(C.col(j), w))
        if lp.free[j] and red != 0:
            problems.append(f"free variable {j} reduced cost {red}")
        if not lp.free[j]:
            if red < 0:
                problems.append(f"variable {j} reduced cost {red} < 0")
            if red != 0 and x[j] != 0:
                problems.append(f"variable {j} positive with reduced cost {red}")
    dual_value = dot(f, y) + dot(d, w)
    if dual_value != sol.objective_value:
        problems.append(f"duality gap: primal {sol.objective_value} dual {dual_value}")
    return problems
