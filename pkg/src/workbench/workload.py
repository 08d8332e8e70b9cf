"""Static planning, generalized cut constraints and the canonical workload matrix.

Given first-order data (R, A, lambda) of an open processing network this module

* solves the static planning LP ``min rho : R x = lambda, A x <= rho e, x >= 0``,
* checks the heavy-traffic condition (unique plan, rho* = 1, A x* = e),
* enumerates the vertices (mu, pi) of the workload-definition polyhedron
  ``{mu R <= pi A, pi e = 1, pi >= 0}`` and marks which cut constraints bind,
* assembles M, Pi, K, G, Lambda and a right inverse of H, checking every
  identity that links them before returning.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .ratmath import (Matrix, NotFullRowRank, as_vector, dot, null_space_basis, rank,
                      right_inverse)
from .simplex import LinearProgram, LPSolution, Status, optimal_variable_range, solve_lp
from .vertexenum import Polyhedron, enumerate_vertices, recession_direction

__all__ = [
    "NetworkData",
    "StaticPlan",
    "DualVertex",
    "HeavyTrafficReport",
    "CutConstraints",
    "WorkloadRepresentation",
    "MonotonicityEvidence",
    "Infeasible",
    "AssumptionNotSatisfied",
    "IdentityViolation",
    "DualNotPointed",
    "UnboundedOptimalFace",
    "optimal_face_ray",
    "planning_lp",
    "solve_static_plan",
    "verify_assumption1",
    "enumerate_cut_constraints",
    "build_workload_representation",
    "analyze",
    "check_basis_property",
    "check_nonnegativity",
    "check_monotonicity_sampled",
    "factor_M",
    "alternate_right_inverse",
    "identity_checks",
]


class Infeasible(ValueError):
    """No x >= 0 satisfies R x = q."""


class AssumptionNotSatisfied(ValueError):
    pass


class DualNotPointed(AssumptionNotSatisfied):
    """R lacks full row rank, so the workload-definition polyhedron contains a line."""


class UnboundedOptimalFace(AssumptionNotSatisfied):
    """The optimal dual face has a recession ray, so binding vertices do not span the workload space."""


class IdentityViolation(AssertionError):
    """An identity that holds by construction failed; indicates a solver bug."""


@dataclass(frozen=True)
class NetworkData:
    R: Matrix
    A: Matrix
    lam: tuple[Fraction, ...]
    name: str = "network"

    def __post_init__(self):
        object.__setattr__(self, "lam", as_vector(self.lam))
        if self.R.nrows != len(self.lam):
            raise ValueError(f"R has {self.R.nrows} rows but lambda has {len(self.lam)} entries")
        if self.A.ncols != self.R.ncols:
            raise ValueError(f"R has {self.R.ncols} columns but A has {self.A.ncols}")
        if not self.A.is_nonnegative():
            raise ValueError("capacity consumption matrix A must be nonnegative")
        if any(v < 0 for v in self.lam):
            raise ValueError("lambda must be nonnegative")
        if not any(v > 0 for v in self.lam):
            raise ValueError("lambda must have at least one positive entry")

    @property
    def m(self) -> int:
        return self.R.nrows

    @property
    def r(self) -> int:
        return self.A.nrows

    @property
    def n(self) -> int:
        return self.R.ncols

    def with_lambda(self, lam: Sequence) -> "NetworkData":
        return NetworkData(self.R, self.A, as_vector(lam), self.name)


@dataclass(frozen=True)
class StaticPlan:
    rho_star: Fraction
    x_star: tuple[Fraction, ...]
    basic: tuple[int, ...]
    lp: LinearProgram = field(repr=False, compare=False)
    solution: LPSolution = field(repr=False, compare=False)

    @property
    def b(self) -> int:
        return len(self.basic)

    @property
    def nonbasic(self) -> tuple[int, ...]:
        return tuple(j for j in range(len(self.x_star)) if j not in self.basic)


@dataclass(frozen=True)
class DualVertex:
    mu: tuple[Fraction, ...]
    pi: tuple[Fraction, ...]
    binding: bool


@dataclass(frozen=True)
class HeavyTrafficReport:
    rho_is_one: bool
    full_utilization: bool
    primal_unique: bool
    diagnostics: tuple[str, ...] = ()
    alternative_segment: tuple[tuple[Fraction, ...], tuple[Fraction, ...]] | None = None

    @property
    def satisfied(self) -> bool:
        return self.rho_is_one and self.full_utilization and self.primal_unique


@dataclass(frozen=True)
class CutConstraints:
    """Vertices of the workload-definition polyhedron, canonically ordered."""

    vertices: tuple[DualVertex, ...]
    rho_star: Fraction
    bounded: bool
    recession_witness: tuple[Fraction, ...] | None
    diagnostics: tuple[str, ...] = ()
    optimal_face_ray: tuple[Fraction, ...] | None = None

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def __getitem__(self, i: int) -> DualVertex:
        return self.vertices[i]

    @property
    def L(self) -> int:
        return len(self.vertices)

    @property
    def L_star(self) -> int:
        return sum(v.binding for v in self.vertices)

    @property
    def binding(self) -> tuple[DualVertex, ...]:
        return tuple(v for v in self.vertices if v.binding)


@dataclass(frozen=True)
class WorkloadRepresentation:
    net: NetworkData
    plan: StaticPlan
    cuts: CutConstraints
    M: Matrix
    Pi: Matrix
    K: Matrix
    G: Matrix
    Lambda: Matrix
    H: Matrix
    J: Matrix
    B: Matrix
    N: Matrix
    H_plus: Matrix | None
    selected_rows: tuple[int, ...]

    @property
    def d(self) -> int:
        return self.M.nrows

    @property
    def b(self) -> int:
        return self.plan.b

    @property
    def p(self) -> int:
        return self.K.nrows

    @property
    def L(self) -> int:
        return self.cuts.L

    @property
    def L_star(self) -> int:
        return self.cuts.L_star

    @property
    def binding(self) -> tuple[DualVertex, ...]:
        return self.cuts.binding


def planning_lp(net: NetworkData, rhs: Sequence | None = None) -> LinearProgram:
    """``min tau : R x = rhs, A x - tau e <= 0, x >= 0`` over variables (x, tau).

    With ``rhs = lambda`` this is the static planning problem; with an arbitrary
    target vector it is the minimum-time-to-execute problem.
    """
    q = net.lam if rhs is None else as_vector(rhs)
    n, r = net.n, net.r
    cap = Matrix([list(net.A.row(k)) + [-1] for k in range(r)])
    eq = Matrix([list(net.R.row(i)) + [0] for i in range(net.m)], ncols=n + 1)
    obj = (0,) * n + (1,)
    return LinearProgram(obj, "min", (eq, q), (cap, (0,) * r), (False,) * n + (True,))


def solve_static_plan(net: NetworkData) -> StaticPlan:
    lp = planning_lp(net)
    sol = solve_lp(lp)
    if sol.status is Status.INFEASIBLE:
        raise Infeasible("no x >= 0 satisfies R x = lambda")
    if not sol.optimal:  # pragma: no cover - rho is bounded below by 0 when A >= 0
        raise RuntimeError(f"static planning LP is {sol.status.value}")
    x = sol.primal[:-1]
    basic = tuple(j for j, v in enumerate(x) if v > 0)
    return StaticPlan(sol.objective_value, x, basic, lp, sol)


def verify_assumption1(net: NetworkData, plan: StaticPlan) -> HeavyTrafficReport:
    notes = []
    rho_is_one = plan.rho_star == 1
    if not rho_is_one:
        notes.append(f"ρ* = {plan.rho_star} ≠ 1")
    load = net.A @ plan.x_star
    full = all(v == 1 for v in load)
    if not full:
        slack = [k for k, v in enumerate(load) if v != 1]
        notes.append("servers not fully utilized: " +
                     ", ".join(f"{k + 1} (load {load[k]})" for k in slack))
    unique = True
    segment = None
    for j in range(net.n + 1):
        lo, hi = optimal_variable_range(plan.lp, j, plan.solution)
        if lo != hi:
            unique = False
            label = "rho" if j == net.n else f"x_{j + 1}"
            notes.append(f"optimal face is not a point: {label} ranges over [{lo}, {hi}]")
            if segment is None:
                segment = _segment_endpoints(plan, j)
    return HeavyTrafficReport(rho_is_one, full, unique, tuple(notes), segment)


def _segment_endpoints(plan: StaticPlan, j: int):
    lp = plan.lp
    E, f = lp.eq
    face = (Matrix.vstack([E, Matrix.row_vector(lp.objective)]), f + (plan.rho_star,))
    unit = tuple(1 if k == j else 0 for k in range(lp.nvars))
    ends = []
    for sense in ("min", "max"):
        sol = solve_lp(LinearProgram(unit, sense, face, lp.ineq, lp.free))
        if not sol.optimal:
            return None
        ends.append(sol.primal[:-1])
    return tuple(ends)


def dual_polyhedron(net: NetworkData) -> Polyhedron:
    """``{(mu, pi) : mu R - pi A <= 0, pi e = 1, pi >= 0}`` in variables mu (m) then pi (r)."""
    m, r = net.m, net.r
    eq = Matrix([[0] * m + [1] * r])
    rows = [list(net.R.col(j)) + [-a for a in net.A.col(j)] for j in range(net.n)]
    rows += [[0] * m + [-1 if k == i else 0 for k in range(r)] for i in range(r)]
    return Polyhedron(m + r, (eq, (1,)), (Matrix(rows, ncols=m + r), (0,) * len(rows)))


def enumerate_cut_constraints(net: NetworkData, plan: StaticPlan | None = None,
                              budget: int | None = None) -> CutConstraints:
    """Basic feasible solutions of the workload-definition problem with binding flags.

    A vertex binds when ``mu lambda = rho*``; comparing with rho* rather than 1
    keeps the classification meaningful on inputs that are not critically loaded.
    """
    if plan is None:
        plan = solve_static_plan(net)
    if rank(net.R) < net.m:
        raise DualNotPointed(f"R has rank {rank(net.R)} < m = {net.m}: mu can move along "
                             "y with y R = 0, so there are no vertices")
    vs = enumerate_vertices(dual_polyhedron(net), budget)
    m = net.m
    verts = []
    for v in vs.vertices:
        mu, pi = v[:m], v[m:]
        value = dot(mu, net.lam)
        if value > plan.rho_star:
            raise IdentityViolation(f"vertex value {value} exceeds rho* = {plan.rho_star}")
        verts.append(DualVertex(mu, pi, value == plan.rho_star))
    notes = []
    if vs.recession_witness is not None:
        w = vs.recession_witness
        notes.append("dual polyhedron is unbounded (recession direction mu = ("
                     + ", ".join(str(v) for v in w[:m]) + "))")
    if not any(v.binding for v in verts):
        raise IdentityViolation("no binding vertex although the dual LP attains rho*")
    ray = optimal_face_ray(net) if vs.recession_witness is not None else None
    if ray is not None:
        notes.append("optimal dual face is unbounded along mu = (" + ", ".join(map(str, ray)) + ")")
    return CutConstraints(tuple(verts), plan.rho_star, vs.bounded, vs.recession_witness,
                          tuple(notes), ray)


def optimal_face_ray(net: NetworkData) -> tuple[Fraction, ...] | None:
    """A nonzero mu with ``mu R <= 0`` and ``mu lambda = 0``, or None.

    Such a mu is a recession direction of the set of optimal dual solutions
    (pi must be 0 along any recession direction). When one exists the binding
    vertices alone miss part of the optimal face.
    """
    cone = Polyhedron(net.m, (Matrix.row_vector(net.lam), (0,)), (net.R.T, (0,) * net.n))
    return recession_direction(cone)


def build_workload_representation(net: NetworkData, plan: StaticPlan,
                                  cuts: CutConstraints) -> WorkloadRepresentation:
    report = verify_assumption1(net, plan)
    if not report.satisfied:
        raise AssumptionNotSatisfied("heavy-traffic condition fails: " + "; ".join(report.diagnostics))
    if cuts.optimal_face_ray is not None:
        raise UnboundedOptimalFace("optimal dual solutions are unbounded along mu = ("
                                   + ", ".join(map(str, cuts.optimal_face_ray))
                                   + "); binding vertices do not determine the workload space")

    # rank-augmenting scan over binding vertices in canonical order
    selected: list[int] = []
    rows: list[tuple[Fraction, ...]] = []
    for idx, v in enumerate(cuts.vertices):
        if not v.binding:
            continue
        if rank(rows + [v.mu]) > len(rows):
            rows.append(v.mu)
            selected.append(idx)
    M = Matrix(rows, ncols=net.m)
    Pi = Matrix([cuts.vertices[i].pi for i in selected], ncols=net.r)

    basic, nonbasic = plan.basic, plan.nonbasic
    H, J = net.R.columns(basic), net.R.columns(nonbasic)
    B, N = net.A.columns(basic), net.A.columns(nonbasic)
    # K keeps the original activity order: first r rows are A, then -e_j' per nonbasic j
    lower = Matrix([[-1 if k == j else 0 for k in range(net.n)] for j in nonbasic], ncols=net.n)
    K = Matrix.vstack([net.A, lower])
    Lam = Pi @ N - M @ J
    G = Matrix.hstack([Pi, Lam])
    H_plus = right_inverse(H) if rank(H) == net.m else None

    rep = WorkloadRepresentation(net, plan, cuts, M, Pi, K, G, Lam, H, J, B, N, H_plus,
                                 tuple(selected))
    failed = [name for name, ok in identity_checks(rep).items() if not ok]
    if failed:
        raise IdentityViolation("identities failed: " + ", ".join(failed))
    return rep


def identity_checks(rep: WorkloadRepresentation) -> dict[str, bool]:
    """Every structural identity of the representation, evaluated exactly."""
    net = rep.net
    binding_mu = [v.mu for v in rep.binding]
    checks = {
        "p = r + n - b": rep.p == net.r + net.n - rep.b,
        "rank(M) = d": rank(rep.M) == rep.d,
        "d = rank of binding set": rank(binding_mu) == rep.d,
        "MH = Pi B": rep.M @ rep.H == rep.Pi @ rep.B,
        "MR = GK": rep.M @ net.R == rep.G @ rep.K,
        "G >= 0": rep.G.is_nonnegative(),
        "Lambda >= 0": rep.Lambda.is_nonnegative(),
    }
    if rep.H_plus is not None:
        checks["H H+ = I"] = rep.H @ rep.H_plus == Matrix.identity(net.m)
        checks["M = Pi B H+"] = rep.Pi @ rep.B @ rep.H_plus == rep.M
    return checks


@dataclass(frozen=True)
class Analysis:
    net: NetworkData
    plan: StaticPlan
    report: HeavyTrafficReport
    cuts: CutConstraints | None
    rep: WorkloadRepresentation | None


def analyze(net: NetworkData, budget: int | None = None) -> Analysis:
    """Run the whole pipeline; ``rep`` is None when the heavy-traffic check fails."""
    plan = solve_static_plan(net)
    report = verify_assumption1(net, plan)
    cuts = enumerate_cut_constraints(net, plan, budget)
    rep = build_workload_representation(net, plan, cuts) if report.satisfied else None
    return Analysis(net, plan, report, cuts, rep)


def reversible_displacements(rep: WorkloadRepresentation) -> list[tuple[Fraction, ...]]:
    """Spanning set of ``{R y : K y = 0}``."""
    Y = null_space_basis(rep.K)
    return [rep.net.R @ Y.col(j) for j in range(Y.ncols)]


def check_basis_property(rep: WorkloadRepresentation, net: NetworkData | None = None) -> bool:
    """True iff M annihilates the reversible displacements and ranks add up to m."""
    net = net or rep.net
    span = reversible_displacements(rep)
    if any(any(v != 0 for v in rep.M @ delta) for delta in span):
        return False
    dim_n = rank(span) if span else 0
    return rank(rep.M) + dim_n == net.m


def check_nonnegativity(rep: WorkloadRepresentation) -> bool:
    return rep.M.is_nonnegative()


def alternate_right_inverse(H: Matrix, base: Matrix | None = None) -> Matrix:
    """A right inverse of H different from ``base`` when H has a nontrivial kernel."""
    base = base if base is not None else right_inverse(H)
    Z = null_space_basis(H)
    if Z.ncols == 0:
        return base
    shift = Z @ Matrix([[1] * H.nrows for _ in range(Z.ncols)], ncols=H.nrows)
    return base + shift


def factor_M(rep: WorkloadRepresentation, h_plus: Matrix | None = None) -> Matrix:
    """``Pi B H+`` for a right inverse H+ of H; must equal M."""
    m = rep.net.m
    if rank(rep.H) < m:
        raise AssumptionNotSatisfied(f"H has rank {rank(rep.H)} < m = {m}; no right inverse exists")
    if h_plus is None:
        h_plus = rep.H_plus if rep.H_plus is not None else right_inverse(rep.H)
    if rep.H @ h_plus != Matrix.identity(m):
        raise NotFullRowRank("supplied matrix is not a right inverse of H")
    out = rep.Pi @ rep.B @ h_plus
    if out != rep.M:
        raise IdentityViolation(f"Pi B H+ = {out!r} differs from M = {rep.M!r}")
    return out


@dataclass(frozen=True)
class MonotonicityEvidence:
    trials: int
    tested: int
    counterexample: dict | None

    @property
    def found(self) -> bool:
        return self.counterexample is not None

    def summary(self) -> str:
        if self.counterexample is None:
            return f"no counterexample in {self.tested} tested trials ({self.trials} drawn)"
        c = self.counterexample
        return ("counterexample: lambda = (" + ", ".join(map(str, c["lam"])) + "), lambda' = ("
                + ", ".join(map(str, c["lam_prime"])) + ") has no x' with R x' = lambda', "
                "A x' <= A x")


def _rand_frac(rng: random.Random, top: int = 8, den: int = 4) -> Fraction:
    return Fraction(rng.randint(0, top), rng.randint(1, den))


def check_monotonicity_sampled(net: NetworkData, trials: int = 1000, seed: int = 0) -> MonotonicityEvidence:
    """Randomized search for a violation of the monotonicity condition on (R, A).

    Each trial draws ``x >= 0`` with ``lambda = R x >= 0`` and a componentwise
    smaller ``0 <= lambda' < lambda`` (strict on the positive entries), then
    asks an LP whether some ``x' >= 0`` has ``R x' = lambda'`` and
    ``A x' <= A x``. Finding none is evidence only, not a proof.
    """
    rng = random.Random(seed)
    n, m = net.n, net.m
    tested = 0
    for t in range(trials):
        if t % 2 == 0:
            x = tuple(_rand_frac(rng) for _ in range(n))
        else:
            lam = tuple(_rand_frac(rng) for _ in range(m))
            cost = tuple(rng.randint(1, 5) for _ in range(n))
            sol = solve_lp(LinearProgram(cost, "min", (net.R, lam)))
            if not sol.optimal:
                continue
            x = sol.primal
        lam = net.R @ x
        if any(v < 0 for v in lam) or not any(v > 0 for v in lam):
            continue
        shrink = [Fraction(rng.randint(1, 16), 16) / rng.choice((1, 4, 16)) for _ in range(m)]
        lam_prime = tuple(v * (1 - s) for v, s in zip(lam, shrink))
        load = net.A @ x
        tested += 1
        sol = solve_lp(LinearProgram((0,) * n, "min", (net.R, lam_prime), (net.A, load)))
        if sol.status is Status.INFEASIBLE:
            return MonotonicityEvidence(t + 1, tested,
                                        {"x": x, "lam": lam, "lam_prime": lam_prime})
    return MonotonicityEvidence(trials, tested, None)
