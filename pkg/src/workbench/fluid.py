"""Fluid-model queries: least draining time and which states can reach each other.

Reachability and communication are each decided by two independent routes,
an LP or linear-system route and a route through the binding dual vertices.
The two must agree; disagreement raises :class:`InconsistentRoutes`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .ratmath import Matrix, as_vector, dot, solve_linear
from .simplex import LinearProgram, Status, solve_lp
from .workload import Infeasible, NetworkData, WorkloadRepresentation, planning_lp

__all__ = [
    "MTTEResult",
    "ReachabilityAnswer",
    "CommunicationAnswer",
    "CriticalProfile",
    "FluidTrajectory",
    "InconsistentRoutes",
    "InfeasibleSegment",
    "mtte",
    "mtte_asymptotic",
    "asymptotic_threshold",
    "is_reachable",
    "communicates",
    "critical_profile",
    "fluid_trajectory",
]


class InconsistentRoutes(AssertionError):
    pass


class InfeasibleSegment(ValueError):
    pass


@dataclass(frozen=True)
class MTTEResult:
    tau_star: Fraction
    x_total: tuple[Fraction, ...]
    dual_mu: tuple[Fraction, ...]
    dual_pi: tuple[Fraction, ...]


def mtte(net: NetworkData, q: Sequence) -> MTTEResult:
    """Least time to execute the buffer-content change ``q`` with inputs switched off."""
    q = as_vector(q)
    lp = planning_lp(net, q)
    sol = solve_lp(lp)
    if sol.status is Status.INFEASIBLE:
        raise Infeasible(f"no x >= 0 satisfies R x = q for q = {tuple(map(str, q))}")
    mu = sol.dual_eq
    pi = tuple(-w for w in sol.dual_ineq)
    return MTTEResult(sol.objective_value, sol.primal[:-1], mu, pi)


def mtte_asymptotic(rep: WorkloadRepresentation, delta: Sequence, t) -> Fraction:
    """``t + max_l mu^l delta`` over every binding vertex (not just the rows of M)."""
    delta = as_vector(delta)
    return Fraction(t) + max(dot(v.mu, delta) for v in rep.binding)


def asymptotic_threshold(rep: WorkloadRepresentation, delta: Sequence, start=1,
                         max_doublings: int = 200) -> Fraction:
    """Smallest tried ``T0`` (``start`` doubled) where the exact MTTE of
    ``t lambda + delta`` matches the asymptotic formula at ``T0`` and ``2 T0``."""
    delta = as_vector(delta)
    lam = rep.net.lam
    t = Fraction(start)

    def agrees(s):
        q = tuple(s * a + b for a, b in zip(lam, delta))
        try:
            return mtte(rep.net, q).tau_star == mtte_asymptotic(rep, delta, s)
        except Infeasible:
            return False

    for _ in range(max_doublings):
        if agrees(t) and agrees(2 * t):
            return t
        t *= 2
    raise RuntimeError(f"no threshold found after {max_doublings} doublings")


@dataclass(frozen=True)
class ReachabilityAnswer:
    reachable: bool
    witness_x: tuple[Fraction, ...] | None
    witness_t: Fraction | None
    dual_violations: tuple[int, ...]
    dual_values: tuple[Fraction, ...]


def _reach_lp(net: NetworkData, delta: tuple[Fraction, ...]):
    """``max s : R x + s delta = lambda, A x <= e, 0 <= s <= 1, x >= 0``."""
    n = net.n
    eq = Matrix([list(net.R.row(i)) + [delta[i]] for i in range(net.m)], ncols=n + 1)
    cap = Matrix([list(net.A.row(k)) + [0] for k in range(net.r)] + [[0] * n + [1]], ncols=n + 1)
    lp = LinearProgram((0,) * n + (1,), "max", (eq, net.lam), (cap, (1,) * net.r + (1,)))
    return solve_lp(lp)


def is_reachable(net: NetworkData, rep: WorkloadRepresentation, q: Sequence,
                 q_prime: Sequence) -> ReachabilityAnswer:
    """Whether the fluid model can move from ``q`` to ``q_prime``.

    ``dual_violations`` indexes into ``rep.binding``.
    """
    q, q_prime = as_vector(q), as_vector(q_prime)
    delta = tuple(b - a for a, b in zip(q, q_prime))
    values = tuple(dot(v.mu, delta) for v in rep.binding)
    violations = tuple(l for l, val in enumerate(values) if val < 0)
    by_duals = not violations

    sol = _reach_lp(net, delta)
    by_lp = sol.optimal and sol.objective_value > 0
    if by_lp != by_duals:
        raise InconsistentRoutes(f"LP route says {by_lp}, dual route says {by_duals} "
                                 f"for delta = {tuple(map(str, delta))}")
    if not by_lp:
        return ReachabilityAnswer(False, None, None, violations, values)
    s = sol.objective_value
    return ReachabilityAnswer(True, sol.primal[:-1], 1 / s, violations, values)


@dataclass(frozen=True)
class CommunicationAnswer:
    communicates: bool
    witness_y: tuple[Fraction, ...] | None

    def __bool__(self) -> bool:
        return self.communicates


def communicates(net: NetworkData, rep: WorkloadRepresentation, q: Sequence,
                 q_prime: Sequence) -> CommunicationAnswer:
    """Whether ``q`` and ``q_prime`` are mutually reachable; ``witness_y`` has
    ``R y = delta`` and ``K y = 0``."""
    q, q_prime = as_vector(q), as_vector(q_prime)
    delta = tuple(b - a for a, b in zip(q, q_prime))
    by_workload = all(v == 0 for v in rep.M @ delta)
    system = Matrix.vstack([net.R, rep.K])
    y = solve_linear(system, delta + (Fraction(0),) * rep.K.nrows)
    by_kernel = y is not None
    if by_kernel != by_workload:
        raise InconsistentRoutes(f"kernel route says {by_kernel}, M delta = 0 says {by_workload}")
    return CommunicationAnswer(by_workload, y)


@dataclass(frozen=True)
class CriticalProfile:
    values: tuple[Fraction, ...]                  # mu^l delta for each binding l
    maximizers: tuple[int, ...]                   # indices into rep.binding, ties kept
    noncritical_servers: dict[int, tuple[int, ...]]
    zero_workload_materials: dict[int, tuple[int, ...]]


def critical_profile(rep: WorkloadRepresentation, delta: Sequence) -> CriticalProfile:
    """Which binding vertices attain ``max_l mu^l delta`` and, for each, the
    servers with ``pi_k = 0`` and materials with ``mu_i = 0`` (0-based)."""
    delta = as_vector(delta)
    values = tuple(dot(v.mu, delta) for v in rep.binding)
    top = max(values)
    best = tuple(l for l, val in enumerate(values) if val == top)
    servers = {l: tuple(k for k, p in enumerate(rep.binding[l].pi) if p == 0) for l in best}
    materials = {l: tuple(i for i, m in enumerate(rep.binding[l].mu) if m == 0) for l in best}
    return CriticalProfile(values, best, servers, materials)


@dataclass(frozen=True)
class FluidTrajectory:
    breakpoints: tuple[Fraction, ...]
    rates: tuple[tuple[Fraction, ...], ...]
    states: tuple[tuple[Fraction, ...], ...]
    beta: tuple[tuple[Fraction, ...], ...]
    u: tuple[tuple[Fraction, ...], ...]


def fluid_trajectory(net: NetworkData, q: Sequence, segments: Sequence[tuple],
                     rep: WorkloadRepresentation) -> FluidTrajectory:
    """Piecewise-constant-rate fluid path from ``q``.

    ``segments`` is a list of ``(duration, alpha)``. Every segment is checked
    for ``alpha >= 0``, ``A alpha <= e`` and nonnegative inventory at both ends
    (inventory is affine within a segment). The centered control
    ``beta = x* t - int alpha`` and ``u = K beta`` are recorded at breakpoints.
    """
    z = as_vector(q)
    x_star = rep.plan.x_star
    t = Fraction(0)
    beta = (Fraction(0),) * net.n
    times, states, betas, us, rates = [t], [z], [beta], [rep.K @ beta], []
    for idx, (duration, alpha) in enumerate(segments):
        duration = Fraction(duration)
        alpha = as_vector(alpha)
        if duration <= 0:
            raise InfeasibleSegment(f"segment {idx}: duration {duration} must be positive")
        if len(alpha) != net.n:
            raise InfeasibleSegment(f"segment {idx}: rate vector has {len(alpha)} entries")
        neg = [j for j, a in enumerate(alpha) if a < 0]
        if neg:
            raise InfeasibleSegment(f"segment {idx} at t = {t}: alpha_{neg[0] + 1} < 0")
        load = net.A @ alpha
        over = [k for k, v in enumerate(load) if v > 1]
        if over:
            raise InfeasibleSegment(f"segment {idx} at t = {t}: server {over[0] + 1} "
                                    f"load {load[over[0]]} > 1")
        drift = tuple(l - c for l, c in zip(net.lam, net.R @ alpha))
        z_end = tuple(a + duration * b for a, b in zip(z, drift))
        short = [i for i, v in enumerate(z_end) if v < 0]
        if short:
            i = short[0]
            hit = t + z[i] / -drift[i]
            raise InfeasibleSegment(f"segment {idx}: buffer {i + 1} goes negative at t = {hit}")
        beta_end = tuple(b + duration * (xs - a) for b, xs, a in zip(beta, x_star, alpha))
        u_end = rep.K @ beta_end
        if any(b < a for a, b in zip(us[-1], u_end)):
            raise InfeasibleSegment(f"segment {idx}: u = K beta decreases")
        for j in rep.plan.basic:
            if beta_end[j] - beta[j] > duration * x_star[j]:
                raise InfeasibleSegment(f"segment {idx}: basic activity {j + 1} rate negative")
        t += duration
        z, beta = z_end, beta_end
        times.append(t)
        states.append(z)
        betas.append(beta)
        us.append(u_end)
        rates.append(alpha)
    return FluidTrajectory(tuple(times), tuple(rates), tuple(states), tuple(betas), tuple(us))
