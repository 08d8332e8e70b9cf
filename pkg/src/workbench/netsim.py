"""Discrete-time simulation of a stochastic processing network.

Each flow process j (j = 0 for exogenous input, j = 1..n for activities) has
unit increments with mean column ``R^j`` (``R^0 = lambda``) and covariance
``Gamma^j``. Over a step of length h, activity j run at rate ``alpha_j``
consumes ``R^j a + sqrt(a) L_j s`` with ``a = alpha_j h``, where
``L_j L_j' = Gamma^j`` and ``s`` is a standard vector drawn from the chosen
family. Steps that would drive an inventory negative are truncated by scaling
back the offending activities.

Everything here is 64-bit floating point. The exact core only sees simulator
output through tolerance-gated comparisons.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence, TextIO

import numpy as np

from .workload import NetworkData, StaticPlan, WorkloadRepresentation

__all__ = [
    "FAMILIES",
    "StochasticSpec",
    "SimConfig",
    "Trajectory",
    "ScaledTrajectory",
    "DriftOffset",
    "PolicyViolation",
    "HorizonTooShort",
    "nominal_policy",
    "idle_policy",
    "boundary_substitution_policy",
    "make_policy",
    "sigma",
    "simulate",
    "scale",
    "workload_identity_check",
    "drift_offset",
    "estimate_sigma",
    "export_trajectory",
]

log = logging.getLogger(__name__)

FAMILIES = ("deterministic", "gaussian", "bernoulli")

Policy = Callable[[np.ndarray, float], np.ndarray]


class PolicyViolation(ValueError):
    pass


class HorizonTooShort(ValueError):
    pass


def _floats(values) -> np.ndarray:
    return np.array([float(v) for v in values], dtype=float)


def _factor(gamma: np.ndarray) -> np.ndarray:
    """L with L L' = gamma for a symmetric PSD gamma."""
    w, v = np.linalg.eigh(gamma)
    if w.size and w.min() < -1e-12 * max(1.0, abs(w).max()):
        raise ValueError("covariance matrix is not positive semidefinite")
    return v * np.sqrt(np.clip(w, 0.0, None))


@dataclass
class StochasticSpec:
    """Covariances ``gammas[j]`` for j = 0..n and a distribution family."""

    gammas: list[np.ndarray]
    family: str = "gaussian"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        self.gammas = [np.asarray(g, dtype=float) for g in self.gammas]
        for j, g in enumerate(self.gammas):
            if g.shape[0] != g.shape[1] or not np.allclose(g, g.T):
                raise ValueError(f"gamma {j} must be a symmetric square matrix")
        self._factors = [_factor(g) for g in self.gammas]

    @classmethod
    def zero(cls, net: NetworkData) -> "StochasticSpec":
        return cls([np.zeros((net.m, net.m)) for _ in range(net.n + 1)], "deterministic")

    @classmethod
    def from_blocks(cls, net: NetworkData, gammas: dict[int, np.ndarray],
                    family: str | None = None) -> "StochasticSpec":
        """Missing blocks are taken as zero."""
        full = [gammas.get(j, np.zeros((net.m, net.m))) for j in range(net.n + 1)]
        return cls(full, family or ("gaussian" if gammas else "deterministic"))

    @property
    def factors(self) -> list[np.ndarray]:
        return self._factors

    def standard(self, rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
        if self.family == "deterministic":
            return np.zeros(shape)
        if self.family == "gaussian":
            return rng.standard_normal(shape)
        return rng.integers(0, 2, size=shape) * 2.0 - 1.0


@dataclass(frozen=True)
class SimConfig:
    horizon: float
    step: float
    epsilon: float = 0.1
    seed: int = 0
    replications: int = 1

    def __post_init__(self):
        if self.horizon <= 0 or self.step <= 0:
            raise ValueError("horizon and step must be positive")
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        k = round(self.horizon / self.step)
        if k < 1 or abs(k * self.step - self.horizon) > 1e-9 * self.horizon:
            raise ValueError(f"horizon {self.horizon} is not a whole number of steps of {self.step}")

    @property
    def steps(self) -> int:
        return round(self.horizon / self.step)


@dataclass
class Trajectory:
    """Recorded path, one row per step boundary (``steps + 1`` rows).

    ``xi`` is the realized centered flow ``(F^0(t) - lambda t) -
    sum_j (F^j(T_j(t)) - R^j T_j(t))`` so that ``Q = Q(0) + xi + R V`` holds
    step by step. Under the nominal policy it is the nominal inventory process.
    """

    times: np.ndarray
    Q: np.ndarray
    T: np.ndarray
    V: np.ndarray
    I: np.ndarray
    xi: np.ndarray
    truncated_steps: list[int] = field(default_factory=list)
    clamped_steps: list[int] = field(default_factory=list)

    @property
    def horizon(self) -> float:
        return float(self.times[-1])


def nominal_policy(plan: StaticPlan) -> Policy:
    x = _floats(plan.x_star)
    return lambda Q, t: x


def idle_policy(net: NetworkData) -> Policy:
    zero = np.zeros(net.n)
    return lambda Q, t: zero


def boundary_substitution_policy(net: NetworkData, plan: StaticPlan, step: float) -> Policy:
    """Run the nominal plan; when a basic activity lacks an input for one step,
    hand its capacity to the first nonbasic activity that needs none of the
    short materials and only uses resources the blocked activity uses."""
    R = net.R.to_float()
    A = net.A.to_float()
    x = _floats(plan.x_star)
    basic, nonbasic = plan.basic, plan.nonbasic

    def available(Q, k, rate):
        need = R[:, k] * rate * step
        return bool(np.all((need <= 0) | (Q >= need)))

    def policy(Q, t):
        alpha = x.copy()
        for j in basic:
            short = [i for i in range(net.m) if R[i, j] > 0 and Q[i] < R[i, j] * x[j] * step]
            if not short:
                continue
            rate = alpha[j]
            alpha[j] = 0.0
            for k in nonbasic:
                if any(R[i, k] > 0 for i in short):
                    continue
                used = A[:, k] > 0
                if np.any(A[used, j] == 0):
                    continue
                sub = rate * float(np.min(A[used, j] / A[used, k])) if used.any() else rate
                if available(Q, k, sub):
                    alpha[k] += sub
                    break
        return alpha

    return policy


def make_policy(name: str, net: NetworkData, plan: StaticPlan, cfg: SimConfig) -> Policy:
    if name == "nominal":
        return nominal_policy(plan)
    if name == "idle":
        return idle_policy(net)
    if name == "boundary-sub":
        return boundary_substitution_policy(net, plan, cfg.step)
    raise ValueError(f"unknown policy {name!r} (nominal, idle, boundary-sub)")


def sigma(net: NetworkData, plan: StaticPlan, spec: StochasticSpec) -> np.ndarray:
    """Covariance of the Brownian approximation: Gamma^0 + sum_j x*_j Gamma^j."""
    out = spec.gammas[0].copy()
    for j, xj in enumerate(plan.x_star):
        if xj != 0:
            out = out + float(xj) * spec.gammas[j + 1]
    return out


def _k_matrix(net: NetworkData, plan: StaticPlan) -> np.ndarray:
    lower = np.zeros((len(plan.nonbasic), net.n))
    for row, j in enumerate(plan.nonbasic):
        lower[row, j] = -1.0
    return np.vstack([net.A.to_float(), lower])


def simulate(net: NetworkData, spec: StochasticSpec, policy: Policy, cfg: SimConfig,
             plan: StaticPlan, Q0: Sequence[float] | None = None,
             replication: int = 0) -> Trajectory:
    """Euler simulation over ``cfg.steps`` steps; deterministic given (seed, replication)."""
    m, n = net.m, net.n
    h = cfg.step
    steps = cfg.steps
    R = net.R.to_float()
    A = net.A.to_float()
    lam = _floats(net.lam)
    x_star = _floats(plan.x_star)
    K = _k_matrix(net, plan)
    L = spec.factors
    rng = np.random.default_rng([cfg.seed, replication])
    noise = spec.standard(rng, (steps, n + 1, m))
    # shocks[k, j] = L_j s_kj, one unit-time shock per process and step
    shocks = np.einsum("jab,kjb->kja", np.stack(L), noise)

    Q = np.zeros(m) if Q0 is None else np.array(Q0, dtype=float)
    if np.any(Q < 0):
        raise ValueError("initial inventory must be nonnegative")
    T = np.zeros(n)
    V = np.zeros(n)
    I = np.zeros(K.shape[0])
    xi = np.zeros(m)
    out_Q = np.empty((steps + 1, m))
    out_T = np.empty((steps + 1, n))
    out_V = np.empty((steps + 1, n))
    out_I = np.empty((steps + 1, K.shape[0]))
    out_xi = np.empty((steps + 1, m))
    out_Q[0], out_T[0], out_V[0], out_I[0], out_xi[0] = Q, T, V, I, xi
    truncated, clamped = [], []
    sqrt_h = np.sqrt(h)

    for k in range(steps):
        t = k * h
        alpha = np.asarray(policy(Q.copy(), t), dtype=float)
        if alpha.shape != (n,) or np.any(alpha < 0) or np.any(A @ alpha > 1 + 1e-12):
            raise PolicyViolation(f"step {k}: policy returned infeasible rates {alpha}")
        a = alpha * h
        dF0 = lam * h + sqrt_h * shocks[k, 0]
        dF = R * a + shocks[k, 1:].T * np.sqrt(a)
        theta = np.ones(n)
        Qn = Q + dF0 - dF @ theta
        if np.any(Qn < 0):
            for _ in range(n + 1):
                neg = np.nonzero(Qn < 0)[0]
                if not neg.size:
                    break
                for i in neg:
                    cons = (dF[i] > 0) & (theta > 0)
                    total = float(dF[i, cons] @ theta[cons])
                    if total > 0:
                        theta[cons] *= max(0.0, 1.0 - (-Qn[i]) / total)
                Qn = Q + dF0 - dF @ theta
            truncated.append(k)
            log.debug("step %d: activity rates truncated by %s", k, theta)
            deficit = np.minimum(Qn, 0.0)
            if np.any(deficit < 0):
                dF0 = dF0 - deficit
                Qn = Qn - deficit
                clamped.append(k)
                log.debug("step %d: exogenous increment clamped by %s", k, -deficit)
        dT = theta * a
        dV = x_star * h - dT
        Q = Qn
        T = T + dT
        V = V + dV
        I = I + K @ dV
        xi = xi + (dF0 - lam * h) - (dF @ theta - R @ dT)
        out_Q[k + 1], out_T[k + 1], out_V[k + 1], out_I[k + 1], out_xi[k + 1] = Q, T, V, I, xi

    times = np.arange(steps + 1) * h
    return Trajectory(times, out_Q, out_T, out_V, out_I, out_xi, truncated, clamped)


@dataclass
class ScaledTrajectory:
    """Diffusion mode holds (Z, Y, U); fluid mode holds (z, beta, u) in the same slots."""

    mode: str
    epsilon: float
    times: np.ndarray
    Z: np.ndarray
    Y: np.ndarray
    U: np.ndarray
    W: np.ndarray

    @property
    def z(self) -> np.ndarray:
        return self.Z

    @property
    def beta(self) -> np.ndarray:
        return self.Y

    @property
    def u(self) -> np.ndarray:
        return self.U


def scale(traj: Trajectory, cfg: SimConfig, mode: str, rep: WorkloadRepresentation,
          times: Sequence[float] | None = None) -> ScaledTrajectory:
    """Rescale space by epsilon and time by epsilon^2 (diffusion) or epsilon (fluid).

    Without ``times`` every recorded step is used, at scaled time
    ``epsilon^2 t_k`` (resp. ``epsilon t_k``). With ``times``, scaled time s
    reads the last recorded step at or before ``s / epsilon^2`` (resp. ``s / epsilon``).
    """
    eps = cfg.epsilon
    if mode == "diffusion":
        tfac = eps * eps
    elif mode == "fluid":
        tfac = eps
    else:
        raise ValueError("mode must be 'diffusion' or 'fluid'")
    if times is None:
        idx = np.arange(len(traj.times))
        out_t = traj.times * tfac
    else:
        out_t = np.asarray(times, dtype=float)
        raw = out_t / tfac
        if np.any(raw > traj.horizon * (1 + 1e-12)):
            raise HorizonTooShort(f"scaled time {out_t.max()} needs unscaled horizon "
                                  f"{raw.max()} > {traj.horizon}")
        idx = np.floor(raw / cfg.step + 1e-9).astype(int)
    Z = eps * traj.Q[idx]
    Y = eps * traj.V[idx]
    U = eps * traj.I[idx]
    W = Z @ rep.M.to_float().T
    return ScaledTrajectory(mode, eps, out_t, Z, Y, U, W)


def workload_identity_check(scaled: ScaledTrajectory, rep: WorkloadRepresentation,
                            q0: Sequence[float] | None = None) -> float:
    """max_t |M Z(t) - (M q + M X(t) + G U(t))| with X = Z - q - R Y the realized noise."""
    if scaled.mode != "diffusion":
        raise ValueError("workload identity is checked on diffusion-scaled paths")
    M = rep.M.to_float()
    G = rep.G.to_float()
    R = rep.net.R.to_float()
    q = scaled.Z[0] if q0 is None else np.asarray(q0, dtype=float)
    X = scaled.Z - q - scaled.Y @ R.T
    lhs = scaled.Z @ M.T
    rhs = q @ M.T + X @ M.T + scaled.U @ G.T
    return float(np.max(np.abs(lhs - rhs))) if lhs.size else 0.0


@dataclass(frozen=True)
class DriftOffset:
    theta: np.ndarray
    moderate: bool


def drift_offset(lambda_actual: Sequence, lambda_star: Sequence, epsilon,
                 threshold: float = 10.0) -> DriftOffset:
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    diff = [Fraction(a) - Fraction(b) for a, b in zip(lambda_actual, lambda_star)]
    theta = np.array([float(d / Fraction(epsilon)) for d in diff])
    return DriftOffset(theta, bool(np.all(np.abs(theta) <= threshold)))


def estimate_sigma(net: NetworkData, plan: StaticPlan, spec: StochasticSpec,
                   cfg: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    """Monte Carlo covariance of epsilon * xi(1 / epsilon^2) under nominal rates.

    Replication r uses the stream seeded by ``(cfg.seed, r)``. The drift
    ``lambda - R x*`` is zero exactly, so only the noise terms are summed.
    Returns the sample covariance and entrywise standard errors.
    """
    if cfg.replications < 30:
        raise ValueError("estimate_sigma needs at least 30 replications")
    if any(a != b for a, b in zip(net.lam, net.R @ plan.x_star)):
        raise ValueError("plan does not balance lambda")
    m, n = net.m, net.n
    eps, h = cfg.epsilon, cfg.step
    steps = max(1, round(1.0 / (eps * eps * h)))
    L = spec.factors
    x_star = _floats(plan.x_star)
    ends = np.empty((cfg.replications, m))
    for rep_idx in range(cfg.replications):
        rng = np.random.default_rng([cfg.seed, rep_idx])
        s = spec.standard(rng, (steps, n + 1, m)).sum(axis=0)
        total = np.sqrt(h) * (L[0] @ s[0])
        for j in range(n):
            if x_star[j] > 0:
                total = total - np.sqrt(x_star[j] * h) * (L[j + 1] @ s[j + 1])
        ends[rep_idx] = eps * total
    centered = ends - ends.mean(axis=0)
    prods = centered[:, :, None] * centered[:, None, :]
    est = prods.sum(axis=0) / (cfg.replications - 1)
    se = prods.std(axis=0, ddof=1) / np.sqrt(cfg.replications)
    if spec.family == "deterministic" or not np.any(ends):
        est = np.zeros((m, m))
        se = np.zeros((m, m))
    return est, se


def export_trajectory(traj: Trajectory, rep: WorkloadRepresentation, out: TextIO) -> None:
    """Comma-separated rows: time, Q_1..Q_m, I_1..I_p, W_1..W_d (W = M Q, unscaled)."""
    m, p, d = traj.Q.shape[1], traj.I.shape[1], rep.d
    cols = (["time"] + [f"Q{i + 1}" for i in range(m)] + [f"I{k + 1}" for k in range(p)]
            + [f"W{l + 1}" for l in range(d)])
    W = traj.Q @ rep.M.to_float().T
    out.write(",".join(cols) + "\n")
    for k in range(len(traj.times)):
        row = [traj.times[k], *traj.Q[k], *traj.I[k], *W[k]]
        out.write(",".join(repr(float(v)) for v in row) + "\n")
