import io

import numpy as np
import pytest

from workbench.netfile import bundled_network
from workbench.netsim import (HorizonTooShort, PolicyViolation, SimConfig, StochasticSpec,
                              drift_offset, estimate_sigma, export_trajectory, make_policy,
                              scale, sigma, simulate, workload_identity_check)


def setup(get, name, family=None):
    nf = bundled_network(name)
    a = get(name)
    return nf, a, StochasticSpec.from_blocks(nf.net, nf.gammas, family or nf.family)


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(horizon=1.0, step=0.3)
    with pytest.raises(ValueError):
        SimConfig(horizon=1.0, step=0.1, epsilon=0)
    assert SimConfig(horizon=1.0, step=0.1).steps == 10


def test_sigma_formula(get):
    nf, a, spec = setup(get, "ex1")
    assert np.array_equal(sigma(nf.net, a.plan, spec), 2 * np.eye(2))


def test_unknown_family():
    with pytest.raises(ValueError):
        StochasticSpec([np.eye(1)], "poisson")


def test_deterministic_nominal_run_holds_state(get):
    nf, a, _ = setup(get, "ex1")
    spec = StochasticSpec.zero(nf.net)
    cfg = SimConfig(horizon=2.0, step=0.25)
    traj = simulate(nf.net, spec, make_policy("nominal", nf.net, a.plan, cfg), cfg, a.plan, [1, 1])
    assert np.allclose(traj.Q, 1.0, atol=1e-12)
    assert np.allclose(traj.V, 0.0, atol=1e-12)
    assert not traj.truncated_steps


def test_idle_policy_accumulates_idleness(get):
    nf, a, _ = setup(get, "ex1")
    spec = StochasticSpec.zero(nf.net)
    cfg = SimConfig(horizon=1.0, step=0.5)
    traj = simulate(nf.net, spec, make_policy("idle", nf.net, a.plan, cfg), cfg, a.plan)
    assert np.allclose(traj.Q[-1], [1.5, 0.5])
    assert np.allclose(traj.I[-1], [1.0])


def test_truncation_keeps_inventory_nonnegative(get):
    nf, a, spec = setup(get, "ex2", "gaussian")
    cfg = SimConfig(horizon=20.0, step=0.01, seed=3)
    traj = simulate(nf.net, spec, make_policy("nominal", nf.net, a.plan, cfg), cfg, a.plan)
    assert traj.Q.min() >= 0
    assert traj.truncated_steps
    assert np.all(np.diff(traj.I, axis=0) >= -1e-12)
    # inventory balance holds on every recorded step
    R = nf.net.R.to_float()
    assert np.allclose(traj.Q, traj.Q[0] + traj.xi + traj.V @ R.T, atol=1e-9)


def test_bernoulli_family_runs(get):
    nf, a, _ = setup(get, "ex1")
    spec = StochasticSpec.from_blocks(nf.net, nf.gammas, "bernoulli")
    cfg = SimConfig(horizon=5.0, step=0.1, seed=1)
    traj = simulate(nf.net, spec, make_policy("nominal", nf.net, a.plan, cfg), cfg, a.plan, [5, 5])
    assert traj.Q.min() >= 0


def test_policy_violation(get):
    nf, a, spec = setup(get, "ex1")
    cfg = SimConfig(horizon=1.0, step=0.5)
    with pytest.raises(PolicyViolation):
        simulate(nf.net, spec, lambda Q, t: np.array([1.0, 1.0]), cfg, a.plan)
    with pytest.raises(PolicyViolation):
        simulate(nf.net, spec, lambda Q, t: np.array([-0.1, 0.0]), cfg, a.plan)


def test_boundary_substitution_rates(get):
    nf, a, _ = setup(get, "ex2")
    cfg = SimConfig(horizon=1.0, step=0.1)
    policy = make_policy("boundary-sub", nf.net, a.plan, cfg)
    assert np.array_equal(policy(np.array([1.0, 1.0]), 0.0), [1, 0, 0])
    assert np.array_equal(policy(np.array([1.0, 0.0]), 0.0), [0, 1, 0])
    assert np.array_equal(policy(np.array([0.0, 1.0]), 0.0), [0, 0, 1])
    assert np.array_equal(policy(np.array([0.0, 0.0]), 0.0), [0, 0, 0])


def test_scaling_and_identity(get):
    nf, a, spec = setup(get, "ex2", "gaussian")
    cfg = SimConfig(horizon=100.0, step=0.01, epsilon=0.1, seed=5)
    traj = simulate(nf.net, spec, make_policy("boundary-sub", nf.net, a.plan, cfg), cfg, a.plan, [1, 1])
    diff = scale(traj, cfg, "diffusion", a.rep)
    assert diff.times[-1] == pytest.approx(1.0)
    assert workload_identity_check(diff, a.rep) < 1e-9
    picked = scale(traj, cfg, "diffusion", a.rep, times=[0.0, 0.5, 1.0])
    assert np.array_equal(picked.Z[1], 0.1 * traj.Q[5000])
    with pytest.raises(HorizonTooShort):
        scale(traj, cfg, "diffusion", a.rep, times=[1.5])
    fl = scale(traj, cfg, "fluid", a.rep)
    assert fl.times[-1] == pytest.approx(10.0)
    with pytest.raises(ValueError):
        workload_identity_check(fl, a.rep)


def test_drift_offset():
    off = drift_offset((1.05, 1), (1, 1), 0.1)
    assert np.allclose(off.theta, [0.5, 0.0]) and off.moderate
    assert not drift_offset((3, 1), (1, 1), 0.1).moderate


def test_estimate_sigma_deterministic_is_exactly_zero(get):
    nf, a, _ = setup(get, "ex1")
    est, se = estimate_sigma(nf.net, a.plan, StochasticSpec.zero(nf.net),
                             SimConfig(1.0, 0.01, 0.1, 0, 30))
    assert not est.any() and not se.any()
    with pytest.raises(ValueError):
        estimate_sigma(nf.net, a.plan, StochasticSpec.zero(nf.net), SimConfig(1.0, 0.01, 0.1, 0, 5))


def test_export_header(get):
    nf, a, spec = setup(get, "ex2")
    cfg = SimConfig(horizon=0.05, step=0.01)
    traj = simulate(nf.net, spec, make_policy("nominal", nf.net, a.plan, cfg), cfg, a.plan, [1, 1])
    buf = io.StringIO()
    export_trajectory(traj, a.rep, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "time,Q1,Q2,I1,I2,I3,W1,W2"
    assert len(lines) == 7


def test_zero_variance_replay_matches_exact_fluid_path(get):
    """Replays a deterministic run segment by segment through the exact fluid model."""
    from fractions import Fraction

    from workbench.fluid import fluid_trajectory

    nf, a, _ = setup(get, "ex2")
    spec = StochasticSpec.zero(nf.net)
    cfg = SimConfig(horizon=3.0, step=0.25)
    base = make_policy("boundary-sub", nf.net, a.plan, cfg)
    used = []

    def recording(Q, t):
        alpha = base(Q, t)
        used.append(alpha.copy())
        return alpha

    traj = simulate(nf.net, spec, recording, cfg, a.plan, [0.5, 0.5])
    assert not traj.truncated_steps
    segments = [(Fraction(1, 4), tuple(Fraction(float(v)) for v in alpha)) for alpha in used]
    exact = fluid_trajectory(nf.net, (Fraction(1, 2), Fraction(1, 2)), segments, a.rep)
    assert np.allclose(traj.Q, np.array(exact.states, dtype=float), atol=1e-12)
    assert np.allclose(traj.V, np.array(exact.beta, dtype=float), atol=1e-12)
    assert np.allclose(traj.I, np.array(exact.u, dtype=float), atol=1e-12)
    # exact identity on the exact path
    M, G, R = a.rep.M, a.rep.G, nf.net.R
    q = exact.states[0]
    for z, beta, u in zip(exact.states, exact.beta, exact.u):
        x = tuple(zi - qi - ri for zi, qi, ri in zip(z, q, R @ beta))
        assert M @ z == tuple(p + s + w for p, s, w in zip(M @ q, M @ x, G @ u))


def test_basic_activity_idleness_bound(get):
    nf, a, spec = setup(get, "ex2", "gaussian")
    cfg = SimConfig(horizon=20.0, step=0.01, seed=9)
    traj = simulate(nf.net, spec, make_policy("boundary-sub", nf.net, a.plan, cfg), cfg, a.plan)
    x = np.array([float(v) for v in a.plan.x_star])
    inc = np.diff(traj.V, axis=0)
    for j in a.plan.basic:
        assert np.all(inc[:, j] <= cfg.step * x[j] + 1e-15)


def test_zero_variance_nominal_diffusion_path_is_constant(get):
    nf, a, _ = setup(get, "ex1")
    cfg = SimConfig(horizon=10.0, step=0.1, epsilon=0.2)
    traj = simulate(nf.net, StochasticSpec.zero(nf.net),
                    make_policy("nominal", nf.net, a.plan, cfg), cfg, a.plan, [2.0, 3.0])
    Z = scale(traj, cfg, "diffusion", a.rep).Z
    assert np.allclose(Z, [0.4, 0.6], atol=1e-12)
