"""Simulate the one-server network under a boundary policy and check the workload identity."""

import numpy as np

from workbench import analyze, bundled_network
from workbench.netsim import (SimConfig, StochasticSpec, estimate_sigma, make_policy, scale,
                              sigma, simulate, workload_identity_check)

nf = bundled_network("ex2")
a = analyze(nf.net)
spec = StochasticSpec.from_blocks(nf.net, nf.gammas, nf.family)
cfg = SimConfig(horizon=200.0, step=0.01, epsilon=0.1, seed=7)
policy = make_policy("boundary-sub", nf.net, a.plan, cfg)
traj = simulate(nf.net, spec, policy, cfg, a.plan, Q0=[1.0, 1.0])

z = scale(traj, cfg, "diffusion", a.rep)
print("final scaled inventory", z.Z[-1], " workload", z.W[-1])
print("cumulative idleness   ", z.U[-1])
print("identity residual      %.2e" % workload_identity_check(z, a.rep))
print("steps truncated        ", len(traj.truncated_steps))

# Covariance of the scaled nominal noise against its closed form.
one = bundled_network("ex1")
b = analyze(one.net)
spec1 = StochasticSpec.from_blocks(one.net, one.gammas, one.family)
est, se = estimate_sigma(one.net, b.plan, spec1, SimConfig(1.0, 0.01, 0.1, 0, 200))
print("\nSigma formula\n", sigma(one.net, b.plan, spec1))
print("estimate\n", np.round(est, 3), "\nstandard errors\n", np.round(se, 3))
