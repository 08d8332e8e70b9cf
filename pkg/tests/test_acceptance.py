"""Acceptance gate: one test per criterion, each with its time limit.

Every criterion records a PASS/FAIL line that is printed in the terminal
summary (see conftest.py). Analyses are recomputed from scratch inside each
timed block so the limits cover the full pipeline.
"""

import random
import time
from contextlib import contextmanager
from fractions import Fraction as F

import numpy as np
import pytest

from workbench.fluid import asymptotic_threshold, communicates, is_reachable, mtte, mtte_asymptotic
from workbench.netfile import bundled_network
from workbench.netsim import (SimConfig, StochasticSpec, estimate_sigma, make_policy, scale,
                              simulate, workload_identity_check)
from workbench.ratmath import Matrix, rank
from workbench.workload import (NetworkData, alternate_right_inverse, analyze, check_basis_property,
                                check_monotonicity_sampled, check_nonnegativity, factor_M,
                                identity_checks)

SMALL = ["ex1", "ex2", "ex2b", "ex3"]


@contextmanager
def criterion(log, number, limit, note=""):
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        within = elapsed < limit
        log[number] = (ok and within, elapsed,
                       note if within else f"{note} exceeded {limit} s".strip())
    assert within, f"criterion {number} took {elapsed:.2f} s, limit {limit} s"


def net(name):
    return bundled_network(name).net


def test_criterion_01_single_server_two_activities(acceptance_log):
    with criterion(acceptance_log, 1, 1.0, "two-activity single-server network"):
        a = analyze(net("ex1"))
        assert a.plan.rho_star == 1
        assert a.plan.x_star == (F(1, 2), F(1, 2))
        assert a.cuts.L == 1 and a.cuts.L_star == 1
        v = a.cuts.binding[0]
        assert v.mu == (F(3, 4), F(-1, 4)) and v.pi == (1,)
        assert a.rep.d == 1
        assert a.rep.M == Matrix([[F(3, 4), F(-1, 4)]])
        assert check_nonnegativity(a.rep) is False


def test_criterion_02_rank_deficient_H(acceptance_log):
    with criterion(acceptance_log, 2, 1.0, "one basic activity, d = 2"):
        a = analyze(net("ex2"))
        rep = a.rep
        assert a.plan.x_star == (1, 0, 0)
        assert {(v.mu, v.pi) for v in a.cuts} == {((F(3, 4), F(1, 4)), (1,)), ((F(1, 4), F(3, 4)), (1,))}
        assert a.cuts.L == 2 and all(v.binding for v in a.cuts)
        assert (rep.d, rep.b, rep.p) == (2, 1, 3)
        assert rep.K == Matrix([[1, 1, 1], [0, -1, 0], [0, 0, -1]])
        assert rank(rep.H) == 1 and rep.H_plus is None


def test_criterion_03_shifted_arrivals(acceptance_log):
    with criterion(acceptance_log, 3, 1.0, "unique binding vertex, factorization"):
        a = analyze(net("ex2b"))
        assert a.net.lam == (F(1, 4), F(5, 4))
        assert a.plan.x_star == (F(1, 4), 0, F(3, 4))
        assert [(v.mu, v.pi) for v in a.cuts.binding] == [((F(1, 4), F(3, 4)), (1,))]
        assert a.rep.d == 1
        assert factor_M(a.rep) == Matrix([[F(1, 4), F(3, 4)]]) == a.rep.M


def test_criterion_04_pooled_servers(acceptance_log):
    with criterion(acceptance_log, 4, 1.0, "two servers pooled"):
        a = analyze(net("ex3"))
        rep = a.rep
        assert a.plan.x_star == (F(1, 4), F(3, 4), 1)
        assert [(v.mu, v.pi) for v in a.cuts.binding] == [((F(9, 16), F(3, 16)), (F(3, 4), F(1, 4)))]
        assert rep.M == factor_M(rep) == Matrix([[F(9, 16), F(3, 16)]])
        assert rep.Pi == Matrix([[F(3, 4), F(1, 4)]])
        assert rep.H @ rep.H_plus == Matrix.identity(2)


ROUTING_MU = [(3, 2, 1, 1, 0, 2, 1, 3, 1), (3, 2, 1, 0, 0, 1, 2, 3, 2), (3, 2, 3, 1, 2, 0, 1, 1, 1),
           (3, 2, 2, 0, 1, 0, 2, 2, 2), (3, 2, 3, 2, 2, 1, 0, 1, 0), (3, 2, 2, 2, 1, 2, 0, 2, 0)]
ROUTING_PI = [(2, 0, 1, 0, 2, 1), (2, 1, 0, 0, 1, 2), (0, 2, 1, 2, 0, 1),
           (1, 2, 0, 1, 0, 2), (0, 1, 2, 2, 1, 0), (1, 0, 2, 1, 2, 0)]


def test_criterion_05_six_binding_cuts(acceptance_log):
    with criterion(acceptance_log, 5, 30.0, "12-activity routing network"):
        a = analyze(net("laws-2x3"))
        assert a.net.lam[:2] == (1, F(3, 2))
        assert a.plan.x_star == (F(1, 2),) * 12
        reference = {(tuple(F(x, 6) for x in mu), tuple(F(x, 6) for x in pi))
                     for mu, pi in zip(ROUTING_MU, ROUTING_PI)}
        assert {(v.mu, v.pi) for v in a.cuts.binding} == reference
        assert rank([v.pi for v in a.cuts.binding]) == 3
        assert a.rep.d == 3
        first_three = Matrix([[F(x, 6) for x in mu] for mu in ROUTING_MU[:3]])
        both = Matrix.vstack([a.rep.M, first_three])
        assert rank(a.rep.M) == rank(first_three) == rank(both) == 3


def random_delta(rng, m):
    return tuple(F(rng.randint(-4, 4), 4) for _ in range(m))


def test_criterion_06_asymptotic_minimum_time(acceptance_log):
    with criterion(acceptance_log, 6, 10.0, "20 random displacements on each small example"):
        rng = random.Random(2024)
        for name in SMALL:
            rep = analyze(net(name)).rep
            lam = rep.net.lam
            for _ in range(20):
                delta = random_delta(rng, rep.net.m)
                t0 = asymptotic_threshold(rep, delta)
                for t in (t0, 2 * t0):
                    q = tuple(t * l + d for l, d in zip(lam, delta))
                    assert mtte(rep.net, q).tau_star == mtte_asymptotic(rep, delta, t)


def test_criterion_07_reachability_routes(acceptance_log):
    with criterion(acceptance_log, 7, 30.0, "50 random pairs on each small example"):
        rng = random.Random(7)
        for name in SMALL:
            a = analyze(net(name))
            for _ in range(50):
                q = tuple(F(rng.randint(0, 12), rng.randint(1, 4)) for _ in range(a.net.m))
                qp = tuple(F(rng.randint(0, 12), rng.randint(1, 4)) for _ in range(a.net.m))
                # each call cross-checks its two routes and raises on disagreement
                there = is_reachable(a.net, a.rep, q, qp).reachable
                back = is_reachable(a.net, a.rep, qp, q).reachable
                assert bool(communicates(a.net, a.rep, q, qp)) == (there and back)


def test_criterion_08_structural_identities(acceptance_log):
    with criterion(acceptance_log, 8, 60.0, "all five bundled networks"):
        for name in SMALL + ["laws-2x3"]:
            rep = analyze(net(name)).rep
            checks = identity_checks(rep)
            for key in ("MH = Pi B", "MR = GK", "G >= 0", "Lambda >= 0", "rank(M) = d"):
                assert checks[key], (name, key)
            assert check_basis_property(rep), name
            if rep.b > rep.net.m:
                other = alternate_right_inverse(rep.H, rep.H_plus)
                assert other != rep.H_plus
                assert factor_M(rep, rep.H_plus) == factor_M(rep, other) == rep.M


def test_criterion_09_monotonicity_refuter(acceptance_log):
    with criterion(acceptance_log, 9, 10.0, "counterexample found, none on monotone network"):
        assert check_monotonicity_sampled(net("ex1"), trials=1000, seed=0).found
        single = NetworkData(Matrix([[1]]), Matrix([[1]]), (1,), "single")
        assert not check_monotonicity_sampled(single, trials=1000, seed=0).found


def test_criterion_10_simulated_workload_identity(acceptance_log):
    with criterion(acceptance_log, 10, 60.0, "1e5 steps, boundary substitution"):
        nf = bundled_network("ex2")
        a = analyze(nf.net)
        spec = StochasticSpec.from_blocks(nf.net, nf.gammas, nf.family)
        cfg = SimConfig(horizon=1000.0, step=0.01, epsilon=0.1, seed=7)
        assert cfg.steps == 100_000
        policy = make_policy("boundary-sub", nf.net, a.plan, cfg)
        start = [float(v) for v in nf.vectors["start"]]
        first = simulate(nf.net, spec, policy, cfg, a.plan, start)
        resid = workload_identity_check(scale(first, cfg, "diffusion", a.rep), a.rep)
        assert resid < 1e-9
        assert np.all(np.diff(first.I, axis=0) >= -1e-12)
        again = simulate(nf.net, spec, policy, cfg, a.plan, start)
        for field in ("Q", "T", "V", "I", "xi"):
            assert getattr(first, field).tobytes() == getattr(again, field).tobytes()


def test_criterion_11_covariance_estimate(acceptance_log):
    with criterion(acceptance_log, 11, 300.0, "200 replications, two covariance settings"):
        nf = bundled_network("ex1")
        a = analyze(nf.net)
        cfg = SimConfig(horizon=1.0, step=0.01, epsilon=0.1, seed=11, replications=200)
        zero = np.zeros((2, 2))
        exo_only = StochasticSpec([np.eye(2), zero, zero], "gaussian")
        est, se = estimate_sigma(nf.net, a.plan, exo_only, cfg)
        assert np.all(np.abs(est - np.eye(2)) <= 3 * se)
        full = StochasticSpec([np.eye(2)] * 3, "gaussian")
        est, se = estimate_sigma(nf.net, a.plan, full, cfg)
        assert np.all(np.abs(est - 2 * np.eye(2)) <= 3 * se)


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(pytest.main([__file__, "-q"]))
