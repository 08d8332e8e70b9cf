"""Command-line front end: ``workbench analyze | mtte | reach | simulate``.

A network argument is either a path to a ``.net`` file or the name of a
bundled network (``ex1``, ``ex2``, ``ex2b``, ``ex3``, ``laws-2x3``).

Exit codes: 0 success, 1 usage error or missing vector, 2 heavy-traffic
assumption failure, 3 parse error, 4 infeasible.

``analyze --format kv`` prints one ``key = value`` pair per line. Vectors are
space-separated exact rationals, matrices are printed one row per key
(``workload.M.1``, ``workload.M.2``, ...), booleans are ``true``/``false``,
and vertices and activities are numbered from 1. Keys:

    network.name, network.materials, network.resources, network.activities
    plan.rho_star, plan.x_star, plan.basic
    assumption.rho_is_one, assumption.full_utilization, assumption.primal_unique,
    assumption.satisfied, assumption.diagnostic.N
    cuts.count, cuts.binding_count, cuts.bounded, cuts.recession_direction,
    cuts.vertex.N.mu, cuts.vertex.N.pi, cuts.vertex.N.binding
    workload.d, workload.b, workload.p, workload.selected_vertices,
    workload.M.N, workload.Pi.N, workload.K.N, workload.G.N, workload.Lambda.N,
    workload.H_plus.N
    identity.p_equals_r_plus_n_minus_b, identity.rank_M_equals_d,
    identity.d_equals_binding_rank, identity.MH_equals_PiB, identity.MR_equals_GK,
    identity.G_nonnegative, identity.Lambda_nonnegative, identity.HHplus_equals_I,
    identity.M_equals_PiBHplus      (the last two only when H has full row rank)
    check.nonnegative, check.basis_property, check.factor_M,
    check.factor_M_invariant         (n/a when not applicable)
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .fluid import is_reachable, mtte
from .netfile import BUNDLED, NetworkFile, ParseError, bundled_network, load_network
from .ratmath import Matrix, format_rational
from .workload import (Analysis, AssumptionNotSatisfied, Infeasible, analyze, alternate_right_inverse,
                       check_basis_property, check_nonnegativity, factor_M, identity_checks)

EXIT_OK, EXIT_USAGE, EXIT_ASSUMPTION, EXIT_PARSE, EXIT_INFEASIBLE = 0, 1, 2, 3, 4


class MissingVector(KeyError):
    def __str__(self) -> str:
        return f"network file defines no vector named {self.args[0]!r}"


def _vec(values) -> str:
    return " ".join(format_rational(v) for v in values)


def _bool(flag: bool) -> str:
    return "true" if flag else "false"


def _open(spec: str) -> NetworkFile:
    path = Path(spec)
    if path.exists():
        return load_network(path)
    if spec in BUNDLED:
        return bundled_network(spec)
    raise FileNotFoundError(f"no file {spec!r} and no bundled network of that name")


def _vector(nf: NetworkFile, name: str) -> tuple[Fraction, ...]:
    if name not in nf.vectors:
        raise MissingVector(name)
    return nf.vectors[name]


_IDENTITY_KEYS = {
    "p = r + n - b": "p_equals_r_plus_n_minus_b",
    "rank(M) = d": "rank_M_equals_d",
    "d = rank of binding set": "d_equals_binding_rank",
    "MH = Pi B": "MH_equals_PiB",
    "MR = GK": "MR_equals_GK",
    "G >= 0": "G_nonnegative",
    "Lambda >= 0": "Lambda_nonnegative",
    "H H+ = I": "HHplus_equals_I",
    "M = Pi B H+": "M_equals_PiBHplus",
}


def analysis_pairs(nf: NetworkFile, a: Analysis | None = None) -> list[tuple[str, str]]:
    """Full analysis as ordered (key, value) pairs; raises on assumption failure."""
    net = nf.net
    a = a or analyze(net)
    out = [("network.name", net.name), ("network.materials", str(net.m)),
           ("network.resources", str(net.r)), ("network.activities", str(net.n)),
           ("plan.rho_star", format_rational(a.plan.rho_star)),
           ("plan.x_star", _vec(a.plan.x_star)),
           ("plan.basic", " ".join(str(j + 1) for j in a.plan.basic)),
           ("assumption.rho_is_one", _bool(a.report.rho_is_one)),
           ("assumption.full_utilization", _bool(a.report.full_utilization)),
           ("assumption.primal_unique", _bool(a.report.primal_unique)),
           ("assumption.satisfied", _bool(a.report.satisfied))]
    out += [(f"assumption.diagnostic.{i + 1}", d) for i, d in enumerate(a.report.diagnostics)]
    if not a.report.satisfied:
        raise AssumptionNotSatisfied("; ".join(a.report.diagnostics))
    cuts, rep = a.cuts, a.rep
    out += [("cuts.count", str(cuts.L)), ("cuts.binding_count", str(cuts.L_star)),
            ("cuts.bounded", _bool(cuts.bounded))]
    if cuts.recession_witness is not None:
        out.append(("cuts.recession_direction", _vec(cuts.recession_witness)))
    for i, v in enumerate(cuts.vertices):
        out += [(f"cuts.vertex.{i + 1}.mu", _vec(v.mu)), (f"cuts.vertex.{i + 1}.pi", _vec(v.pi)),
                (f"cuts.vertex.{i + 1}.binding", _bool(v.binding))]
    out += [("workload.d", str(rep.d)), ("workload.b", str(rep.b)), ("workload.p", str(rep.p)),
            ("workload.selected_vertices", " ".join(str(i + 1) for i in rep.selected_rows))]
    mats = [("M", rep.M), ("Pi", rep.Pi), ("K", rep.K), ("G", rep.G), ("Lambda", rep.Lambda)]
    if rep.H_plus is not None:
        mats.append(("H_plus", rep.H_plus))
    for name, mat in mats:
        out += [(f"workload.{name}.{i + 1}", _vec(row)) for i, row in enumerate(mat.rows)]
    out += [(f"identity.{_IDENTITY_KEYS.get(name, name)}", _bool(ok))
            for name, ok in identity_checks(rep).items()]
    out += [("check.nonnegative", _bool(check_nonnegativity(rep))),
            ("check.basis_property", _bool(check_basis_property(rep)))]
    if rep.H_plus is None:
        out += [("check.factor_M", "n/a"), ("check.factor_M_invariant", "n/a")]
    else:
        out.append(("check.factor_M", _bool(factor_M(rep) == rep.M)))
        if rep.b > net.m:
            other = alternate_right_inverse(rep.H, rep.H_plus)
            out.append(("check.factor_M_invariant", _bool(factor_M(rep, other) == rep.M)))
        else:
            out.append(("check.factor_M_invariant", "n/a"))
    return out


def _matrix_text(name: str, mat: Matrix) -> list[str]:
    if mat.nrows == 0 or mat.ncols == 0:
        return [f"  {name} = (empty)"]
    width = max(len(format_rational(v)) for row in mat.rows for v in row) if mat.ncols else 1
    lines = []
    for i, row in enumerate(mat.rows):
        label = f"  {name} = " if i == 0 else " " * (len(name) + 5)
        lines.append(label + "[" + "  ".join(format_rational(v).rjust(width) for v in row) + "]")
    return lines


def analysis_text(nf: NetworkFile) -> str:
    net = nf.net
    a = analyze(net)
    kv = dict(analysis_pairs(nf, a))
    rep = a.rep
    lines = [f"network {net.name}: {net.m} materials, {net.r} resources, {net.n} activities", "",
             "static plan",
             f"  rho* = {kv['plan.rho_star']}",
             f"  x*   = ({', '.join(map(format_rational, a.plan.x_star))})",
             f"  basic activities: {', '.join(str(j + 1) for j in a.plan.basic)}",
             "  heavy-traffic condition holds (unique plan, rho* = 1, every server fully used)",
             "", "cut constraints"]
    lines.append(f"  {kv['cuts.count']} vertices, {kv['cuts.binding_count']} binding"
                 + ("" if a.cuts.bounded else
                    f"; polyhedron unbounded along ({', '.join(map(format_rational, a.cuts.recession_witness))})"))
    for i, v in enumerate(a.cuts.vertices):
        flag = "binding" if v.binding else "slack"
        lines.append(f"  {i + 1:>3}  mu = ({', '.join(map(format_rational, v.mu))})"
                     f"  pi = ({', '.join(map(format_rational, v.pi))})  {flag}")
    lines += ["", f"workload representation (d = {rep.d}, b = {rep.b}, p = {rep.p}; "
                  f"rows from vertices {kv['workload.selected_vertices'].replace(' ', ', ')})"]
    for name, mat in [("M", rep.M), ("Pi", rep.Pi), ("K", rep.K), ("G", rep.G),
                      ("Lambda", rep.Lambda)] + ([("H+", rep.H_plus)] if rep.H_plus is not None else []):
        lines += _matrix_text(name, mat)
    lines += ["", "checks"]
    for name, ok in identity_checks(rep).items():
        lines.append(f"  {name}: {'ok' if ok else 'FAILED'}")
    lines.append("  M nonnegative" if kv["check.nonnegative"] == "true" else "  M not nonnegative")
    lines.append(f"  basis property: {'ok' if kv['check.basis_property'] == 'true' else 'FAILED'}")
    lines.append(f"  M independent of right inverse: {kv['check.factor_M_invariant']}")
    pools = []
    for l, row in enumerate(rep.Pi.rows):
        servers = [k for k, v in enumerate(row) if v > 0]
        if len(servers) > 1:
            weights = ", ".join(format_rational(row[k]) for k in servers)
            pools.append(f"  workload {l + 1}: servers {', '.join(str(k + 1) for k in servers)} "
                         f"function as a single capacity pool (weights {weights})")
    if pools:
        lines += ["", "resource pooling"] + pools
    return "\n".join(lines) + "\n"


def cmd_analyze(args) -> int:
    nf = _open(args.file)
    if args.format == "kv":
        sys.stdout.write("".join(f"{k} = {v}\n" for k, v in analysis_pairs(nf)))
    else:
        sys.stdout.write(analysis_text(nf))
    return EXIT_OK


def cmd_mtte(args) -> int:
    nf = _open(args.file)
    q = _vector(nf, args.vector)
    res = mtte(nf.net, q)
    sys.stdout.write(f"q    = ({', '.join(map(format_rational, q))})\n"
                     f"tau* = {format_rational(res.tau_star)}\n"
                     f"x    = ({', '.join(map(format_rational, res.x_total))})\n"
                     f"mu   = ({', '.join(map(format_rational, res.dual_mu))})\n"
                     f"pi   = ({', '.join(map(format_rational, res.dual_pi))})\n")
    return EXIT_OK


def cmd_reach(args) -> int:
    nf = _open(args.file)
    q, qp = _vector(nf, args.q), _vector(nf, args.q_prime)
    a = analyze(nf.net)
    if a.rep is None:
        raise AssumptionNotSatisfied("; ".join(a.report.diagnostics))
    ans = is_reachable(nf.net, a.rep, q, qp)
    numbers = [i + 1 for i, v in enumerate(a.cuts.vertices) if v.binding]
    delta = tuple(b - c for c, b in zip(q, qp))
    out = [f"delta = ({', '.join(map(format_rational, delta))})"]
    if ans.reachable:
        out.append(f"reachable; LP route: time {format_rational(ans.witness_t)} with "
                   f"x = ({', '.join(map(format_rational, ans.witness_x))}); "
                   "dual route: mu delta >= 0 at every binding vertex")
    else:
        parts = ", ".join(f"vertex {numbers[l]} (μδ = {format_rational(ans.dual_values[l])})"
                          for l in ans.dual_violations)
        out.append(f"not reachable; violated by {parts}")
        out.append("LP route: no s > 0 with R x + s delta = lambda, A x <= e")
    sys.stdout.write("\n".join(out) + "\n")
    return EXIT_OK


def cmd_simulate(args) -> int:
    import numpy as np

    from .netsim import (SimConfig, StochasticSpec, export_trajectory, make_policy, scale,
                         simulate, workload_identity_check)

    nf = _open(args.file)
    a = analyze(nf.net)
    if a.rep is None:
        raise AssumptionNotSatisfied("; ".join(a.report.diagnostics))
    cfg = SimConfig(args.horizon, args.step, args.epsilon, args.seed, args.replications)
    spec = StochasticSpec.from_blocks(nf.net, nf.gammas, nf.family)
    policy = make_policy(args.policy, nf.net, a.plan, cfg)
    start = [float(v) for v in _vector(nf, args.start)] if args.start else None
    output = Path(args.output or f"{nf.name}-seed{args.seed}.csv")
    worst = 0.0
    for r in range(cfg.replications):
        traj = simulate(nf.net, spec, policy, cfg, a.plan, start, replication=r)
        resid = workload_identity_check(scale(traj, cfg, "diffusion", a.rep), a.rep)
        worst = max(worst, resid)
        monotone = bool(np.all(np.diff(traj.I, axis=0) >= -1e-12))
        sys.stdout.write(f"replication {r}: {cfg.steps} steps, {len(traj.truncated_steps)} "
                         f"truncated, {len(traj.clamped_steps)} clamped, I nondecreasing: "
                         f"{_bool(monotone)}, identity residual {resid:.3e}\n")
        if r == 0:
            with output.open("w") as fh:
                export_trajectory(traj, a.rep, fh)
    sys.stdout.write(f"trajectory written to {output}\nmax identity residual {worst:.3e}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="workbench",
                                description="Exact workload analysis of processing networks.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("analyze", help="static plan, cut constraints and workload matrix")
    s.add_argument("file")
    s.add_argument("--format", choices=("text", "kv"), default="text")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("mtte", help="minimum time to execute a named vector")
    s.add_argument("file")
    s.add_argument("vector")
    s.set_defaults(func=cmd_mtte)

    s = sub.add_parser("reach", help="decide whether q' is reachable from q")
    s.add_argument("file")
    s.add_argument("q")
    s.add_argument("q_prime")
    s.set_defaults(func=cmd_reach)

    s = sub.add_parser("simulate", help="simulate and check the workload identity")
    s.add_argument("file")
    s.add_argument("--policy", default="nominal", choices=("nominal", "idle", "boundary-sub"))
    s.add_argument("--epsilon", type=float, default=0.1)
    s.add_argument("--horizon", type=float, default=1000.0)
    s.add_argument("--step", type=float, default=0.01)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--replications", type=int, default=1)
    s.add_argument("--start", help="named vector used as the initial inventory (default 0)")
    s.add_argument("--output", help="CSV path for the first replication's trajectory")
    s.set_defaults(func=cmd_simulate)
    return p




def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except AssumptionNotSatisfied as exc:
        print(f"heavy-traffic assumption fails: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (MissingVector, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
