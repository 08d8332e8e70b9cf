"""Static plan, cut constraints and the workload matrix for two small networks."""

from workbench import analyze, bundled_network
from workbench.workload import check_nonnegativity, factor_M

# One server, two activities that each consume both materials.
net = bundled_network("ex1").net
a = analyze(net)
print("rho* =", a.plan.rho_star, " x* =", [str(v) for v in a.plan.x_star])

# Each vertex of the dual polyhedron is a cut constraint; the ones with
# mu lambda = 1 are tight at the plan.
for v in a.cuts:
    print("cut  mu =", [str(x) for x in v.mu], " pi =", [str(x) for x in v.pi],
          " binding" if v.binding else "")

M = a.rep.M
print("M =", [str(x) for x in M.row(0)], " nonnegative:", check_nonnegativity(a.rep))

# Two servers that can share work: the single row of Pi says how much
# capacity each contributes to the pool.
pooled = analyze(bundled_network("ex3").net).rep
print("\npooled network")
print("M  =", [str(x) for x in pooled.M.row(0)])
print("Pi =", [str(x) for x in pooled.Pi.row(0)])
print("Pi B H+ reproduces M:", factor_M(pooled) == pooled.M)
