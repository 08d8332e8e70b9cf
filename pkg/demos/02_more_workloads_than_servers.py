"""A one-server network whose workload has dimension two.

Only one of three activities is used by the plan. The two idle activities
still matter: they decide which inventory changes can be undone, and that is
what the workload matrix measures.
"""

from workbench import analyze, bundled_network
from workbench.ratmath import rank
from workbench.workload import reversible_displacements

a = analyze(bundled_network("ex2").net)
rep = a.rep
print("x* =", [str(v) for v in a.plan.x_star], " basic:", [j + 1 for j in a.plan.basic])
print("d =", rep.d, " servers =", a.net.r, " rank(H) =", rank(rep.H))
for name, mat in [("M", rep.M), ("K", rep.K), ("G", rep.G)]:
    print(name, "=", [[str(x) for x in row] for row in mat.rows])
print("reversible displacements:", reversible_displacements(rep))

# Shift the arrival mix and a second activity enters the plan; one cut is left.
b = analyze(bundled_network("ex2b").net)
print("\nlambda =", [str(v) for v in b.net.lam], " x* =", [str(v) for v in b.plan.x_star])
print("binding cuts:", [[str(x) for x in v.mu] for v in b.cuts.binding])
