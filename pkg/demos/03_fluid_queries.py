"""Draining times, reachability and communication in the fluid model."""

from fractions import Fraction

from workbench import analyze, bundled_network, communicates, is_reachable, mtte
from workbench.fluid import asymptotic_threshold, mtte_asymptotic

a = analyze(bundled_network("ex2").net)
net, rep = a.net, a.rep

# Least time to execute t*lambda + delta approaches t + max_l mu^l delta.
delta = (1, 0)
t0 = asymptotic_threshold(rep, delta)
for t in (t0, 10, 100):
    q = tuple(t * l + d for l, d in zip(net.lam, delta))
    print(f"t = {t}: exact {mtte(net, q).tau_star}, formula {mtte_asymptotic(rep, delta, t)}")

# Reachability is decided twice, by an LP and by signs of mu^l delta.
ans = is_reachable(net, rep, (0, 5), (1, 4))
print("\n(0,5) -> (1,4) reachable:", ans.reachable, " mu delta:", [str(v) for v in ans.dual_values])
ans = is_reachable(net, rep, (3, 3), (4, 4))
print("(3,3) -> (4,4) reachable:", ans.reachable, " in time", ans.witness_t)

one = analyze(bundled_network("ex1").net)
c = communicates(one.net, one.rep, (4, 3), (3, 0))
print("\n(4,3) <-> (3,0) communicate:", bool(c), " via y =", [str(v) for v in c.witness_y])
print("(1,0) <-> (0,3) communicate:", bool(communicates(one.net, one.rep, (1, 0), (0, Fraction(3)))))
