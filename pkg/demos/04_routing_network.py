"""Nine job classes, six servers and twelve routes: six cuts bind, three suffice."""

from workbench import analyze, bundled_network, critical_profile

a = analyze(bundled_network("laws-2x3").net)
rep = a.rep
print(f"{a.cuts.L} vertices in total, {a.cuts.L_star} binding, d = {rep.d}")
for l, v in enumerate(rep.binding):
    print(f"  {l}: 6mu = {[int(6 * x) for x in v.mu]}  6pi = {[int(6 * x) for x in v.pi]}")

# One extra job of class 5: which cuts become critical, and which servers
# then have slack?
extra = tuple(1 if i == 4 else 0 for i in range(9))
prof = critical_profile(rep, extra)
for l in prof.maximizers:
    print(f"cut {l} critical; idle servers {[k + 1 for k in prof.noncritical_servers[l]]}")
