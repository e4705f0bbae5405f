"""Mean switches of randomized bounce routing against the analytic bounds."""

from failover import BouncedRand, build_topology, switch_bound_report
from failover.topologies import TopologySpec
from failover.verifier import U_half, U_star, q_star

g, T = build_topology(TopologySpec("clique", {"k": 8}))
print(f"{'t':>5} {'q':>6} {'mean':>7} {'SE':>6} {'bound':>7}")
for t in (0.25, 0.5):
    f = round(t * T.k)
    for q, bound in ((q_star(t), U_star(t)), (0.5, U_half(t))):
        rep = switch_bound_report(g, BouncedRand(T, q), f, trials=5000, seed=1)
        print(f"{t:>5} {q:>6.3f} {rep['mean_switches']:>7.3f} {rep['std_error']:>6.3f} {bound:>7.3f}")
