"""Build a 6-clique, verify circular routing at r = k-1 and print one rerouted walk."""

from failover import Circular, build_topology, check_resilience, run_deterministic
from failover.topologies import TopologySpec

topo = build_topology(TopologySpec("clique", {"k": 6}))
g, T = topo
scheme = Circular(T, reset_arcs=topo.reset_arcs)

verdict = check_resilience(g, scheme, topo.promised_r, stop_early=False)
print(f"clique k=6: {g.n} vertices, {g.m} edges, {T.k} arborescences")
print(f"r={verdict.r}: holds={verdict.holds} over {verdict.scenarios} scenarios, "
      f"audit passed={verdict.audit_ok}")
print("max switches per failure count:", verdict.max_switches)

# fail the first two edges on the source's first tree and follow the packet
source = next(v for v in g.vertices if v != g.destination)
first = T.members[0].out[source]
failed = {first.edge, *sorted(e for e in g.incident(first.head) if e != first.edge)[:1]}
trace = run_deterministic(g, scheme, failed, source, record=True)
print(f"source {source}, failed {sorted(failed)}: {trace.outcome} after "
      f"{trace.hops} hops and {trace.switches} switches")
