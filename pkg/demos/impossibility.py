"""Every vertex-circular port assignment on the cube gadget loops under two failures."""

from collections import Counter

from failover import impossibility_suite

rep = impossibility_suite()
print(rep.to_json()["summary"])
sizes = Counter(len(w["failed"]) for w in rep.witnesses.values())
print("witness failure-set sizes:", dict(sorted(sizes.items())))
label, w = next((l, w) for l, w in rep.witnesses.items() if len(w["failed"]) == 2)
print(f"  e.g. {label} (uppercase = counterclockwise): edges {w['failed']} failed, packet from {w['source']} loops")
print("scripted proof scenarios reproduced:", rep.scripted_ok)
for name, v in rep.subdivision.items():
    print(f"  subdivided graph, {name}: {v['loops']}/{v['cases']} loop")
