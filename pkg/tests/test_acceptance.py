"""Acceptance criteria, one test each.

Each test records a one-line verdict that the terminal summary prints as
``criterion N: PASS|FAIL  detail``.
"""

from __future__ import annotations

import math
import random
import time

from conftest import ACCEPTANCE
from corpus import complete, hypercube, mader_corpus, random_connected
from failover import (
    BouncedRand,
    Circular,
    DFAlgo,
    Duplication,
    PlusOne,
    build_meta_graph,
    build_topology,
    check_resilience,
    decompose_general,
    edge_connectivity,
    good_arborescences,
    impossibility_suite,
    never_bounce_report,
    random_mader_graph,
    switch_bound_report,
    tree_components,
    validate_arborescence_set,
)
from failover.schemes import adbed_order
from failover.topologies import (
    TopologySpec,
    cube_gadget,
    generalized_hypercube,
    never_bounce_gadget,
    toy_gadget,
)
from failover.verifier import U_half, U_star, q_star

EXHAUSTIVE_LIMIT = 10**6
SAMPLED_SCENARIOS = 10**5


def record(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[n] = (ok, detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def exhaustive_size(g, r) -> int:
    return math.comb(g.m, r) * g.n


# ---------------------------------------------------------------------------
# shared corpora


def three_connected():
    out = [("K4", complete(4)), ("Q3", hypercube(3))]
    for seed in range(6):
        n = 7 + seed % 4
        out.append((f"rand{seed}-n{n}", random_connected(n, 3, 100 + seed)))
    return [(name, g, decompose_general(g, edge_connectivity(g))) for name, g in out]


THREE = three_connected()
MADER4 = mader_corpus(4, 6, 12, n_ops=6, min_vertices=6)
MADER5 = mader_corpus(5, 3, 8, n_ops=4, min_vertices=5)
MADER6 = mader_corpus(6, 2, 7, n_ops=3, min_vertices=5)
MADER7 = mader_corpus(7, 2, 7, n_ops=3, min_vertices=5)


def all_test_graphs():
    out = [(name, g, T) for name, g, T in THREE]
    for k, corpus in ((4, MADER4), (5, MADER5), (6, MADER6), (7, MADER7)):
        out += [(f"mader{k}-{i}", g, T) for i, (g, T) in enumerate(corpus)]
    for k in range(2, 7):
        g, T = build_topology(TopologySpec("clique", {"k": k}))
        out.append((f"clique{k}", g, T))
    return out


# ---------------------------------------------------------------------------


def test_criterion_1_circular_on_three_connected():
    start = time.perf_counter()
    worst, bad = 0, []
    for name, g, T in THREE:
        v = check_resilience(g, Circular(T), T.k - 1, stop_early=False)
        worst = max([worst, *v.max_switches.values()])
        if not v.holds:
            bad.append(name)
    elapsed = time.perf_counter() - start
    ok = not bad and worst <= 4 and elapsed < 60 and len(THREE) >= 7
    record(1, ok, f"{len(THREE)} graphs (K4, Q3, {len(THREE) - 2} random), r=k-1 exhaustive, "
                  f"max switches {worst} <= 4, failures {bad}, {elapsed:.1f}s < 60s")


def test_criterion_2_adbed_circular_on_four_connected():
    start = time.perf_counter()
    bad, slack, sizes = [], None, []
    for i, (g, T) in enumerate(MADER4):
        assert T.adbed and g.n <= 12
        sizes.append(g.n)
        v = check_resilience(g, Circular(T, adbed_order(4)), 3, stop_early=False)
        if not v.holds:
            bad.append(i)
        slack = v.min_switch_slack if slack is None else min(slack, v.min_switch_slack)
    elapsed = time.perf_counter() - start
    ok = not bad and slack >= 0 and elapsed < 120 and len(MADER4) >= 5
    record(2, ok, f"{len(MADER4)} Mader graphs n={sizes}, r=3 exhaustive, min(2f - switches) = {slack}, "
                  f"failures {bad}, {elapsed:.1f}s < 120s")


def test_criterion_3_plus_one():
    start = time.perf_counter()
    rows, bad = [], []
    for k, corpus, r in ((5, MADER5, 4), (6, MADER6, 3), (7, MADER7, 3)):
        for i, (g, T) in enumerate(corpus):
            v = check_resilience(g, PlusOne(T), r)
            rows.append(f"k={k} n={g.n} r={r}")
            if not v.holds:
                bad.append((k, i, v.counterexample["failed"]))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 300
    record(3, ok, f"{len(rows)} instances ({'; '.join(rows)}), failures {bad}, {elapsed:.1f}s < 300s")


def test_criterion_4_df_algo():
    start = time.perf_counter()
    checked, bad, bits, skipped = 0, [], 0, []
    for name, g, T in all_test_graphs():
        r = T.k - 1
        if exhaustive_size(g, r) > EXHAUSTIVE_LIMIT:
            skipped.append(name)
            continue
        v = check_resilience(g, DFAlgo(g, T), r)
        checked += 1
        bits = max(bits, v.max_header_bits)
        if not v.holds:
            bad.append(name)
    elapsed = time.perf_counter() - start
    ok = not bad and bits <= 3 and elapsed < 300
    record(4, ok, f"{checked} graphs at r=k-1 (over 1e6 scenarios, skipped: {skipped}), max header bits {bits}, "
                  f"failures {bad}, {elapsed:.1f}s < 300s")


def test_criterion_5_duplication():
    start = time.perf_counter()
    notes, bad = [], []
    even = [(4, g, T) for g, T in mader_corpus(4, 3, 8, n_ops=5)]
    even += [(6, g, T) for g, T in mader_corpus(6, 2, 6, n_ops=3)]
    for k, g, T in even:
        s = k // 2
        v = check_resilience(g, Duplication(T), 2 * s - 1, stop_early=False)
        copies_ok = all((c == f) if f < s else (c <= 2 * s - 1) for f, c in v.max_copies.items())
        notes.append(f"even k={k} n={g.n}: copies {dict(sorted(v.max_copies.items()))}")
        if not (v.holds and copies_ok):
            bad.append(("even", k, g.n, v.holds, copies_ok))
    odd = [(5, g, T) for g, T in mader_corpus(5, 2, 7, n_ops=4)]
    odd += [(7, g, T) for g, T in mader_corpus(7, 2, 5, n_ops=2)]
    for K, g, T in odd:
        k = (K - 1) // 2
        v = check_resilience(g, Duplication(T, odd=True), 2 * k, stop_early=False)
        notes.append(f"odd 2k+1={K} n={g.n}: r={2 * k}")
        if not v.holds:
            bad.append(("odd", K, g.n))
    elapsed = time.perf_counter() - start
    record(5, not bad, f"even r=2s-1 (max copies = f for f<s, <= 2s-1 otherwise) and odd r=2k hold; failures {bad}; "
                       f"{' | '.join(notes)}; {elapsed:.1f}s")


def test_criterion_6_randomized():
    start = time.perf_counter()
    # every |F| = k-1 scenario must be deliverable with positive probability
    explored, bad = 0, []
    for name, g, T in all_test_graphs():
        r = T.k - 1
        if exhaustive_size(g, r) > EXHAUSTIVE_LIMIT:
            continue
        v = check_resilience(g, BouncedRand(T, 0.5), r)
        explored += v.scenarios
        if not v.holds:
            bad.append(name)
    # Monte Carlo switch bounds
    lines, violations = [], []
    g8, T8 = build_topology(TopologySpec("clique", {"k": 8}))
    g4, T4 = MADER4[0]
    for label, g, T in (("clique8", g8, T8), ("mader4", g4, T4)):
        for t in (0.25, 0.5):
            f = round(t * T.k)
            for qlabel, q, bound in (("q*", q_star(t), U_star(t)), ("1/2", 0.5, U_half(t))):
                rep = switch_bound_report(g, BouncedRand(T, q), f, trials=10_000, seed=17)
                limit = bound + 3 * rep["std_error"]
                lines.append(f"{label} t={t} q={qlabel}: {rep['mean_switches']:.3f} <= {limit:.3f}")
                if rep["mean_switches"] > limit or rep["delivery_rate"] < 1.0:
                    violations.append(lines[-1])
    elapsed = time.perf_counter() - start
    ok = not bad and not violations
    record(6, ok, f"branch exploration {explored} scenarios, failures {bad}; Monte Carlo 1e4 trials: "
                  f"{'; '.join(lines)}; {elapsed:.1f}s")


def test_criterion_7_never_bounce():
    rows = [never_bounce_report(k, trials=10_000, seed=5) for k in (3, 4, 5)]
    within = all(r["pure_within_10pct"] for r in rows)
    below = all(r["bounced_below_half"] for r in rows)
    detail = "; ".join(
        f"k={r['k']}: pure {r['pure']['mean_switches']:.2f} vs (k-1)^2={r['target']}, "
        f"bounced {r['bounced']['mean_switches']:.2f}"
        for r in rows
    )
    record(7, within and below,
           f"pure within 10% of (k-1)^2: {within}; bounced < half of pure: {below}; {detail}")


def test_criterion_8_impossibility():
    rep = impossibility_suite()
    j = rep.to_json()
    sub = rep.subdivision
    record(8, rep.ok, f"{j['summary']}; scripted loops reproduced {sum(s['reproduced'] for s in rep.scripted)}"
                      f"/{len(rep.scripted)}; G' checks: "
                      + ", ".join(f"{k} {v['loops']}/{v['cases']}" for k, v in sub.items()))


TOPOLOGIES = (
    [("clique", {"k": k}) for k in range(1, 7)]
    + [("complete-bipartite", {"a": a, "b": b}) for a, b in [(1, 3), (2, 2), (3, 3), (2, 5), (3, 5), (5, 3),
                                                              (4, 4), (5, 5), (5, 6)]]
    + [("generalized-hypercube", {"i": i, "k": k}) for i, k in [(2, 1), (3, 1), (4, 1), (2, 2)]]
    + [("clos", {"layers": l, "k": k}) for l in (2, 3) for k in (2, 3, 4)]
    + [("torus-grid", {"n": n, "m": m}) for n, m in [(3, 3), (3, 4), (4, 4), (4, 5), (5, 5), (5, 6), (6, 6)]]
)


def test_criterion_9_topologies():
    start = time.perf_counter()
    bad, summary = [], []
    for kind, params in TOPOLOGIES:
        topo = build_topology(TopologySpec(kind, params))
        g, T = topo
        r = topo.promised_r
        if kind == "torus-grid":
            assert r == 3
        scheme = Circular(T, reset_arcs=topo.reset_arcs)
        if exhaustive_size(g, r) <= EXHAUSTIVE_LIMIT:
            v = check_resilience(g, scheme, r, stop_early=False)
        else:
            samples = math.ceil(SAMPLED_SCENARIOS / (g.n - 1))
            v = check_resilience(g, scheme, r, "sampled", samples=samples, seed=0, stop_early=False)
            assert v.scenarios >= SAMPLED_SCENARIOS
        tag = f"{kind}{tuple(params.values())} r={r} {v.mode[:5]} {v.scenarios}"
        summary.append(tag)
        if not (v.holds and v.audit_ok and not validate_arborescence_set(g, T)):
            bad.append(tag)
    elapsed = time.perf_counter() - start
    record(9, not bad, f"{len(TOPOLOGIES)} instances hold with audit passing; failures {bad}; {elapsed:.1f}s")


def _random_construction(rng: random.Random):
    kind = rng.randrange(10)
    if kind == 0:
        return build_topology(TopologySpec("clique", {"k": rng.randint(1, 7)}))
    if kind == 1:
        return build_topology(TopologySpec("complete-bipartite", {"a": rng.randint(1, 5), "b": rng.randint(1, 6)}))
    if kind == 2:
        i, k = rng.choice([(1, 1), (1, 2), (1, 3), (2, 1), (3, 1), (4, 1), (2, 2), (2, 3), (3, 2)])
        return generalized_hypercube(i, k)
    if kind == 3:
        return build_topology(TopologySpec("clos", {"layers": rng.randint(2, 3), "k": rng.randint(1, 4)}))
    if kind == 4:
        return build_topology(TopologySpec("torus-grid", {"n": rng.randint(3, 6), "m": rng.randint(3, 6),
                                                          "seed": rng.randrange(1000)}))
    if kind == 5:
        N = rng.choice([None, rng.randint(2, 9)])
        return never_bounce_gadget(rng.randint(1, 4), N)
    if kind == 6:
        return rng.choice([cube_gadget, toy_gadget])()
    if kind in (7, 8):
        g, T, _ = random_mader_graph(rng.randint(2, 7), rng.randint(0, 6), rng.randrange(10**6), 10)
        return g, T
    n = rng.randint(3, 8)
    k = rng.randint(1, min(4, n - 1))
    g = random_connected(n, k, rng.randrange(10**6))
    return g, decompose_general(g, k)


def test_criterion_10_property_suites():
    rng = random.Random(2024)
    start = time.perf_counter()
    invalid, corpus = 0, []
    for _ in range(1000):
        g, T = _random_construction(rng)
        if validate_arborescence_set(g, T):
            invalid += 1
        corpus.append((g, T))
    short_trees, empty_good, pairs = 0, 0, 0
    for _ in range(1000):
        g, T = corpus[rng.randrange(len(corpus))]
        f = rng.randrange(min(T.k, g.m + 1))
        F = rng.sample(sorted(g.edges), f)
        comps = tree_components(build_meta_graph(g, T, F))
        pairs += 1
        if sum(c.is_tree for c in comps) < T.k - f:
            short_trees += 1
        if not good_arborescences(g, T, F):
            empty_good += 1
    elapsed = time.perf_counter() - start
    ok = invalid == 0 and short_trees == 0 and empty_good == 0
    record(10, ok, f"1000 random constructions, {invalid} invalid; {pairs} random (T,F) with |F|<k: "
                   f"{short_trees} with fewer than k-f tree components, {empty_good} with no good arborescence; "
                   f"{elapsed:.1f}s")
