import random

import pytest

from failover import (
    Arc,
    BouncedRand,
    Circular,
    DFAlgo,
    Duplication,
    MultiGraph,
    PlusOne,
    PortTable,
    PureResample,
    VertexCircular,
    adbed_order,
    build_topology,
    make_set,
    run_deterministic,
    run_duplication,
)
from failover.schemes import ContractError, LocalView, dfs_traversal, inverse_traversal
from failover.topologies import TopologySpec, cube_graph, cube_port_orders, toy_gadget
from failover.verifier import q_star

from corpus import mader_corpus


def clique(k):
    return build_topology(TopologySpec("clique", {"k": k}))


def test_view_at_destination_delivers():
    g, T = clique(3)
    for s in (Circular(T), PlusOne(T), DFAlgo(g, T), Duplication(T, odd=True)):
        assert s.decide(LocalView(g.destination, None, frozenset())).kind == "deliver"


def test_adbed_order_interleaves_halves():
    assert adbed_order(4) == [0, 2, 1, 3]
    assert adbed_order(5) == [0, 2, 1, 3, 4]
    assert adbed_order(6) == [0, 3, 1, 4, 2, 5]


def test_toy_gadget_ordering_matters():
    g, T = toy_gadget()
    F = {0, 2, 4}
    loop = run_deterministic(g, Circular(T, [0, 1, 2, 3]), F, "a", record=True)
    assert loop.outcome == "loop"
    # the packet comes back to a on a Blue arc and repeats its first moves
    back = [st for st in loop.steps[1:] if st["vertex"] == "a"]
    assert back
    inc = back[0]["incoming"]
    assert T.tree_of(Arc(inc["edge"], inc["tail"], inc["head"])) == 0
    ok = run_deterministic(g, Circular(T, [0, 3, 1, 2]), F, "a")
    assert ok.delivered


def test_toy_gadget_blue_green_orange_red_survives_any_three():
    import itertools

    g, T = toy_gadget()
    s = Circular(T, [0, 3, 1, 2])
    for F in itertools.combinations(range(6), 3):
        for src in ("a", "b"):
            if src in g.component_of("d", frozenset(F)):
                assert run_deterministic(g, s, F, src).delivered


def test_vertex_circular_degree_three():
    g = cube_graph()
    orders = cube_port_orders(g, {})
    s = VertexCircular(g, orders)
    e1, e2, e3 = orders["o"]
    out = s.decide(LocalView("o", g.arc(e1, g.other(e1, "o")), frozenset()))
    assert out.out[0][0].edge == e2
    out = s.decide(LocalView("o", g.arc(e1, g.other(e1, "o")), frozenset({e2})))
    assert out.out[0][0].edge == e3


def test_vertex_circular_rejects_bad_order():
    g = cube_graph()
    orders = cube_port_orders(g, {})
    orders["o"] = orders["o"][:2]
    with pytest.raises(ValueError):
        VertexCircular(g, orders)


def test_cube_cd_bd_scenario_loops_through_z_o_y():
    g = cube_graph()
    cw = {"o": True, "y": False, "a": False, "z": False, "b": True, "c": True, "x": True}
    s = VertexCircular(g, cube_port_orders(g, cw))
    F = {g.edges_between("c", "d")[0], g.edges_between("b", "d")[0]}
    tr = run_deterministic(g, s, F, "o", record=True)
    assert tr.outcome == "loop"
    walk = [st["vertex"] for st in tr.steps] + [tr.steps[-1]["out"][0]["head"]]
    assert any(walk[i:i + 3] == ["z", "o", "y"] for i in range(len(walk)))


def test_port_table_missing_entry():
    g = MultiGraph([0, 1], {0: (0, 1)}, 0)
    with pytest.raises(ContractError):
        PortTable(g, {}).decide(LocalView(1, None, frozenset()))


def test_port_table_drops_when_all_failed():
    g = MultiGraph([0, 1], {0: (0, 1)}, 0)
    assert PortTable(g, {(1, None): [0]}).decide(LocalView(1, None, frozenset({0}))).kind == "drop"


def test_circular_rejects_bad_ordering():
    _, T = clique(3)
    with pytest.raises(ValueError):
        Circular(T, [0, 0, 1])


def test_plus_one_rides_last_tree_without_failures():
    g, T = mader_corpus(5, 1, 8)[0]
    s = PlusOne(T)
    for v in g.vertices:
        if v == g.destination:
            continue
        tr = run_deterministic(g, s, (), v, record=True)
        assert tr.delivered and tr.switches == 0
        for step in tr.steps:
            a = step["out"][0]
            assert T.tree_of(Arc(a["edge"], a["tail"], a["head"])) == T.k - 1


def test_plus_one_floor_half():
    import itertools

    for g, T in mader_corpus(6, 1, 7):
        s = PlusOne(T)
        for F in itertools.combinations(sorted(g.edges), 3):
            comp = g.component_of(g.destination, frozenset(F))
            for v in comp - {g.destination}:
                assert run_deterministic(g, s, F, v).delivered


def test_plus_one_inner_order_defaults():
    _, T5 = mader_corpus(5, 1, 7)[0]
    assert PlusOne(T5).inner == adbed_order(4) == [0, 2, 1, 3]
    _, T6 = mader_corpus(6, 1, 7)[0]
    assert PlusOne(T6).inner == [0, 1, 2, 3, 4]
    assert PlusOne(T5, inner=[0, 1, 2, 3]).inner == [0, 1, 2, 3]


def test_plus_one_four_resilient_on_five_connected():
    from failover import check_resilience

    for g, T in mader_corpus(5, 2, 6, n_ops=3):
        assert check_resilience(g, PlusOne(T), 4).holds


def test_randomized_no_failures_zero_switches():
    g, T = clique(4)
    s = BouncedRand(T, 0.5)
    for seed in range(20):
        tr = run_deterministic(g, s, (), 1, rng=random.Random(seed))
        assert tr.delivered and tr.switches == 0


def test_bounced_rand_needs_rng_and_valid_q():
    g, T = clique(3)
    with pytest.raises(ValueError):
        BouncedRand(T, 1.0)
    with pytest.raises(ContractError):
        BouncedRand(T, 0.5).decide(LocalView(1, None, frozenset()))


def test_q_star_formula():
    assert q_star(0.25) == pytest.approx(1 / 3)
    assert q_star(0.0) == 0.0


def test_pure_resample_only_picks_alive_trees():
    g, T = clique(4)
    s = PureResample(T)
    v = 1
    dead = {T[i].out[v].edge for i in range(3)}
    for seed in range(30):
        a = s.decide(LocalView(v, None, frozenset(dead)), random.Random(seed))
        assert a.out[0][0] == T[3].out[v]


def test_randomized_decisions_are_reproducible():
    g, T = clique(5)
    s = BouncedRand(T, 0.4)
    F = frozenset(list(g.edges)[:3])
    a = [run_deterministic(g, s, F, 2, rng=random.Random(7)).hops for _ in range(3)]
    assert len(set(a)) == 1


# --- DFS traversal and header rewriting ------------------------------------


def test_dfs_single_arc():
    T = make_set("d", [[Arc(0, "v", "d")]])
    walk = dfs_traversal(T[0])
    assert [(a.tail, a.head) for a in walk] == [("d", "v"), ("v", "d")]


def test_dfs_figure_tree():
    arcs = [("v1", "d"), ("v2", "v1"), ("v3", "v1"), ("v4", "v1"), ("v5", "d"), ("v6", "v5")]
    T = make_set("d", [[Arc(i, u, v) for i, (u, v) in enumerate(arcs)]])
    walk = dfs_traversal(T[0])
    seq = ["d"] + [a.head for a in walk]
    assert seq == "d v1 v2 v1 v3 v1 v4 v1 d v5 v6 v5 d".split()
    assert len(walk) == 2 * 6
    inv = inverse_traversal(walk)
    assert ["d"] + [a.head for a in inv] == list(reversed(seq))


def test_df_algo_without_failures_matches_circular():
    g, T = clique(4)
    s, c = DFAlgo(g, T), Circular(T)
    for v in range(1, 5):
        a = run_deterministic(g, s, (), v, record=True)
        b = run_deterministic(g, c, (), v, record=True)
        assert [x["out"] for x in a.steps] == [x["out"] for x in b.steps]
        assert all(x["header"] == [0, 0] for x in a.steps)


def test_df_algo_tree_index_given_h():
    g, T = clique(5)
    s = DFAlgo(g, T)
    e = next(e for e in g.edges if sorted(T.trees_of_edge(g, e)) == [1, 4])
    assert s.get_tree_index_given_h(1, e) == 4
    assert s.get_tree_index_given_h(0, e) == 1
    assert s.get_h_given_tree_index(4, e) == 1 and s.get_h_given_tree_index(1, e) == 0


def test_df_algo_header_fits_three_bits():
    import itertools

    g, T = clique(4)
    s = DFAlgo(g, T)
    for F in itertools.combinations(sorted(g.edges), 3):
        for v in g.component_of(0, frozenset(F)) - {0}:
            tr = run_deterministic(g, s, F, v)
            assert tr.delivered and tr.max_header_bits <= 3


# --- duplication -----------------------------------------------------------


def test_dup_no_failures_single_packet():
    g, T = mader_corpus(4, 1, 8)[0]
    for odd, (gg, TT) in ((False, (g, T)), (True, mader_corpus(5, 1, 8)[0])):
        s = Duplication(TT, odd=odd)
        for v in gg.vertices:
            if v != gg.destination:
                tr = run_duplication(gg, s, (), v)
                assert tr.delivered and tr.copies == 0


def test_dup_rejects_wrong_parity():
    _, T4 = clique(4)
    _, T5 = clique(5)
    with pytest.raises(ValueError):
        Duplication(T5, odd=False)
    with pytest.raises(ValueError):
        Duplication(T4, odd=True)


def _fanout_action(g, T, s, fan_tree):
    """Fail the fan-out tree's out-arc at some vertex and return the decision."""
    for v in g.vertices:
        if v == g.destination:
            continue
        a = T[fan_tree].out[v]
        F = frozenset({a.edge})
        prev = next((b for b in T[fan_tree].out.values() if b.head == v), None)
        if prev is None:
            continue
        return s.decide(LocalView(v, prev, F)), T
    raise LookupError


def test_even_fanout_sends_s_packets():
    g, T = mader_corpus(6, 1, 8)[0]
    s = Duplication(T)
    action, _ = _fanout_action(g, T, s, 2)  # T_s with s = 3, 0-based 2
    assert sorted(T.tree_of(a) for a, _ in action.out) == [3, 4, 5]


def test_odd_fanout_sends_k_packets():
    g, T = mader_corpus(5, 1, 8)[0]  # 2k+1 = 5, k = 2
    s = Duplication(T, odd=True)
    action, _ = _fanout_action(g, T, s, 2)  # T_{k+1}, 0-based 2
    assert action.kind in ("forward", "duplicate")
    trees = sorted(T.tree_of(a) for a, _ in action.out)
    assert trees == [3, 4]


def test_dup_destroys_beyond_fanout():
    g, T = mader_corpus(4, 1, 8)[0]
    s = Duplication(T)
    v = next(v for v in g.vertices if v != g.destination)
    a = T[3].out[v]
    prev = next((b for b in T[3].out.values() if b.head == v), None)
    if prev is not None:
        act = s.decide(LocalView(v, prev, frozenset({a.edge})))
        assert act.kind == "drop"
