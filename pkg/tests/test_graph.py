import json

import pytest
from hypothesis import given, settings, strategies as st

from failover import (
    Arc,
    ArborescenceSet,
    GraphError,
    MultiGraph,
    build_topology,
    edge_connectivity,
    make_set,
    to_dot,
    validate_arborescence_set,
)
from failover.topologies import TopologySpec

from corpus import complete, doubled_triangle, hypercube
from oracles import brute_force_edge_connectivity, maxflow_edge_connectivity


def test_parallel_edges_keep_distinct_ids():
    g = doubled_triangle()
    assert g.m == 6
    assert g.edges_between("a", "d") == [0, 1]
    assert g.degree("a") == 4


def test_rejects_unknown_destination():
    with pytest.raises(GraphError):
        MultiGraph([0, 1], {0: (0, 1)}, 7)


def test_json_round_trip():
    g = doubled_triangle()
    h = MultiGraph.from_json(json.loads(json.dumps(g.to_json())))
    assert h.to_json() == g.to_json()


def test_malformed_graph_json():
    with pytest.raises(GraphError):
        MultiGraph.from_json({"vertices": [0, 1]})


@pytest.mark.parametrize(
    "g, expected",
    [(complete(5), 4), (doubled_triangle(), 4), (hypercube(3), 3)],
    ids=["K5", "doubled-triangle", "Q3"],
)
def test_edge_connectivity_examples(g, expected):
    assert edge_connectivity(g) == expected
    assert brute_force_edge_connectivity(g.vertices, g.edges) == expected


def test_disconnected_graph_has_connectivity_zero():
    g = MultiGraph([0, 1, 2], {0: (0, 1)}, 0)
    assert edge_connectivity(g) == 0


@st.composite
def small_multigraphs(draw):
    n = draw(st.integers(2, 6))
    m = draw(st.integers(0, 10))
    edges = {}
    for e in range(m):
        u = draw(st.integers(0, n - 1))
        v = draw(st.integers(0, n - 1).filter(lambda x, u=u: x != u))
        edges[e] = (u, v)
    return MultiGraph(range(n), edges, 0)


@settings(max_examples=150, deadline=None)
@given(small_multigraphs())
def test_edge_connectivity_matches_oracles(g):
    lam = edge_connectivity(g)
    assert lam == maxflow_edge_connectivity(g.vertices, g.edges)
    assert lam == brute_force_edge_connectivity(g.vertices, g.edges)


def test_component_of_respects_failures():
    g = hypercube(3)
    cut = frozenset(g.incident(5))
    comp = g.component_of(0, cut)
    assert 5 not in comp and len(comp) == 7


def test_clique_construction_is_valid():
    g, T = build_topology(TopologySpec("clique", {"k": 4}))
    assert validate_arborescence_set(g, T) == []


def test_validator_flags_shared_arc():
    g = complete(3)
    a = Arc(g.edges_between(1, 0)[0], 1, 0)
    b = Arc(g.edges_between(2, 0)[0], 2, 0)
    T = make_set(0, [[a, b], [a, b]])
    assert any("appears in T0 and T1" in p for p in validate_arborescence_set(g, T))


def test_validator_flags_cycle():
    g = complete(3)
    e12 = g.edges_between(1, 2)[0]
    T = make_set(0, [[Arc(e12, 1, 2), Arc(e12, 2, 1)]])
    problems = validate_arborescence_set(g, T)
    assert any("cycl" in p or "reach" in p for p in problems)


def test_validator_flags_missing_vertex():
    g = complete(3)
    T = make_set(0, [[Arc(g.edges_between(1, 0)[0], 1, 0)]])
    assert validate_arborescence_set(g, T)


def test_validator_flags_wrong_endpoints():
    g = complete(3)
    e01 = g.edges_between(0, 1)[0]
    T = make_set(0, [[Arc(e01, 2, 0), Arc(g.edges_between(1, 0)[0], 1, 0)]])
    assert validate_arborescence_set(g, T)


def test_validator_checks_adbed_halves():
    g = doubled_triangle()
    # halves {0,1}, {2,3}: trees 0 and 1 share edge 0 in opposite directions
    t0 = [Arc(0, "a", "d"), Arc(2, "b", "a")]
    t1 = [Arc(4, "b", "d"), Arc(3, "a", "b")]
    t2 = [Arc(1, "a", "d"), Arc(3, "b", "a")]
    t3 = [Arc(5, "b", "d"), Arc(2, "a", "b")]
    assert validate_arborescence_set(g, make_set("d", [t0, t1, t2, t3], adbed=False)) == []
    bad = make_set("d", [t0, t3, t2, t1], adbed=True)  # 0 and 1 share edge 2
    assert validate_arborescence_set(g, bad)


def test_arborescence_json_round_trip():
    g, T = build_topology(TopologySpec("complete-bipartite", {"a": 3, "b": 4}))
    U = ArborescenceSet.from_json(json.loads(json.dumps(T.to_json())))
    assert U.to_json() == T.to_json()
    assert validate_arborescence_set(g, U) == []


def test_arborescence_json_rejects_two_out_arcs():
    data = {"root": 0, "arborescences": [[{"edge": 0, "tail": 1, "head": 0}, {"edge": 1, "tail": 1, "head": 2}]]}
    with pytest.raises(GraphError):
        ArborescenceSet.from_json(data)


def test_tree_of_and_shared_edges():
    g, T = build_topology(TopologySpec("clique", {"k": 4}))
    for i, t in enumerate(T):
        for a in t.arcs():
            assert T.tree_of(a) == i
    for e in g.edges:
        assert 1 <= len(T.trees_of_edge(g, e)) <= 2


def test_path_and_depth():
    g, T = build_topology(TopologySpec("clique", {"k": 4}))
    for t in T:
        for v in g.vertices:
            if v == g.destination:
                continue
            path = t.path(v)
            assert path[0].tail == v and path[-1].head == g.destination
            assert t.depth(v) == len(path)


def test_dot_labels_membership():
    g, T = build_topology(TopologySpec("clique", {"k": 3}))
    dot = to_dot(g, T)
    assert dot.startswith("graph") and "T0:" in dot and "T2:" in dot
