"""Computational reproduction of the vertex-circular impossibility results."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .graph import MultiGraph
from .schemes import PortTable, VertexCircular
from .simulator import run_deterministic
from .topologies import CUBE_CLOCKWISE, cube_graph, cube_port_orders, subdivide_three_map
from .verifier import check_resilience

ORIGINALS = ("o", "x", "y", "z", "a", "b", "c")


def _edge(g: MultiGraph, u: str, v: str) -> int:
    return g.edges_between(u, v)[0]


@dataclass(frozen=True)
class Scenario:
    name: str
    clockwise: tuple[str, ...]
    counterclockwise: tuple[str, ...]
    failed: tuple[tuple[str, str], ...]
    landmarks: tuple[str, ...]  # vertices the looping walk visits in this order
    contiguous: bool


# o routes clockwise and sends originated packets to y in every scenario;
# b, c and x are free and all 8 choices are replayed
SCRIPTED = (
    Scenario("y-clockwise", ("o", "y"), ("a", "z"), (("a", "d"), ("z", "b")), ("y", "a", "z", "o", "y"), True),
    Scenario("a-clockwise", ("o", "a"), ("y", "z"), (("y", "c"), ("z", "b")), ("y", "a", "z", "o", "y"), True),
    Scenario("z-clockwise", ("o", "z"), ("y", "a"), (("y", "c"), ("a", "d")), ("y", "a", "z", "o", "y"), True),
    Scenario("cd-bd-failed", ("o",), ("y", "a", "z"), (("c", "d"), ("b", "d")), ("o", "y", "c", "b", "z", "o", "y"), False),
)


def _walk(g: MultiGraph, scheme, failed, source) -> tuple[str, list]:
    tr = run_deterministic(g, scheme, failed, source, record=True)
    verts = [s["vertex"] for s in tr.steps]
    if tr.steps:
        last = tr.steps[-1]["out"]
        if last:
            verts.append(last[0]["head"])
    return tr.outcome, verts


def _has_landmarks(walk: Sequence, marks: Sequence, contiguous: bool) -> bool:
    seq = list(walk) * 2  # the walk ends where the loop closes
    if contiguous:
        n = len(marks)
        return any(seq[i : i + n] == list(marks) for i in range(len(seq) - n + 1))
    it = iter(seq)
    return all(any(v == m for v in it) for m in marks)


@dataclass
class ImpossibilityReport:
    assignments: int = 0
    assignments_failing: int = 0
    survivors: list = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)
    scripted: list = field(default_factory=list)
    subdivision: dict = field(default_factory=dict)

    @property
    def scripted_ok(self) -> bool:
        return all(s["reproduced"] for s in self.scripted)

    @property
    def subdivision_ok(self) -> bool:
        return bool(self.subdivision) and all(v["all_loop"] for v in self.subdivision.values())

    @property
    def ok(self) -> bool:
        return self.assignments_failing == self.assignments and self.scripted_ok and self.subdivision_ok

    def to_json(self) -> dict:
        return {
            "summary": f"{self.assignments_failing}/{self.assignments} assignments fail",
            "ok": self.ok,
            "survivors": self.survivors,
            "witnesses": self.witnesses,
            "scripted": self.scripted,
            "scripted_ok": self.scripted_ok,
            "subdivision": self.subdivision,
            "subdivision_ok": self.subdivision_ok,
        }


def assignment_label(cw: Mapping[str, bool]) -> str:
    return "".join(v if cw[v] else v.upper() for v in ORIGINALS)


def check_assignments(g: MultiGraph | None = None) -> tuple[int, int, list, dict]:
    """Every one of the 2^7 orientation choices fails some scenario with <= 2 failures."""
    g = g or cube_graph()
    total, failing, survivors, witnesses = 0, 0, [], {}
    for bits in itertools.product((True, False), repeat=len(ORIGINALS)):
        cw = dict(zip(ORIGINALS, bits))
        scheme = VertexCircular(g, cube_port_orders(g, cw))
        v = check_resilience(g, scheme, 2)
        total += 1
        label = assignment_label(cw)
        if v.holds:
            survivors.append(label)
        else:
            failing += 1
            witnesses[label] = {"failed": v.counterexample["failed"], "source": v.counterexample["source"]}
    return total, failing, survivors, witnesses


def replay_scripted(g: MultiGraph | None = None) -> list[dict]:
    g = g or cube_graph()
    out = []
    for sc in SCRIPTED:
        failed = frozenset(_edge(g, u, v) for u, v in sc.failed)
        for bits in itertools.product((True, False), repeat=3):
            cw = {v: True for v in sc.clockwise}
            cw.update({v: False for v in sc.counterclockwise})
            cw.update(dict(zip(("b", "c", "x"), bits)))
            scheme = VertexCircular(g, cube_port_orders(g, cw))
            outcome, walk = _walk(g, scheme, failed, "o")
            ok = outcome == "loop" and _has_landmarks(walk, sc.landmarks, sc.contiguous)
            out.append({
                "scenario": sc.name,
                "assignment": assignment_label(cw),
                "failed": ["".join(p) for p in sc.failed],
                "outcome": outcome,
                "walk": walk,
                "reproduced": ok,
            })
    return out


# ---------------------------------------------------------------------------
# subdivided graph


def _pass_through_table(sub, g0: MultiGraph, originals: Mapping[str, Mapping]) -> dict:
    """Intermediates forward straight on (bouncing only when the far edge is down)."""
    G = sub.graph
    table: dict = {}
    for w in sub.intermediates:
        a, b = G.incident(w)
        table[(w, a)] = (b, a)
        table[(w, b)] = (a, b)
        table[(w, None)] = (a, b)
    for v, entries in originals.items():
        table.update({(v, k): tuple(p) for k, p in entries.items()})
    return table


def _port_of(sub, g0: MultiGraph, v: str, nbr: str) -> int:
    """Edge of G' at original v leading towards original neighbour nbr."""
    e = _edge(g0, v, nbr)
    first, _, last = sub.paths[e]
    return first if g0.edges[e][0] == v else last


def _circular_tables(sub, g0: MultiGraph) -> dict:
    out = {}
    for v, seq in CUBE_CLOCKWISE.items():
        ports = [_port_of(sub, g0, v, u) for u in seq]
        n = len(ports)
        entries = {None: ports}
        for i, p in enumerate(ports):
            entries[p] = [ports[(i + j) % n] for j in range(1, n + 1)]
        out[v] = entries
    return out


def _middle(sub, g0, u, v) -> int:
    return sub.paths[_edge(g0, u, v)][1]


def _adjacent_intermediate(sub, v: str, port: int):
    G = sub.graph
    return G.other(port, v)


def subdivision_checks() -> dict:
    """Forced structure on G' (every edge replaced by a 3-edge path).

    * an intermediate that bounces a packet although its far edge is alive
      loops once the other two paths at the original endpoint are cut;
    * an original vertex with f(n) = n loops when the path to n is cut;
    * an original vertex with f(n1) = f(n2) = n3 loops when the n1 and n3
      paths are cut.

    All 25 non-circular tables (of the 27 maps N(v) -> N(v)) at each of the
    7 originals are exercised; only middle edges (between intermediates) fail.
    """
    g0 = cube_graph()
    sub = subdivide_three_map(g0)
    G = sub.graph
    base = _circular_tables(sub, g0)
    report: dict = {}

    # intermediates must pass packets through
    cases, loops = 0, 0
    for v in ORIGINALS:
        for u in g0.neighbors(v):
            port = _port_of(sub, g0, v, u)
            w = _adjacent_intermediate(sub, v, port)
            others = [x for x in g0.neighbors(v) if x != u]
            failed = frozenset(_middle(sub, g0, v, x) for x in others)
            table = _pass_through_table(sub, g0, base)
            # w bounces packets that came from v, although its far edge is fine
            table[(w, port)] = (port,)
            scheme = PortTable(G, table)
            cases += 1
            if run_deterministic(G, scheme, failed, v).outcome == "loop":
                loops += 1
    report["intermediate-pass-through"] = {"cases": cases, "loops": loops, "all_loop": cases == loops}

    # original tables: every non-derangement of N(v) loops
    bounce_cases = bounce_loops = merge_cases = merge_loops = 0
    for v in ORIGINALS:
        nbrs = list(CUBE_CLOCKWISE[v])
        ports = {n: _port_of(sub, g0, v, n) for n in nbrs}
        for image in itertools.product(nbrs, repeat=3):
            f = dict(zip(nbrs, image))
            if all(f[n] != n for n in nbrs) and len(set(image)) == 3:
                continue  # one of the two cyclic orders
            entries = dict(base[v])
            for n in nbrs:
                entries[ports[n]] = [ports[f[n]]]
            tables = dict(base)
            tables[v] = entries
            scheme = PortTable(G, _pass_through_table(sub, g0, tables))
            fixed = [n for n in nbrs if f[n] == n]
            if fixed:
                n = fixed[0]
                failed = frozenset({_middle(sub, g0, v, n)})
                src = _adjacent_intermediate(sub, v, ports[n])
                bounce_cases += 1
                bounce_loops += run_deterministic(G, scheme, failed, src).outcome == "loop"
                continue
            # f(n1) = f(n2) = n3 with f(n3) in {n1, n2}
            n3 = next(n for n in nbrs if image.count(n) == 2)
            n1 = f[n3]
            failed = frozenset({_middle(sub, g0, v, n1), _middle(sub, g0, v, n3)})
            src = _adjacent_intermediate(sub, v, ports[n1])
            merge_cases += 1
            merge_loops += run_deterministic(G, scheme, failed, src).outcome == "loop"
    report["no-bounce-back"] = {"cases": bounce_cases, "loops": bounce_loops, "all_loop": bounce_cases == bounce_loops}
    report["distinct-entries"] = {"cases": merge_cases, "loops": merge_loops, "all_loop": merge_cases == merge_loops}
    report["non_circular_tables"] = {"cases": bounce_cases + merge_cases, "loops": bounce_loops + merge_loops,
                                     "all_loop": bounce_cases + merge_cases == 25 * len(ORIGINALS)
                                     and bounce_loops + merge_loops == 25 * len(ORIGINALS)}
    return report


def impossibility_suite() -> ImpossibilityReport:
    g = cube_graph()
    rep = ImpossibilityReport()
    rep.assignments, rep.assignments_failing, rep.survivors, rep.witnesses = check_assignments(g)
    rep.scripted = replay_scripted(g)
    rep.subdivision = subdivision_checks()
    return rep
