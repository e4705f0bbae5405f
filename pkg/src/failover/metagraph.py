"""Meta-graph of arborescences sharing failed edges, and good-arc analysis."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .graph import Arc, Arborescence, ArborescenceSet, MultiGraph


@dataclass(frozen=True)
class MetaLink:
    edge: int
    a: int
    b: int  # equal to ``a`` for a self-loop

    @property
    def is_loop(self) -> bool:
        return self.a == self.b


@dataclass(frozen=True)
class MetaGraph:
    k: int
    links: tuple[MetaLink, ...]

    def out_meta_arcs(self, i: int) -> list[tuple[MetaLink, int]]:
        """(link, j) for every meta-arc leaving node i."""
        res = []
        for ln in self.links:
            if ln.a == i:
                res.append((ln, ln.b))
            elif ln.b == i:
                res.append((ln, ln.a))
        return res


@dataclass(frozen=True)
class Component:
    nodes: frozenset[int]
    links: tuple[MetaLink, ...]

    @property
    def is_tree(self) -> bool:
        return len(self.links) == len(self.nodes) - 1


def build_meta_graph(g: MultiGraph, T: ArborescenceSet, failed: Iterable[int]) -> MetaGraph:
    links = []
    for e in sorted(set(failed)):
        owners = T.trees_of_edge(g, e)
        if len(owners) == 1:
            links.append(MetaLink(e, owners[0], owners[0]))
        elif len(owners) == 2:
            links.append(MetaLink(e, min(owners), max(owners)))
    return MetaGraph(T.k, tuple(links))


def tree_components(h: MetaGraph) -> list[Component]:
    parent = list(range(h.k))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for ln in h.links:
        ra, rb = find(ln.a), find(ln.b)
        if ra != rb:
            parent[ra] = rb
    groups: dict[int, list[int]] = {}
    for i in range(h.k):
        groups.setdefault(find(i), []).append(i)
    comps = []
    for nodes in sorted(groups.values()):
        ns = frozenset(nodes)
        comps.append(Component(ns, tuple(ln for ln in h.links if ln.a in ns)))
    return comps


def is_good_arc(t: Arborescence, failed: frozenset[int] | set[int], a: Arc) -> bool:
    """True iff the path from the arc's head to the root avoids failed edges."""
    if t.out.get(a.tail) != a:
        raise ValueError(f"arc {tuple(a)} is not in this arborescence")
    return all(x.edge not in failed for x in t.path(a.head))


def _arc_in(g: MultiGraph, T: ArborescenceSet, e: int, j: int) -> Arc | None:
    u, v = g.edges[e]
    for a in (Arc(e, u, v), Arc(e, v, u)):
        if T.tree_of(a) == j:
            return a
    return None


def is_well_bouncing(g: MultiGraph, T: ArborescenceSet, failed: frozenset[int], link: MetaLink, j: int) -> bool:
    """Meta-arc towards j is well-bouncing iff the edge's arc in T_j is good."""
    if link.is_loop:
        return False
    a = _arc_in(g, T, link.edge, j)
    return a is not None and is_good_arc(T[j], failed, a)


def well_bouncing_count(g: MultiGraph, T: ArborescenceSet, failed: frozenset[int], comp: Component) -> int:
    n = 0
    for ln in comp.links:
        if ln.is_loop:
            continue
        n += is_well_bouncing(g, T, failed, ln, ln.b)
        n += is_well_bouncing(g, T, failed, ln, ln.a)
    return n


def good_arborescences(g: MultiGraph, T: ArborescenceSet, failed: Iterable[int]) -> set[int]:
    failed = frozenset(failed)
    h = build_meta_graph(g, T, failed)
    good = set()
    for i in range(T.k):
        if all(is_well_bouncing(g, T, failed, ln, j) for ln, j in h.out_meta_arcs(i)):
            good.add(i)
    return good
