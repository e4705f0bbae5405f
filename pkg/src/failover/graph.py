"""Undirected multigraphs, arcs and d-rooted arborescence sets."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Iterator, Mapping, NamedTuple, Sequence

import networkx as nx

Vertex = Hashable


def vkey(v: Vertex) -> tuple:
    """Total order over mixed int/str vertex ids (ints first)."""
    if isinstance(v, bool):
        return (2, str(v))
    if isinstance(v, int):
        return (0, v, "")
    return (1, 0, str(v))


class Arc(NamedTuple):
    edge: int
    tail: Vertex
    head: Vertex

    def reversed(self) -> "Arc":
        return Arc(self.edge, self.head, self.tail)

    def to_json(self) -> dict:
        return {"edge": self.edge, "tail": self.tail, "head": self.head}


class GraphError(ValueError):
    pass


class MultiGraph:
    """Undirected multigraph with edge ids and a destination vertex.

    Parallel edges are allowed, self-loops are not.  Instances are treated
    as immutable after construction.
    """

    __slots__ = ("vertices", "edges", "destination", "_inc", "_vset")

    def __init__(
        self,
        vertices: Iterable[Vertex],
        edges: Mapping[int, tuple[Vertex, Vertex]] | Iterable[tuple[int, Vertex, Vertex]],
        destination: Vertex,
    ):
        self.vertices: tuple = tuple(vertices)
        self._vset = frozenset(self.vertices)
        if len(self._vset) != len(self.vertices):
            raise GraphError("duplicate vertex ids")
        if isinstance(edges, Mapping):
            items = [(int(e), u, v) for e, (u, v) in edges.items()]
        else:
            items = [(int(e), u, v) for e, u, v in edges]
        self.edges: dict[int, tuple[Vertex, Vertex]] = {}
        inc: dict[Vertex, list[int]] = {v: [] for v in self.vertices}
        for e, u, v in items:
            if e in self.edges:
                raise GraphError(f"duplicate edge id {e}")
            if u not in self._vset or v not in self._vset:
                raise GraphError(f"edge {e} has an undeclared endpoint")
            if u == v:
                raise GraphError(f"edge {e} is a self-loop")
            self.edges[e] = (u, v)
            inc[u].append(e)
            inc[v].append(e)
        if destination not in self._vset:
            raise GraphError("destination is not a declared vertex")
        self.destination = destination
        self._inc = {v: tuple(es) for v, es in inc.items()}

    # basic queries -------------------------------------------------------
    def __contains__(self, v: Vertex) -> bool:
        return v in self._vset

    def __repr__(self) -> str:
        return f"MultiGraph(|V|={len(self.vertices)}, |E|={len(self.edges)}, d={self.destination!r})"

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.edges)

    def incident(self, v: Vertex) -> tuple[int, ...]:
        return self._inc[v]

    def degree(self, v: Vertex) -> int:
        return len(self._inc[v])

    def other(self, e: int, v: Vertex) -> Vertex:
        a, b = self.edges[e]
        if v == a:
            return b
        if v == b:
            return a
        raise GraphError(f"vertex {v!r} is not an endpoint of edge {e}")

    def arc(self, e: int, tail: Vertex) -> Arc:
        return Arc(e, tail, self.other(e, tail))

    def arcs_out(self, v: Vertex) -> Iterator[Arc]:
        for e in self._inc[v]:
            yield Arc(e, v, self.other(e, v))

    def neighbors(self, v: Vertex) -> list[Vertex]:
        return [self.other(e, v) for e in self._inc[v]]

    def edges_between(self, u: Vertex, v: Vertex) -> list[int]:
        return [e for e in self._inc[u] if self.other(e, u) == v]

    def next_edge_id(self) -> int:
        return max(self.edges, default=-1) + 1

    # derived graphs ------------------------------------------------------
    def with_changes(
        self,
        add_vertices: Sequence[Vertex] = (),
        add_edges: Sequence[tuple[int, Vertex, Vertex]] = (),
        remove_edges: Iterable[int] = (),
    ) -> "MultiGraph":
        gone = set(remove_edges)
        edges = [(e, u, v) for e, (u, v) in self.edges.items() if e not in gone]
        return MultiGraph(self.vertices + tuple(add_vertices), edges + list(add_edges), self.destination)

    def to_networkx(self) -> nx.Graph:
        """Simple weighted graph; the weight counts parallel edges."""
        h = nx.Graph()
        h.add_nodes_from(self.vertices)
        for u, v in self.edges.values():
            if h.has_edge(u, v):
                h[u][v]["weight"] += 1
            else:
                h.add_edge(u, v, weight=1)
        return h

    def component_of(self, v: Vertex, failed: frozenset[int] | set[int] = frozenset()) -> set:
        seen = {v}
        stack = [v]
        while stack:
            x = stack.pop()
            for e in self._inc[x]:
                if e in failed:
                    continue
                y = self.other(e, x)
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen

    # serialization -------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [{"id": e, "u": u, "v": v} for e, (u, v) in sorted(self.edges.items())],
            "destination": self.destination,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "MultiGraph":
        try:
            return cls(
                data["vertices"],
                [(int(x["id"]), x["u"], x["v"]) for x in data["edges"]],
                data["destination"],
            )
        except (KeyError, TypeError) as exc:
            raise GraphError(f"malformed graph JSON: {exc!r}") from exc


def edge_connectivity(g: MultiGraph) -> int:
    """Global edge connectivity (0 when disconnected or trivial)."""
    if g.n < 2:
        return 0
    h = g.to_networkx()
    if not nx.is_connected(h):
        return 0
    cut, _ = nx.stoer_wagner(h, weight="weight")
    return int(cut)


# ---------------------------------------------------------------------------
# arborescences


@dataclass(frozen=True)
class Arborescence:
    """Map from each non-root vertex to its unique outgoing arc."""

    root: Vertex
    out: Mapping[Vertex, Arc]

    def arcs(self) -> list[Arc]:
        return list(self.out.values())

    def edge_ids(self) -> set[int]:
        return {a.edge for a in self.out.values()}

    def path(self, v: Vertex) -> list[Arc]:
        """Arcs from v to the root (raises on a cycle or a dead end)."""
        arcs: list[Arc] = []
        seen = {v}
        while v != self.root:
            a = self.out.get(v)
            if a is None:
                raise GraphError(f"vertex {v!r} has no out-arc")
            arcs.append(a)
            v = a.head
            if v in seen:
                raise GraphError("cycle in arborescence")
            seen.add(v)
        return arcs

    def depth(self, v: Vertex) -> int:
        return len(self.path(v))

    def children(self) -> dict[Vertex, list[Arc]]:
        """Parent vertex -> incoming arcs, children sorted by vertex id."""
        kids: dict[Vertex, list[Arc]] = {}
        for a in self.out.values():
            kids.setdefault(a.head, []).append(a)
        for lst in kids.values():
            lst.sort(key=lambda a: (vkey(a.tail), a.edge))
        return kids


@dataclass(frozen=True)
class ArborescenceSet:
    members: tuple[Arborescence, ...]
    adbed: bool = False
    _arc_index: dict = field(default=None, repr=False, compare=False)  # type: ignore[assignment]

    def __post_init__(self):
        idx: dict[tuple[int, Vertex], int] = {}
        for i, t in enumerate(self.members):
            for a in t.out.values():
                idx.setdefault((a.edge, a.tail), i)
        object.__setattr__(self, "_arc_index", idx)

    @property
    def k(self) -> int:
        return len(self.members)

    @property
    def root(self) -> Vertex:
        return self.members[0].root

    def __getitem__(self, i: int) -> Arborescence:
        return self.members[i]

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def tree_of(self, arc: Arc) -> int | None:
        """Index of the member holding this directed arc, if any."""
        i = self._arc_index.get((arc.edge, arc.tail))
        if i is None or self.members[i].out.get(arc.tail) != arc:
            return None
        return i

    def trees_of_edge(self, g: MultiGraph, e: int) -> list[int]:
        u, v = g.edges[e]
        found = []
        for a in (Arc(e, u, v), Arc(e, v, u)):
            i = self.tree_of(a)
            if i is not None:
                found.append(i)
        return found

    def halves(self) -> tuple[range, range]:
        h = self.k // 2
        return range(0, h), range(h, 2 * h)

    def to_json(self) -> dict:
        return {
            "root": self.root,
            "arborescences": [
                [a.to_json() for a in sorted(t.out.values(), key=lambda a: (vkey(a.tail), a.edge))]
                for t in self.members
            ],
            "adbed": self.adbed,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "ArborescenceSet":
        try:
            root = data["root"]
            members = []
            for lst in data["arborescences"]:
                out = {}
                for x in lst:
                    a = Arc(int(x["edge"]), x["tail"], x["head"])
                    if a.tail in out:
                        raise GraphError(f"vertex {a.tail!r} has two out-arcs in one arborescence")
                    out[a.tail] = a
                members.append(Arborescence(root, out))
            return cls(tuple(members), bool(data.get("adbed", False)))
        except (KeyError, TypeError) as exc:
            raise GraphError(f"malformed arborescence JSON: {exc!r}") from exc


def make_set(root: Vertex, arc_lists: Sequence[Iterable[Arc]], adbed: bool = False) -> ArborescenceSet:
    members = []
    for arcs in arc_lists:
        out = {}
        for a in arcs:
            if a.tail in out and out[a.tail] != a:
                raise GraphError(f"vertex {a.tail!r} has two out-arcs in one arborescence")
            out[a.tail] = a
        members.append(Arborescence(root, out))
    return ArborescenceSet(tuple(members), adbed)


def validate_arborescence_set(g: MultiGraph, T: ArborescenceSet) -> list[str]:
    """Return a list of human-readable violations (empty iff valid)."""
    problems: list[str] = []
    d = g.destination
    for i, t in enumerate(T.members):
        if t.root != d:
            problems.append(f"T{i}: rooted at {t.root!r}, not at the destination")
        if d in t.out:
            problems.append(f"T{i}: root has an outgoing arc")
        for v, a in t.out.items():
            if a.tail != v:
                problems.append(f"T{i}: arc {a} stored under vertex {v!r}")
            if a.edge not in g.edges or {a.tail, a.head} != set(g.edges[a.edge]):
                problems.append(f"T{i}: arc {a} does not match a graph edge")
        missing = [v for v in g.vertices if v != d and v not in t.out]
        if missing:
            problems.append(f"T{i}: not spanning, missing out-arcs at {missing[:5]}")
        # acyclicity: every vertex must reach the root
        state: dict[Vertex, int] = {d: 2}
        for v in t.out:
            path = []
            x = v
            while state.get(x, 0) == 0:
                state[x] = 1
                path.append(x)
                a = t.out.get(x)
                if a is None:
                    break
                x = a.head
            if state.get(x) == 1:
                problems.append(f"T{i}: cycle through {x!r}")
                for y in path:
                    state[y] = 3
            else:
                for y in path:
                    state[y] = 2
    seen: dict[tuple[int, Vertex], int] = {}
    for i, t in enumerate(T.members):
        for a in t.out.values():
            j = seen.get((a.edge, a.tail))
            if j is not None and j != i:
                problems.append(f"arc {tuple(a)} appears in T{j} and T{i}")
            seen[(a.edge, a.tail)] = i
    if T.adbed:
        for half in T.halves():
            owner: dict[int, int] = {}
            for i in half:
                for e in T.members[i].edge_ids():
                    if e in owner:
                        problems.append(f"ADBED: edge {e} shared by T{owner[e]} and T{i} in the same half")
                    else:
                        owner[e] = i
    return problems


# ---------------------------------------------------------------------------
# DOT export


_PALETTE = ["blue", "orange", "red", "green", "purple", "brown", "magenta", "cyan", "gold", "gray"]


def to_dot(g: MultiGraph, T: ArborescenceSet | None = None) -> str:
    lines = ["graph failover {", f'  "{g.destination}" [shape=doublecircle];']
    for v in g.vertices:
        if v != g.destination:
            lines.append(f'  "{v}";')
    for e, (u, v) in sorted(g.edges.items()):
        attrs = [f'id="{e}"']
        if T is not None:
            tags = []
            for a in (Arc(e, u, v), Arc(e, v, u)):
                i = T.tree_of(a)
                if i is not None:
                    tags.append((i, a))
            if tags:
                attrs.append('label="' + ",".join(f"T{i}:{a.tail}->{a.head}" for i, a in tags) + '"')
                attrs.append(f'color="{":".join(_PALETTE[i % len(_PALETTE)] for i, _ in tags)}"')
        lines.append(f'  "{u}" -- "{v}" [{", ".join(attrs)}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))
