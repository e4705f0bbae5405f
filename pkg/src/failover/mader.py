"""ADBED arborescences maintained through Mader's constructive operations.

Start from two vertices joined by k parallel edges (tree j holds edge j
oriented towards d) and apply, in order:

* ``add-edge``: trees are unchanged;
* ``pinch-ceil``: pinch ceil(k/2) edges into a new vertex;
* ``pinch-floor-plus-edge``: pinch floor(k/2) edges and join the new vertex
  to an existing one;
* ``double-pinch-plus-edge``: pinch floor(k/2) edges into z', then
  floor(k/2) edges (not all at z') into z, then join z and z'.

A pinched arc ``x -> y`` becomes ``x -> z``.  Each tree then needs one out-arc
at every new vertex.  These choices are made jointly by a small constraint
search whose first candidates follow the appendix recipe: the pinched
target nearest the root, then an incoming edge not shared inside the
tree's half.  Every result is validated.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Hashable, Sequence

from .graph import Arc, ArborescenceSet, MultiGraph, edge_connectivity, make_set, validate_arborescence_set

KINDS = ("add-edge", "pinch-ceil", "pinch-floor-plus-edge", "double-pinch-plus-edge")


class MaderError(ValueError):
    """Operation rejected (malformed or breaking k-connectivity)."""


@dataclass(frozen=True)
class MaderOp:
    kind: str
    edges: tuple[int, ...] = ()
    edges2: tuple[int, ...] = ()
    endpoints: tuple[Hashable, Hashable] | None = None
    attach: Hashable | None = None

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.edges:
            out["edges"] = list(self.edges)
        if self.edges2:
            out["edges2"] = list(self.edges2)
        if self.endpoints is not None:
            out["endpoints"] = list(self.endpoints)
        if self.attach is not None:
            out["attach"] = self.attach
        return out

    @classmethod
    def from_json(cls, data: dict) -> "MaderOp":
        ep = data.get("endpoints")
        return cls(
            data["kind"],
            tuple(data.get("edges", ())),
            tuple(data.get("edges2", ())),
            None if ep is None else (ep[0], ep[1]),
            data.get("attach"),
        )


@dataclass
class _State:
    k: int
    vertices: list
    edges: dict[int, tuple]
    trees: list[dict]  # vertex -> Arc
    next_id: int = 0
    next_vertex: int = 2
    prefs: list[dict] = field(default_factory=list)  # per tree: new vertex -> [(depth, Arc)]

    def graph(self) -> MultiGraph:
        return MultiGraph(self.vertices, self.edges, 0)


def base_state(k: int) -> _State:
    edges = {j: (1, 0) for j in range(k)}
    trees = [{1: Arc(j, 1, 0)} for j in range(k)]
    return _State(k, [0, 1], edges, trees, next_id=k, next_vertex=2)


def _depths(tree: dict) -> dict:
    memo = {0: 0}

    def depth(v):
        path = []
        while v not in memo:
            path.append(v)
            if v not in tree:  # undecided new vertex: rank it last
                memo[v] = len(tree) + 1
                path.pop()
                break
            v = tree[v].head
        base = memo[v]
        for i, x in enumerate(reversed(path)):
            memo[x] = base + i + 1
        return memo[path[0]] if path else base

    for v in list(tree):
        depth(v)
    return memo


def _pinch(st: _State, edge_ids: Sequence[int], z, new: set) -> None:
    depths = [_depths(t) for t in st.trees]
    for e in edge_ids:
        if e not in st.edges:
            raise MaderError(f"edge {e} does not exist")
    if len(set(edge_ids)) != len(edge_ids):
        raise MaderError("pinched edges must be distinct")
    st.vertices.append(z)
    for e in edge_ids:
        x, y = st.edges.pop(e)
        ex, ey = st.next_id, st.next_id + 1
        st.next_id += 2
        st.edges[ex] = (x, z)
        st.edges[ey] = (y, z)
        for ti, t in enumerate(st.trees):
            for tail, head, e_in, e_out in ((x, y, ex, ey), (y, x, ey, ex)):
                a = t.get(tail)
                if a is None or a.edge != e:
                    continue
                if tail in new:
                    # out-arc of an earlier new vertex: re-chosen later
                    del t[tail]
                    st.prefs[ti].setdefault(z, []).append((depths[ti].get(tail, 0), Arc(e_out, z, head)))
                    continue
                t[tail] = Arc(e_in, tail, z)
                st.prefs[ti].setdefault(z, []).append((depths[ti][tail], Arc(e_out, z, head)))


def _complete(st: _State, new: Sequence) -> None:
    """Choose every tree's out-arc at the new vertices (constraint search)."""
    g = st.graph()
    k = st.k
    h = k // 2
    half = [0 if i < h else (1 if i < 2 * h else 2) for i in range(k)]
    for t in st.trees:
        for w in new:
            t.pop(w, None)
    arc_owner: dict[tuple[int, Hashable], int] = {}
    edge_half: dict[tuple[int, int], int] = {}  # (edge, half) -> tree
    for ti, t in enumerate(st.trees):
        for a in t.values():
            arc_owner[(a.edge, a.tail)] = ti
            if half[ti] < 2:
                edge_half[(a.edge, half[ti])] = ti

    def candidates(ti: int, w) -> list[Arc]:
        pref = [a for _, a in sorted(st.prefs[ti].get(w, []), key=lambda p: p[0]) if a.edge in g.edges]
        # free incoming edge first (appendix phase two), then anything else
        rest = sorted(g.arcs_out(w), key=lambda a: (
            (a.edge, a.head) in arc_owner and (a.edge, half[ti]) in edge_half,
            a.edge,
        ))
        seen, out = set(), []
        for a in pref + rest:
            if a not in seen:
                seen.add(a)
                out.append(a)
        return out

    def acyclic_from(ti: int, w) -> bool:
        t = st.trees[ti]
        v = w
        steps = 0
        while v != 0:
            a = t.get(v)
            if a is None:
                return True  # reaches an undecided new vertex
            v = a.head
            steps += 1
            if v == w or steps > len(st.vertices):
                return False
        return True

    variables = [(ti, w) for ti in range(k) for w in new]

    def ok(ti: int, a: Arc) -> bool:
        if (a.edge, a.tail) in arc_owner:
            return False
        if half[ti] < 2 and edge_half.get((a.edge, half[ti]), ti) != ti:
            return False
        return True

    budget = [200_000]

    def solve(idx: int) -> bool:
        if idx == len(variables):
            return True
        ti, w = variables[idx]
        for a in candidates(ti, w):
            budget[0] -= 1
            if budget[0] < 0:
                return False
            if not ok(ti, a):
                continue
            st.trees[ti][w] = a
            if acyclic_from(ti, w):
                arc_owner[(a.edge, a.tail)] = ti
                added_half = half[ti] < 2 and (a.edge, half[ti]) not in edge_half
                if added_half:
                    edge_half[(a.edge, half[ti])] = ti
                if solve(idx + 1):
                    return True
                del arc_owner[(a.edge, a.tail)]
                if added_half:
                    del edge_half[(a.edge, half[ti])]
            del st.trees[ti][w]
        return False

    if not solve(0):
        raise MaderError("no ADBED completion found at the new vertices")


def apply_op(st: _State, op: MaderOp, check: bool = True) -> None:
    k = st.k
    lo, hi = k // 2, (k + 1) // 2
    st.prefs = [dict() for _ in range(k)]
    if op.kind == "add-edge":
        if op.endpoints is None:
            raise MaderError("add-edge needs endpoints")
        u, v = op.endpoints
        if u == v or u not in st.vertices or v not in st.vertices:
            raise MaderError("add-edge endpoints must be two existing vertices")
        st.edges[st.next_id] = (u, v)
        st.next_id += 1
    elif op.kind == "pinch-ceil":
        if len(op.edges) != hi:
            raise MaderError(f"pinch-ceil pinches exactly {hi} edges")
        z = st.next_vertex
        st.next_vertex += 1
        _pinch(st, op.edges, z, set())
        _complete(st, [z])
    elif op.kind == "pinch-floor-plus-edge":
        if len(op.edges) != lo or lo == 0:
            raise MaderError(f"pinch-floor-plus-edge pinches exactly {lo} edges")
        if op.attach is None or op.attach not in st.vertices:
            raise MaderError("pinch-floor-plus-edge needs an existing attachment vertex")
        z = st.next_vertex
        st.next_vertex += 1
        _pinch(st, op.edges, z, set())
        st.edges[st.next_id] = (z, op.attach)
        st.next_id += 1
        _complete(st, [z])
    elif op.kind == "double-pinch-plus-edge":
        if len(op.edges) != lo or len(op.edges2) != lo or lo == 0:
            raise MaderError(f"double-pinch-plus-edge pinches exactly {lo} edges twice")
        z1 = st.next_vertex
        z2 = st.next_vertex + 1
        st.next_vertex += 2
        _pinch(st, op.edges, z1, set())
        for e in op.edges2:
            if e not in st.edges:
                raise MaderError(f"second pinch edge {e} does not exist")
        if all(z1 in st.edges[e] for e in op.edges2):
            raise MaderError("second pinch edges may not all be incident to the first new vertex")
        _pinch(st, op.edges2, z2, {z1})
        st.edges[st.next_id] = (z1, z2)
        st.next_id += 1
        _complete(st, [z1, z2])
    else:
        raise MaderError(f"unknown operation kind {op.kind!r}")
    if check:
        lam = edge_connectivity(st.graph())
        if lam < k:
            raise MaderError(f"operation {op.kind} leaves edge connectivity {lam} < {k}")


def mader_build(initial_k: int, ops: Sequence[MaderOp], check: bool = True) -> tuple[MultiGraph, ArborescenceSet]:
    """Graph and ADBED arborescences after applying ``ops`` to the base graph.

    Even k follows the appendix construction; odd k uses the same recipe and
    leaves the last tree outside both halves.
    """
    if initial_k < 2:
        raise MaderError("k must be at least 2")
    st = base_state(initial_k)
    for op in ops:
        apply_op(st, op, check)
    g = st.graph()
    T = make_set(0, [list(t.values()) for t in st.trees], adbed=True)
    if check:
        problems = validate_arborescence_set(g, T)
        if problems:
            raise MaderError("construction produced an invalid set: " + "; ".join(problems[:3]))
    return g, T


def random_ops(k: int, n_ops: int, rng: random.Random, max_vertices: int = 12) -> list[MaderOp]:
    """A random well-formed operation sequence, grown against the evolving graph."""
    st = base_state(k)
    ops: list[MaderOp] = []
    lo, hi = k // 2, (k + 1) // 2
    while len(ops) < n_ops:
        n = len(st.vertices)
        kinds = ["add-edge"]
        if n < max_vertices:
            kinds += ["pinch-ceil"] * 3
            if lo > 0:
                kinds += ["pinch-floor-plus-edge"]
        if n + 1 < max_vertices and lo > 0:
            kinds += ["double-pinch-plus-edge"]
        kind = rng.choice(kinds)
        edges = sorted(st.edges)
        if kind == "add-edge":
            u, v = rng.sample(st.vertices, 2)
            op = MaderOp(kind, endpoints=(u, v))
        elif kind == "pinch-ceil":
            op = MaderOp(kind, tuple(rng.sample(edges, hi)))
        elif kind == "pinch-floor-plus-edge":
            op = MaderOp(kind, tuple(rng.sample(edges, lo)), attach=rng.choice(st.vertices))
        else:
            first = tuple(rng.sample(edges, lo))
            # second pinch refers to edge ids after the first pinch
            probe = _State(st.k, list(st.vertices), dict(st.edges), [dict(t) for t in st.trees],
                           st.next_id, st.next_vertex)
            probe.prefs = [dict() for _ in range(k)]
            _pinch(probe, first, probe.next_vertex, set())
            z1 = probe.next_vertex
            later = sorted(probe.edges)
            for _ in range(50):
                second = tuple(rng.sample(later, lo))
                if not all(z1 in probe.edges[e] for e in second):
                    break
            else:
                continue
            op = MaderOp(kind, first, second)
        try:
            trial = _State(st.k, list(st.vertices), dict(st.edges), [dict(t) for t in st.trees],
                           st.next_id, st.next_vertex)
            apply_op(trial, op)
        except MaderError:
            continue
        st = trial
        ops.append(op)
    return ops


def random_mader_graph(k: int, n_ops: int, seed: int, max_vertices: int = 12):
    rng = random.Random(seed)
    ops = random_ops(k, n_ops, rng, max_vertices)
    g, T = mader_build(k, ops)
    return g, T, ops
