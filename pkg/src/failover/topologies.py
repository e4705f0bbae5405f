"""Topology generators with their hand-made arborescence sets and adversarial gadgets."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Hashable, Iterator, Mapping, Sequence

from .graph import Arc, ArborescenceSet, MultiGraph, make_set, vkey

KINDS = (
    "clique",
    "complete-bipartite",
    "generalized-hypercube",
    "clos",
    "torus-grid",
    "never-bounce-gadget",
    "cube-gadget",
    "toy-gadget",
)


class UnsupportedTopology(ValueError):
    """Parameters outside what the constructor supports."""


@dataclass(frozen=True)
class TopologySpec:
    kind: str
    params: Mapping[str, int] = field(default_factory=dict)

    def get(self, name: str, default=None):
        return self.params.get(name, default)

    def to_json(self) -> dict:
        return {"kind": self.kind, **dict(self.params)}

    @classmethod
    def from_json(cls, data: Mapping) -> "TopologySpec":
        data = dict(data)
        return cls(data.pop("kind"), data)


@dataclass
class Topology:
    """A built topology.  Unpacks as ``g, T = build_topology(spec)``."""

    graph: MultiGraph
    arbs: ArborescenceSet
    reset_arcs: frozenset = frozenset()  # (edge, tail) pairs that restart routing
    promised_r: int | None = None
    extras: dict = field(default_factory=dict)

    def __iter__(self) -> Iterator:
        yield self.graph
        yield self.arbs


class _Builder:
    """Simple-graph helper: vertices, one edge id per unordered pair, arcs by endpoints."""

    def __init__(self, d):
        self.d = d
        self.vertices: list = []
        self.edges: dict[int, tuple] = {}
        self.by_pair: dict[frozenset, int] = {}

    def vertex(self, v) -> None:
        if v not in self.by_pair and v not in self.vertices:
            self.vertices.append(v)

    def edge(self, u, v) -> int:
        key = frozenset((u, v))
        if key not in self.by_pair:
            e = len(self.edges)
            self.edges[e] = (u, v)
            self.by_pair[key] = e
        return self.by_pair[key]

    def arc(self, u, v) -> Arc:
        return Arc(self.by_pair[frozenset((u, v))], u, v)

    def graph(self) -> MultiGraph:
        return MultiGraph(self.vertices, self.edges, self.d)

    def arbs(self, trees: Sequence[Mapping], adbed: bool = False) -> ArborescenceSet:
        return make_set(self.d, [[self.arc(u, v) for u, v in t.items()] for t in trees], adbed)


# ---------------------------------------------------------------------------
# clique and complete bipartite


def clique(k: int) -> Topology:
    """K_{k+1} on d=0 and v_1..v_k; T_i = {(v_i,d)} + {(v_j,v_i) : j != i}."""
    if k < 1:
        raise UnsupportedTopology("clique needs k >= 1")
    b = _Builder(0)
    for v in range(k + 1):
        b.vertex(v)
    for u, v in itertools.combinations(range(k + 1), 2):
        b.edge(u, v)
    trees = []
    for i in range(1, k + 1):
        t = {i: 0}
        t.update({j: i for j in range(1, k + 1) if j != i})
        trees.append(t)
    return Topology(b.graph(), b.arbs(trees), promised_r=k - 1)


def _bipartite_trees(d, A: Sequence, B: Sequence) -> list[dict]:
    """Trees of the complete bipartite construction with d on side A.

    ``A`` lists the side-A vertices other than d.  With k = min(|A|+1, |B|)
    tree i sends b_i to d, every a to b_i and every other b to a_i.  When
    side A is the smaller one, a_k does not exist and tree k instead sends
    b_y to a_y (and spare b's straight to d).
    """
    k = min(len(A) + 1, len(B))
    trees = []
    for i in range(k):
        t = {B[i]: d}
        for a in A:
            t[a] = B[i]
        if i < len(A):
            for y, bv in enumerate(B):
                if y != i:
                    t[bv] = A[i]
        else:
            for y, bv in enumerate(B):
                if y == i:
                    continue
                t[bv] = A[y] if y < len(A) else d
        trees.append(t)
    return trees


def complete_bipartite(na: int, nb: int) -> Topology:
    """K_{na,nb}; d is a_0, vertices 0..na-1 on side A and na..na+nb-1 on side B."""
    if na < 1 or nb < 1:
        raise UnsupportedTopology("both sides need at least one vertex")
    b = _Builder(0)
    A = list(range(na))
    Bs = list(range(na, na + nb))
    for v in A + Bs:
        b.vertex(v)
    for u in A:
        for v in Bs:
            b.edge(u, v)
    trees = _bipartite_trees(0, A[1:], Bs)
    return Topology(b.graph(), b.arbs(trees), promised_r=len(trees) - 1)


# ---------------------------------------------------------------------------
# generalized hypercube


@dataclass
class _Layered:
    vertices: list
    trees: list[dict]
    resets: set


def _ghc(i: int, k: int) -> _Layered:
    if i == 1:
        verts = [(v,) for v in range(k + 1)]
        trees = []
        for j in range(1, k + 1):
            t = {(j,): (0,)}
            t.update({(m,): (j,) for m in range(1, k + 1) if m != j})
            trees.append(t)
        return _Layered(verts, trees, set())
    base = _ghc(i - 1, k)
    K = len(base.trees)
    d_b = (0,) * (i - 1)
    d = (0,) * i

    def lift(u, layer):
        return u + (layer,)

    H = _Layered([lift(u, 0) for u in base.vertices],
                 [{lift(u, 0): lift(v, 0) for u, v in t.items()} for t in base.trees],
                 {(lift(u, 0), lift(v, 0)) for u, v in base.resets})
    child_of_root = []
    for t in base.trees:
        kids = [u for u, v in t.items() if v == d_b]
        if len(kids) != 1:
            raise AssertionError("sub-structure tree must enter its root through one arc")
        child_of_root.append(kids[0])
    for L in range(1, k + 1):
        c = len(H.trees)
        l = L  # layers already present
        d1 = lift(d_b, L)
        n1 = [lift(u, L) for u in child_of_root]
        new_verts = [lift(u, L) for u in base.vertices]

        def down(v, m):
            return v[:-1] + (m,)

        trees: list[dict] = []
        for j in range(K - 1):
            t = dict(H.trees[j])
            t.update({lift(u, L): lift(v, L) for u, v in base.trees[j].items()})
            t[n1[j]] = down(n1[j], 0)
            t[d1] = n1[j]
            trees.append(t)
        for j in range(K - 1, K + l - 2):
            m = j - (K - 1) + 1
            t = dict(H.trees[j])
            t.update({v: down(v, m) for v in new_verts})
            trees.append(t)
        t = dict(H.trees[c - 1])
        special = set(n1[: K - 1]) | {d1}
        t.update({v: down(v, 0) for v in new_verts if v not in special})
        t.update({n1[j]: d1 for j in range(K - 1)})
        t[d1] = n1[K - 1]
        trees.append(t)
        last = {v: down(v, L) for v in H.vertices if v != d}
        last.update({lift(u, L): lift(v, L) for u, v in base.trees[K - 1].items()})
        last[d1] = d
        trees.append(last)
        resets = set(H.resets)
        resets |= {(lift(u, L), lift(v, L)) for u, v in base.resets}
        resets |= {(v, down(v, m)) for v in new_verts for m in range(L)}
        resets.discard((d1, d))
        H = _Layered(H.vertices + new_verts, trees, resets)
    return H


def generalized_hypercube(i: int, k: int) -> Topology:
    """The (i,k)-generalized hypercube: vertices {0..k}^i (named "x.y.z"),
    edges between tuples differing in one coordinate, d = "0.0...0".

    Connectivity is i*k.  Packets entering older layers from a newer one
    restart on the first arborescence (``reset_arcs``).
    """
    if i < 1 or k < 1:
        raise UnsupportedTopology("generalized hypercube needs i, k >= 1")
    lay = _ghc(i, k)

    def name(t: tuple) -> str:
        return ".".join(map(str, t))

    b = _Builder(name((0,) * i))
    for v in sorted(lay.vertices):
        b.vertex(name(v))
    for u in sorted(lay.vertices):
        for pos in range(i):
            for x in range(k + 1):
                if x != u[pos]:
                    b.edge(name(u), name(u[:pos] + (x,) + u[pos + 1:]))
    T = b.arbs([{name(u): name(v) for u, v in t.items()} for t in lay.trees])
    resets = frozenset((b.by_pair[frozenset((name(u), name(v)))], name(u)) for u, v in lay.resets)
    return Topology(b.graph(), T, resets, promised_r=len(lay.trees) - 1)


# ---------------------------------------------------------------------------
# Clos


def clos(layers: int, k: int, dest: Hashable | None = None) -> Topology:
    """A ``layers``-level Clos network: a spine of k switches with two pods,
    each pod a stack of ``layers - 1`` levels of k switches, consecutive
    levels (and spine-to-top-of-pod) joined as K_{k,k}.

    The network splits into K_{k,k} blocks forming a tree.  Each vertex is
    routed by its home block (the block nearest d that contains it) towards
    that block's local destination; crossing into the parent block restarts
    routing on the first arborescence.
    """
    if layers < 2 or k < 1:
        raise UnsupportedTopology("clos needs layers >= 2 and k >= 1")
    names: list[list[str]] = [[f"s{x}" for x in range(k)]]
    pods = {}
    for p in "AB":
        pods[p] = [[f"{p}{lv}.{x}" for x in range(k)] for lv in range(1, layers)]
    blocks: list[tuple[list, list]] = []
    for p in "AB":
        stack = [names[0]] + pods[p]
        for lv in range(len(stack) - 1):
            blocks.append((stack[lv], stack[lv + 1]))
    if dest is None:
        dest = pods["A"][-1][0]
    b = _Builder(dest)
    for v in names[0] + [v for p in "AB" for lv in pods[p] for v in lv]:
        b.vertex(v)
    for up, low in blocks:
        for u in up:
            for v in low:
                b.edge(u, v)
    g0 = b.graph()
    if dest not in g0:
        raise UnsupportedTopology(f"destination {dest!r} is not a vertex")
    dist = _bfs(g0, dest)
    # block tree: BFS over blocks from the block holding d
    order = sorted(range(len(blocks)), key=lambda x: min(dist[v] for v in blocks[x][0] + blocks[x][1]))
    home: dict = {}
    local: dict[int, Hashable] = {}
    trees: list[dict] = [dict() for _ in range(k)]
    for bi in order:
        up, low = blocks[bi]
        members = up + low
        mine = [v for v in members if v not in home and v != dest]
        for v in mine:
            home[v] = bi
        dl = dest if dest in members else min(members, key=lambda v: (dist[v], vkey(v)))
        local[bi] = dl
        side_a, side_b = (up, low) if dl in up else (low, up)
        A = [v for v in side_a if v != dl]
        sub = _bipartite_trees(dl, A, list(side_b))
        if len(sub) != k:
            raise AssertionError("block must carry k arborescences")
        for j, t in enumerate(sub):
            for u, v in t.items():
                if u in mine:
                    trees[j][u] = v
    T = b.arbs(trees)
    resets = set()
    for t in trees:
        for u, v in t.items():
            if v != dest and home.get(v) != home[u]:
                resets.add((b.by_pair[frozenset((u, v))], u))
    return Topology(g0, T, frozenset(resets), promised_r=k - 1,
                    extras={"blocks": len(blocks), "local_destinations": [local[x] for x in range(len(blocks))]})


def _bfs(g: MultiGraph, s) -> dict:
    dist = {s: 0}
    frontier = [s]
    while frontier:
        nxt = []
        for u in frontier:
            for v in g.neighbors(u):
                if v not in dist:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    return dist


# ---------------------------------------------------------------------------
# torus grid


def torus_hamiltonian_cycles(n: int, m: int, seed: int = 0, max_steps: int = 200_000) -> tuple[list, list]:
    """Two edge-disjoint Hamiltonian cycles of the n x m torus.

    Starts from the row/column 2-factorization and flips alternating unit
    faces (each flip keeps both colour classes 2-regular) while the total
    number of cycles does not grow, until each class is a single cycle.
    """
    if n < 3 or m < 3:
        raise UnsupportedTopology("torus grid needs n, m >= 3")
    rng = random.Random(seed)

    def h(r, c):
        return ("h", r % n, c % m)

    def v(r, c):
        return ("v", r % n, c % m)

    def ends(e):
        kind, r, c = e
        return ((r, c), (r, (c + 1) % m)) if kind == "h" else ((r, c), ((r + 1) % n, c))

    colour = {}
    for r in range(n):
        for c in range(m):
            colour[h(r, c)] = 0
            colour[v(r, c)] = 1

    def cycles(col: int) -> list[list]:
        adj: dict = {}
        for e, x in colour.items():
            if x == col:
                a, bb = ends(e)
                adj.setdefault(a, []).append(bb)
                adj.setdefault(bb, []).append(a)
        seen, out = set(), []
        for s in sorted(adj):
            if s in seen:
                continue
            cyc, prev, cur = [s], None, s
            seen.add(s)
            while True:
                nb = adj[cur]
                nxt = nb[0] if nb[0] != prev or (len(nb) > 1 and nb[0] == nb[1]) else nb[1]
                if nxt == s:
                    break
                seen.add(nxt)
                cyc.append(nxt)
                prev, cur = cur, nxt
            out.append(cyc)
        return out

    def score() -> int:
        return len(cycles(0)) + len(cycles(1))

    cur = score()
    faces = [(r, c) for r in range(n) for c in range(m)]
    for _ in range(max_steps):
        if cur == 2:
            break
        r, c = faces[rng.randrange(len(faces))]
        es = (h(r, c), v(r, c + 1), h(r + 1, c), v(r, c))
        x = [colour[e] for e in es]
        if not (x[0] == x[2] and x[1] == x[3] and x[0] != x[1]):
            continue
        for e in es:
            colour[e] ^= 1
        new = score()
        if new <= cur or rng.random() < 0.05:
            cur = new
        else:
            for e in es:
                colour[e] ^= 1
    c0, c1 = cycles(0), cycles(1)
    if len(c0) != 1 or len(c1) != 1:
        raise UnsupportedTopology(f"no Hamiltonian decomposition found for {n}x{m} (seed {seed})")
    return c0[0], c1[0]


def torus_grid(n: int, m: int, seed: int = 0) -> Topology:
    """n x m torus with vertices "r.c" and d = "0.0"; each Hamiltonian cycle gives a forward and a
    reversed path arborescence, ordered C1A, C1B, C2A, C2B."""
    c1, c2 = torus_hamiltonian_cycles(n, m, seed)

    def name(rc: tuple) -> str:
        return f"{rc[0]}.{rc[1]}"

    c1, c2 = [name(v) for v in c1], [name(v) for v in c2]
    d = "0.0"
    b = _Builder(d)
    for r in range(n):
        for c in range(m):
            b.vertex(name((r, c)))
    for r in range(n):
        for c in range(m):
            b.edge(name((r, c)), name((r, (c + 1) % m)))
            b.edge(name((r, c)), name(((r + 1) % n, c)))
    trees = []
    for cyc in (c1, c2):
        i = cyc.index(d)
        seq = cyc[i:] + cyc[:i]
        fwd = {seq[x]: seq[x - 1] for x in range(1, len(seq))}
        rev = {seq[x]: seq[(x + 1) % len(seq)] for x in range(1, len(seq))}
        trees += [fwd, rev]
    return Topology(b.graph(), b.arbs(trees), promised_r=3, extras={"cycles": [c1, c2]})


# ---------------------------------------------------------------------------
# never-bounce gadget


def _next_prime(x: int) -> int:
    def prime(p):
        return p >= 2 and all(p % q for q in range(2, int(p**0.5) + 1))

    while not prime(x):
        x += 1
    return x


def never_bounce_gadget(k: int, N: int | None = None) -> Topology:
    """2k-edge-connected graph with 2k arborescences on which pure re-sampling
    needs many switches.

    Layers L1 = v1_0..v1_{2k-1} (adjacent to d) and L2 = v2_0..v2_{2k-1}.
    With ``N`` given, a middle layer W of p >= max(N, 2k+1) vertices (p prime)
    is walked completely before a packet re-enters L2.  Edges are exactly the
    support of the arborescences.
    """
    if k < 1:
        raise UnsupportedTopology("never-bounce gadget needs k >= 1")
    K = 2 * k
    b = _Builder("d")
    b.vertex("d")
    L1 = [f"v1_{j}" for j in range(K)]
    L2 = [f"v2_{j}" for j in range(K)]
    for v in L1 + L2:
        b.vertex(v)
    p = None
    W: list[str] = []
    if N is not None:
        p = _next_prime(max(N, K + 1))
        W = [f"w{a}" for a in range(p)]
        for w in W:
            b.vertex(w)
    trees: list[dict] = [dict() for _ in range(K)]
    for i in range(k):
        lo, hi = 2 * i, 2 * i + 1
        trees[hi].update({L2[hi]: L2[lo], L2[lo]: L1[lo], L1[lo]: L1[hi], L1[hi]: "d"})
        trees[lo].update({L2[lo]: L2[hi], L2[hi]: L1[hi], L1[hi]: L1[lo], L1[lo]: "d"})
        for t, hub, mult in ((lo, L2[lo], 2 * i + 1), (hi, L2[hi], 2 * i + 2)):
            for j in range(K):
                if j in (lo, hi):
                    continue
                trees[t][L2[j]] = hub
                if p is None:
                    trees[t][L1[j]] = hub
                else:
                    trees[t][L1[j]] = W[(mult * (p - 1)) % p]
            if p is not None:
                trees[t][W[0]] = hub
    if p is not None:
        for i in range(K):
            for a in range(p - 1):
                trees[i][W[((i + 1) * (a + 1)) % p]] = W[((i + 1) * a) % p]
    for t in trees:
        for u, v in t.items():
            b.edge(u, v)
    T = b.arbs(trees)
    return Topology(b.graph(), T, promised_r=K - 1, extras={"p": p})


def never_bounce_failures(g: MultiGraph, k: int) -> frozenset[int]:
    """L2 pairs (0,1)..(2k-4,2k-3) and L1 pairs (0,1)..(2k-2,2k-1)."""
    out = set()
    for i in range(k - 1):
        out.update(g.edges_between(f"v2_{2 * i}", f"v2_{2 * i + 1}"))
    for i in range(k):
        out.update(g.edges_between(f"v1_{2 * i}", f"v1_{2 * i + 1}"))
    return frozenset(out)


# ---------------------------------------------------------------------------
# cube gadget and the doubled triangle


CUBE_EDGES = (
    ("d", "a"), ("d", "b"), ("d", "c"),
    ("o", "x"), ("o", "y"), ("o", "z"),
    ("a", "y"), ("a", "z"),
    ("b", "x"), ("b", "z"),
    ("c", "x"), ("c", "y"),
)

# clockwise successor of each neighbour in the planar drawing (o in the
# centre, ring x,b,z,a,y,c clockwise, d outside); listed from the neighbour
# an originated packet is sent to
CUBE_CLOCKWISE = {
    "o": ("y", "x", "z"),
    "x": ("b", "o", "c"),
    "y": ("c", "o", "a"),
    "z": ("o", "b", "a"),
    "a": ("y", "z", "d"),
    "b": ("d", "z", "x"),
    "c": ("d", "x", "y"),
}


def cube_graph() -> MultiGraph:
    verts = ["d", "a", "b", "c", "o", "x", "y", "z"]
    return MultiGraph(verts, dict(enumerate(CUBE_EDGES)), "d")


def cube_gadget() -> Topology:
    g = cube_graph()
    from .decompose import decompose_general

    return Topology(g, decompose_general(g, 3), promised_r=2)


def cube_port_orders(g: MultiGraph, clockwise: Mapping[str, bool]) -> dict[str, list[int]]:
    """Per-vertex cyclic port orders; ``clockwise[v]`` picks the orientation.

    The first port is the one used by originated packets; counterclockwise
    keeps that first port and reverses the cycle.
    """
    orders = {}
    for v, seq in CUBE_CLOCKWISE.items():
        seq = list(seq) if clockwise.get(v, True) else [seq[0]] + list(reversed(seq[1:]))
        orders[v] = [g.edges_between(v, u)[0] for u in seq]
    return orders


def toy_gadget() -> Topology:
    """Doubled triangle on a, b, d with arborescences Blue, Orange, Red, Green."""
    edges = {
        0: ("a", "d"),  # ad^F
        1: ("a", "d"),  # ad^A
        2: ("a", "b"),  # ab^F
        3: ("a", "b"),  # ab^A
        4: ("b", "d"),  # bd^F
        5: ("b", "d"),  # bd^A
    }
    g = MultiGraph(["d", "a", "b"], edges, "d")
    blue = [Arc(0, "a", "d"), Arc(3, "b", "a")]
    orange = [Arc(2, "a", "b"), Arc(5, "b", "d")]
    red = [Arc(3, "a", "b"), Arc(4, "b", "d")]
    green = [Arc(1, "a", "d"), Arc(2, "b", "a")]
    T = make_set("d", [blue, orange, red, green])
    return Topology(g, T, promised_r=None, extras={
        "colours": ["blue", "orange", "red", "green"],
        "failed_edges": {"ad_F": 0, "ad_A": 1, "ab_F": 2, "ab_A": 3, "bd_F": 4, "bd_A": 5},
    })


# ---------------------------------------------------------------------------
# subdivision


@dataclass(frozen=True)
class Subdivision:
    graph: MultiGraph
    paths: dict[int, tuple[int, int, int]]  # original edge -> (edge at u, middle, edge at v)
    intermediates: frozenset


def subdivide_three_map(g: MultiGraph) -> Subdivision:
    verts = list(g.vertices)
    edges: dict[int, tuple] = {}
    paths: dict[int, tuple[int, int, int]] = {}
    inter = []
    for e in sorted(g.edges):
        u, v = g.edges[e]
        m1, m2 = f"e{e}.1", f"e{e}.2"
        if m1 in g or m2 in g:
            raise UnsupportedTopology("intermediate vertex name clashes with an existing vertex")
        verts += [m1, m2]
        inter += [m1, m2]
        base = 3 * e
        edges[base] = (u, m1)
        edges[base + 1] = (m1, m2)
        edges[base + 2] = (m2, v)
        paths[e] = (base, base + 1, base + 2)
    return Subdivision(MultiGraph(verts, edges, g.destination), paths, frozenset(inter))


def subdivide_three(g: MultiGraph) -> MultiGraph:
    """Replace every edge {x,y} by a path x - e.1 - e.2 - y."""
    return subdivide_three_map(g).graph


# ---------------------------------------------------------------------------


def build_topology(spec: TopologySpec) -> Topology:
    kind = spec.kind
    try:
        if kind == "clique":
            return clique(int(spec.get("k", 4)))
        if kind == "complete-bipartite":
            return complete_bipartite(int(spec.get("a", 4)), int(spec.get("b", 4)))
        if kind == "generalized-hypercube":
            return generalized_hypercube(int(spec.get("i", 2)), int(spec.get("k", 1)))
        if kind == "clos":
            return clos(int(spec.get("layers", 2)), int(spec.get("k", 4)))
        if kind == "torus-grid":
            return torus_grid(int(spec.get("n", 4)), int(spec.get("m", 4)), int(spec.get("seed", 0)))
        if kind == "never-bounce-gadget":
            N = spec.get("N")
            return never_bounce_gadget(int(spec.get("k", 3)), None if N is None else int(N))
        if kind == "cube-gadget":
            return cube_gadget()
        if kind == "toy-gadget":
            return toy_gadget()
    except (TypeError, ValueError) as exc:
        if isinstance(exc, UnsupportedTopology):
            raise
        raise UnsupportedTopology(str(exc)) from exc
    raise UnsupportedTopology(f"unknown topology kind {kind!r}; expected one of {', '.join(KINDS)}")
