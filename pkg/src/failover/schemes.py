"""Local forwarding decisions.

Every scheme exposes ``decide(view, rng=None) -> Action``.  A decision only
looks at the current vertex, the arc the packet arrived on, the header bits
and the liveness of edges incident to the vertex.  Which arborescence a
packet is on is always derived from its incoming arc.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Hashable, Mapping, NamedTuple, Sequence

from .graph import Arc, ArborescenceSet, MultiGraph, vkey


class Header(NamedTuple):
    rm: int = 0
    h: int = 0

    def bits(self) -> int:
        """Bits needed to encode this header (RM takes 2, H takes 1)."""
        if not (0 <= self.rm <= 2 and self.h in (0, 1)):
            return 99
        return 3


NO_HEADER = Header()


@dataclass(frozen=True)
class LocalView:
    vertex: Hashable
    incoming: Arc | None
    failed: frozenset[int]
    header: Header = NO_HEADER

    def active(self, e: int) -> bool:
        return e not in self.failed


@dataclass(frozen=True)
class Action:
    """Forwarding decision.

    ``kind`` is one of ``forward``, ``duplicate``, ``drop``, ``deliver``.
    ``out`` lists (arc, header) pairs; a forward has exactly one.
    ``hits`` lists (tree, failed edge) pairs met while deciding.
    """

    kind: str
    out: tuple[tuple[Arc, Header], ...] = ()
    hits: tuple[tuple[int, int], ...] = ()
    copies: int = 0
    dropped: int = 0
    origin_tree: int | None = None


DELIVER = Action("deliver")


class ContractError(RuntimeError):
    """A scheme was asked to decide in a state its contract excludes."""


def _forward(arc: Arc, hits=(), header: Header = NO_HEADER, origin_tree=None) -> Action:
    return Action("forward", ((arc, header),), tuple(hits), origin_tree=origin_tree)


def adbed_order(k: int) -> list[int]:
    """Circular order alternating the two ADBED halves: 0, h, 1, h+1, ..."""
    h = k // 2
    order: list[int] = []
    for i in range(h):
        order += [i, h + i]
    order += list(range(2 * h, k))
    return order


class Scheme:
    name = "scheme"
    randomized = False
    T: ArborescenceSet | None = None

    def decide(self, view: LocalView, rng: random.Random | None = None) -> Action:
        raise NotImplementedError

    def tree_rank(self, i: int) -> int:
        return i

    def to_config(self) -> dict:
        return {"kind": self.name}


# ---------------------------------------------------------------------------
# circular arborescence routing


class Circular(Scheme):
    """Route on the incoming arc's arborescence; on failure try the next ones.

    ``start`` maps a vertex to the tree used by packets it originates
    (default: the first tree of ``ordering``).  Arriving over one of the
    ``reset_arcs`` restarts the packet as if originated at the head vertex.
    """

    name = "circular"

    def __init__(
        self,
        T: ArborescenceSet,
        ordering: Sequence[int] | None = None,
        start: Mapping[Hashable, int] | None = None,
        reset_arcs: set[tuple[int, Hashable]] | frozenset = frozenset(),
    ):
        self.T = T
        self.ordering = list(range(T.k)) if ordering is None else list(ordering)
        if sorted(self.ordering) != list(range(T.k)):
            raise ValueError("ordering must be a permutation of the tree indices")
        self._rank = {t: r for r, t in enumerate(self.ordering)}
        self.start = dict(start or {})
        self.reset_arcs = frozenset(reset_arcs)
        self.d = T.root

    def tree_rank(self, i: int) -> int:
        return self._rank[i]

    def start_tree(self, v) -> int:
        return self.start.get(v, self.ordering[0])

    def current_tree(self, view: LocalView) -> tuple[int, bool]:
        inc = view.incoming
        if inc is None or (inc.edge, inc.tail) in self.reset_arcs:
            return self.start_tree(view.vertex), True
        i = self.T.tree_of(inc)
        if i is None:
            raise ContractError(f"incoming arc {tuple(inc)} is in no arborescence")
        return i, False

    def circulate(self, view: LocalView, cur: int, origin: bool) -> Action:
        v = view.vertex
        k = len(self.ordering)
        pos = self._rank[cur]
        hits = []
        for step in range(k):
            t = self.ordering[(pos + step) % k]
            a = self.T.members[t].out[v]
            if a.edge not in view.failed:
                return _forward(a, hits, origin_tree=cur if origin else None)
            hits.append((t, a.edge))
        return Action("drop", hits=tuple(hits), origin_tree=cur if origin else None)

    def decide(self, view: LocalView, rng=None) -> Action:
        if view.vertex == self.d:
            return DELIVER
        cur, origin = self.current_tree(view)
        return self.circulate(view, cur, origin)

    def to_config(self) -> dict:
        return {"kind": self.name, "ordering": self.ordering}


class PlusOne(Circular):
    """Ride the last tree first; after its first failure use circular routing
    over the remaining trees, starting at the tree holding the reversed arc.

    The inner order defaults to the alternating ADBED order when the set is an
    ADBED list of odd size, which makes the inner scheme (k-2)-resilient.
    """

    name = "plus-one"

    def __init__(self, T: ArborescenceSet, inner: Sequence[int] | None = None):
        if T.k < 2:
            raise ValueError("plus-one routing needs at least two arborescences")
        if inner is None:
            # for odd k the first k-1 members of an ADBED list are ADBED themselves
            inner = adbed_order(T.k - 1) if T.adbed and T.k % 2 == 1 else list(range(T.k - 1))
        inner = list(inner)
        if sorted(inner) != list(range(T.k - 1)):
            raise ValueError("inner ordering must permute trees 0..k-2")
        super().__init__(T, inner + [T.k - 1])
        self.inner = inner
        self.outer = T.k - 1
        self._inner_rank = {t: r for r, t in enumerate(inner)}

    def decide(self, view: LocalView, rng=None) -> Action:
        v = view.vertex
        if v == self.d:
            return DELIVER
        origin = view.incoming is None
        cur = self.outer if origin else self.T.tree_of(view.incoming)
        if cur is None:
            raise ContractError(f"incoming arc {tuple(view.incoming)} is in no arborescence")
        hits: list[tuple[int, int]] = []
        if cur == self.outer:
            a = self.T.members[cur].out[v]
            if a.edge not in view.failed:
                return _forward(a, origin_tree=cur if origin else None)
            hits.append((cur, a.edge))
            back = self.T.tree_of(a.reversed())
            cur = back if back is not None and back != self.outer else self.inner[0]
        n = len(self.inner)
        pos = self._inner_rank[cur]
        for step in range(n):
            t = self.inner[(pos + step) % n]
            a = self.T.members[t].out[v]
            if a.edge not in view.failed:
                return _forward(a, hits, origin_tree=self.outer if origin else None)
            hits.append((t, a.edge))
        return Action("drop", hits=tuple(hits), origin_tree=self.outer if origin else None)

    def to_config(self) -> dict:
        return {"kind": self.name, "inner": self.inner}


# ---------------------------------------------------------------------------
# per-port tables


class PortTable(Scheme):
    """Generic table routing: (vertex, incoming edge or None) -> preference list.

    The packet leaves on the first active edge of the list.  Used for
    vertex-circular routing and for the hand-built tables of the
    impossibility checks.
    """

    name = "port-table"

    def __init__(self, g: MultiGraph, table: Mapping[tuple[Hashable, int | None], Sequence[int]]):
        self.g = g
        self.table = {key: tuple(v) for key, v in table.items()}
        self.d = g.destination

    def decide(self, view: LocalView, rng=None) -> Action:
        v = view.vertex
        if v == self.d:
            return DELIVER
        key = (v, None if view.incoming is None else view.incoming.edge)
        prefs = self.table.get(key)
        if prefs is None:
            raise ContractError(f"no table entry for {key}")
        for e in prefs:
            if e not in view.failed:
                return _forward(self.g.arc(e, v))
        return Action("drop")


class VertexCircular(PortTable):
    """Cyclic port order per vertex; a packet from e_i leaves on the first
    active edge among e_{i+1}, e_{i+2}, ... (e_i itself last)."""

    name = "vertex-circular"

    def __init__(self, g: MultiGraph, orders: Mapping[Hashable, Sequence[int]]):
        table: dict[tuple[Hashable, int | None], list[int]] = {}
        for v, order in orders.items():
            order = list(order)
            if sorted(order) != sorted(g.incident(v)):
                raise ValueError(f"port order at {v!r} is not a permutation of its edges")
            table[(v, None)] = order
            n = len(order)
            for i, e in enumerate(order):
                table[(v, e)] = [order[(i + j) % n] for j in range(1, n + 1)]
        super().__init__(g, table)
        self.orders = {v: list(o) for v, o in orders.items()}

    def to_config(self) -> dict:
        return {"kind": self.name, "orders": [[v, o] for v, o in sorted(self.orders.items(), key=lambda x: vkey(x[0]))]}


# ---------------------------------------------------------------------------
# randomized schemes


class BouncedRand(Scheme):
    """Random start tree; on a failed out-arc re-sample with probability q,
    otherwise bounce onto the tree holding the reversed arc."""

    name = "bounced-rand"
    randomized = True

    def __init__(self, T: ArborescenceSet, q: float):
        if not 0.0 < q < 1.0:
            raise ValueError("q must lie strictly between 0 and 1")
        self.T = T
        self.q = q
        self.d = T.root

    def _resample(self, view: LocalView, cur: int, rng: random.Random) -> int:
        return rng.randrange(self.T.k)

    def decide(self, view: LocalView, rng: random.Random | None = None) -> Action:
        v = view.vertex
        if v == self.d:
            return DELIVER
        if rng is None:
            raise ContractError("randomized scheme needs an rng")
        members = self.T.members
        if all(members[t].out[v].edge in view.failed for t in range(self.T.k)):
            return Action("drop", hits=tuple((t, members[t].out[v].edge) for t in range(self.T.k)))
        origin = view.incoming is None
        if origin:
            cur = rng.randrange(self.T.k)
            first = cur
        else:
            cur = self.T.tree_of(view.incoming)
            if cur is None:
                raise ContractError(f"incoming arc {tuple(view.incoming)} is in no arborescence")
            first = None
        hits = []
        while True:
            a = members[cur].out[v]
            if a.edge not in view.failed:
                return _forward(a, hits, origin_tree=first)
            hits.append((cur, a.edge))
            cur = self.after_failure(view, cur, a, rng)

    def after_failure(self, view: LocalView, cur: int, a: Arc, rng: random.Random) -> int:
        if rng.random() < self.q:
            return self._resample(view, cur, rng)
        back = self.T.tree_of(a.reversed())
        if back is None:
            return self._resample(view, cur, rng)
        return back

    def branches(self, view: LocalView) -> list[Arc]:
        """Every out-arc chosen with positive probability."""
        v = view.vertex
        members = self.T.members
        if view.incoming is None:
            starts = range(self.T.k)
        else:
            starts = [self.T.tree_of(view.incoming)]
        out: list[Arc] = []
        for s in starts:
            a = members[s].out[v]
            if a.edge not in view.failed:
                out.append(a)
            else:
                # re-sampling has positive probability of landing anywhere
                out.extend(
                    members[t].out[v] for t in range(self.T.k) if members[t].out[v].edge not in view.failed
                )
        return list(dict.fromkeys(out))

    def to_config(self) -> dict:
        return {"kind": self.name, "q": self.q}


class PureResample(BouncedRand):
    """Never bounce: after a failure pick uniformly among trees whose out-arc
    at the vertex is alive."""

    name = "pure-resample"

    def __init__(self, T: ArborescenceSet):
        self.T = T
        self.q = 1.0
        self.d = T.root

    def after_failure(self, view: LocalView, cur: int, a: Arc, rng: random.Random) -> int:
        v = view.vertex
        alive = [t for t in range(self.T.k) if self.T.members[t].out[v].edge not in view.failed]
        return alive[rng.randrange(len(alive))]

    def to_config(self) -> dict:
        return {"kind": self.name}


# ---------------------------------------------------------------------------
# header rewriting


def dfs_traversal(t, children_order=None) -> list[Arc]:
    """Depth-first walk of an arborescence from its root, ignoring direction.

    Each tree edge is traversed twice; children are visited in ascending
    vertex id order.
    """
    kids = t.children()
    walk: list[Arc] = []
    stack = [(t.root, iter(kids.get(t.root, ())))]
    while stack:
        v, it = stack[-1]
        a = next(it, None)
        if a is None:
            stack.pop()
            if stack:
                up = t.out[v]
                walk.append(up)
            continue
        walk.append(a.reversed())
        stack.append((a.tail, iter(kids.get(a.tail, ()))))
    return walk


def inverse_traversal(walk: Sequence[Arc]) -> list[Arc]:
    return [a.reversed() for a in reversed(walk)]


class DFAlgo(Scheme):
    """Three-bit header rewriting: circular progression, bounce into a DFS
    walk of the sharing tree, backtrack on a second failure."""

    name = "df-algo"

    def __init__(self, g: MultiGraph, T: ArborescenceSet):
        self.g = g
        self.T = T
        self.d = T.root
        self.walks = [dfs_traversal(t) for t in T.members]
        self._next: list[dict[tuple, Arc]] = []  # RM=1 successor
        self._prev: list[dict[tuple, Arc]] = []  # RM=2 successor
        for w in self.walks:
            nxt = {tuple(w[i]): w[i + 1] for i in range(len(w) - 1)}
            inv = inverse_traversal(w)
            prv = {tuple(inv[i]): inv[i + 1] for i in range(len(inv) - 1)}
            self._next.append(nxt)
            self._prev.append(prv)

    # the appendix procedures -------------------------------------------
    def get_tree_indices(self, e: int) -> tuple[int, int]:
        owners = self.T.trees_of_edge(self.g, e)
        if not owners:
            raise ContractError(f"edge {e} lies in no arborescence")
        return min(owners), max(owners)

    def get_tree_index_given_h(self, h: int, e: int) -> int:
        lo, hi = self.get_tree_indices(e)
        return hi if h == 1 else lo

    def get_h_given_tree_index(self, i: int, e: int) -> int:
        lo, hi = self.get_tree_indices(e)
        return 1 if (i == hi and lo != hi) else 0

    def get_tree_index(self, rm: int, h: int, arc: Arc) -> int:
        if rm == 0:
            i = self.T.tree_of(arc)
            if i is None:
                raise ContractError(f"arc {tuple(arc)} is in no arborescence")
            return i
        return self.get_tree_index_given_h(h, arc.edge)

    def get_next_arc(self, rm: int, arc: Arc, i: int) -> Arc:
        if rm == 0:
            return self.T.members[i].out[arc.head]
        table = self._next[i] if rm == 1 else self._prev[i]
        nxt = table.get(tuple(arc))
        if nxt is None:
            raise ContractError(f"arc {tuple(arc)} has no successor in walk {rm} of T{i}")
        return nxt

    # decision ------------------------------------------------------------
    def _first_arc(self, v, i: int) -> tuple[Arc, Header]:
        a = self.T.members[i].out[v]
        return a, Header(0, self.get_h_given_tree_index(i, a.edge))

    def decide(self, view: LocalView, rng=None) -> Action:
        v = view.vertex
        if v == self.d:
            return DELIVER
        failed = view.failed
        origin = view.incoming is None
        if origin:
            arc, hdr = self._first_arc(v, 0)
        else:
            rm, h = view.header
            i = self.get_tree_index(rm, h, view.incoming)
            arc = self.get_next_arc(rm, view.incoming, i)
            hdr = Header(rm, self.get_h_given_tree_index(i, arc.edge))
        hits = []
        # resolve failures locally; every rewrite yields another arc out of v
        for _ in range(6 * self.T.k + 6):
            if arc.edge not in failed:
                return _forward(arc, hits, hdr, origin_tree=0 if origin else None)
            rm, h = hdr
            i = self.get_tree_index(rm, h, arc)
            hits.append((i, arc.edge))
            if rm == 0:
                j = self.get_tree_index_given_h(1 - h, arc.edge)
                if j != i:
                    nxt = self.get_next_arc(1, arc.reversed(), j)
                    arc, hdr = nxt, Header(1, self.get_h_given_tree_index(j, nxt.edge))
                else:
                    hdr = Header(2, 0)
            elif rm == 1:
                nxt = self.get_next_arc(2, arc.reversed(), i)
                arc, hdr = nxt, Header(2, self.get_h_given_tree_index(i, nxt.edge))
            else:
                j = self.get_tree_index(0, 0, arc)
                arc, hdr = self._first_arc(v, (j + 1) % self.T.k)
        return Action("drop", hits=tuple(hits))


# ---------------------------------------------------------------------------
# duplication


class Duplication(Scheme):
    """Packet duplication over an ADBED list.

    Even variant (k = 2s): a failure on T_i, i < s, advances the packet to
    T_{i+1} and bounces one copy onto the reversed arc's tree; a failure on
    T_s sends the packet to T_{s+1} and s-1 copies to T_{s+2}..T_{2s};
    failures on later trees destroy the copy.  The odd variant (2k+1 trees)
    bounces for i <= k, fans out k packets to T_{k+2}..T_{2k+1} at i = k+1
    and destroys beyond.  Indices here are 1-based as in the description;
    the code is 0-based.
    """

    name = "dup"

    def __init__(self, T: ArborescenceSet, odd: bool = False):
        self.T = T
        self.d = T.root
        self.odd = odd
        k = T.k
        if odd:
            if k % 2 != 1 or k < 3:
                raise ValueError("odd duplication needs 2k+1 >= 3 trees")
            self.s = (k - 1) // 2
        else:
            if k % 2 != 0 or k < 2:
                raise ValueError("even duplication needs 2s >= 2 trees")
            self.s = k // 2
        self.name = "dup-odd" if odd else "dup-even"

    def _route(self, v, i: int, failed, out: list, hits: list, counter: list, depth: int = 0) -> None:
        a = self.T.members[i].out[v]
        if a.edge not in failed:
            out.append((a, NO_HEADER))
            return
        hits.append((i, a.edge))
        if depth > 4 * self.T.k:
            counter[1] += 1
            return
        s = self.s
        bounce_limit, fan = (s - 1, s) if self.odd else (s - 2, s - 1)
        if i <= bounce_limit:
            self._route(v, i + 1, failed, out, hits, counter, depth + 1)
            back = self.T.tree_of(a.reversed())
            if back is not None:
                counter[0] += 1
                self._route(v, back, failed, out, hits, counter, depth + 1)
        elif i == fan:
            targets = list(range(fan + 1, self.T.k))
            counter[0] += len(targets) - 1
            for t in targets:
                self._route(v, t, failed, out, hits, counter, depth + 1)
        else:
            counter[1] += 1

    def decide(self, view: LocalView, rng=None) -> Action:
        v = view.vertex
        if v == self.d:
            return DELIVER
        if view.incoming is None:
            cur = 0
        else:
            cur = self.T.tree_of(view.incoming)
            if cur is None:
                raise ContractError(f"incoming arc {tuple(view.incoming)} is in no arborescence")
        out: list = []
        hits: list = []
        counter = [0, 0]
        self._route(v, cur, view.failed, out, hits, counter)
        if not out:
            return Action("drop", hits=tuple(hits), copies=counter[0], dropped=counter[1])
        kind = "forward" if len(out) == 1 and counter[0] == 0 else "duplicate"
        return Action(kind, tuple(out), tuple(hits), copies=counter[0], dropped=counter[1],
                      origin_tree=0 if view.incoming is None else None)
