"""Flow-guided construction of k arc-disjoint d-rooted arborescences.

Arborescences are grown one at a time.  An arc ``v -> u`` (``u`` already
reaches ``d`` in the current tree) is accepted only if the residual digraph
still satisfies the cut conditions that guarantee the remaining trees can be
completed:

* every vertex keeps ``j - 1`` arc-disjoint paths to ``d`` avoiding the arcs
  of the trees built so far (``j`` trees still unfinished), and
* every vertex outside the current tree keeps ``j`` arc-disjoint paths into
  the current tree's vertex set.

With both conditions maintained a valid arc always exists, so the search
rarely backtracks; a budget still bounds it.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable

from .graph import Arc, ArborescenceSet, MultiGraph, edge_connectivity, make_set, vkey


class InfeasibleError(Exception):
    """The requested number of arborescences cannot exist."""


class BudgetError(Exception):
    """Search budget exhausted; ``partial`` holds the trees finished so far."""

    def __init__(self, msg: str, partial: list[list[Arc]]):
        super().__init__(msg)
        self.partial = partial


def _paths_to(
    g: MultiGraph, used: set[tuple[int, object]], source, sinks: set, need: int
) -> int:
    """Number of arc-disjoint source->sinks paths over unused arcs, capped at need."""
    if source in sinks:
        return need
    flow: set[tuple[int, object]] = set()  # arcs (edge, tail) carrying flow
    found = 0
    while found < need:
        prev: dict = {source: None}
        q = deque([source])
        hit = None
        while q and hit is None:
            x = q.popleft()
            for e in g.incident(x):
                y = g.other(e, x)
                # forward arc x->y
                if (e, x) not in used and (e, x) not in flow and y not in prev:
                    prev[y] = (e, x, True)
                    if y in sinks:
                        hit = y
                        break
                    q.append(y)
                # undo flow on y->x
                if (e, y) in flow and y not in prev:
                    prev[y] = (e, y, False)
                    q.append(y)
        if hit is None:
            break
        y = hit
        while prev[y] is not None:
            e, t, fwd = prev[y]
            if fwd:
                flow.add((e, t))
                y = t
            else:
                flow.discard((e, t))
                y = g.other(e, t)
        found += 1
    return found


def _feasible(g: MultiGraph, used: set, in_tree: set, remaining: int) -> bool:
    d = g.destination
    for v in g.vertices:
        if v == d:
            continue
        if remaining > 1 and _paths_to(g, used, v, {d}, remaining - 1) < remaining - 1:
            return False
        if v not in in_tree and _paths_to(g, used, v, in_tree, remaining) < remaining:
            return False
    return True


def decompose_general(g: MultiGraph, k: int, budget: int = 200_000) -> ArborescenceSet:
    if k < 1:
        raise ValueError("k must be positive")
    lam = edge_connectivity(g)
    if lam < k:
        raise InfeasibleError(f"edge connectivity {lam} < {k}")
    d = g.destination
    order = sorted(g.vertices, key=vkey)
    used: set[tuple[int, object]] = set()
    trees: list[list[Arc]] = []
    checks = 0
    for i in range(k):
        remaining = k - i
        in_tree = {d}
        arcs: list[Arc] = []
        # stack of candidate iterators for backtracking
        stack: list[Iterable[Arc]] = []

        def candidates() -> list[Arc]:
            res = []
            for v in order:
                if v in in_tree:
                    continue
                for e in g.incident(v):
                    u = g.other(e, v)
                    if u in in_tree and (e, v) not in used:
                        res.append(Arc(e, v, u))
            return res

        stack.append(iter(candidates()))
        while len(in_tree) < g.n:
            it = stack[-1]
            chosen = None
            for a in it:
                checks += 1
                if checks > budget:
                    raise BudgetError(f"budget of {budget} feasibility checks exhausted", trees)
                used.add((a.edge, a.tail))
                in_tree.add(a.tail)
                if _feasible(g, used, in_tree, remaining):
                    chosen = a
                    break
                used.discard((a.edge, a.tail))
                in_tree.discard(a.tail)
            if chosen is None:
                stack.pop()
                if not arcs:
                    raise InfeasibleError("no feasible arborescence extension")
                last = arcs.pop()
                used.discard((last.edge, last.tail))
                in_tree.discard(last.tail)
                continue
            arcs.append(chosen)
            stack.append(iter(candidates()))
        trees.append(arcs)
    return make_set(d, trees)
