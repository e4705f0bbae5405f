"""Packet-level execution of a scheme under a fixed failure set."""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable

from .graph import Arc, MultiGraph
from .schemes import Action, LocalView, NO_HEADER, Scheme

RANDOM_BUDGET = 100_000


class SchemeViolation(RuntimeError):
    """A scheme forwarded on a failed or non-incident edge."""


@dataclass
class Trace:
    outcome: str  # delivered | loop | dropped | budget-exceeded
    hops: int = 0
    switches: int = 0
    copies: int = 0
    witnessed: int = 0  # distinct failed edges met
    max_header_bits: int = 0
    audit_ok: bool = True  # every block on rank-i tree saw >= i+1 failures
    steps: list[dict] = field(default_factory=list)

    @property
    def delivered(self) -> bool:
        return self.outcome == "delivered"

    def summary(self) -> dict:
        return {"outcome": self.outcome, "hops": self.hops, "switches": self.switches, "copies": self.copies}


def deterministic_budget(g: MultiGraph, k: int) -> int:
    return 4 * g.n * max(k, 1) * 3 * 2


def _tree(scheme: Scheme, arc: Arc | None):
    if arc is None or scheme.T is None:
        return None
    return scheme.T.tree_of(arc)


def _check_forward(g: MultiGraph, v, arc: Arc, failed: frozenset[int]) -> None:
    if arc.tail != v or arc.edge not in g.edges or arc.edge in failed or g.other(arc.edge, v) != arc.head:
        raise SchemeViolation(f"illegal forward {tuple(arc)} at {v!r}")


def _step_record(v, incoming, action: Action, header) -> dict:
    return {
        "vertex": v,
        "incoming": None if incoming is None else incoming.to_json(),
        "action": action.kind,
        "out": [a.to_json() for a, _ in action.out],
        "header": list(header),
    }


def run_deterministic(
    g: MultiGraph,
    scheme: Scheme,
    failed: Iterable[int],
    source: Hashable,
    budget: int | None = None,
    record: bool = False,
    rng: random.Random | None = None,
) -> Trace:
    """Follow one packet.  With ``rng`` given this also drives randomized
    schemes, in which case repeated states are not treated as loops."""
    failed = frozenset(failed)
    T = scheme.T
    k = T.k if T is not None else 1
    randomized = scheme.randomized
    if budget is None:
        budget = RANDOM_BUDGET if randomized else deterministic_budget(g, k)
    trace = Trace("delivered")
    v, incoming, header = source, None, NO_HEADER
    seen: set = set()
    witnessed: set[int] = set()
    while True:
        if v == g.destination:
            trace.outcome = "delivered"
            break
        if not randomized:
            state = (v, incoming, header)
            if state in seen:
                trace.outcome = "loop"
                break
            seen.add(state)
        action = scheme.decide(LocalView(v, incoming, failed, header), rng)
        for t, e in action.hits:
            witnessed.add(e)
            if len(witnessed) < scheme.tree_rank(t) + 1:
                trace.audit_ok = False
        if record:
            trace.steps.append(_step_record(v, incoming, action, header))
        if action.kind == "deliver":
            raise SchemeViolation(f"deliver at non-destination {v!r}")
        if action.kind == "drop":
            trace.outcome = "dropped"
            break
        if len(action.out) != 1:
            raise SchemeViolation("deterministic engine cannot follow duplicates")
        arc, header = action.out[0]
        _check_forward(g, v, arc, failed)
        trace.max_header_bits = max(trace.max_header_bits, header.bits() if header != NO_HEADER else 0)
        ref = _tree(scheme, incoming) if incoming is not None else action.origin_tree
        if ref is not None and T is not None:
            if T.tree_of(arc) != ref:
                trace.switches += 1
        trace.hops += 1
        if trace.hops > budget:
            trace.outcome = "budget-exceeded"
            break
        v, incoming = arc.head, arc
    trace.witnessed = len(witnessed)
    return trace


def trial_rng(seed: int, trial: int) -> random.Random:
    return random.Random(f"{seed}/{trial}")


@dataclass
class RandomStats:
    trials: int
    delivery_rate: float
    mean_switches: float
    std_error: float
    mean_hops: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def summarize(values: list[float]) -> tuple[float, float]:
    n = len(values)
    if n == 0:
        return 0.0, 0.0
    mean = sum(values) / n
    if n < 2:
        return mean, 0.0
    var = sum((x - mean) ** 2 for x in values) / (n - 1)
    return mean, math.sqrt(var / n)


def run_randomized(
    g: MultiGraph,
    scheme: Scheme,
    failed: Iterable[int],
    source: Hashable,
    trials: int,
    seed: int,
    budget: int = RANDOM_BUDGET,
) -> RandomStats:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    failed = frozenset(failed)
    switches, hops, ok = [], [], 0
    for t in range(trials):
        tr = run_deterministic(g, scheme, failed, source, budget=budget, rng=trial_rng(seed, t))
        ok += tr.delivered
        switches.append(tr.switches)
        hops.append(tr.hops)
    mean, se = summarize(switches)
    return RandomStats(trials, ok / trials, mean, se, sum(hops) / trials)


def explore_randomized_branches(g: MultiGraph, scheme: Scheme, failed: Iterable[int], source: Hashable) -> bool:
    """True iff some sequence of random choices delivers the packet."""
    failed = frozenset(failed)
    d = g.destination
    if source == d:
        return True
    start = (source, None)
    seen = {start}
    queue = deque([start])
    while queue:
        v, inc = queue.popleft()
        for arc in scheme.branches(LocalView(v, inc, failed)):
            if arc.edge in failed:
                raise SchemeViolation(f"branch uses failed edge {arc.edge}")
            if arc.head == d:
                return True
            st = (arc.head, arc)
            if st not in seen:
                seen.add(st)
                queue.append(st)
    return False


def run_duplication(
    g: MultiGraph,
    scheme: Scheme,
    failed: Iterable[int],
    source: Hashable,
    budget: int | None = None,
) -> Trace:
    """Breadth-first execution of all packet copies.

    Identical (vertex, incoming) copy states are merged; delivery means
    some copy reached the destination; ``copies`` counts creation events.
    """
    failed = frozenset(failed)
    k = scheme.T.k if scheme.T is not None else 1
    if budget is None:
        budget = deterministic_budget(g, k) * k
    trace = Trace("dropped")
    d = g.destination
    if source == d:
        trace.outcome = "delivered"
        return trace
    start = (source, None)
    seen = {start}
    frontier = deque([start])
    looped = False
    delivered = False
    steps = 0
    witnessed: set[int] = set()
    while frontier:
        v, inc = frontier.popleft()
        action = scheme.decide(LocalView(v, inc, failed))
        witnessed.update(e for _, e in action.hits)
        trace.copies += action.copies
        for arc, _ in action.out:
            _check_forward(g, v, arc, failed)
            steps += 1
            if arc.head == d:
                delivered = True
                continue
            st = (arc.head, arc)
            if st in seen:
                looped = True
                continue
            seen.add(st)
            frontier.append(st)
        if steps > budget:
            trace.outcome = "budget-exceeded"
            trace.hops = steps
            return trace
    trace.hops = steps
    trace.witnessed = len(witnessed)
    trace.outcome = "delivered" if delivered else ("loop" if looped else "dropped")
    return trace
