"""Resilience verdicts by failure enumeration, plus randomized analytics."""

from __future__ import annotations

import itertools
import math
import multiprocessing as mp
import random
from dataclasses import dataclass, field
from typing import Hashable

from .graph import MultiGraph, vkey
from .schemes import Duplication, Scheme
from .simulator import (
    Trace,
    explore_randomized_branches,
    run_deterministic,
    run_duplication,
    summarize,
    trial_rng,
)

DEFAULT_CEILING = 10**7


class TooLargeError(Exception):
    """Exhaustive enumeration would exceed the configured ceiling."""


@dataclass
class Verdict:
    scheme: str
    r: int
    mode: str
    holds: bool = True
    scenarios: int = 0
    vacuous: int = 0
    counterexample: dict | None = None
    max_switches: dict[int, int] = field(default_factory=dict)
    max_copies: dict[int, int] = field(default_factory=dict)
    min_switch_slack: int | None = None  # min over traces of 2f - switches
    max_header_bits: int = 0
    audit_ok: bool = True
    audit_violation: dict | None = None

    def to_json(self) -> dict:
        return {
            "claim": {"scheme": self.scheme, "r": self.r},
            "result": "holds" if self.holds else "fails",
            "mode": self.mode,
            "scenarios_checked": self.scenarios,
            "vacuous": self.vacuous,
            "counterexample": self.counterexample,
            "max_switches": {str(k): v for k, v in sorted(self.max_switches.items())},
            "max_copies": {str(k): v for k, v in sorted(self.max_copies.items())},
            "audit_ok": self.audit_ok,
            "max_header_bits": self.max_header_bits,
        }


def scenario_count(g: MultiGraph, r: int) -> int:
    return sum(math.comb(g.m, i) for i in range(r + 1)) * g.n


def run_one(g: MultiGraph, scheme: Scheme, failed: frozenset[int], source: Hashable, record: bool = False) -> Trace:
    if scheme.randomized:
        ok = explore_randomized_branches(g, scheme, failed, source)
        return Trace("delivered" if ok else "loop")
    if isinstance(scheme, Duplication):
        return run_duplication(g, scheme, failed, source)
    return run_deterministic(g, scheme, failed, source, record=record)


# worker state for forked pools
_CTX: dict = {}


def _check_chunk(args) -> tuple:
    idx0, sets = args
    g: MultiGraph = _CTX["g"]
    scheme: Scheme = _CTX["scheme"]
    d = g.destination
    part = Verdict(scheme.name, _CTX["r"], _CTX["mode"])
    first_bad = None
    for off, F in enumerate(sets):
        F = frozenset(F)
        comp = g.component_of(d, F)
        part.vacuous += g.n - len(comp)
        f = len(F)
        for s in sorted(comp - {d}, key=vkey):
            tr = run_one(g, scheme, F, s)
            part.scenarios += 1
            if tr.switches > part.max_switches.get(f, -1):
                part.max_switches[f] = tr.switches
            if tr.copies > part.max_copies.get(f, -1):
                part.max_copies[f] = tr.copies
            slack = 2 * f - tr.switches
            if part.min_switch_slack is None or slack < part.min_switch_slack:
                part.min_switch_slack = slack
            part.max_header_bits = max(part.max_header_bits, tr.max_header_bits)
            if not tr.audit_ok and part.audit_ok:
                part.audit_ok = False
                part.audit_violation = {"failed": sorted(F), "source": s}
            if not tr.delivered and first_bad is None:
                first_bad = (idx0 + off, sorted(F), s, tr.outcome)
                part.holds = False
                if _CTX.get("stop_early", True):
                    return part, first_bad
    return part, first_bad


def _merge(total: Verdict, part: Verdict) -> None:
    total.scenarios += part.scenarios
    total.vacuous += part.vacuous
    for f, x in part.max_switches.items():
        total.max_switches[f] = max(total.max_switches.get(f, -1), x)
    for f, x in part.max_copies.items():
        total.max_copies[f] = max(total.max_copies.get(f, -1), x)
    if part.min_switch_slack is not None:
        total.min_switch_slack = (
            part.min_switch_slack
            if total.min_switch_slack is None
            else min(total.min_switch_slack, part.min_switch_slack)
        )
    total.max_header_bits = max(total.max_header_bits, part.max_header_bits)
    if not part.audit_ok and total.audit_ok:
        total.audit_ok = False
        total.audit_violation = part.audit_violation


def failure_sets(
    g: MultiGraph, r: int, mode: str, samples: int = 0, seed: int = 0, adversarial_trees=None
) -> list[tuple[int, ...]]:
    edges = sorted(g.edges)
    if mode == "exhaustive":
        out: list[tuple[int, ...]] = []
        for i in range(r + 1):
            out.extend(itertools.combinations(edges, i))
        return out
    rng = random.Random(seed)
    out = []
    for _ in range(samples):
        if adversarial_trees:
            pool = sorted(adversarial_trees[rng.randrange(len(adversarial_trees))])
            if len(pool) < r:
                pool = edges
        else:
            pool = edges
        out.append(tuple(sorted(rng.sample(pool, min(r, len(pool))))))
    return out


def check_resilience(
    g: MultiGraph,
    scheme: Scheme,
    r: int,
    mode: str = "exhaustive",
    samples: int = 1000,
    seed: int = 0,
    jobs: int = 1,
    ceiling: int = DEFAULT_CEILING,
    stop_early: bool = True,
    adversarial: bool = False,
) -> Verdict:
    """Check that every non-vacuous scenario with at most r failures delivers."""
    if r < 0:
        raise ValueError("r must be non-negative")
    if mode not in ("exhaustive", "sampled"):
        raise ValueError("mode must be 'exhaustive' or 'sampled'")
    if mode == "exhaustive" and math.comb(g.m, r) * g.n > ceiling:
        raise TooLargeError(
            f"C({g.m},{r})*{g.n} = {math.comb(g.m, r) * g.n} exceeds {ceiling}; use sampled mode"
        )
    trees = [t.edge_ids() for t in scheme.T] if (adversarial and scheme.T is not None) else None
    sets = failure_sets(g, r, mode, samples, seed, trees)
    _CTX.update(g=g, scheme=scheme, r=r, mode=mode, stop_early=stop_early)
    total = Verdict(scheme.name, r, mode)
    chunk = max(1, len(sets) // (jobs * 8)) if jobs > 1 else len(sets) or 1
    work = [(i, sets[i : i + chunk]) for i in range(0, len(sets), chunk)]
    bad = []
    if jobs > 1 and len(work) > 1:
        with mp.get_context("fork").Pool(jobs) as pool:
            for part, fb in pool.imap(_check_chunk, work):
                _merge(total, part)
                if fb is not None:
                    bad.append(fb)
    else:
        for w in work:
            part, fb = _check_chunk(w)
            _merge(total, part)
            if fb is not None:
                bad.append(fb)
                if stop_early:
                    break
    if bad:
        _, F, s, outcome = min(bad, key=lambda x: x[0])
        tr = run_one(g, scheme, frozenset(F), s, record=True)
        total.holds = False
        total.counterexample = {"failed": F, "source": s, "outcome": outcome, "trace": tr.summary(),
                                "steps": tr.steps}
    return total


def shared_failure_free_audit(
    g: MultiGraph, scheme: Scheme, r: int, mode: str = "exhaustive", samples: int = 1000, seed: int = 0,
    jobs: int = 1,
) -> dict:
    """Blocked on the rank-i tree implies at least i distinct failures seen."""
    v = check_resilience(g, scheme, r, mode, samples, seed, jobs, stop_early=False)
    return {"passed": v.audit_ok, "scenarios": v.scenarios, "violation": v.audit_violation}


# ---------------------------------------------------------------------------
# switch-count analytics for randomized bouncing


def U(q: float, t: float) -> float:
    """Upper bound on expected reroutes with re-sample probability q, t = f/k."""
    return t / ((1 - q) * q * (1 - t)) + 1 / (1 - q)


def q_star(t: float) -> float:
    return 1 - 1 / (1 + math.sqrt(t))


def U_star(t: float) -> float:
    return (1 + math.sqrt(t)) / (1 - math.sqrt(t))


def U_half(t: float) -> float:
    return 2 + 4 * t / (1 - t)


def switch_bound_report(
    g: MultiGraph,
    scheme: Scheme,
    f: int,
    trials: int,
    seed: int,
    adversarial: bool = True,
) -> dict:
    """Monte Carlo mean switches against U(q) for the scheme's q.

    Each trial draws a failure set of size f (concentrated on one tree when
    ``adversarial``) and a connected source, then routes one packet.
    """
    k = scheme.T.k
    if f >= k:
        raise ValueError("need f < k")
    q = scheme.q
    t = f / k
    rng = random.Random(seed)
    edges = sorted(g.edges)
    tree_edges = [sorted(tr.edge_ids()) for tr in scheme.T]
    d = g.destination
    values, delivered = [], 0
    for i in range(trials):
        while True:
            pool = tree_edges[rng.randrange(k)] if adversarial else edges
            if len(pool) < f:
                pool = edges
            F = frozenset(rng.sample(pool, f))
            comp = sorted(g.component_of(d, F) - {d}, key=vkey)
            if comp:
                break
        s = comp[rng.randrange(len(comp))]
        tr = run_deterministic(g, scheme, F, s, rng=trial_rng(seed, i))
        delivered += tr.delivered
        values.append(tr.switches)
    mean, se = summarize(values)
    bound = U(q, t) if 0 < q < 1 else float("inf")
    return {
        "k": k,
        "f": f,
        "t": t,
        "q": q,
        "trials": trials,
        "mean_switches": mean,
        "std_error": se,
        "delivery_rate": delivered / trials,
        "U_q": bound,
        "q_star": q_star(t),
        "U_q_star": U_star(t),
        "U_half": U_half(t),
        "violation": mean > bound + 3 * se,
    }


def never_bounce_report(k: int, trials: int, seed: int, q: float = 0.5, source: str = "v2_0",
                        N: int | None = None) -> dict:
    """Pure re-sampling against bouncing on the never-bounce gadget."""
    from .schemes import BouncedRand, PureResample
    from .simulator import run_randomized
    from .topologies import never_bounce_failures, never_bounce_gadget

    g, T = never_bounce_gadget(k, N)
    F = never_bounce_failures(g, k)
    pure = run_randomized(g, PureResample(T), F, source, trials, seed)
    bounced = run_randomized(g, BouncedRand(T, q), F, source, trials, seed)
    target = (k - 1) ** 2
    return {
        "k": k,
        "trees": T.k,
        "failures": len(F),
        "source": source,
        "trials": trials,
        "target": target,
        "pure": pure.to_json(),
        "bounced": {"q": q, **bounced.to_json()},
        "pure_within_10pct": abs(pure.mean_switches - target) <= 0.1 * target,
        "bounced_below_half": bounced.mean_switches < pure.mean_switches / 2,
    }
