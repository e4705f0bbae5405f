"""Command-line front end.

Documents passed between commands are JSON objects with ``graph``,
``arborescences`` and ``routing`` keys (the last carries reset arcs,
port orders and the promised resilience).  Exit status: 0 claim holds or
packet delivered, 1 counterexample found, 2 usage error, 3 infeasible or
over budget.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import sys
from contextlib import redirect_stdout
from importlib import metadata
from pathlib import Path
from typing import Any, Sequence

from .decompose import BudgetError, InfeasibleError, decompose_general
from .graph import ArborescenceSet, GraphError, MultiGraph, dumps, to_dot, validate_arborescence_set, vkey
from .impossibility import impossibility_suite
from .mader import MaderError, random_mader_graph
from .schemes import (
    BouncedRand,
    Circular,
    DFAlgo,
    Duplication,
    PlusOne,
    PureResample,
    Scheme,
    VertexCircular,
    adbed_order,
)
from .simulator import run_randomized
from .topologies import KINDS, TopologySpec, UnsupportedTopology, build_topology, cube_port_orders
from .verifier import (
    TooLargeError,
    check_resilience,
    never_bounce_report,
    q_star,
    run_one,
    shared_failure_free_audit,
    switch_bound_report,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2, 3
SCHEMES = (
    "circular", "adbed-circular", "plus-one", "vertex-circular", "df-algo",
    "dup-even", "dup-odd", "bounced-rand", "pure-resample",
)
EXHAUSTIVE_LIMIT = 10**6
SAMPLED_SCENARIOS = 10**5


class UsageError(Exception):
    pass


def version() -> str:
    try:
        return metadata.version("failover")
    except metadata.PackageNotFoundError:
        return "0+unknown"


# ---------------------------------------------------------------------------
# documents


class Inputs:
    """Reads named inputs (``-`` is stdin) once and remembers their digests."""

    def __init__(self, stdin_text: str | None = None):
        self._stdin = stdin_text
        self.digests: dict[str, str] = {}
        self.stdin_used: str | None = None

    def text(self, name: str) -> str:
        if name == "-":
            if self._stdin is None:
                self._stdin = sys.stdin.read()
            self.stdin_used = self._stdin
            data = self._stdin
        else:
            try:
                data = Path(name).read_text()
            except OSError as exc:
                raise UsageError(f"cannot read {name}: {exc.strerror}") from exc
        self.digests[name] = hashlib.sha256(data.encode()).hexdigest()
        return data

    def json(self, name: str) -> Any:
        data = self.text(name)
        try:
            return json.loads(data)
        except json.JSONDecodeError as exc:
            where = "stdin" if name == "-" else name
            raise UsageError(f"malformed JSON in {where} at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _pairs(mapping) -> list:
    return [[k, v] for k, v in sorted(mapping.items(), key=lambda x: vkey(x[0]))]


def make_document(g: MultiGraph, T: ArborescenceSet | None, routing: dict | None = None, spec=None) -> dict:
    doc: dict = {"graph": g.to_json()}
    if T is not None:
        doc["arborescences"] = T.to_json()
    doc["routing"] = routing or {}
    if spec is not None:
        doc["spec"] = spec
    return doc


def load_document(inputs: Inputs, names: Sequence[str]) -> tuple[MultiGraph, ArborescenceSet | None, dict]:
    """One combined document, or a graph file followed by an arborescence file."""
    names = list(names) or ["-"]
    if len(names) > 2:
        raise UsageError("expected at most two input files (graph, arborescences)")
    docs = [inputs.json(n) for n in names]
    if not all(isinstance(d, dict) for d in docs):
        raise UsageError("input documents must be JSON objects")
    first = docs[0]
    try:
        graph_data = first.get("graph", first)
        if "arborescences" in first and "root" in first:
            raise UsageError("the first input must be a graph or a combined document")
        g = MultiGraph.from_json(graph_data)
        arbs_data = None
        if len(docs) == 2:
            second = docs[1]
            arbs_data = second if "root" in second else second.get("arborescences")
        elif "arborescences" in first:
            arbs_data = first["arborescences"]
        T = ArborescenceSet.from_json(arbs_data) if arbs_data is not None else None
    except GraphError as exc:
        raise UsageError(str(exc)) from exc
    routing = dict(first.get("routing", {}))
    if len(docs) == 2:
        routing.update(docs[1].get("routing", {}))
    if T is not None:
        problems = validate_arborescence_set(g, T)
        if problems:
            raise UsageError("invalid arborescence set: " + "; ".join(problems[:3]))
    return g, T, routing


def build_scheme(kind: str, g: MultiGraph, T: ArborescenceSet | None, routing: dict, q: float | None = None,
                 config: dict | None = None) -> Scheme:
    config = config or {}
    if kind == "vertex-circular":
        orders = config.get("orders") or routing.get("port_orders")
        if orders is None:
            orders = [[v, list(g.incident(v))] for v in g.vertices if v != g.destination]
        return VertexCircular(g, {v: o for v, o in orders})
    if T is None:
        raise UsageError(f"scheme {kind!r} needs arborescences")
    try:
        if kind == "circular":
            resets = frozenset((int(e), v) for e, v in routing.get("reset_arcs", []))
            return Circular(T, config.get("ordering"), reset_arcs=resets)
        if kind == "adbed-circular":
            if not T.adbed:
                raise UsageError("adbed-circular needs an ADBED arborescence list")
            return Circular(T, adbed_order(T.k))
        if kind == "plus-one":
            return PlusOne(T, config.get("inner"))
        if kind == "df-algo":
            return DFAlgo(g, T)
        if kind == "dup-even":
            return Duplication(T, odd=False)
        if kind == "dup-odd":
            return Duplication(T, odd=True)
        if kind == "bounced-rand":
            q = config.get("q", q)
            return BouncedRand(T, 0.5 if q is None else float(q))
        if kind == "pure-resample":
            return PureResample(T)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    raise UsageError(f"unknown scheme {kind!r}; expected one of {', '.join(SCHEMES)}")


def scheme_record(scheme: Scheme, kind: str) -> dict:
    cfg = scheme.to_config()
    cfg["kind"] = kind
    return cfg


def _parse_failures(text: str | None) -> frozenset[int]:
    if not text:
        return frozenset()
    try:
        return frozenset(int(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise UsageError(f"--failures expects comma-separated edge ids, got {text!r}") from exc


def _parse_vertex(g: MultiGraph, text: str):
    for v in g.vertices:
        if str(v) == text:
            return v
    raise UsageError(f"unknown vertex {text!r}")


def _emit(obj: Any, args) -> None:
    text = json.dumps(obj, sort_keys=True, indent=None if args.compact else 2)
    if getattr(args, "out_dir", None):
        digest = hashlib.sha256(text.encode()).hexdigest()[:16]
        path = Path(args.out_dir) / f"{digest}.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n")
        print(str(path))
    else:
        print(text)


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args, inputs: Inputs) -> int:
    if args.spec_file:
        data = inputs.json(args.spec_file)
        spec = TopologySpec.from_json(data)
    else:
        if args.kind is None:
            raise UsageError("gen needs a topology kind or --spec-file")
        params = {k: v for k, v in (
            ("k", args.k), ("a", args.a), ("b", args.b), ("i", args.i), ("n", args.n), ("m", args.m),
            ("layers", args.layers), ("N", args.N), ("ops", args.ops), ("max_vertices", args.max_vertices),
        ) if v is not None}
        if args.kind == "torus-grid":
            params["seed"] = args.seed
        spec = TopologySpec(args.kind, params)
    if spec.kind == "mader":
        k = int(spec.get("k", 4))
        g, T, ops = random_mader_graph(k, int(spec.get("ops", 4)), args.seed, int(spec.get("max_vertices", 12)))
        routing = {"promised_r": k - 1, "mader_ops": [op.to_json() for op in ops]}
        _emit(make_document(g, T, routing, {"kind": "mader", **dict(spec.params), "seed": args.seed}), args)
        return EXIT_OK
    topo = build_topology(spec)
    routing: dict = {"promised_r": topo.promised_r}
    if topo.reset_arcs:
        routing["reset_arcs"] = sorted([[e, v] for e, v in topo.reset_arcs], key=lambda x: (x[0], vkey(x[1])))
    if spec.kind == "cube-gadget":
        routing["port_orders"] = _pairs(cube_port_orders(topo.graph, {}))
    for key, val in topo.extras.items():
        if isinstance(val, (int, float, str, list, dict, type(None))):
            routing.setdefault(key, val)
    _emit(make_document(topo.graph, topo.arbs, routing, spec.to_json()), args)
    return EXIT_OK


def cmd_decompose(args, inputs: Inputs) -> int:
    g, _, routing = load_document(inputs, args.inputs)
    T = decompose_general(g, args.k, budget=args.budget)
    _emit(make_document(g, T, routing), args)
    return EXIT_OK


def _resolve_mode(g: MultiGraph, r: int, mode: str, samples: int | None) -> tuple[str, int]:
    if mode == "auto":
        mode = "exhaustive" if math.comb(g.m, r) * g.n <= EXHAUSTIVE_LIMIT else "sampled"
    if samples is None:
        samples = math.ceil(SAMPLED_SCENARIOS / max(1, g.n - 1))
    return mode, samples


def cmd_check(args, inputs: Inputs) -> int:
    g, T, routing = load_document(inputs, args.inputs)
    scheme = build_scheme(args.scheme, g, T, routing, args.q)
    r = args.resilience if args.resilience is not None else routing.get("promised_r")
    if r is None:
        raise UsageError("no --resilience given and the document promises none")
    mode, samples = _resolve_mode(g, r, args.mode, args.samples)
    v = check_resilience(g, scheme, r, mode, samples, args.seed, args.jobs, stop_early=not args.audit)
    out = v.to_json()
    out["claim"]["scheme"] = args.scheme
    if args.audit:
        out["audit"] = {"passed": v.audit_ok, "violation": v.audit_violation}
    if v.counterexample is not None:
        out["counterexample"] = counterexample_bundle(g, T, routing, scheme, args.scheme, v.counterexample)
    _emit(out, args)
    ok = v.holds and (v.audit_ok or not args.audit)
    return EXIT_OK if ok else EXIT_FAIL


def counterexample_bundle(g, T, routing, scheme, kind, cx) -> dict:
    return {
        "kind": "counterexample",
        **make_document(g, T, routing),
        "scheme": scheme_record(scheme, kind),
        "failed": cx["failed"],
        "source": cx["source"],
        "outcome": cx["outcome"],
        "trace": cx["trace"],
        "steps": cx.get("steps", []),
    }


def cmd_sim(args, inputs: Inputs) -> int:
    g, T, routing = load_document(inputs, args.inputs)
    scheme = build_scheme(args.scheme, g, T, routing, args.q)
    failed = _parse_failures(args.failures)
    unknown = sorted(e for e in failed if e not in g.edges)
    if unknown:
        raise UsageError(f"unknown edge ids {unknown}")
    source = _parse_vertex(g, args.source)
    if scheme.randomized:
        stats = run_randomized(g, scheme, failed, source, args.trials, args.seed)
        out = {"scheme": args.scheme, "failed": sorted(failed), "source": source, "seed": args.seed,
               **stats.to_json()}
        _emit(out, args)
        return EXIT_OK if stats.delivery_rate == 1.0 else EXIT_FAIL
    tr = run_one(g, scheme, failed, source, record=True)
    out = {"scheme": args.scheme, "failed": sorted(failed), "source": source, **tr.summary(),
           "max_header_bits": tr.max_header_bits, "steps": tr.steps}
    _emit(out, args)
    return EXIT_OK if tr.delivered else EXIT_FAIL


def cmd_bench(args, inputs: Inputs) -> int:
    if args.which == "never-bounce":
        ks = [int(x) for x in args.ks.split(",")]
        rows = [never_bounce_report(k, args.trials, args.seed, args.q if args.q is not None else 0.5) for k in ks]
        _emit({"bench": "never-bounce", "seed": args.seed, "rows": rows}, args)
        ok = all(r["pure_within_10pct"] and r["bounced_below_half"] for r in rows)
        return EXIT_OK if ok else EXIT_FAIL
    # switch-bound
    if args.inputs:
        g, T, _ = load_document(inputs, args.inputs)
        if T is None:
            raise UsageError("switch-bound needs arborescences")
    else:
        g, T = build_topology(TopologySpec("clique", {"k": 9}))
    k = T.k
    rows = []
    for t in (0.25, 0.5):
        f = round(t * k)
        if f < 1 or f >= k:
            continue
        tt = f / k
        for label, q in (("q*", q_star(tt)), ("1/2", 0.5)):
            rep = switch_bound_report(g, BouncedRand(T, q), f, args.trials, args.seed)
            rep["q_label"] = label
            rows.append(rep)
    _emit({"bench": "switch-bound", "seed": args.seed, "rows": rows}, args)
    return EXIT_OK if not any(r["violation"] for r in rows) else EXIT_FAIL


def cmd_impossibility(args, inputs: Inputs) -> int:
    rep = impossibility_suite()
    out = rep.to_json()
    if not args.verbose:
        out["scripted"] = [{k: v for k, v in s.items() if k != "walk"} for s in out["scripted"]]
    print(out["summary"], file=sys.stderr)
    _emit(out, args)
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_export(args, inputs: Inputs) -> int:
    g, T, routing = load_document(inputs, args.inputs)
    if args.format == "dot":
        sys.stdout.write(to_dot(g, T))
    else:
        _emit(make_document(g, T, routing), args)
    return EXIT_OK


def cmd_audit(args, inputs: Inputs) -> int:
    g, T, routing = load_document(inputs, args.inputs)
    scheme = build_scheme(args.scheme, g, T, routing, args.q)
    r = args.resilience if args.resilience is not None else routing.get("promised_r")
    if r is None:
        raise UsageError("no --resilience given and the document promises none")
    mode, samples = _resolve_mode(g, r, args.mode, args.samples)
    rep = shared_failure_free_audit(g, scheme, r, mode, samples, args.seed, args.jobs)
    _emit(rep, args)
    return EXIT_OK if rep["passed"] else EXIT_FAIL


def cmd_replay(args, inputs: Inputs) -> int:
    bundle = inputs.json(args.bundle)
    if not isinstance(bundle, dict):
        raise UsageError("bundle must be a JSON object")
    if bundle.get("kind") == "manifest":
        return replay_manifest(bundle, args)
    if bundle.get("kind") != "counterexample":
        raise UsageError("expected a counterexample bundle or a run manifest")
    try:
        g = MultiGraph.from_json(bundle["graph"])
        T = ArborescenceSet.from_json(bundle["arborescences"]) if "arborescences" in bundle else None
        cfg = dict(bundle["scheme"])
        failed = frozenset(int(e) for e in bundle["failed"])
        source = bundle["source"]
    except (KeyError, GraphError, TypeError) as exc:
        raise UsageError(f"malformed bundle: {exc}") from exc
    scheme = build_scheme(cfg["kind"], g, T, bundle.get("routing", {}), config=cfg)
    tr = run_one(g, scheme, failed, source, record=True)
    same = tr.outcome == bundle["outcome"]
    _emit({"recorded": bundle["outcome"], "replayed": tr.outcome, "reproduced": same,
           "trace": tr.summary()}, args)
    return EXIT_OK if same else EXIT_FAIL


def replay_manifest(man: dict, args) -> int:
    argv = man.get("argv")
    if not isinstance(argv, list):
        raise UsageError("manifest has no argv")
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(argv, stdin_text=man.get("stdin"))
    digest = hashlib.sha256(buf.getvalue().encode()).hexdigest()
    recorded = man.get("outputs", {}).get("stdout")
    same = digest == recorded and code == man.get("exit")
    _emit({"recorded": recorded, "replayed": digest, "exit": code, "reproduced": same}, args)
    return EXIT_OK if same else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for scenario enumeration")
    p.add_argument("--compact", action="store_true", help="single-line JSON output")
    p.add_argument("--out-dir", help="write output to <dir>/<digest>.json and print the path")
    p.add_argument("--manifest", help="write a run manifest to this path")


def _scheme_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scheme", required=True, choices=SCHEMES)
    p.add_argument("--q", type=float, help="re-sample probability for bounced-rand")


def _check_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--resilience", "-r", type=int, help="claimed resilience (default: promised by the document)")
    p.add_argument("--mode", choices=("auto", "exhaustive", "sampled"), default="auto")
    p.add_argument("--samples", type=int, help="failure sets in sampled mode")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="failover", description="Static fast-failover routing toolkit.")
    ap.add_argument("--version", action="version", version=f"failover {version()}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="build a topology with its arborescences")
    p.add_argument("kind", nargs="?", choices=KINDS + ("mader",))
    p.add_argument("--spec-file", help="topology spec as JSON")
    for name in ("k", "a", "b", "i", "n", "m", "layers", "N", "ops", "max-vertices"):
        p.add_argument(f"--{name}", type=int, dest=name.replace("-", "_"))
    _common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("decompose", help="find k arc-disjoint arborescences")
    p.add_argument("inputs", nargs="*")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--budget", type=int, default=200_000)
    _common(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("check", help="verify a resilience claim")
    p.add_argument("inputs", nargs="*")
    _scheme_args(p)
    _check_args(p)
    p.add_argument("--audit", action="store_true", help="also run the shared-failure-free audit")
    _common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("audit", help="shared-link-failure-free audit")
    p.add_argument("inputs", nargs="*")
    _scheme_args(p)
    _check_args(p)
    _common(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("sim", help="route one packet")
    p.add_argument("inputs", nargs="*")
    _scheme_args(p)
    p.add_argument("--failures", default="", help="comma-separated failed edge ids")
    p.add_argument("--source", required=True)
    p.add_argument("--trials", type=int, default=1000, help="trials for randomized schemes")
    _common(p)
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("bench", help="Monte Carlo benchmarks")
    p.add_argument("which", choices=("switch-bound", "never-bounce"))
    p.add_argument("inputs", nargs="*")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--ks", default="3,4,5", help="gadget parameters for never-bounce")
    p.add_argument("--q", type=float, help="bounce variant re-sample probability (never-bounce)")
    _common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("impossibility", help="vertex-circular impossibility suite")
    p.add_argument("--verbose", action="store_true", help="include the walks of scripted scenarios")
    _common(p)
    p.set_defaults(func=cmd_impossibility)

    p = sub.add_parser("replay", help="replay a counterexample bundle or a run manifest")
    p.add_argument("bundle", nargs="?", default="-")
    _common(p)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("export", help="render a document")
    p.add_argument("format", choices=("dot", "json"))
    p.add_argument("inputs", nargs="*")
    _common(p)
    p.set_defaults(func=cmd_export)
    return ap


def main(argv: Sequence[str] | None = None, stdin_text: str | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    inputs = Inputs(stdin_text)
    buf = io.StringIO()
    try:
        with redirect_stdout(buf):
            code = args.func(args, inputs)
    except UsageError as exc:
        print(f"failover: error: {exc}", file=sys.stderr)
        code = EXIT_USAGE
    except (UnsupportedTopology, MaderError, ValueError) as exc:
        print(f"failover: error: {exc}", file=sys.stderr)
        code = EXIT_USAGE
    except (InfeasibleError, BudgetError, TooLargeError) as exc:
        print(f"failover: {type(exc).__name__}: {exc}", file=sys.stderr)
        code = EXIT_INFEASIBLE
    out = buf.getvalue()
    sys.stdout.write(out)
    sys.stdout.flush()
    if getattr(args, "manifest", None):
        params = {k: v for k, v in vars(args).items() if k not in ("func", "manifest")}
        manifest = {
            "kind": "manifest",
            "command": args.command,
            "argv": [a for i, a in enumerate(argv) if not (a == "--manifest" or (i and argv[i - 1] == "--manifest"))
                     and not a.startswith("--manifest=")],
            "parameters": params,
            "seed": args.seed,
            "version": version(),
            "inputs": dict(sorted(inputs.digests.items())),
            "outputs": {"stdout": hashlib.sha256(out.encode()).hexdigest()},
            "exit": code,
        }
        if inputs.stdin_used is not None:
            manifest["stdin"] = inputs.stdin_used
        Path(args.manifest).write_text(dumps(manifest) + "\n")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
