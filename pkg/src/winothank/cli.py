"""Command-line surface for batch experiments.

All randomness flows from --seed; reports are JSON on stdout (--pretty for
indented output) and errors are machine-readable JSON on stderr.  Exit
codes: 0 ok, 1 usage, 2 data error, 3 protocol error.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import corpus as corpus_mod
from . import engine, kb as kb_mod, resolver, semgraph
from .ensemble import (
    Prediction,
    PredictionRequest,
    Predictor,
    PredictorError,
    ProtocolError,
    SubprocessPredictor,
    recorded_predictor_load,
)
from .evaluator import EvalRecord, Metrics, chance_monte_carlo, evaluate, make_variant_set, split_pairs
from .lexicon import DEFAULT_NAMES_PATH, LexiconError, load_names

DEFAULT_SEED = 171  # size of the thanking-domain extraction, and easy to grep

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PROTOCOL = 3

DATA_ERRORS = (
    corpus_mod.CorpusError,
    semgraph.GraphError,
    engine.EngineError,
    kb_mod.KBError,
    LexiconError,
    ValueError,
    OSError,
)


def _emit(payload, pretty: bool) -> None:
    if pretty:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(json.dumps(payload, sort_keys=True))


def _fail(kind: str, exc: Exception) -> None:
    sys.stderr.write(
        json.dumps({"error": {"type": kind, "message": str(exc)}}) + "\n"
    )


def _load_items(path: str, with_pairs: bool = False):
    with open(path, encoding="utf-8") as handle:
        items = corpus_mod.load_corpus(handle, source=Path(path).name)
    return corpus_mod.assign_pairs(items) if with_pairs else items


def _load_graphs(directory: str) -> dict[str, semgraph.SemanticGraph]:
    graphs = {}
    for path in sorted(Path(directory).glob("*.json")):
        graph = semgraph.load_graph_file(path)
        graphs[graph.item_id] = graph
    if not graphs:
        raise semgraph.GraphError(f"no .json graphs found in {directory}")
    return graphs


def _make_predictor(spec: str) -> Predictor:
    if spec.startswith("recorded:"):
        path = spec[len("recorded:") :]
        with open(path, encoding="utf-8") as handle:
            return recorded_predictor_load(handle)
    if spec.startswith("cmd:"):
        argv = shlex.split(spec[len("cmd:") :])
        if not argv:
            raise PredictorError("empty predictor command")
        return SubprocessPredictor(argv)
    raise PredictorError(
        f"predictor must be 'recorded:<path>' or 'cmd:<argv>', got {spec!r}"
    )


def _symbolic_outcome(
    graphs: dict[str, semgraph.SemanticGraph],
    kb: kb_mod.KnowledgeBase,
    request: PredictionRequest,
) -> resolver.ResolutionOutcome:
    graph = graphs.get(request.id)
    if graph is None:
        return resolver.NoAnswer()
    if request.variant != "original":
        graph = semgraph.relabel_candidates(graph, request.candidates)
    return resolver.resolve(graph, kb)


# ---------------------------------------------------------------------------
# subcommands


def cmd_extract(args) -> int:
    items = _load_items(args.corpus)
    spec = corpus_mod.THANKING_DOMAIN
    if args.domain_spec:
        with open(args.domain_spec, encoding="utf-8") as handle:
            raw = json.load(handle)
        spec = corpus_mod.DomainSpec(
            name=raw["name"],
            include_keywords=tuple(raw["includeKeywords"]),
            exclude_phrases=tuple(raw.get("excludePhrases", ())),
        )
    kept = corpus_mod.extract_domain(items, spec)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        corpus_mod.dump_corpus(kept, out)
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def cmd_stats(args) -> int:
    items = _load_items(args.corpus)
    lexicon = load_names(args.names)
    stats = corpus_mod.domain_stats(items, lexicon)
    if args.figures:
        from . import report

        report.render_stats_figure(stats, Path(args.figures))
    _emit(stats.to_dict(), args.pretty)
    return EXIT_OK


def cmd_solve(args) -> int:
    program = engine.parse_program(Path(args.rules).read_text(encoding="utf-8"))
    extra = ()
    if args.facts:
        fact_program = engine.parse_program(Path(args.facts).read_text(encoding="utf-8"))
        if fact_program.rules:
            raise engine.EngineError("facts file must contain only ground facts")
        extra = fact_program.facts
    store = engine.evaluate(program, extra)
    atoms = [str(a) for a in store.atoms()]
    if args.pretty:
        print("\n".join(atoms))
    else:
        _emit({"facts": atoms}, pretty=False)
    return EXIT_OK


def cmd_resolve(args) -> int:
    kb = kb_mod.load_kb(args.kb)
    graphs = _load_graphs(args.graphs)

    def report_for(item_id: str) -> dict:
        return resolver.resolution_report(graphs[item_id], kb)

    ids = sorted(graphs)
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(report_for, ids))
    else:
        reports = [report_for(i) for i in ids]
    for report in reports:
        _emit(report, args.pretty)
    return EXIT_OK


def cmd_ensemble(args) -> int:
    kb = kb_mod.load_kb(args.kb)
    graphs = _load_graphs(args.graphs)
    items = _load_items(args.corpus)
    with _make_predictor(args.predictor) as predictor:
        for item in items:
            request = PredictionRequest.from_item(item)
            outcome = _symbolic_outcome(graphs, kb, request)
            if isinstance(outcome, resolver.Single):
                prediction = Prediction(outcome.choice)
                source = "kb"
            else:
                prediction = predictor.predict(request)
                source = "predictor"
            _emit(
                {
                    "itemId": item.id,
                    "choice": prediction.choice,
                    "score": prediction.score,
                    "kbOutcome": resolver.outcome_to_dict(outcome),
                    "source": source,
                },
                args.pretty,
            )
    return EXIT_OK


def cmd_variants(args) -> int:
    items = _load_items(args.corpus)
    lexicon = load_names(args.names)
    for item in items:
        variant_set = make_variant_set(item, lexicon, args.seed)
        for kind, variant_item in variant_set.variants():
            payload = variant_item.to_winogrande()
            payload["qID"] = (
                variant_item.id if kind == "original" else f"{item.id}::{kind}"
            )
            payload["variantKind"] = kind
            payload["parentId"] = item.id
            payload["switchable"] = variant_set.switchable
            _emit(payload, args.pretty)
    return EXIT_OK


def _merge_metrics(chunks: list[tuple[Metrics, list[EvalRecord]]]) -> tuple[Metrics, list[EvalRecord]]:
    n = sum(m.n for m, _ in chunks)
    if n == 0:
        return Metrics(0.0, 0.0, 0, {}), []
    accuracy = sum(m.accuracy * m.n for m, _ in chunks) / n
    robust = sum(m.robust_accuracy * m.n for m, _ in chunks) / n
    per_variant: dict[str, dict[str, float]] = {}
    for m, _ in chunks:
        for kind, cell in m.per_variant.items():
            agg = per_variant.setdefault(kind, {"correct": 0, "n": 0})
            agg["correct"] += cell["correct"]
            agg["n"] += cell["n"]
    for cell in per_variant.values():
        cell["accuracy"] = cell["correct"] / cell["n"] if cell["n"] else 0.0
    records = [r for _, rs in chunks for r in rs]
    return Metrics(accuracy, robust, n, dict(sorted(per_variant.items()))), records


def cmd_evaluate(args) -> int:
    items = _load_items(args.corpus)
    lexicon = load_names(args.names)
    kb = kb_mod.load_kb(args.kb) if args.graphs else None
    graphs = _load_graphs(args.graphs) if args.graphs else {}

    with _make_predictor(args.predictor) as predictor:
        serialize = isinstance(predictor, SubprocessPredictor)
        lock = threading.Lock()

        def answerer(request: PredictionRequest) -> Prediction:
            if graphs:
                outcome = _symbolic_outcome(graphs, kb, request)
                if isinstance(outcome, resolver.Single):
                    return Prediction(outcome.choice)
            if serialize:
                with lock:
                    return predictor.predict(request)
            return predictor.predict(request)

        jobs = max(1, args.jobs)
        if jobs > 1 and len(items) > 1:
            chunk_size = (len(items) + jobs - 1) // jobs
            chunks = [items[i : i + chunk_size] for i in range(0, len(items), chunk_size)]
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(
                    pool.map(lambda c: evaluate(c, answerer, lexicon, args.seed), chunks)
                )
            metrics, records = _merge_metrics(results)
        else:
            metrics, records = evaluate(items, answerer, lexicon, args.seed)

    if args.report:
        from . import report

        report_dir = Path(args.report)
        report_dir.mkdir(parents=True, exist_ok=True)
        report.write_records_csv(records, report_dir / "records.csv")
        (report_dir / "metrics.json").write_text(
            json.dumps(metrics.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
        )
        report.render_metrics_figures(metrics, report_dir)
    _emit(metrics.to_dict(), args.pretty)
    return EXIT_OK


def cmd_chance(args) -> int:
    rate = chance_monte_carlo(args.trials, args.seed, variants=args.variants)
    _emit({"variants": args.variants, "trials": args.trials, "rate": rate}, args.pretty)
    return EXIT_OK


def cmd_split(args) -> int:
    items = _load_items(args.corpus, with_pairs=True)
    paired = [item for item in items if item.pair_id is not None]
    train, test = split_pairs(paired, args.mode, args.seed)
    for path, side in ((args.out_train, train), (args.out_test, test)):
        with open(path, "w", encoding="utf-8") as handle:
            corpus_mod.dump_corpus(side, handle)
    _emit(
        {
            "mode": args.mode,
            "train": len(train),
            "test": len(test),
            "unpaired_dropped": len(items) - len(paired),
        },
        args.pretty,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="winothank",
        description="Pronoun-resolution workbench for the thanking domain",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, names=False, seed=False):
        p.add_argument("--pretty", action="store_true", help="indent JSON output")
        if names:
            p.add_argument("--names", default=str(DEFAULT_NAMES_PATH), help="names lexicon TSV")
        if seed:
            p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = sub.add_parser("extract", help="filter a corpus to the keyword domain")
    p.add_argument("--corpus", required=True)
    p.add_argument("--domain-spec", help="JSON domain spec (defaults to thanking)")
    p.add_argument("--out", help="output JSONL path (defaults to stdout)")
    common(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("stats", help="domain statistics for a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--figures", help="directory for rendered figures")
    common(p, names=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("solve", help="evaluate a rule program over facts")
    p.add_argument("--rules", required=True)
    p.add_argument("--facts")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("resolve", help="resolve pronouns for a directory of graphs")
    p.add_argument("--graphs", required=True)
    p.add_argument("--kb", default=str(kb_mod.DEFAULT_KB_DIR))
    p.add_argument("--jobs", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_resolve)

    p = sub.add_parser("ensemble", help="symbolic answers with predictor fallback")
    p.add_argument("--corpus", required=True)
    p.add_argument("--graphs", required=True)
    p.add_argument("--kb", default=str(kb_mod.DEFAULT_KB_DIR))
    p.add_argument("--predictor", required=True, help="recorded:<path> | cmd:<argv>")
    common(p)
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("variants", help="emit robustness variants as JSONL")
    p.add_argument("--corpus", required=True)
    common(p, names=True, seed=True)
    p.set_defaults(func=cmd_variants)

    p = sub.add_parser("evaluate", help="accuracy and robust accuracy of an answerer")
    p.add_argument("--corpus", required=True)
    p.add_argument("--predictor", required=True, help="recorded:<path> | cmd:<argv>")
    p.add_argument("--graphs", help="graph directory enabling the symbolic route")
    p.add_argument("--kb", default=str(kb_mod.DEFAULT_KB_DIR))
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--report", help="directory for records.csv, metrics.json and figures")
    common(p, names=True, seed=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("chance", help="Monte-Carlo robust-chance rate")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--variants", type=int, default=5)
    common(p, seed=True)
    p.set_defaults(func=cmd_chance)

    p = sub.add_parser("split", help="paired train/test split")
    p.add_argument("--corpus", required=True)
    p.add_argument("--mode", choices=("separated", "together"), required=True)
    p.add_argument("--out-train", required=True)
    p.add_argument("--out-test", required=True)
    common(p, seed=True)
    p.set_defaults(func=cmd_split)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ProtocolError as exc:
        _fail("protocol", exc)
        return EXIT_PROTOCOL
    except PredictorError as exc:
        _fail("predictor", exc)
        return EXIT_DATA
    except DATA_ERRORS as exc:
        _fail("data", exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
