"""Command-line surface: train, modify, compete, offline-eval, serve,
report and synth-world.

Exit codes: 0 on success, 2 on invalid arguments/inputs, 3 on runtime
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import storage
from .arena.competition import CompetitionConfig, run_batch
from .arena.offline import offline_eval
from .arena.reports import (
    batch_records,
    offline_records,
    render_batch_report,
    render_offline_report,
    render_weight_table,
)
from .bot import modify_document
from .engine import EngineModel
from .text import EmbeddingStore, build_corpus_stats, default_stopwords, load_stopwords
from .training import TrainingConfig, cross_validate, dataset_shape, generate_training_set

__all__ = ["main"]

EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


TRAIN_DEFAULTS = {
    "snapshot": None, "out": None, "dataset_out": None, "label_mode": "l",
    "beta": 1.0, "epsilon": 1e-4, "c_grid": "0.001,0.01,0.1", "folds": 5,
    "seed": 0, "m_max": 3, "alpha": 0.01, "corpus": None, "stopwords": None,
    "embeddings": None, "dim": 48, "engine": None,
}
OFFLINE_DEFAULTS = {
    "snapshot": None, "model": None, "out_dir": None, "n_perm": 100_000,
    "seed": 0, "corpus": None, "stopwords": None, "embeddings": None,
    "dim": 48, "engine": None,
}


def _apply_config_file(args, defaults: dict) -> None:
    """Fill arguments from a JSON config file; explicit flags win."""
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            overrides = json.load(fh)
        unknown = set(overrides) - set(defaults)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for key, default in defaults.items():
            if key in overrides and getattr(args, key) == default:
                setattr(args, key, overrides[key])
    for key in ("snapshot", "out"):
        if key in defaults and getattr(args, key, None) is None:
            raise ValueError(f"--{key.replace('_', '-')} is required (flag or config)")


def _c_grid(value) -> tuple[float, ...]:
    if isinstance(value, (list, tuple)):
        return tuple(float(c) for c in value)
    return tuple(float(c) for c in str(value).split(","))


def _stats_from(corpus_path, snapshot_docs, query_texts, stopwords_path):
    stopwords = load_stopwords(stopwords_path) if stopwords_path else default_stopwords()
    texts = list(snapshot_docs)
    if corpus_path:
        texts = [r["text"] for r in storage.read_jsonl(corpus_path)]
    return build_corpus_stats(texts, extra_texts=query_texts, stopwords=stopwords)


def _store_from(args) -> EmbeddingStore:
    if getattr(args, "embeddings", None):
        return EmbeddingStore.load(args.embeddings)
    return EmbeddingStore.hash_only(args.dim)


def _cmd_train(args) -> int:
    _apply_config_file(args, TRAIN_DEFAULTS)
    snapshot = storage.load_snapshot(args.snapshot)
    engine = storage.load_engine_model(args.engine) if args.engine else EngineModel()
    stats = _stats_from(
        args.corpus,
        [d.text for _, h in snapshot for d in h.documents.values()],
        [q.text for q, _ in snapshot],
        args.stopwords,
    )
    store = _store_from(args)
    config = TrainingConfig(
        beta=args.beta,
        epsilon=args.epsilon,
        c_grid=_c_grid(args.c_grid),
        folds=args.folds,
        label_mode=args.label_mode,
        seed=args.seed,
        m_max=args.m_max,
        alpha=args.alpha,
    )
    data = generate_training_set(snapshot, engine, stats, store, config)
    if args.dataset_out:
        storage.save_labeled_pairs(args.dataset_out, data)
    trained = cross_validate(data, config)
    storage.save_pair_model(args.out, trained)
    shape = dataset_shape(data)
    print(
        f"trained on {shape['pairs']} pairs over {shape['documents']} documents "
        f"({shape['pairs_per_document_mean']:.1f} +- {shape['pairs_per_document_std']:.1f} per document)",
        file=sys.stderr,
    )
    print(render_weight_table(trained), end="")
    return 0


def _cmd_modify(args) -> int:
    snapshot = storage.load_snapshot(args.history)
    by_query = {q.id: (q, h) for q, h in snapshot}
    if args.query_id:
        if args.query_id not in by_query:
            raise ValueError(f"query {args.query_id!r} not in history file")
        query, history = by_query[args.query_id]
    elif len(by_query) == 1:
        query, history = next(iter(by_query.values()))
    else:
        raise ValueError("history file has several queries; pass --query-id")
    if args.doc_id not in history.documents:
        raise ValueError(f"document {args.doc_id!r} not in history")
    model = storage.load_pair_model(args.model)
    pair_model = model.model if hasattr(model, "model") else model
    engine_docs = [d.text for d in history.documents.values()]
    stats = _stats_from(args.corpus, engine_docs, [query.text], args.stopwords)
    store = _store_from(args)
    doc, audit = modify_document(
        history.document(args.doc_id),
        query,
        history,
        pair_model,
        stats,
        store,
        max_terms=args.max_terms,
    )
    if args.explain:
        print(json.dumps({"text": doc.text, "audit": audit.to_dict()}, indent=2, sort_keys=True))
    else:
        print(doc.text)
    return 0


def _cmd_compete(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        raw = json.load(fh)
    config_dicts = raw["competitions"] if isinstance(raw, dict) and "competitions" in raw else [raw]
    configs = [CompetitionConfig.from_dict(d) for d in config_dicts]
    batch = run_batch(configs)
    report = render_batch_report(batch)
    print(report, end="")
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(report, encoding="utf-8")
        storage.write_jsonl(out / "rounds.jsonl", batch_records(batch))
    return 0


def _cmd_offline_eval(args) -> int:
    _apply_config_file(args, OFFLINE_DEFAULTS)
    if not args.model:
        raise ValueError("at least one --model name=path is required (flag or config)")
    snapshots = storage.load_offline_snapshot(args.snapshot)
    variants = {}
    for spec in args.model:
        name, _, path = spec.partition("=")
        if not path:
            raise ValueError(f"--model takes name=path, got {spec!r}")
        model = storage.load_pair_model(path)
        variants[name] = model.model if hasattr(model, "model") else model
    engine = storage.load_engine_model(args.engine) if args.engine else EngineModel()
    stats = _stats_from(
        args.corpus,
        [d.text for s in snapshots for d in s.history.documents.values()]
        + [d.text for s in snapshots for d in s.next_versions.values()],
        [s.query.text for s in snapshots],
        args.stopwords,
    )
    store = _store_from(args)
    report = offline_eval(
        snapshots,
        variants,
        engine,
        stats,
        store,
        n_perm=args.n_perm,
        seed=args.seed,
    )
    text = render_offline_report(report)
    print(text, end="")
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(text, encoding="utf-8")
        storage.write_jsonl(out / "cells.jsonl", offline_records(report))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    ui_dir = args.ui_dir
    if ui_dir is None and Path("frontend/dist").is_dir():
        ui_dir = "frontend/dist"
    app = create_app(data_dir=args.data_dir, ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_report(args) -> int:
    records = storage.read_jsonl(args.records)
    if args.kind == "batch":
        print(_render_batch_records(records), end="")
    else:
        print(_render_offline_cells(records), end="")
    return 0


def _render_batch_records(records) -> str:
    from .arena.reports import _MEASURES, _STRATEGY_ORDER, _fmt  # shared layout

    buckets: dict[str, dict[int, dict[str, list[float]]]] = {}
    queries = set()
    for r in records:
        queries.add(r["query_id"])
        cell = buckets.setdefault(r["strategy"], {}).setdefault(
            r["round"], {"rank": [], "raw": [], "scaled": [], "quality": []}
        )
        cell["rank"].append(float(r["rank"]))
        cell["quality"].append(float(r["quality_proxy"]))
        if r["raw_promotion"] is not None:
            cell["raw"].append(float(r["raw_promotion"]))
            cell["scaled"].append(float(r["scaled_promotion"]))
    strategies = [s for s in _STRATEGY_ORDER if s in buckets] + sorted(set(buckets) - set(_STRATEGY_ORDER))
    rounds = sorted({rnd for per in buckets.values() for rnd in per})
    name_w = max(16, max((len(s) for s in strategies), default=0) + 2)
    keymap = {"average_rank": "rank", "raw_promotion": "raw", "scaled_promotion": "scaled", "quality_proxy": "quality"}
    lines = [f"stored records over {len(queries)} queries"]
    header = f"{'measure':<18}{'player':<{name_w}}" + "".join(f"{f'round {r}':>12}" for r in rounds)
    lines.append(header)
    lines.append("-" * len(header))
    for key, label in _MEASURES:
        for i, strategy in enumerate(strategies):
            row = []
            for rnd in rounds:
                vals = buckets[strategy].get(rnd, {}).get(keymap[key], [])
                row.append(_fmt(sum(vals) / len(vals) if vals else None))
            lines.append(f"{label if i == 0 else '':<18}{strategy:<{name_w}}" + "".join(f"{v:>12}" for v in row))
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"


def _render_offline_cells(records) -> str:
    rows: dict[str, list[dict]] = {}
    skipped = 0
    for r in records:
        if r.get("skipped"):
            skipped += 1
            continue
        rows.setdefault(r["row"], []).append(r)
    lines = [f"stored offline cells (skipped: {skipped})"]
    header = f"{'variant':<16}{'cells':>6}{'average rank':>16}{'raw promotion':>16}{'scaled promotion':>18}{'quality proxy':>16}"
    lines.append(header)
    lines.append("-" * len(header))
    for row in sorted(rows):
        cells = rows[row]
        n = len(cells)
        mean = lambda k: sum(float(c[k]) for c in cells) / n
        lines.append(
            f"{row:<16}{n:>6}{mean('rank'):>16.3f}{mean('raw_promotion'):>16.3f}"
            f"{mean('scaled_promotion'):>18.3f}{mean('quality_proxy'):>16.3f}"
        )
    return "\n".join(lines) + "\n"


def _cmd_synth_world(args) -> int:
    from .synth import build_world

    world = build_world(
        n_train=args.train, n_online=args.online, n_offline=args.offline,
        seed=args.seed, dim=args.dim,
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    storage.save_snapshot(out / "train_snapshot.jsonl", world.training)
    storage.save_offline_snapshot(out / "offline_snapshot.jsonl", world.offline)
    storage.save_engine_model(out / "engine.json", world.engine)
    storage.write_jsonl(
        out / "corpus.jsonl",
        (
            {"id": f"c{i:05d}", "author_id": "synth", "text": t}
            for i, t in enumerate(world.corpus_texts)
        ),
    )
    storage.write_jsonl(
        out / "queries.jsonl",
        (
            {"id": q.id, "text": q.text, "topic_description": q.topic_description}
            for q in world.queries
        ),
    )
    (out / "meta.json").write_text(
        json.dumps({"seed": world.seed, "dim": world.store.dimension, "engine": world.engine.to_dict()},
                   indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    print(f"world written to {out}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rankarena", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common_io(p, corpus=True):
        p.add_argument("--corpus", help="JSONL corpus for IDF/collection stats", default=None)
        p.add_argument("--stopwords", help="stopword list, one per line", default=None)
        p.add_argument("--embeddings", help="word-vector file (term v1..vD)", default=None)
        p.add_argument("--dim", type=int, default=48, help="hash-embedding dimension when no vector file")
        p.add_argument("--engine", help="engine model JSON", default=None)

    p = sub.add_parser("train", help="snapshot -> trained pair model")
    p.add_argument("--config", default=None, help="JSON file supplying any of the other options")
    p.add_argument("--snapshot")
    p.add_argument("--out")
    p.add_argument("--dataset-out", default=None)
    p.add_argument("--label-mode", choices=("l", "r_only", "c_only"), default="l")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=1e-4)
    p.add_argument("--c-grid", default="0.001,0.01,0.1")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--m-max", type=int, default=3)
    p.add_argument("--alpha", type=float, default=0.01)
    common_io(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("modify", help="modify one document against a ranking history")
    p.add_argument("--model", required=True)
    p.add_argument("--history", required=True, help="snapshot JSONL with the query's rankings")
    p.add_argument("--doc-id", required=True)
    p.add_argument("--query-id", default=None)
    p.add_argument("--max-terms", type=int, default=150)
    p.add_argument("--explain", action="store_true", help="emit the audit record as JSON")
    common_io(p)
    p.set_defaults(func=_cmd_modify)

    p = sub.add_parser("compete", help="run competitions from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=_cmd_compete)

    p = sub.add_parser("offline-eval", help="bot vs author revisions on a round-pair snapshot")
    p.add_argument("--config", default=None, help="JSON file supplying any of the other options")
    p.add_argument("--snapshot")
    p.add_argument("--model", action="append", help="name=path, repeatable")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--n-perm", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    common_io(p)
    p.set_defaults(func=_cmd_offline_eval)

    p = sub.add_parser("serve", help="start the live-competition HTTP service")
    p.add_argument("--host", default=os.environ.get("RANKARENA_HOST", "127.0.0.1"))
    p.add_argument("--port", type=int, default=int(os.environ.get("RANKARENA_PORT", "8000")))
    p.add_argument("--data-dir", default=os.environ.get("RANKARENA_DATA_DIR", "arena-data"))
    p.add_argument("--ui-dir", default=os.environ.get("RANKARENA_UI_DIR"))
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("report", help="re-render stored result records")
    p.add_argument("--records", required=True)
    p.add_argument("--kind", choices=("batch", "offline"), default="batch")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("synth-world", help="generate a synthetic experiment world")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--train", type=int, default=31)
    p.add_argument("--online", type=int, default=15)
    p.add_argument("--offline", type=int, default=31)
    p.add_argument("--dim", type=int, default=48)
    p.set_defaults(func=_cmd_synth_world)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except KeyboardInterrupt:
        return EXIT_RUNTIME
    except Exception as exc:  # anything else is a runtime failure
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
