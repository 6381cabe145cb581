"""Command line front end: ingest corpora, train models, evaluate, serve.

Every subcommand takes --seed, --config, and --json. A config file (JSON,
or TOML on interpreters that ship tomllib) supplies defaults under the
same names as the flags, plus "embed", "classifier", and "gae" sections
for model settings; explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import evaluation, pathgen, service
from .corpus import corpus_stats, ingest_documents, load_document_set, save_document_set
from .embed import EmbedConfig, build_concept_matrix, load_pvdm, save_pvdm, train_pvdm
from .gae import TrainConfig
from .graph import graph_statistics
from .pairclf import (ClassifierConfig, build_pair_dataset, oversample,
                      predict_pairs, save_classifier, train_classifier)
from .synth import make_planted_corpus, make_planted_graph

log = logging.getLogger(__name__)

METHOD_ALIASES = {
    "nb": "naive_bayes",
    "svm": "linear_svm",
    "lr": "logistic_regression",
    "rf": "random_forest",
}

# settings under which the planted benchmark is comfortably separable
SYNTH_EMBED = {"dim": 48, "window": 4, "epochs": 30, "min_count": 1}


def _method(name: str) -> str:
    return METHOD_ALIASES.get(name, name)


def _read_config(path: str | None) -> dict:
    if not path:
        return {}
    p = Path(path)
    if p.suffix == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError as exc:
            raise ValueError("TOML configs need Python 3.11+; use JSON") from exc
        return tomllib.loads(p.read_text(encoding="utf-8"))
    return json.loads(p.read_text(encoding="utf-8"))


def _pick(args: argparse.Namespace, cfg: dict, key: str, default=None):
    value = getattr(args, key.replace("-", "_"), None)
    if value is not None:
        return value
    return cfg.get(key, default)


def _embed_config(args, cfg: dict, base: dict | None = None) -> EmbedConfig:
    section = dict(base or {})
    section.update(cfg.get("embed", {}))
    for flag, key in (("dim", "dim"), ("window", "window"),
                      ("epochs", "epochs"), ("min_count", "min_count")):
        value = getattr(args, flag, None)
        if value is not None:
            section[key] = value
    if args.seed is not None:
        section["seed"] = args.seed
    return EmbedConfig(**section)


def _clf_config(cfg: dict) -> ClassifierConfig:
    return ClassifierConfig(**cfg.get("classifier", {}))


def _gae_config(cfg: dict) -> TrainConfig:
    return TrainConfig(**cfg.get("gae", {}))


def _load_corpus_arg(path: str, provenance: str):
    p = Path(path)
    if p.is_file() and p.suffix == ".json":
        return load_document_set(p)
    return ingest_documents(p, provenance=provenance)


def _synthetic(args, cfg: dict):
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    g = make_planted_graph()
    docs = make_planted_corpus(g, seed=seed)
    return docs, g


def _corpora(args, cfg: dict):
    """Resolve --corpus/--source/--graph into (corpora dict, graph, settings)."""
    settings = tuple(args.corpus) if args.corpus else ("synthetic",)
    if settings == ("synthetic",):
        docs, g = _synthetic(args, cfg)
        return {"synthetic": docs}, g, settings
    sources = dict(cfg.get("sources", {}))
    for item in args.source or []:
        name, _, path = item.partition("=")
        if not path:
            raise ValueError(f"--source takes NAME=PATH, got {item!r}")
        sources[name] = path
    graph_dir = _pick(args, cfg, "graph")
    if not graph_dir:
        raise ValueError("non-synthetic corpora need --graph")
    g = service.load_graph_dir(graph_dir, merge=_pick(args, cfg, "merge", "intersection"))
    provenance = _pick(args, cfg, "provenance", "lecturebank")
    corpora = {}
    for name in settings:
        if name == "combined":
            continue
        if name not in sources:
            raise ValueError(f"corpus setting {name!r} needs --source {name}=PATH")
        corpora[name] = _load_corpus_arg(sources[name], provenance)
    for name in ("tutorialbank", "lecturebank"):
        if "combined" in settings and name in sources and name not in corpora:
            corpora[name] = _load_corpus_arg(sources[name], provenance)
    return corpora, g, settings


def _print_json(payload) -> None:
    print(json.dumps(payload, sort_keys=True, indent=2))


# ---- subcommands ----

def _cmd_ingest(args, cfg: dict) -> int:
    source = _pick(args, cfg, "source")
    out = _pick(args, cfg, "out")
    if not source or not out:
        raise ValueError("ingest needs --source and --out")
    docset = ingest_documents(source, provenance=_pick(args, cfg, "provenance", "lecturebank"))
    save_document_set(docset, out)
    if args.json:
        _print_json({"lectures": len(docset.documents),
                     "skipped": len(docset.skipped),
                     "stats": corpus_stats(docset)})
    else:
        print(f"ingested {len(docset.documents)} lectures "
              f"({len(docset.skipped)} skipped) -> {out}")
    return 0


def _cmd_stats(args, cfg: dict) -> int:
    graph_dir = _pick(args, cfg, "graph")
    if not graph_dir:
        raise ValueError("stats needs --graph")
    g = service.load_graph_dir(graph_dir, merge=_pick(args, cfg, "merge", "intersection"))
    _print_json(service.stats_payload(graph_statistics(g)))
    return 0


def _cmd_train_embed(args, cfg: dict) -> int:
    corpus = _pick(args, cfg, "corpus-path")
    out = _pick(args, cfg, "out")
    if not corpus or not out:
        raise ValueError("train-embed needs --corpus-path and --out")
    docset = _load_corpus_arg(corpus, _pick(args, cfg, "provenance", "lecturebank"))
    model = train_pvdm(docset, _embed_config(args, cfg))
    save_pvdm(model, out)
    summary = {"lectures": len(docset.documents),
               "vocabulary": len(model.vocab),
               "epochs": len(model.epoch_losses),
               "final_loss": model.epoch_losses[-1]}
    if args.json:
        _print_json(summary)
    else:
        print(f"trained on {summary['lectures']} lectures, "
              f"vocabulary {summary['vocabulary']}, "
              f"final loss {summary['final_loss']:.4f} -> {out}")
    return 0


def _cmd_train_model(args, cfg: dict) -> int:
    model_path = _pick(args, cfg, "model")
    graph_dir = _pick(args, cfg, "graph")
    out = _pick(args, cfg, "out")
    if not model_path or not graph_dir or not out:
        raise ValueError("train-model needs --model, --graph, and --out")
    kind = _method(_pick(args, cfg, "kind", "linear_svm"))
    g = service.load_graph_dir(graph_dir, merge=_pick(args, cfg, "merge", "intersection"))
    model = load_pvdm(model_path)
    X = build_concept_matrix(model, [c.name for c in g.concepts])
    ds = build_pair_dataset(X, g)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    train_ds = ds if args.no_oversample else oversample(ds, seed=seed)
    clf = train_classifier(kind, train_ds, _clf_config(cfg), seed=seed)
    save_classifier(out, clf)
    labels, _ = predict_pairs(clf, train_ds.features)
    accuracy = float(np.mean(np.asarray(labels) == np.asarray(train_ds.labels)))
    if args.json:
        _print_json({"kind": kind, "pairs": len(train_ds.labels),
                     "train_accuracy": accuracy})
    else:
        print(f"trained {kind} on {len(train_ds.labels)} pairs, "
              f"train accuracy {accuracy:.3f} -> {out}")
    return 0


def _cmd_evaluate(args, cfg: dict) -> int:
    corpora, g, settings = _corpora(args, cfg)
    methods = tuple(_method(m) for m in args.method) if args.method else evaluation.METHODS
    base = SYNTH_EMBED if settings == ("synthetic",) else None
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    reports = evaluation.run_experiment(
        corpora, g, corpus_settings=settings, methods=methods,
        embed_config=_embed_config(args, cfg, base=base),
        clf_config=_clf_config(cfg), gae_config=_gae_config(cfg),
        k=int(_pick(args, cfg, "k", 5)),
        test_pos_frac=float(_pick(args, cfg, "test-pos-frac", 0.1)),
        seed=seed, shuffle_labels=args.shuffle_labels)
    text = evaluation.report_to_csv(reports) if args.csv else evaluation.report_to_json(reports)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote report -> {args.out}")
    else:
        print(text)
    return 0


def _cmd_recover(args, cfg: dict) -> int:
    corpora, g, settings = _corpora(args, cfg)
    docs = evaluation._corpus_for_setting(corpora, settings[0])
    base = SYNTH_EMBED if settings[0] == "synthetic" else None
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    model = train_pvdm(docs, _embed_config(args, cfg, base=base))
    X = build_concept_matrix(model, [c.name for c in g.concepts])
    ds = build_pair_dataset(X, g)
    kind = _method(_pick(args, cfg, "method-name", "linear_svm"))
    clf = train_classifier(kind, oversample(ds, seed=seed), _clf_config(cfg), seed=seed)
    labels, _ = predict_pairs(clf, ds.features)
    names = [(g.concepts[s].name, g.concepts[t].name) for s, t in ds.pairs]
    recovered = evaluation.recover_graph(names, labels)
    text = (evaluation.recovered_to_dot(recovered) if args.format == "dot"
            else evaluation.recovered_to_json(recovered))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote recovered graph -> {args.out}")
    else:
        print(text)
    return 0


def _cmd_path(args, cfg: dict) -> int:
    graph_dir = _pick(args, cfg, "graph")
    if not graph_dir:
        raise ValueError("path needs --graph")
    g = service.load_graph_dir(graph_dir, merge=_pick(args, cfg, "merge", "intersection"))
    path = pathgen.prerequisite_closure(
        g, args.target, known=args.known or [],
        prune_satisfied=args.prune, max_depth=args.max_depth)
    corpus = _pick(args, cfg, "corpus-path")
    if corpus:
        docset = _load_corpus_arg(corpus, _pick(args, cfg, "provenance", "lecturebank"))
        labels = [d.taxonomy_label for d in docset.documents if d.taxonomy_label]
        mapping = pathgen.concept_taxonomy_mapping(
            [c.name for c in g.concepts], labels)
        path = pathgen.attach_resources(path, pathgen.resource_index(docset), mapping)
    print(pathgen.path_to_json(path))
    return 0


def _cmd_serve(args, cfg: dict) -> int:
    merged = dict(cfg)
    for key in ("graph", "model", "classifier", "merge", "provenance"):
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if args.corpus_path is not None:
        merged["corpus"] = args.corpus_path
    if args.host is not None:
        merged["host"] = args.host
    if args.port is not None:
        merged["port"] = args.port
    service.serve(merged)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--config", default=None, help="JSON or TOML settings file")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    parser = argparse.ArgumentParser(
        prog="prereqchain",
        description="Prerequisite chains: ingest lectures, train models, "
                    "evaluate link prediction, and serve learning paths.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common],
                       help="parse a lecture corpus into a JSON artifact")
    p.add_argument("--source", help="lecture directory or manifest.jsonl")
    p.add_argument("--out", help="output docset .json")
    p.add_argument("--provenance", default=None)
    p.set_defaults(handler=_cmd_ingest)

    p = sub.add_parser("stats", parents=[common],
                       help="print graph statistics as JSON")
    p.add_argument("--graph", help="directory with concepts.tsv and edges*.tsv")
    p.add_argument("--merge", default=None, choices=("intersection", "union", "single"))
    p.set_defaults(handler=_cmd_stats)

    p = sub.add_parser("train-embed", parents=[common],
                       help="train lecture embeddings")
    p.add_argument("--corpus-path", help="docset .json or lecture directory")
    p.add_argument("--out", help="output model .npz")
    p.add_argument("--provenance", default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--min-count", type=int, default=None)
    p.set_defaults(handler=_cmd_train_embed)

    p = sub.add_parser("train-model", parents=[common],
                       help="train a pair classifier on a graph")
    p.add_argument("--kind", default=None,
                   help="nb | svm | lr | rf or a full method name")
    p.add_argument("--model", help="embedding model .npz")
    p.add_argument("--graph", help="directory with concepts.tsv and edges*.tsv")
    p.add_argument("--merge", default=None, choices=("intersection", "union", "single"))
    p.add_argument("--out", help="output classifier .npz")
    p.add_argument("--no-oversample", action="store_true")
    p.set_defaults(handler=_cmd_train_model)

    p = sub.add_parser("evaluate", parents=[common],
                       help="run the fold-based evaluation protocol")
    p.add_argument("--corpus", action="append", default=None,
                   help="corpus setting; 'synthetic' (default) needs no paths")
    p.add_argument("--source", action="append", default=None, metavar="NAME=PATH")
    p.add_argument("--graph", default=None)
    p.add_argument("--merge", default=None, choices=("intersection", "union", "single"))
    p.add_argument("--provenance", default=None)
    p.add_argument("--method", "-m", action="append", default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--test-pos-frac", type=float, default=None)
    p.add_argument("--shuffle-labels", action="store_true",
                   help="chance-level control: permute training labels")
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--min-count", type=int, default=None)
    p.add_argument("--csv", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_evaluate)

    p = sub.add_parser("recover", parents=[common],
                       help="predict every pair and emit the recovered graph")
    p.add_argument("--corpus", action="append", default=None)
    p.add_argument("--source", action="append", default=None, metavar="NAME=PATH")
    p.add_argument("--graph", default=None)
    p.add_argument("--merge", default=None, choices=("intersection", "union", "single"))
    p.add_argument("--provenance", default=None)
    p.add_argument("--method-name", default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--min-count", type=int, default=None)
    p.add_argument("--format", default="json", choices=("json", "dot"))
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_recover)

    p = sub.add_parser("path", parents=[common],
                       help="print the prerequisite path to a target concept")
    p.add_argument("--target", required=True)
    p.add_argument("--known", action="append", default=None)
    p.add_argument("--graph", default=None)
    p.add_argument("--merge", default=None, choices=("intersection", "union", "single"))
    p.add_argument("--corpus-path", default=None,
                   help="attach lecture resources from this corpus")
    p.add_argument("--provenance", default=None)
    p.add_argument("--prune", action="store_true",
                   help="drop prerequisites already covered by known concepts")
    p.add_argument("--max-depth", type=int, default=None)
    p.set_defaults(handler=_cmd_path)

    p = sub.add_parser("serve", parents=[common],
                       help="run the HTTP service over loaded artifacts")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--graph", default=None)
    p.add_argument("--model", default=None)
    p.add_argument("--classifier", default=None)
    p.add_argument("--corpus-path", default=None)
    p.add_argument("--merge", default=None, choices=("intersection", "union", "single"))
    p.add_argument("--provenance", default=None)
    p.set_defaults(handler=_cmd_serve)

    return parser


def cli_dispatch(argv: list[str]) -> int:
    """Parse argv and run one subcommand; returns the exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _read_config(args.config)
        return args.handler(args, cfg)
    except (OSError, ValueError, KeyError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {message}", file=sys.stderr)
        return 1


def main() -> None:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
