"""Command-line front end.

One subcommand per pipeline stage plus serving. The artifact root comes from
--artifacts, the SUBATLAS_ARTIFACT_ROOT environment variable, or ./artifacts,
in that order. `export --config <file>` runs the whole pipeline (cached
stages are skipped); the other subcommands run one stage against the tree.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import analogy as analogy_mod
from . import cluster as cluster_mod
from . import embed, ingest, intruder, pipeline, temporal

ENV_ARTIFACT_ROOT = "SUBATLAS_ARTIFACT_ROOT"


def _month_dir(args, month: str) -> Path:
    return pipeline.month_dir(args.artifacts, month)


def _print_json(doc) -> None:
    print(json.dumps(doc, sort_keys=True, indent=2))


def _load_month_model(args, month: str) -> embed.EmbeddingModel:
    model_dir = _month_dir(args, month) / "model"
    if not (model_dir / "model.json").exists():
        raise SystemExit(f"no trained model for {month}; run `subatlas train` first")
    return embed.load_model(model_dir)


def _load_month_snapshot(args, month: str) -> ingest.SnapshotCorpus:
    snap_dir = _month_dir(args, month) / "snapshot"
    if not (snap_dir / "vocab.json").exists():
        raise SystemExit(f"no snapshot for {month}; run `subatlas ingest` first")
    return ingest.load_snapshot(snap_dir)


def _discover_months(args) -> list[str]:
    base = Path(args.artifacts) / "months"
    if not base.is_dir():
        return []
    return sorted(
        d.name for d in base.iterdir() if (d / "model" / "model.json").exists()
    )


def cmd_ingest(args) -> int:
    config = ingest.FilterConfig(
        month=args.month,
        top_n_subreddits=args.top_n,
        activity_percentile=args.percentile,
    )
    tally = ingest.ParseTally()
    records = ingest.parse_dump(args.dump, args.month, tally)
    corpus = ingest.build_snapshot(records, config)
    ingest.save_snapshot(corpus, _month_dir(args, args.month) / "snapshot")
    _print_json(
        {
            "month": args.month,
            "lines": tally.lines,
            "malformed": tally.malformed,
            "wrong_month": tally.wrong_month,
            "subreddits": len(corpus.vocab),
            "users": len(corpus.contexts),
            "stats": corpus.stats,
        }
    )
    return 0


def _grid_from_args(args) -> list[embed.TrainParams]:
    single_flags = (args.negative, args.threshold, args.lr)
    if any(v is not None for v in single_flags):
        return [
            embed.TrainParams(
                dim=args.dim,
                negative_samples=args.negative if args.negative is not None else 10,
                downsample_threshold=args.threshold if args.threshold is not None else 0.0,
                learning_rate=args.lr if args.lr is not None else 0.05,
                epochs=args.epochs,
                seed=args.seed,
                workers=args.workers,
            )
        ]
    base = embed.TrainParams(
        dim=args.dim, epochs=args.epochs, seed=args.seed, workers=args.workers
    )
    return embed.default_grid(base=base)


def cmd_train(args) -> int:
    corpus = _load_month_snapshot(args, args.month)
    analogies = (
        analogy_mod.load_pairs(args.analogies)
        if args.analogies
        else analogy_mod.AnalogySet()
    )
    grid = _grid_from_args(args)
    model, report = embed.grid_search(corpus, grid, analogies)
    mdir = _month_dir(args, args.month)
    embed.save_model(model, mdir / "model")
    doc = {"month": args.month, "rows": report}
    (mdir / "grid").mkdir(parents=True, exist_ok=True)
    (mdir / "grid" / "report.json").write_text(
        json.dumps(doc, sort_keys=True, indent=2) + "\n"
    )
    for row in report:
        mark = "*" if row["selected"] else " "
        p = row["p_at_5"]
        print(
            f"{mark} neg={row['params']['negative_samples']:<3}"
            f" t={row['params']['downsample_threshold']:<6}"
            f" lr={row['params']['learning_rate']:<5}"
            f" P@5={'n/a' if p is None else f'{p:.4f}'}"
            f" solvable={row['solvable']}"
        )
    return 0


def cmd_analogies(args) -> int:
    model = _load_month_model(args, args.month)
    pairs = analogy_mod.load_pairs(args.pairs)
    queries = analogy_mod.generate_queries(pairs)
    try:
        result = analogy_mod.precision_at_k(model, queries, k=args.k)
    except analogy_mod.UndefinedPrecisionError as exc:
        raise SystemExit(str(exc)) from None
    _print_json(result)
    return 0


def cmd_cluster(args) -> int:
    model = _load_month_model(args, args.month)
    corpus = _load_month_snapshot(args, args.month)
    mdir = _month_dir(args, args.month)
    if args.algo == "kmeanspp":
        clustering = cluster_mod.kmeans_pp(model, k=args.k, seed=args.seed)
    else:
        linkage = args.algo.removeprefix("ha_")
        clustering, tree = cluster_mod.agglomerative(model, linkage=linkage, k=args.k)
        cluster_mod.save_merge_tree(
            tree, mdir / "clusters" / f"tree-{linkage}.json"
        )
    doc = pipeline._cluster_doc(clustering, corpus.vocab)
    path = mdir / "clusters" / f"{args.algo}-k{args.k}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    sizes = clustering.sizes()
    print(
        f"{args.algo} k={args.k}: sizes min={sizes.min()} median={int(sorted(sizes)[len(sizes) // 2])}"
        f" max={sizes.max()} -> {path}"
    )
    return 0


def cmd_metrics(args) -> int:
    model = _load_month_model(args, args.month)
    path = _month_dir(args, args.month) / "clusters" / f"{args.algo}-k{args.k}.json"
    if not path.exists():
        raise SystemExit(f"no stored clustering {args.algo} k={args.k} for {args.month}")
    clustering = cluster_mod.load_clustering(path)
    doc = pipeline._metrics_doc(model, clustering)
    out = _month_dir(args, args.month) / "metrics" / f"{args.algo}-k{args.k}.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    _print_json(doc)
    return 0


def cmd_stability(args) -> int:
    months = args.months or _discover_months(args)
    if len(months) < 2:
        raise SystemExit("stability needs at least 2 months with trained models")
    models = {m: _load_month_model(args, m) for m in months}
    counts = {m: _load_month_snapshot(args, m).vocab for m in months}
    report = temporal.nn_stability(models, n=args.n, comment_counts=counts)
    out = Path(args.artifacts) / "cross" / "stability.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n")
    summary = report.summary()
    print(
        f"{len(report.scores)} subreddits over {len(months)} months: "
        f"mean={summary['mean']:.4f} stddev={summary['stddev']:.4f} -> {out}"
    )
    return 0


def cmd_vi(args) -> int:
    months = args.months or _discover_months(args)
    if not months:
        raise SystemExit("no months with artifacts found")
    if args.pairing == "months":
        per_month = {}
        for m in months:
            path = _month_dir(args, m) / "clusters" / f"{args.algo}-k{args.k}.json"
            if path.exists():
                per_month[m] = cluster_mod.load_clustering(path)
        if not per_month:
            raise SystemExit(f"no stored {args.algo} k={args.k} clusterings")
        matrix = temporal.vi_across_months(per_month)
        out = Path(args.artifacts) / "cross" / "vi" / f"{args.algo}-k{args.k}.json"
        doc = {"algorithm": args.algo, "k": args.k, **matrix.to_dict()}
    else:
        by_algo: dict[str, dict] = {}
        for algo in cluster_mod.ALGORITHMS:
            for m in months:
                path = _month_dir(args, m) / "clusters" / f"{algo}-k{args.k}.json"
                if path.exists():
                    by_algo.setdefault(algo, {})[m] = cluster_mod.load_clustering(path)
        if len(by_algo) < 2:
            raise SystemExit("cross-algorithm VI needs clusterings from >= 2 algorithms")
        matrix = temporal.vi_across_algorithms(by_algo)
        out = Path(args.artifacts) / "cross" / "vi" / f"algorithms-k{args.k}.json"
        doc = {"k": args.k, **matrix.to_dict()}
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    _print_json(doc)
    return 0


def cmd_intruder_gen(args) -> int:
    path = _month_dir(args, args.month) / "clusters" / f"{args.algo}-k{args.k}.json"
    if not path.exists():
        raise SystemExit(f"no stored clustering {args.algo} k={args.k} for {args.month}")
    clustering = cluster_mod.load_clustering(path)
    counts = _load_month_snapshot(args, args.month).vocab
    tasks, skipped = intruder.generate_tasks(clustering, counts, seed=args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    intruder.write_task_sheets(tasks, out_dir / "tasks.csv", out_dir / "key.csv")
    intruder.write_coherence_sheet(clustering, out_dir / "clusters.csv")
    (out_dir / "skips.json").write_text(
        json.dumps(skipped, sort_keys=True, indent=2) + "\n"
    )
    print(f"{len(tasks)} tasks, {len(skipped)} clusters skipped -> {out_dir}")
    return 0


def cmd_intruder_score(args) -> int:
    tasks = intruder.tasks_from_sheets(
        intruder.read_tasks(args.tasks), intruder.read_key(args.key)
    )
    responses = intruder.read_responses(args.responses)
    result = intruder.score_responses(tasks, responses)
    _print_json(result)
    return 0


def cmd_coherence_score(args) -> int:
    from .metrics import coherence_scores, gwet_ac1

    annotations = intruder.read_coherence_responses(args.responses)
    if args.clusters:
        import csv as _csv

        with open(args.clusters, newline="") as fh:
            cluster_ids = [int(row["cluster_id"]) for row in _csv.DictReader(fh)]
    else:
        cluster_ids = sorted({a.cluster_id for a in annotations})
    doc = coherence_scores(annotations, cluster_ids)
    doc["gwet_ac1"] = gwet_ac1(annotations)
    _print_json(doc)
    return 0


def cmd_export(args) -> int:
    if args.config:
        config = pipeline.PipelineConfig.from_file(
            args.config, artifact_root=args.artifacts_override
        )
        report = pipeline.run_pipeline(config)
        _print_json(report)
        failed = [
            m for m, s in report["months"].items() if s["status"] == "failed"
        ]
        return 1 if failed else 0
    result = pipeline.export_tree(args.artifacts, stability_n=args.stability_n)
    _print_json(result)
    return 0


def cmd_serve(args) -> int:
    from .server import serve

    serve(args.artifacts, port=args.port, host=args.host)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subatlas",
        description="Monthly subreddit embeddings: ingest, train, cluster, analyze, serve.",
    )
    parser.add_argument(
        "--artifacts",
        default=None,
        help=f"artifact tree root (or ${ENV_ARTIFACT_ROOT}; default ./artifacts)",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build a monthly snapshot from a comment dump")
    p.add_argument("--month", required=True)
    p.add_argument("--dump", required=True, help="jsonl[.gz|.zst] comment dump")
    p.add_argument("--top-n", type=int, default=10_000)
    p.add_argument("--percentile", type=float, default=0.95)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="grid-search SGNS embeddings on a snapshot")
    p.add_argument("--month", required=True)
    p.add_argument("--analogies", help="analogy pairs file used for model selection")
    p.add_argument("--dim", type=int, default=100)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--negative", type=int, help="single run: negative samples")
    p.add_argument("--threshold", type=float, help="single run: downsample threshold")
    p.add_argument("--lr", type=float, help="single run: learning rate")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("analogies", help="score a stored model on analogy pairs")
    p.add_argument("--month", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("-k", type=int, default=5)
    p.set_defaults(func=cmd_analogies)

    p = sub.add_parser("cluster", help="cluster a stored model")
    p.add_argument("--month", required=True)
    p.add_argument("--algo", choices=cluster_mod.ALGORITHMS, default="kmeanspp")
    p.add_argument("-k", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("metrics", help="silhouette / Davies-Bouldin for a clustering")
    p.add_argument("--month", required=True)
    p.add_argument("--algo", choices=cluster_mod.ALGORITHMS, default="kmeanspp")
    p.add_argument("-k", type=int, default=100)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("stability", help="adjacent-month neighbor stability")
    p.add_argument("--months", nargs="*", help="default: every built month")
    p.add_argument("-n", type=int, default=20, help="neighbor set size")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("vi", help="variation-of-information matrices")
    p.add_argument("--months", nargs="*")
    p.add_argument("--algo", choices=cluster_mod.ALGORITHMS, default="kmeanspp")
    p.add_argument("-k", type=int, default=100)
    p.add_argument("--pairing", choices=("months", "algorithms"), default="months")
    p.set_defaults(func=cmd_vi)

    p = sub.add_parser("intruder-gen", help="generate intruder annotation sheets")
    p.add_argument("--month", required=True)
    p.add_argument("--algo", choices=cluster_mod.ALGORITHMS, default="kmeanspp")
    p.add_argument("-k", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_intruder_gen)

    p = sub.add_parser("intruder-score", help="score returned intruder responses")
    p.add_argument("--tasks", required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--responses", required=True)
    p.set_defaults(func=cmd_intruder_score)

    p = sub.add_parser(
        "coherence-score", help="score coherent/incoherent cluster judgements"
    )
    p.add_argument("--responses", required=True)
    p.add_argument("--clusters", help="clusters.csv; default: ids seen in responses")
    p.set_defaults(func=cmd_coherence_score)

    p = sub.add_parser(
        "export",
        help="run the configured pipeline, or rebuild servable docs from stages",
    )
    p.add_argument("--config", help="pipeline config file (yaml or json)")
    p.add_argument("--stability-n", type=int, default=20)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("serve", help="serve the artifact tree over HTTP")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    # flag beats env beats config file beats ./artifacts
    args.artifacts_override = args.artifacts or os.environ.get(ENV_ARTIFACT_ROOT)
    args.artifacts = args.artifacts_override or "artifacts"
    try:
        return args.func(args)
    except (ingest.IngestError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
