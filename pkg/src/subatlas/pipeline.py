"""End-to-end orchestration: ingest -> train -> cluster -> export.

Produces an artifact tree rooted at PipelineConfig.artifact_root:

    manifest.json
    months/<YYYY-MM>/
        fingerprint.json
        snapshot/            vocab.json, stats.json, contexts.bin
        grid/report.json
        model/               model.json, vectors.f32 (best by analogy P@5)
        neighbors_top20.json
        layout2d.json
        clusters/            <algo>-k<k>.json, tree-<linkage>.json
        metrics/             <algo>-k<k>.json
    cross/
        fingerprint.json
        stability.json
        vi/<algo>-k<k>.json

A month is rebuilt only when its fingerprint (filter + grid + input hashes +
clustering requests) changes. A failed month is reported and skipped; the
others still build.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import analogy as analogy_mod
from . import cluster as cluster_mod
from . import embed, ingest, metrics, temporal

__all__ = [
    "PipelineConfig",
    "layout2d",
    "run_pipeline",
    "export_month",
    "export_cross",
    "artifact_hash",
    "month_dir",
]

log = logging.getLogger(__name__)

NEIGHBORS_N = 20


@dataclass
class PipelineConfig:
    months: list[str]
    inputs: dict[str, str]  # month -> raw dump path
    artifact_root: str
    analogy_path: str | None = None
    top_n_subreddits: int = 10_000
    activity_percentile: float = 0.95
    grid: list[embed.TrainParams] = field(default_factory=embed.default_grid)
    clusterings: list[tuple[str, int]] = field(
        default_factory=lambda: [("kmeanspp", 100)]
    )
    cluster_seed: int = 0
    stability_n: int = 20
    port: int = 8000

    def __post_init__(self):
        if not self.months:
            raise ValueError("months must be non-empty")
        missing = [m for m in self.months if m not in self.inputs]
        if missing:
            raise ValueError(f"no input dump configured for months {missing}")
        for algo, k in self.clusterings:
            if algo not in cluster_mod.ALGORITHMS:
                raise ValueError(f"unknown clustering algorithm {algo!r}")
            if k < 1:
                raise ValueError(f"k must be >= 1, got {k}")

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "PipelineConfig":
        """Load a YAML or JSON config file; keyword overrides win."""
        path = Path(path)
        text = path.read_text()
        if path.suffix in {".yaml", ".yml"}:
            import yaml

            raw = yaml.safe_load(text)
        else:
            raw = json.loads(text)
        if not isinstance(raw, dict):
            raise ValueError(f"{path}: config must be a mapping")
        raw.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: Mapping) -> "PipelineConfig":
        raw = dict(raw)
        grid_spec = raw.pop("grid", None)
        if grid_spec is None:
            grid = embed.default_grid()
        elif isinstance(grid_spec, list):
            grid = [embed.TrainParams(**entry) for entry in grid_spec]
        else:
            grid = _expand_grid(dict(grid_spec))
        clusterings = [
            (str(algo), int(k)) for algo, k in raw.pop("clusterings", [["kmeanspp", 100]])
        ]
        filt = raw.pop("filter", {})
        known = {
            "months",
            "inputs",
            "artifact_root",
            "analogy_path",
            "cluster_seed",
            "stability_n",
            "port",
        }
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for req in ("months", "inputs", "artifact_root"):
            if req not in raw:
                raise ValueError(f"config missing required key {req!r}")
        return cls(
            grid=grid,
            clusterings=clusterings,
            top_n_subreddits=filt.get("top_n_subreddits", 10_000),
            activity_percentile=filt.get("activity_percentile", 0.95),
            **raw,
        )

    def to_dict(self) -> dict:
        return {
            "months": list(self.months),
            "inputs": dict(sorted(self.inputs.items())),
            "artifact_root": self.artifact_root,
            "analogy_path": self.analogy_path,
            "filter": {
                "top_n_subreddits": self.top_n_subreddits,
                "activity_percentile": self.activity_percentile,
            },
            "grid": [p.to_dict() for p in self.grid],
            "clusterings": [[a, k] for a, k in self.clusterings],
            "cluster_seed": self.cluster_seed,
            "stability_n": self.stability_n,
            "port": self.port,
        }

    def filter_for(self, month: str) -> ingest.FilterConfig:
        return ingest.FilterConfig(
            month=month,
            top_n_subreddits=self.top_n_subreddits,
            activity_percentile=self.activity_percentile,
        )


def _expand_grid(spec: dict) -> list[embed.TrainParams]:
    """Product-form grid: list-valued axes are crossed, scalars are shared."""
    axes = {
        "negative_samples": spec.pop("negative_samples", [10, 20]),
        "downsample_threshold": spec.pop("downsample_threshold", [0.0, 0.001, 0.005]),
        "learning_rate": spec.pop("learning_rate", [0.05, 0.08]),
    }
    for name, vals in axes.items():
        if not isinstance(vals, list):
            axes[name] = [vals]
    out = []
    for neg in axes["negative_samples"]:
        for t in axes["downsample_threshold"]:
            for lr in axes["learning_rate"]:
                out.append(
                    embed.TrainParams(
                        negative_samples=neg,
                        downsample_threshold=t,
                        learning_rate=lr,
                        **spec,
                    )
                )
    return out


# ---------------------------------------------------------------------------
# paths


def month_dir(root: str | Path, month: str) -> Path:
    return Path(root) / "months" / month


def _canonical(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _write_json(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _file_sha(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def artifact_hash(root: str | Path) -> str:
    """Content hash of the whole tree: sha256 over (relative path, file hash)
    pairs in sorted order."""
    root = Path(root)
    h = hashlib.sha256()
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        h.update(str(path.relative_to(root)).encode())
        h.update(b"\0")
        h.update(_file_sha(path).encode())
        h.update(b"\0")
    return h.hexdigest()


# ---------------------------------------------------------------------------
# layout


def layout2d(model: embed.EmbeddingModel) -> dict[str, tuple[float, float]]:
    """Project normalized vectors to 2-D by principal components.

    Signs are pinned so each component's largest-magnitude loading is
    positive, making the projection deterministic across runs.
    """
    if not model.normalized:
        raise ValueError("layout2d requires a normalized model")
    if len(model.vocab) < 2:
        raise ValueError("layout2d requires at least 2 subreddits")
    x = model.vectors.astype(np.float64)
    x = x - x.mean(axis=0)
    _, s, vt = np.linalg.svd(x, full_matrices=False)
    if s[0] <= 1e-12:
        raise ValueError("layout2d: all vectors coincide (rank 0)")
    coords = np.zeros((x.shape[0], 2))
    for c in range(min(2, vt.shape[0])):
        loading = vt[c]
        sign = 1.0 if loading[np.argmax(np.abs(loading))] >= 0 else -1.0
        coords[:, c] = sign * (x @ loading)
    return {
        name: (float(coords[i, 0]), float(coords[i, 1]))
        for i, name in enumerate(model.vocab)
    }


# ---------------------------------------------------------------------------
# per-month build


def _month_fingerprint(config: PipelineConfig, month: str) -> str:
    doc = {
        "filter": {
            "top_n_subreddits": config.top_n_subreddits,
            "activity_percentile": config.activity_percentile,
        },
        "grid": [p.to_dict() for p in config.grid],
        "clusterings": [[a, k] for a, k in config.clusterings],
        "cluster_seed": config.cluster_seed,
        "neighbors_n": NEIGHBORS_N,
        "dump_sha": _file_sha(Path(config.inputs[month])),
        "analogy_sha": (
            _file_sha(Path(config.analogy_path)) if config.analogy_path else None
        ),
    }
    return hashlib.sha256(_canonical(doc).encode()).hexdigest()


def _expected_month_files(config: PipelineConfig, mdir: Path) -> list[Path]:
    files = [
        mdir / "snapshot" / "vocab.json",
        mdir / "snapshot" / "stats.json",
        mdir / "snapshot" / "contexts.bin",
        mdir / "grid" / "report.json",
        mdir / "model" / "model.json",
        mdir / "model" / "vectors.f32",
        mdir / "neighbors_top20.json",
        mdir / "layout2d.json",
    ]
    for algo, k in config.clusterings:
        files.append(mdir / "clusters" / f"{algo}-k{k}.json")
        files.append(mdir / "metrics" / f"{algo}-k{k}.json")
    return files


def _load_analogies(config: PipelineConfig) -> analogy_mod.AnalogySet:
    if config.analogy_path is None:
        return analogy_mod.AnalogySet()
    return analogy_mod.load_pairs(config.analogy_path)


def _run_month(config: PipelineConfig, month: str) -> dict:
    mdir = month_dir(config.artifact_root, month)
    try:
        fingerprint = _month_fingerprint(config, month)
    except OSError as exc:
        log.exception("month %s failed reading inputs", month)
        return {"status": "failed", "stage": "fingerprint", "error": str(exc)}
    fp_path = mdir / "fingerprint.json"
    if fp_path.exists():
        stored = json.loads(fp_path.read_text()).get("hash")
        if stored == fingerprint and all(
            p.exists() for p in _expected_month_files(config, mdir)
        ):
            return {"status": "cached", "fingerprint": fingerprint}

    stage = "ingest"
    try:
        tally = ingest.ParseTally()
        records = ingest.parse_dump(config.inputs[month], month, tally)
        corpus = ingest.build_snapshot(records, config.filter_for(month))
        ingest.save_snapshot(corpus, mdir / "snapshot")

        stage = "train"
        analogies = _load_analogies(config)
        model, report = embed.grid_search(corpus, config.grid, analogies)
        embed.save_model(model, mdir / "model")
        _write_json(mdir / "grid" / "report.json", {"month": month, "rows": report})

        stage = "cluster"
        clusterings = _cluster_month(config, model)

        stage = "export"
        export_month(config.artifact_root, month, corpus, model, clusterings)
    except Exception as exc:  # noqa: BLE001 - a failed month must not kill the run
        log.exception("month %s failed at stage %s", month, stage)
        return {"status": "failed", "stage": stage, "error": str(exc)}

    _write_json(fp_path, {"hash": fingerprint})
    return {"status": "built", "fingerprint": fingerprint}


def _cluster_month(
    config: PipelineConfig, model: embed.EmbeddingModel
) -> dict[tuple[str, int], cluster_mod.Clustering]:
    mdir = month_dir(config.artifact_root, model.month)
    out: dict[tuple[str, int], cluster_mod.Clustering] = {}
    trees: dict[str, cluster_mod.MergeTree] = {}
    for algo, k in config.clusterings:
        if algo == "kmeanspp":
            clustering = cluster_mod.kmeans_pp(model, k=k, seed=config.cluster_seed)
        else:
            linkage = algo.removeprefix("ha_")
            if linkage not in trees:
                _, tree = cluster_mod.agglomerative(model, k=k, linkage=linkage)
                trees[linkage] = tree
                cluster_mod.save_merge_tree(
                    trees[linkage], mdir / "clusters" / f"tree-{linkage}.json"
                )
            clustering = cluster_mod.cut_tree(trees[linkage], k, month=model.month)
        out[(algo, k)] = clustering
    return out


def _cluster_doc(
    clustering: cluster_mod.Clustering, counts: Mapping[str, int]
) -> dict:
    sizes = clustering.sizes().tolist()
    top_members = {
        str(cid): sorted(members, key=lambda s: (-counts.get(s, 0), s))[:5]
        for cid, members in clustering.groups().items()
    }
    return {
        "month": clustering.month,
        "algorithm": clustering.algorithm,
        "k": clustering.k,
        "seed": clustering.seed,
        "assignment": dict(sorted(clustering.assignment.items())),
        "sizes": sizes,
        "top_members": top_members,
    }


def export_month(
    root: str | Path,
    month: str,
    corpus: ingest.SnapshotCorpus,
    model: embed.EmbeddingModel,
    clusterings: Mapping[tuple[str, int], cluster_mod.Clustering],
) -> None:
    """Write the servable per-month artifacts: neighbors, layout, enriched
    clusterings, intrinsic metrics."""
    mdir = month_dir(root, month)
    n = min(NEIGHBORS_N, max(len(model.vocab) - 1, 1))
    neighbors = temporal.top_neighbors_with_sims(model, n)
    _write_json(
        mdir / "neighbors_top20.json",
        {
            "month": month,
            "n": n,
            "neighbors": {
                s: [{"subreddit": name, "similarity": sim} for name, sim in pairs]
                for s, pairs in sorted(neighbors.items())
            },
        },
    )
    coords = layout2d(model)
    _write_json(
        mdir / "layout2d.json",
        {
            "month": month,
            "coordinates": {s: list(xy) for s, xy in sorted(coords.items())},
        },
    )
    for (algo, k), clustering in clusterings.items():
        _write_json(
            mdir / "clusters" / f"{algo}-k{k}.json",
            _cluster_doc(clustering, corpus.vocab),
        )
        _write_json(
            mdir / "metrics" / f"{algo}-k{k}.json",
            _metrics_doc(model, clustering),
        )


def _metrics_doc(
    model: embed.EmbeddingModel, clustering: cluster_mod.Clustering
) -> dict:
    labels = cluster_mod.labels_for(clustering, model.vocab)
    vectors = model.vectors.astype(np.float64)
    sil_mean, _ = metrics.silhouette(vectors, labels)
    try:
        db = metrics.davies_bouldin(vectors, labels)
        db_error = None
    except ValueError as exc:
        db, db_error = None, str(exc)
    doc = {
        "month": clustering.month,
        "algorithm": clustering.algorithm,
        "k": clustering.k,
        "silhouette": sil_mean,
        "davies_bouldin": db,
    }
    if db_error is not None:
        doc["davies_bouldin_error"] = db_error
    return doc


# ---------------------------------------------------------------------------
# cross-month build


def _cross_fingerprint(config: PipelineConfig, months: Sequence[str]) -> str:
    hashes = {}
    for m in months:
        fp = month_dir(config.artifact_root, m) / "fingerprint.json"
        hashes[m] = json.loads(fp.read_text()).get("hash")
    doc = {
        "months": hashes,
        "stability_n": config.stability_n,
        "clusterings": [[a, k] for a, k in config.clusterings],
    }
    return hashlib.sha256(_canonical(doc).encode()).hexdigest()


def export_cross(config: PipelineConfig, months: Sequence[str]) -> dict:
    """Write cross-month artifacts (stability report, VI matrices) over the
    given completed months."""
    months = sorted(months)
    root = Path(config.artifact_root)
    cross = root / "cross"
    fingerprint = _cross_fingerprint(config, months)
    fp_path = cross / "fingerprint.json"
    expected = [cross / "stability.json"] + [
        cross / "vi" / f"{algo}-k{k}.json" for algo, k in config.clusterings
    ]
    if fp_path.exists():
        stored = json.loads(fp_path.read_text()).get("hash")
        if stored == fingerprint and all(p.exists() for p in expected):
            return {"status": "cached", "fingerprint": fingerprint}

    models = {m: embed.load_model(month_dir(root, m) / "model") for m in months}
    counts = {
        m: json.loads(
            (month_dir(root, m) / "snapshot" / "vocab.json").read_text()
        )["vocab"]
        for m in months
    }
    if len(months) >= 2:
        report = temporal.nn_stability(
            models, n=config.stability_n, comment_counts=counts
        )
        stability_doc = report.to_dict()
    else:
        stability_doc = {
            "months": list(months),
            "n_neighbors": config.stability_n,
            "scores": {},
            "per_subreddit_mean": {},
            "summary": None,
            "pearson_r_popularity": None,
        }
    _write_json(cross / "stability.json", stability_doc)

    for algo, k in config.clusterings:
        per_month = {
            m: cluster_mod.load_clustering(
                month_dir(root, m) / "clusters" / f"{algo}-k{k}.json"
            )
            for m in months
        }
        matrix = temporal.vi_across_months(per_month)
        _write_json(
            cross / "vi" / f"{algo}-k{k}.json",
            {"algorithm": algo, "k": k, **matrix.to_dict()},
        )

    _write_json(fp_path, {"hash": fingerprint})
    return {"status": "built", "fingerprint": fingerprint}


def export_tree(root: str | Path, stability_n: int = 20) -> dict:
    """Re-derive every servable artifact from stage outputs already on disk
    (snapshot + model + clusterings per month), without touching raw dumps.

    Used by the CLI when stages were run individually rather than through
    run_pipeline. Returns {months, clusterings} actually exported.
    """
    root = Path(root)
    months = sorted(
        d.name
        for d in (root / "months").iterdir()
        if (d / "model" / "model.json").exists()
        and (d / "snapshot" / "vocab.json").exists()
    )
    if not months:
        raise FileNotFoundError(f"no built months under {root}")
    requests: set[tuple[str, int]] = set()
    per_month_models = {}
    for m in months:
        mdir = month_dir(root, m)
        corpus = ingest.load_snapshot(mdir / "snapshot")
        model = embed.load_model(mdir / "model")
        per_month_models[m] = model
        clusterings = {}
        for path in sorted((mdir / "clusters").glob("*-k*.json")):
            if path.name.startswith("tree-"):
                continue
            clustering = cluster_mod.load_clustering(path)
            clusterings[(clustering.algorithm, clustering.k)] = clustering
            requests.add((clustering.algorithm, clustering.k))
        export_month(root, m, corpus, model, clusterings)

    counts = {
        m: json.loads(
            (month_dir(root, m) / "snapshot" / "vocab.json").read_text()
        )["vocab"]
        for m in months
    }
    cross = root / "cross"
    if len(months) >= 2:
        report = temporal.nn_stability(
            per_month_models, n=stability_n, comment_counts=counts
        )
        stability_doc = report.to_dict()
    else:
        stability_doc = {
            "months": months,
            "n_neighbors": stability_n,
            "scores": {},
            "per_subreddit_mean": {},
            "summary": None,
            "pearson_r_popularity": None,
        }
    _write_json(cross / "stability.json", stability_doc)
    for algo, k in sorted(requests):
        per_month = {}
        for m in months:
            path = month_dir(root, m) / "clusters" / f"{algo}-k{k}.json"
            if path.exists():
                per_month[m] = cluster_mod.load_clustering(path)
        if per_month:
            matrix = temporal.vi_across_months(per_month)
            _write_json(
                cross / "vi" / f"{algo}-k{k}.json",
                {"algorithm": algo, "k": k, **matrix.to_dict()},
            )
    return {"months": months, "clusterings": sorted(requests)}


def run_pipeline(config: PipelineConfig) -> dict:
    """Build every configured month, then the cross-month artifacts, then the
    manifest. Returns the run report (also stored in manifest.json)."""
    root = Path(config.artifact_root)
    root.mkdir(parents=True, exist_ok=True)
    report: dict = {"months": {}, "cross": None}
    completed = []
    for month in config.months:
        status = _run_month(config, month)
        report["months"][month] = status
        if status["status"] in ("built", "cached"):
            completed.append(month)
        else:
            log.warning("month %s failed: %s", month, status["error"])
    if completed:
        try:
            report["cross"] = export_cross(config, completed)
        except Exception as exc:  # noqa: BLE001
            log.exception("cross-month export failed")
            report["cross"] = {"status": "failed", "stage": "cross", "error": str(exc)}
    _write_json(root / "manifest.json", {"config": config.to_dict(), "report": report})
    return report
