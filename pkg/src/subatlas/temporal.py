"""Cross-month analyses: neighbor stability, inter-month VI, seed sensitivity.

All functions take per-month inputs keyed by month id (YYYY-MM); months are
compared in ascending key order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .cluster import Clustering
from .embed import EmbeddingModel
from .metrics import extend_clusterings, jaccard, pearson_r, variation_of_information

__all__ = [
    "StabilityReport",
    "VIMatrix",
    "top_neighbors_with_sims",
    "top_neighbor_sets",
    "nn_stability",
    "neighbor_timeline",
    "vi_between",
    "vi_across_months",
    "vi_across_algorithms",
    "seed_sensitivity",
    "pairwise_vi_stats",
    "seed_vi_matrix",
]

HISTOGRAM_BINS = 50


@dataclass
class StabilityReport:
    months: list[str]
    n_neighbors: int
    scores: dict[str, list[float]]  # per subreddit, one score per adjacent pair
    popularity: dict[str, int] | None = None
    pearson_r_popularity: float | None = None

    def per_subreddit_mean(self) -> dict[str, float]:
        return {s: float(np.mean(v)) for s, v in self.scores.items()}

    def summary(self) -> dict:
        means = np.asarray(list(self.per_subreddit_mean().values()))
        counts, edges = np.histogram(means, bins=HISTOGRAM_BINS, range=(0.0, 1.0))
        return {
            "mean": float(means.mean()),
            "stddev": float(means.std()),
            "subreddits": len(means),
            "histogram": {
                "bin_edges": edges.tolist(),
                "counts": counts.tolist(),
            },
        }

    def to_dict(self) -> dict:
        doc = {
            "months": self.months,
            "n_neighbors": self.n_neighbors,
            "scores": {s: v for s, v in sorted(self.scores.items())},
            "per_subreddit_mean": dict(sorted(self.per_subreddit_mean().items())),
            "summary": self.summary(),
            "pearson_r_popularity": self.pearson_r_popularity,
        }
        if self.popularity is not None:
            doc["popularity"] = dict(sorted(self.popularity.items()))
        return doc


@dataclass
class VIMatrix:
    labels: list[str]
    matrix: np.ndarray  # bits
    comparisons: np.ndarray  # comparisons averaged into each cell

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        self.comparisons = np.asarray(self.comparisons, dtype=np.int64)
        if not np.allclose(self.matrix, self.matrix.T):
            raise ValueError("VI matrix must be symmetric")

    def to_dict(self) -> dict:
        return {
            "labels": self.labels,
            "matrix": self.matrix.tolist(),
            "comparisons": self.comparisons.tolist(),
            "units": "bits",
        }


def top_neighbors_with_sims(
    model: EmbeddingModel, n: int, subset: Sequence[str] | None = None
) -> dict[str, list[tuple[str, float]]]:
    """Top-n (neighbor, cosine) pairs for every subreddit (or a subset),
    ranked like nearest_neighbors: similarity descending, ties by vocabulary
    order."""
    if not model.normalized:
        raise ValueError("neighbor ranking requires a normalized model")
    vectors = model.vectors.astype(np.float64)
    names = model.vocab
    rows = (
        range(len(names))
        if subset is None
        else [model._index[s] for s in subset]
    )
    out: dict[str, list[tuple[str, float]]] = {}
    for row in rows:
        sims = vectors @ vectors[row]
        sims[row] = -np.inf
        if n >= len(sims) - 1:
            candidates = np.arange(len(sims))
        else:
            # keep everything tied with the n-th best so ordering stays exact
            threshold = np.partition(sims, -n)[-n]
            candidates = np.flatnonzero(sims >= threshold)
        order = candidates[np.lexsort((candidates, -sims[candidates]))]
        out[names[row]] = [
            (names[i], float(sims[i])) for i in order[:n]
        ]
    return out


def top_neighbor_sets(
    model: EmbeddingModel, n: int, subset: Sequence[str] | None = None
) -> dict[str, list[str]]:
    """Top-n neighbor names only; see top_neighbors_with_sims for ranking."""
    return {
        s: [name for name, _ in pairs]
        for s, pairs in top_neighbors_with_sims(model, n, subset).items()
    }


def nn_stability(
    models: Mapping[str, EmbeddingModel],
    n: int = 20,
    comment_counts: Mapping[str, Mapping[str, int]] | None = None,
) -> StabilityReport:
    """Adjacent-month Jaccard similarity of each subreddit's top-n neighbor
    set, for subreddits present in every month. With per-month comment counts
    supplied, also correlates mean stability against total popularity."""
    months = sorted(models)
    if len(months) < 2:
        raise ValueError("nn_stability requires at least 2 months")
    shared = set(models[months[0]].vocab)
    for m in months[1:]:
        shared &= set(models[m].vocab)
    if not shared:
        raise ValueError("no subreddit appears in every month")
    shared_sorted = sorted(shared)

    neighbor_sets = {
        m: top_neighbor_sets(models[m], n, subset=shared_sorted) for m in months
    }
    scores: dict[str, list[float]] = {s: [] for s in shared_sorted}
    for prev, curr in zip(months, months[1:]):
        for s in shared_sorted:
            scores[s].append(
                jaccard(neighbor_sets[prev][s], neighbor_sets[curr][s])
            )

    popularity = None
    r = None
    if comment_counts is not None:
        popularity = {
            s: int(sum(comment_counts[m].get(s, 0) for m in months))
            for s in shared_sorted
        }
        means = [float(np.mean(scores[s])) for s in shared_sorted]
        pops = [popularity[s] for s in shared_sorted]
        try:
            r = pearson_r(means, pops)
        except ValueError:
            r = None  # degenerate series (constant stability or popularity)
    return StabilityReport(
        months=months,
        n_neighbors=n,
        scores=scores,
        popularity=popularity,
        pearson_r_popularity=r,
    )


def neighbor_timeline(
    models: Mapping[str, EmbeddingModel], subreddit: str, n: int = 10
) -> dict:
    """Month-by-month top-n neighbors of one subreddit with adjacent-month
    Jaccard scores; months where the subreddit is absent are marked null."""
    months = sorted(models)
    present = [m for m in months if subreddit in models[m]]
    if not present:
        raise KeyError(f"{subreddit!r} unknown in every month")
    from .embed import nearest_neighbors

    cells: dict[str, list | None] = {}
    for m in months:
        if subreddit in models[m]:
            cells[m] = [
                {"subreddit": name, "similarity": sim}
                for name, sim in nearest_neighbors(models[m], subreddit, n)
            ]
        else:
            cells[m] = None
    adjacent = []
    for prev, curr in zip(months, months[1:]):
        value = None
        if cells[prev] is not None and cells[curr] is not None:
            value = jaccard(
                [e["subreddit"] for e in cells[prev]],
                [e["subreddit"] for e in cells[curr]],
            )
        adjacent.append({"months": [prev, curr], "jaccard": value})
    return {
        "subreddit": subreddit,
        "n_neighbors": n,
        "months": months,
        "neighbors": cells,
        "adjacent_jaccard": adjacent,
    }


def vi_between(a: Clustering, b: Clustering) -> float:
    """VI in bits between two clusterings, extending both onto the union of
    their vocabularies first."""
    ea, eb = extend_clusterings(a.assignment, b.assignment)
    return variation_of_information(ea, eb)


def vi_across_months(clusterings: Mapping[str, Clustering]) -> VIMatrix:
    """Month-by-month VI matrix for one algorithm's clusterings."""
    months = sorted(clusterings)
    m = len(months)
    matrix = np.zeros((m, m))
    comparisons = np.ones((m, m), dtype=np.int64)
    for i, j in combinations(range(m), 2):
        v = vi_between(clusterings[months[i]], clusterings[months[j]])
        matrix[i, j] = matrix[j, i] = v
    return VIMatrix(labels=months, matrix=matrix, comparisons=comparisons)


def vi_across_algorithms(
    clusterings: Mapping[str, Mapping[str, Clustering]]
) -> VIMatrix:
    """Algorithm-by-algorithm VI matrix, each cell averaging comparisons over
    distinct month pairs (both orientations for unlike algorithms, so the
    matrix stays symmetric). Cell comparison counts ride along as metadata."""
    algos = sorted(clusterings)
    matrix = np.zeros((len(algos), len(algos)))
    comparisons = np.zeros((len(algos), len(algos)), dtype=np.int64)
    for ai, algo_a in enumerate(algos):
        for aj, algo_b in enumerate(algos):
            if aj < ai:
                continue
            months_a = sorted(clusterings[algo_a])
            months_b = sorted(clusterings[algo_b])
            values = []
            if algo_a == algo_b:
                for mi, mj in combinations(months_a, 2):
                    values.append(
                        vi_between(clusterings[algo_a][mi], clusterings[algo_b][mj])
                    )
            else:
                for mi in months_a:
                    for mj in months_b:
                        if mi == mj:
                            continue
                        values.append(
                            vi_between(clusterings[algo_a][mi], clusterings[algo_b][mj])
                        )
            cell = float(np.mean(values)) if values else 0.0
            matrix[ai, aj] = matrix[aj, ai] = cell
            comparisons[ai, aj] = comparisons[aj, ai] = len(values)
    return VIMatrix(labels=algos, matrix=matrix, comparisons=comparisons)


def seed_sensitivity(
    model: EmbeddingModel,
    k: int = 100,
    runs: int = 10,
    seeds: Sequence[int] | None = None,
) -> dict:
    """Cluster one month's model with several k-means++ seeds and summarize
    pairwise VI among the runs."""
    from .cluster import kmeans_pp

    if runs < 2:
        raise ValueError("seed_sensitivity requires runs >= 2")
    if seeds is None:
        seeds = list(range(runs))
    if len(seeds) != runs:
        raise ValueError("seeds length must equal runs")
    clusterings = [kmeans_pp(model, k=k, seed=s) for s in seeds]
    stats = pairwise_vi_stats(clusterings)
    return {
        "month": model.month,
        "k": k,
        "seeds": list(seeds),
        "clusterings": clusterings,
        **stats,
    }


def pairwise_vi_stats(
    a: Sequence[Clustering], b: Sequence[Clustering] | None = None
) -> dict:
    """Mean/max VI over all pairs within one list, or across two lists."""
    if b is None:
        values = [vi_between(x, y) for x, y in combinations(a, 2)]
    else:
        values = [vi_between(x, y) for x in a for y in b]
    if not values:
        raise ValueError("no pair to compare")
    return {
        "mean_vi": float(np.mean(values)),
        "max_vi": float(np.max(values)),
        "comparisons": len(values),
    }


def seed_vi_matrix(results: Mapping[str, dict]) -> VIMatrix:
    """Month-by-month matrix of average VI between seed-varied k-means++ runs:
    within-run pairs on the diagonal, all cross-run pairs off it."""
    months = sorted(results)
    m = len(months)
    matrix = np.zeros((m, m))
    comparisons = np.zeros((m, m), dtype=np.int64)
    for i in range(m):
        matrix[i, i] = results[months[i]]["mean_vi"]
        comparisons[i, i] = results[months[i]]["comparisons"]
        for j in range(i + 1, m):
            stats = pairwise_vi_stats(
                results[months[i]]["clusterings"], results[months[j]]["clusterings"]
            )
            matrix[i, j] = matrix[j, i] = stats["mean_vi"]
            comparisons[i, j] = comparisons[j, i] = stats["comparisons"]
    return VIMatrix(labels=months, matrix=matrix, comparisons=comparisons)
