"""Flat and hierarchical clusterings of normalized embedding vectors.

k-means++ runs on squared Euclidean distance, which on unit vectors orders
pairs exactly like cosine distance while keeping centroids well-defined.
Agglomerative merging uses Lance-Williams updates with cosine distance for
average/complete linkage and the squared-Euclidean variance criterion for
ward; ties are broken deterministically by node id.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .embed import EmbeddingModel

__all__ = [
    "ALGORITHMS",
    "LINKAGES",
    "Clustering",
    "MergeTree",
    "kmeans_pp",
    "agglomerative",
    "cut_tree",
    "labels_for",
    "save_clustering",
    "load_clustering",
    "save_merge_tree",
    "load_merge_tree",
]

log = logging.getLogger(__name__)

LINKAGES = ("ward", "average", "complete")
ALGORITHMS = ("kmeanspp", "ha_ward", "ha_average", "ha_complete")


@dataclass
class Clustering:
    month: str
    algorithm: str
    k: int
    assignment: dict[str, int]
    seed: int | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        labels = set(self.assignment.values())
        if labels != set(range(self.k)):
            raise ValueError(
                f"cluster ids must be exactly 0..{self.k - 1} with no empty cluster"
            )

    def members(self, cluster_id: int) -> list[str]:
        return sorted(s for s, c in self.assignment.items() if c == cluster_id)

    def groups(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {c: [] for c in range(self.k)}
        for s in sorted(self.assignment):
            out[self.assignment[s]].append(s)
        return out

    def sizes(self) -> np.ndarray:
        counts = np.zeros(self.k, dtype=np.int64)
        for c in self.assignment.values():
            counts[c] += 1
        return counts


@dataclass
class MergeTree:
    """Full agglomerative merge history. Leaves are numbered 0..n-1 in vocab
    order; the merge at position m creates node n+m."""

    leaves: list[str]
    linkage: str
    merges: list[tuple[int, int, float]]

    def __post_init__(self):
        if self.linkage not in LINKAGES:
            raise ValueError(f"unknown linkage {self.linkage!r}")
        if len(self.merges) != max(len(self.leaves) - 1, 0):
            raise ValueError("merge count must be leaf count - 1")


def _require_normalized(model: EmbeddingModel) -> np.ndarray:
    if not model.normalized:
        raise ValueError("clustering requires a normalized model")
    return model.vectors.astype(np.float64)


def _check_k(k: int, n: int) -> None:
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")


def _sq_dists(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d = (
        (points * points).sum(axis=1)[:, None]
        + (centers * centers).sum(axis=1)[None, :]
        - 2.0 * points @ centers.T
    )
    return np.maximum(d, 0.0)


def _greedy_init(
    points: np.ndarray, k: int, rng: np.random.Generator, trials: int
) -> np.ndarray:
    """Greedy k-means++ seeding: sample several D^2-weighted candidates per
    center and keep the one that shrinks the potential the most."""
    n = points.shape[0]
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(n)
    closest = _sq_dists(points, points[chosen[0]][None, :])[:, 0]
    picked = {int(chosen[0])}
    for c in range(1, k):
        potential = closest.sum()
        if potential <= 0:
            # all remaining points coincide with a center; fill deterministically
            idx = next(i for i in range(n) if i not in picked)
        else:
            draws = rng.random(trials) * potential
            cand = np.searchsorted(np.cumsum(closest), draws).clip(0, n - 1)
            cand_d = _sq_dists(points, points[cand])
            potentials = np.minimum(closest[:, None], cand_d).sum(axis=0)
            idx = int(cand[int(np.argmin(potentials))])
        chosen[c] = idx
        picked.add(int(idx))
        closest = np.minimum(closest, _sq_dists(points, points[idx][None, :])[:, 0])
    return points[chosen].copy()


def kmeans_pp(
    model: EmbeddingModel,
    k: int,
    seed: int = 0,
    trials: int | None = None,
    max_iter: int = 300,
) -> Clustering:
    """Greedy k-means++ initialization followed by Lloyd iterations until the
    assignment reaches a fixpoint. Emptied clusters are reseeded from the
    point farthest from its assigned centroid."""
    points = _require_normalized(model)
    n = points.shape[0]
    _check_k(k, n)
    if trials is None:
        trials = 2 + int(math.log(k)) if k > 1 else 2
    rng = np.random.default_rng(seed)
    centers = _greedy_init(points, k, rng, trials)

    labels = np.full(n, -1, dtype=np.int64)
    for _ in range(max_iter):
        d = _sq_dists(points, centers)
        new_labels = d.argmin(axis=1)
        point_d = d[np.arange(n), new_labels]
        counts = np.bincount(new_labels, minlength=k)
        repaired = False
        for empty in np.flatnonzero(counts == 0):
            far = int(np.argmax(point_d))
            new_labels[far] = empty
            point_d[far] = -np.inf  # never reseed two clusters from one point
            repaired = True
        if not repaired and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, points)
        occupied = counts > 0
        centers[occupied] = sums[occupied] / counts[occupied, None]

    return Clustering(
        month=model.month,
        algorithm="kmeanspp",
        k=k,
        assignment={s: int(c) for s, c in zip(model.vocab, labels)},
        seed=seed,
    )


def _initial_distances(points: np.ndarray, linkage: str) -> np.ndarray:
    gram = points @ points.T
    if linkage == "ward":
        d = 2.0 - 2.0 * gram  # squared Euclidean on unit vectors
    else:
        d = 1.0 - gram  # cosine distance
    d = np.maximum(d, 0.0)
    np.fill_diagonal(d, np.inf)
    return d


def _lance_williams(
    d_i: np.ndarray, d_j: np.ndarray, d_ij: float, n_i: float, n_j: float,
    sizes: np.ndarray, linkage: str,
) -> np.ndarray:
    if linkage == "average":
        return (n_i * d_i + n_j * d_j) / (n_i + n_j)
    if linkage == "complete":
        return np.maximum(d_i, d_j)
    # ward on squared distances
    return ((n_i + sizes) * d_i + (n_j + sizes) * d_j - sizes * d_ij) / (
        n_i + n_j + sizes
    )


def _build_merge_tree(points: np.ndarray, leaves: list[str], linkage: str) -> MergeTree:
    n = points.shape[0]
    if n == 1:
        return MergeTree(leaves=leaves, linkage=linkage, merges=[])
    d = _initial_distances(points, linkage)
    active = np.ones(n, dtype=bool)
    sizes = np.ones(n, dtype=np.float64)
    node_id = np.arange(n, dtype=np.int64)
    rowmin = d.min(axis=1)
    rowarg = d.argmin(axis=1)

    merges: list[tuple[int, int, float]] = []
    for step in range(n - 1):
        act = np.flatnonzero(active)
        m = rowmin[act].min()
        # all pairs at the min value, tie-broken by (min node id, max node id)
        best_pair = None
        best_key = None
        for i in act[rowmin[act] == m]:
            for j in np.flatnonzero(active & (d[i] == m)):
                a, b = int(node_id[i]), int(node_id[j])
                key = (min(a, b), max(a, b))
                if best_key is None or key < best_key:
                    best_key = key
                    best_pair = (int(i), int(j)) if a < b else (int(j), int(i))
        i, j = best_pair  # slot of the smaller node id first
        merges.append((best_key[0], best_key[1], float(m)))

        new_d = _lance_williams(
            d[i], d[j], float(d[i, j]), sizes[i], sizes[j], sizes, linkage
        )
        active[j] = False
        d[i, :] = new_d
        d[:, i] = new_d
        d[i, i] = np.inf
        d[j, :] = np.inf
        d[:, j] = np.inf
        sizes[i] += sizes[j]
        node_id[i] = n + step

        act = np.flatnonzero(active)
        if len(act) <= 1:
            break
        masked = d[i, act].copy()
        masked[act == i] = np.inf
        rowmin[i] = masked.min()
        rowarg[i] = act[int(masked.argmin())]
        for s in act:
            if s == i:
                continue
            if rowarg[s] == i or rowarg[s] == j:
                row = d[s, act].copy()
                row[act == s] = np.inf
                rowmin[s] = row.min()
                rowarg[s] = act[int(row.argmin())]
            elif d[s, i] < rowmin[s]:
                rowmin[s] = d[s, i]
                rowarg[s] = i
    return MergeTree(leaves=leaves, linkage=linkage, merges=merges)


def cut_tree(tree: MergeTree, k: int, month: str = "", seed: int | None = None) -> Clustering:
    """Flatten the tree to k clusters by undoing the last k-1 merges; cluster
    ids follow each cluster's smallest leaf."""
    n = len(tree.leaves)
    _check_k(k, n)
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    node_root = {i: i for i in range(n)}
    for m, (a, b, _) in enumerate(tree.merges[: n - k]):
        ra, rb = find(node_root[a]), find(node_root[b])
        parent[rb] = ra
        node_root[n + m] = ra

    clusters: dict[int, list[int]] = {}
    for leaf in range(n):
        clusters.setdefault(find(leaf), []).append(leaf)
    ordered = sorted(clusters.values(), key=min)
    assignment = {
        tree.leaves[leaf]: cid for cid, group in enumerate(ordered) for leaf in group
    }
    return Clustering(
        month=month,
        algorithm=f"ha_{tree.linkage}",
        k=k,
        assignment=assignment,
        seed=seed,
    )


def agglomerative(
    model: EmbeddingModel, linkage: str, k: int
) -> tuple[Clustering, MergeTree]:
    """Bottom-up merging with the requested linkage; returns the k-cluster cut
    and the full merge history. Fully deterministic."""
    points = _require_normalized(model)
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}; pick one of {LINKAGES}")
    _check_k(k, len(points))
    tree = _build_merge_tree(points, list(model.vocab), linkage)
    clustering = cut_tree(tree, k, month=model.month)
    singletons = int((clustering.sizes() == 1).sum())
    if singletons:
        log.info(
            "%s k=%d produced %d singleton cluster(s) in %s",
            clustering.algorithm,
            k,
            singletons,
            model.month,
        )
    return clustering, tree


def labels_for(clustering: Clustering, vocab: Sequence[str]) -> np.ndarray:
    """Cluster ids aligned to the given vocabulary order."""
    return np.asarray([clustering.assignment[s] for s in vocab], dtype=np.int64)


def save_clustering(clustering: Clustering, path: str | Path) -> None:
    doc = {
        "month": clustering.month,
        "algorithm": clustering.algorithm,
        "k": clustering.k,
        "seed": clustering.seed,
        "assignment": clustering.assignment,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def load_clustering(path: str | Path) -> Clustering:
    doc = json.loads(Path(path).read_text())
    return Clustering(
        month=doc["month"],
        algorithm=doc["algorithm"],
        k=doc["k"],
        assignment=doc["assignment"],
        seed=doc["seed"],
    )


def save_merge_tree(tree: MergeTree, path: str | Path) -> None:
    doc = {
        "leaves": tree.leaves,
        "linkage": tree.linkage,
        "merges": [[a, b, d] for a, b, d in tree.merges],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def load_merge_tree(path: str | Path) -> MergeTree:
    doc = json.loads(Path(path).read_text())
    return MergeTree(
        leaves=doc["leaves"],
        linkage=doc["linkage"],
        merges=[(int(a), int(b), float(d)) for a, b, d in doc["merges"]],
    )
