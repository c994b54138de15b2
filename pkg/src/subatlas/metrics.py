"""Cluster quality scores, partition comparison measures, and annotation agreement.

All partition-level quantities (entropy, mutual information, variation of
information) are reported in bits.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np
from scipy.spatial import distance

__all__ = [
    "CoherenceAnnotation",
    "jaccard",
    "contingency_table",
    "entropy_bits",
    "mutual_information_bits",
    "variation_of_information",
    "vi_upper_bound",
    "extend_clusterings",
    "silhouette",
    "davies_bouldin",
    "gwet_ac1",
    "coherence_scores",
    "pearson_r",
]


@dataclass(frozen=True)
class CoherenceAnnotation:
    """One annotator's judgement of one cluster."""

    annotator: str
    cluster_id: int
    coherent: bool
    theme: str | None = None


def jaccard(a: Iterable[Hashable], b: Iterable[Hashable]) -> float:
    """Jaccard similarity |A ∩ B| / |A ∪ B| of two sets.

    Raises ValueError when both sets are empty (the ratio is undefined).
    """
    sa, sb = set(a), set(b)
    union = sa | sb
    if not union:
        raise ValueError("jaccard undefined for two empty sets")
    return len(sa & sb) / len(union)


def _as_label_arrays(
    a: Mapping[Hashable, int], b: Mapping[Hashable, int]
) -> tuple[np.ndarray, np.ndarray]:
    if set(a) != set(b):
        only_a = len(set(a) - set(b))
        only_b = len(set(b) - set(a))
        raise ValueError(
            f"clusterings cover different point sets ({only_a} points only in the "
            f"first, {only_b} only in the second); extend_clusterings() first"
        )
    keys = sorted(a, key=repr)
    return (
        np.asarray([a[k] for k in keys]),
        np.asarray([b[k] for k in keys]),
    )


def contingency_table(
    a: Mapping[Hashable, int], b: Mapping[Hashable, int]
) -> np.ndarray:
    """Co-membership count matrix of two clusterings over the same point set.

    Rows follow the sorted distinct labels of ``a``, columns those of ``b``.
    The grand total equals the number of shared points.
    """
    la, lb = _as_label_arrays(a, b)
    _, ia = np.unique(la, return_inverse=True)
    _, ib = np.unique(lb, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    return table


def _entropy_from_counts(counts: np.ndarray) -> float:
    n = counts.sum()
    p = counts[counts > 0] / n
    return float(-(p * np.log2(p)).sum())


def entropy_bits(clustering: Mapping[Hashable, int] | Sequence[int]) -> float:
    """Shannon entropy of a clustering's cluster-size distribution, in bits."""
    labels = (
        np.asarray(list(clustering.values()))
        if isinstance(clustering, Mapping)
        else np.asarray(clustering)
    )
    if labels.size == 0:
        raise ValueError("entropy of an empty clustering is undefined")
    _, counts = np.unique(labels, return_counts=True)
    return _entropy_from_counts(counts)


def _mutual_information_from_table(table: np.ndarray) -> float:
    n = table.sum()
    p = table / n
    pi = p.sum(axis=1, keepdims=True)
    qj = p.sum(axis=0, keepdims=True)
    mask = p > 0
    ratio = np.ones_like(p)
    ratio[mask] = p[mask] / (pi @ qj)[mask]
    return float((p[mask] * np.log2(ratio[mask])).sum())


def mutual_information_bits(
    a: Mapping[Hashable, int], b: Mapping[Hashable, int]
) -> float:
    """Mutual information between two clusterings of the same points, in bits."""
    return _mutual_information_from_table(contingency_table(a, b))


def variation_of_information(
    a: Mapping[Hashable, int], b: Mapping[Hashable, int]
) -> float:
    """Variation of information H(A) + H(B) - 2 I(A, B), in bits.

    A metric on partitions: zero iff the clusterings are identical, symmetric,
    and obeying the triangle inequality. Bounded by
    2 * log2(max(#clusters_a, #clusters_b)).
    """
    table = contingency_table(a, b)
    ha = _entropy_from_counts(table.sum(axis=1))
    hb = _entropy_from_counts(table.sum(axis=0))
    mi = _mutual_information_from_table(table)
    # clamp tiny negative float residue; VI is non-negative by construction
    return max(0.0, ha + hb - 2.0 * mi)


def vi_upper_bound(n_clusters_a: int, n_clusters_b: int) -> float:
    """Largest possible VI between partitions with the given cluster counts."""
    return 2.0 * math.log2(max(n_clusters_a, n_clusters_b))


def extend_clusterings(
    a: Mapping[Hashable, int], b: Mapping[Hashable, int]
) -> tuple[dict[Hashable, int], dict[Hashable, int]]:
    """Extend two clusterings of different point sets onto their union.

    Points missing from one clustering are collected into a single new
    extension cluster on that side; an empty extension cluster is omitted, so
    clusterings over identical point sets come back unchanged.
    """
    only_b = set(b) - set(a)
    only_a = set(a) - set(b)
    a2 = dict(a)
    b2 = dict(b)
    if only_b:
        ext = max(a.values(), default=-1) + 1
        for point in only_b:
            a2[point] = ext
    if only_a:
        ext = max(b.values(), default=-1) + 1
        for point in only_a:
            b2[point] = ext
    return a2, b2


def _pairwise_distances(block: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Euclidean distances between each row of block and each row of points.

    cdist evaluates the difference form directly; the dot-product expansion
    loses ~1e-9 to cancellation, which matters for oracle-tight scores.
    """
    return distance.cdist(block, points)


def silhouette(
    vectors: np.ndarray,
    labels: Sequence[int] | np.ndarray,
    chunk: int = 1024,
) -> tuple[float, np.ndarray]:
    """Mean silhouette score and per-point scores, Euclidean distance.

    Per point, s = (b - a) / max(a, b) where a is the mean distance to the
    point's own cluster (excluding itself) and b the smallest mean distance to
    any other cluster. Points in singleton clusters score 0, as do points with
    a = b = 0.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    labels = np.asarray(labels)
    n = len(vectors)
    if n != len(labels):
        raise ValueError("vectors and labels disagree on point count")
    _, inv, counts = np.unique(labels, return_inverse=True, return_counts=True)
    k = len(counts)
    if k < 2:
        raise ValueError("silhouette requires at least 2 clusters")

    onehot = np.zeros((n, k))
    onehot[np.arange(n), inv] = 1.0
    sums = np.zeros((n, k))
    for start in range(0, n, chunk):
        d = _pairwise_distances(vectors[start : start + chunk], vectors)
        sums[start : start + chunk] = d @ onehot

    own = counts[inv]
    with np.errstate(invalid="ignore", divide="ignore"):
        a = sums[np.arange(n), inv] / np.maximum(own - 1, 1)
        means = sums / counts[None, :]
        means[np.arange(n), inv] = np.inf
        b = means.min(axis=1)
        s = (b - a) / np.maximum(a, b)
    s = np.where(np.maximum(a, b) == 0, 0.0, s)
    s = np.where(own == 1, 0.0, s)
    return float(s.mean()), s


def davies_bouldin(vectors: np.ndarray, labels: Sequence[int] | np.ndarray) -> float:
    """Davies-Bouldin index: mean over clusters of the worst-case ratio
    (s_i + s_j) / d_ij of within-cluster scatter to centroid separation.

    Lower is better; zero for point-mass clusters. Raises when two cluster
    centroids coincide (the ratio is undefined), naming the offending pair.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    labels = np.asarray(labels)
    uniq, inv, counts = np.unique(labels, return_inverse=True, return_counts=True)
    k = len(uniq)
    if k < 2:
        raise ValueError("davies_bouldin requires at least 2 clusters")

    centroids = np.zeros((k, vectors.shape[1]))
    np.add.at(centroids, inv, vectors)
    centroids /= counts[:, None]
    scatter = np.zeros(k)
    member_dist = np.linalg.norm(vectors - centroids[inv], axis=1)
    np.add.at(scatter, inv, member_dist)
    scatter /= counts

    sep = _pairwise_distances(centroids, centroids)
    zero = np.argwhere((sep == 0) & ~np.eye(k, dtype=bool))
    if len(zero):
        i, j = zero[0]
        raise ValueError(
            f"coincident centroids for clusters {uniq[i].item()!r} and "
            f"{uniq[j].item()!r}"
        )
    np.fill_diagonal(sep, np.inf)
    ratios = (scatter[:, None] + scatter[None, :]) / sep
    np.fill_diagonal(ratios, -np.inf)
    return float(ratios.max(axis=1).mean())


def _collect_ratings(
    annotations: Iterable[CoherenceAnnotation],
) -> dict[int, dict[str, bool]]:
    per_item: dict[int, dict[str, bool]] = defaultdict(dict)
    for ann in annotations:
        if ann.annotator in per_item[ann.cluster_id]:
            raise ValueError(
                f"annotator {ann.annotator!r} rated cluster {ann.cluster_id} twice"
            )
        per_item[ann.cluster_id][ann.annotator] = ann.coherent
    return per_item


def gwet_ac1(
    annotations: Iterable[CoherenceAnnotation],
    items: Sequence[int] | None = None,
) -> float:
    """Gwet's AC1 chance-corrected agreement for binary coherent/incoherent ratings.

    Pa averages r(r-1)-normalized pairwise agreement over items rated by at
    least two annotators; chance agreement Pe = 2 * q * (1 - q) with q the mean
    per-item share of "coherent" ratings.
    """
    per_item = _collect_ratings(annotations)
    if items is not None:
        per_item = {i: per_item.get(i, {}) for i in items}
    per_item = {i: r for i, r in per_item.items() if r}
    annotators = {a for ratings in per_item.values() for a in ratings}
    if len(annotators) < 2:
        raise ValueError("gwet_ac1 requires at least 2 annotators")
    multi = {i: r for i, r in per_item.items() if len(r) >= 2}
    if not multi:
        raise ValueError("gwet_ac1 requires at least one item with >= 2 ratings")

    pa_terms = []
    for ratings in multi.values():
        r = len(ratings)
        pos = sum(ratings.values())
        neg = r - pos
        pa_terms.append((pos * (pos - 1) + neg * (neg - 1)) / (r * (r - 1)))
    pa = sum(pa_terms) / len(pa_terms)
    q = sum(
        sum(r.values()) / len(r) for r in per_item.values()
    ) / len(per_item)
    pe = 2.0 * q * (1.0 - q)
    return (pa - pe) / (1.0 - pe)


def coherence_scores(
    annotations: Iterable[CoherenceAnnotation],
    cluster_ids: Sequence[int],
) -> dict:
    """Coherence summary of a clustering from annotator judgements.

    Returns per-cluster coherence (share of its annotators marking it
    coherent), the clustering-level mean, and the shares of clusters at least
    one annotator (upper) and every annotator (lower) found coherent.
    """
    per_item = _collect_ratings(annotations)
    missing = [c for c in cluster_ids if not per_item.get(c)]
    if missing:
        raise ValueError(f"clusters without any annotation: {missing}")
    per_cluster = {
        c: sum(per_item[c].values()) / len(per_item[c]) for c in cluster_ids
    }
    values = list(per_cluster.values())
    return {
        "per_cluster": per_cluster,
        "clustering_score": sum(values) / len(values),
        "c_upper": sum(v > 0 for v in values) / len(values),
        "c_lower": sum(v == 1 for v in values) / len(values),
    }


def pearson_r(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient of two equal-length series."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError("series have different lengths")
    if x.size < 2:
        raise ValueError("pearson_r requires at least 2 observations")
    dx = x - x.mean()
    dy = y - y.mean()
    denom = math.sqrt((dx * dx).sum() * (dy * dy).sum())
    if denom == 0:
        raise ValueError("pearson_r undefined for zero-variance series")
    return float((dx * dy).sum() / denom)
