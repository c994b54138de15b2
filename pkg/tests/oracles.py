"""Independent reference implementations used to cross-check the library.

Everything here is written as plain loops straight from the defining
formulas, deliberately sharing no code with src/. Slow is fine.
"""

from __future__ import annotations

from math import ceil, dist, log2

import numpy as np


def silhouette_brute(points, labels) -> tuple[float, list[float]]:
    points = [list(map(float, p)) for p in points]
    labels = list(labels)
    n = len(points)
    clusters = sorted(set(labels))
    out = []
    for i in range(n):
        same = [j for j in range(n) if labels[j] == labels[i] and j != i]
        if not same:
            out.append(0.0)
            continue
        a = sum(dist(points[i], points[j]) for j in same) / len(same)
        b = min(
            sum(dist(points[i], points[j]) for j in range(n) if labels[j] == c)
            / sum(1 for j in range(n) if labels[j] == c)
            for c in clusters
            if c != labels[i]
        )
        out.append(0.0 if max(a, b) == 0 else (b - a) / max(a, b))
    return sum(out) / n, out


def davies_bouldin_brute(points, labels) -> float:
    points = np.asarray(points, dtype=float)
    labels = list(labels)
    clusters = sorted(set(labels))
    centroids = {}
    spread = {}
    for c in clusters:
        members = points[[i for i, l in enumerate(labels) if l == c]]
        centroids[c] = members.mean(axis=0)
        spread[c] = float(
            np.mean([dist(m, centroids[c]) for m in members])
        )
    worst = []
    for ci in clusters:
        ratios = []
        for cj in clusters:
            if cj == ci:
                continue
            m = dist(centroids[ci], centroids[cj])
            ratios.append((spread[ci] + spread[cj]) / m)
        worst.append(max(ratios))
    return float(np.mean(worst))


def vi_sets(parts_a: list[set], parts_b: list[set]) -> float:
    """Variation of information in bits from two covers of the same points."""
    n = sum(len(s) for s in parts_a)
    assert n == sum(len(s) for s in parts_b)
    h_a = -sum((len(s) / n) * log2(len(s) / n) for s in parts_a if s)
    h_b = -sum((len(s) / n) * log2(len(s) / n) for s in parts_b if s)
    info = 0.0
    for sa in parts_a:
        for sb in parts_b:
            joint = len(sa & sb)
            if joint:
                info += (joint / n) * log2(n * joint / (len(sa) * len(sb)))
    return h_a + h_b - 2.0 * info


def all_partitions(items: list):
    """Every set partition of the items (restricted-growth enumeration)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for smaller in all_partitions(rest):
        for i in range(len(smaller)):
            yield smaller[:i] + [smaller[i] | {first}] + smaller[i + 1 :]
        yield smaller + [{first}]


def nearest_rank(values, p: float):
    ordered = sorted(values)
    return ordered[ceil(p * len(ordered)) - 1]


def jaccard_brute(a, b) -> float:
    a, b = set(a), set(b)
    return len(a & b) / len(a | b)


def pearson_brute(x, y) -> float:
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    num = sum((xi - mx) * (yi - my) for xi, yi in zip(x, y))
    den = (
        sum((xi - mx) ** 2 for xi in x) ** 0.5
        * sum((yi - my) ** 2 for yi in y) ** 0.5
    )
    return num / den
