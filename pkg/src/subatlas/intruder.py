"""Intruder annotation tasks: generation, CSV sheets, and scoring.

A task shows six subreddits: the five most-commented members of one cluster
plus one popularity-matched outsider. Annotator responses are scored as model
precision (share of annotators who find the outsider).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .cluster import Clustering
from .metrics import CoherenceAnnotation

__all__ = [
    "IntruderTask",
    "IntruderResponse",
    "SKIP_TOO_SMALL",
    "SKIP_NO_INTRUDER",
    "generate_tasks",
    "score_responses",
    "tasks_from_sheets",
    "write_task_sheets",
    "read_tasks",
    "read_key",
    "write_responses",
    "read_responses",
    "write_coherence_sheet",
    "read_coherence_responses",
]

SKIP_TOO_SMALL = "fewer than five"
SKIP_NO_INTRUDER = "no valid intruder"


@dataclass
class IntruderTask:
    task_id: str
    month: str
    cluster_id: int
    members: list[str]
    intruder: str
    presented_order: list[str]
    rng_seed: int

    def __post_init__(self):
        if len(self.members) != 5:
            raise ValueError(f"task {self.task_id}: need exactly 5 members")
        if self.intruder in self.members:
            raise ValueError(f"task {self.task_id}: intruder is a member")
        if sorted(self.presented_order) != sorted(self.members + [self.intruder]):
            raise ValueError(
                f"task {self.task_id}: presented_order is not a permutation "
                "of members plus intruder"
            )


@dataclass(frozen=True)
class IntruderResponse:
    annotator: str
    task_id: str
    chosen: str


def _top5(members: Iterable[str], counts: Mapping[str, int]) -> list[str]:
    # count descending, ties by name ascending
    return sorted(members, key=lambda s: (-counts[s], s))[:5]


def generate_tasks(
    clustering: Clustering,
    comment_counts: Mapping[str, int],
    seed: int = 0,
) -> tuple[list[IntruderTask], list[dict]]:
    """Build one task per usable cluster plus a skip log.

    The matching interval is mean(top-5 member counts) +/- the population
    stddev of all vocab counts, closed at both ends. Each cluster draws from
    its own rng stream keyed by (seed, cluster_id), so skipping one cluster
    never changes another cluster's task.
    """
    missing = [s for s in clustering.assignment if s not in comment_counts]
    if missing:
        raise ValueError(
            f"comment_counts missing {len(missing)} clustered subreddits, "
            f"e.g. {sorted(missing)[:3]}"
        )
    sigma = float(np.std(np.asarray(list(comment_counts.values()), dtype=np.float64)))
    tasks: list[IntruderTask] = []
    skipped: list[dict] = []
    vocab = sorted(comment_counts)
    for cluster_id, members in sorted(clustering.groups().items()):
        if len(members) < 5:
            skipped.append(
                {
                    "cluster_id": cluster_id,
                    "reason": SKIP_TOO_SMALL,
                    "size": len(members),
                }
            )
            continue
        top = _top5(members, comment_counts)
        mu = float(np.mean([comment_counts[s] for s in top]))
        lo, hi = mu - sigma, mu + sigma
        member_set = set(members)
        pool = [
            s for s in vocab if s not in member_set and lo <= comment_counts[s] <= hi
        ]
        if not pool:
            skipped.append(
                {
                    "cluster_id": cluster_id,
                    "reason": SKIP_NO_INTRUDER,
                    "interval": [lo, hi],
                }
            )
            continue
        rng = np.random.default_rng([seed, cluster_id])
        intruder = pool[int(rng.integers(len(pool)))]
        names = top + [intruder]
        order = [names[i] for i in rng.permutation(6)]
        tasks.append(
            IntruderTask(
                task_id=f"{clustering.month}-{cluster_id:04d}",
                month=clustering.month,
                cluster_id=cluster_id,
                members=top,
                intruder=intruder,
                presented_order=order,
                rng_seed=seed,
            )
        )
    return tasks, skipped


def score_responses(
    tasks: Sequence[IntruderTask], responses: Sequence[IntruderResponse]
) -> dict:
    """Model precision per cluster and its distribution over clusters."""
    by_id = {t.task_id: t for t in tasks}
    hits: dict[str, int] = {t.task_id: 0 for t in tasks}
    totals: dict[str, int] = {t.task_id: 0 for t in tasks}
    for resp in responses:
        task = by_id.get(resp.task_id)
        if task is None:
            raise ValueError(f"response references unknown task {resp.task_id!r}")
        if resp.chosen not in task.presented_order:
            raise ValueError(
                f"annotator {resp.annotator!r} chose {resp.chosen!r}, "
                f"not shown in task {resp.task_id}"
            )
        totals[resp.task_id] += 1
        if resp.chosen == task.intruder:
            hits[resp.task_id] += 1
    per_cluster = {
        tid: hits[tid] / totals[tid] for tid in sorted(totals) if totals[tid] > 0
    }
    unscored = sorted(tid for tid in totals if totals[tid] == 0)
    if not per_cluster:
        raise ValueError("no task has any response")
    values = np.asarray(list(per_cluster.values()))
    counts, edges = np.histogram(values, bins=10, range=(0.0, 1.0))
    distinct: dict[float, int] = {}
    for v in values:
        distinct[float(v)] = distinct.get(float(v), 0) + 1
    return {
        "per_cluster": per_cluster,
        "mean_mp": float(values.mean()),
        "histogram": {"bin_edges": edges.tolist(), "counts": counts.tolist()},
        "distribution": [
            {"mp": v, "clusters": c} for v, c in sorted(distinct.items())
        ],
        "unscored": unscored,
    }


def write_task_sheets(
    tasks: Sequence[IntruderTask], tasks_path, key_path
) -> None:
    """tasks.csv shows only the shuffled names; key.csv holds the answers."""
    with open(tasks_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["task_id"] + [f"option_{i}" for i in range(1, 7)]
        )
        for t in tasks:
            writer.writerow([t.task_id] + t.presented_order)
    with open(key_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["task_id", "intruder"])
        for t in tasks:
            writer.writerow([t.task_id, t.intruder])


def read_tasks(tasks_path) -> dict[str, list[str]]:
    """task_id -> six presented names, from tasks.csv."""
    out: dict[str, list[str]] = {}
    with open(tasks_path, newline="") as fh:
        for row in csv.DictReader(fh):
            out[row["task_id"]] = [row[f"option_{i}"] for i in range(1, 7)]
    return out


def read_key(key_path) -> dict[str, str]:
    with open(key_path, newline="") as fh:
        return {row["task_id"]: row["intruder"] for row in csv.DictReader(fh)}


def write_responses(responses: Sequence[IntruderResponse], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["annotator", "task_id", "chosen"])
        for r in responses:
            writer.writerow([r.annotator, r.task_id, r.chosen])


def read_responses(path) -> list[IntruderResponse]:
    with open(path, newline="") as fh:
        return [
            IntruderResponse(row["annotator"], row["task_id"], row["chosen"])
            for row in csv.DictReader(fh)
        ]


def tasks_from_sheets(
    presented: Mapping[str, list[str]], key: Mapping[str, str]
) -> list[IntruderTask]:
    """Rebuild scoreable tasks from tasks.csv + key.csv contents. Month and
    cluster id are not part of the sheets; only scoring fields are restored."""
    tasks = []
    for task_id in sorted(presented):
        if task_id not in key:
            raise ValueError(f"task {task_id} missing from the answer key")
        intr = key[task_id]
        names = presented[task_id]
        if intr not in names:
            raise ValueError(f"task {task_id}: key names {intr!r}, not presented")
        tasks.append(
            IntruderTask(
                task_id=task_id,
                month="",
                cluster_id=-1,
                members=[s for s in names if s != intr],
                intruder=intr,
                presented_order=list(names),
                rng_seed=0,
            )
        )
    return tasks


def write_coherence_sheet(clustering: Clustering, path) -> None:
    """clusters.csv: one row per cluster with space-joined member names."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cluster_id", "size", "members"])
        for cluster_id, members in sorted(clustering.groups().items()):
            writer.writerow([cluster_id, len(members), " ".join(members)])


def read_coherence_responses(path) -> list[CoherenceAnnotation]:
    """responses.csv rows (annotator, cluster_id, coherent in {0,1}, theme)."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            flag = row["coherent"].strip()
            if flag not in {"0", "1"}:
                raise ValueError(
                    f"coherent must be 0 or 1, got {flag!r} "
                    f"(annotator {row['annotator']!r}, cluster {row['cluster_id']})"
                )
            out.append(
                CoherenceAnnotation(
                    annotator=row["annotator"],
                    cluster_id=int(row["cluster_id"]),
                    coherent=flag == "1",
                    theme=row.get("theme") or None,
                )
            )
    return out
