"""Analogy-based evaluation of embedding models.

Pair files hold categorized left/right pairs (for example city/team). Queries
take the relation of one pair and apply it to another left member; a query is
correct when any acceptable answer lands in the top-k cosine neighbors of the
composed vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .embed import EmbeddingModel

__all__ = [
    "AnalogySet",
    "AnalogyQuery",
    "UndefinedPrecisionError",
    "load_pairs",
    "generate_queries",
    "solvable",
    "solve_3cosadd",
    "precision_at_k",
]


class UndefinedPrecisionError(ValueError):
    """No solvable analogy: a precision score would be meaningless, not zero."""


@dataclass
class AnalogySet:
    categories: dict[str, list[tuple[str, str]]] = field(default_factory=dict)
    acceptable: dict[tuple[str, str], set[str]] = field(default_factory=dict)

    def add_pair(self, category: str, left: str, right: str) -> None:
        if not left or not right:
            raise ValueError("pair members must be non-empty")
        if left == right:
            raise ValueError(f"degenerate pair {left!r} -> {right!r}")
        pairs = self.categories.setdefault(category, [])
        if (left, right) not in pairs:
            pairs.append((left, right))
        self.acceptable.setdefault((category, left), set()).add(right)


@dataclass(frozen=True)
class AnalogyQuery:
    a: str
    b: str
    c: str
    expected: frozenset[str]
    category: str

    def __post_init__(self):
        if self.a == self.b or self.c in (self.a, self.b):
            raise ValueError(f"degenerate query {self.a}:{self.b} :: {self.c}:?")
        if not self.expected:
            raise ValueError("query without acceptable answers")


def load_pairs(path: str | Path) -> AnalogySet:
    """Parse a pair file: ``: category`` headers followed by ``left right``
    lines. Duplicate pairs are dropped; anything else malformed is an error
    naming the line."""
    result = AnalogySet()
    category = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(":"):
            category = line[1:].strip()
            if not category:
                raise ValueError(f"{path}:{lineno}: empty category header")
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'left right', got {raw!r}")
        if category is None:
            raise ValueError(f"{path}:{lineno}: pair before any category header")
        result.add_pair(category, *parts)
    return result


def generate_queries(analogy_set: AnalogySet) -> list[AnalogyQuery]:
    """Emit one query per ordered pair of pairs with distinct left members:
    a:b :: c:? where (a, b) is the source pair, c the target pair's left
    member, and the acceptable answers are every right member recorded for c."""
    queries: list[AnalogyQuery] = []
    for category, pairs in analogy_set.categories.items():
        for left1, right1 in pairs:
            for left2, _ in pairs:
                if left2 == left1:
                    continue
                queries.append(
                    AnalogyQuery(
                        a=left1,
                        b=right1,
                        c=left2,
                        expected=frozenset(
                            analogy_set.acceptable[(category, left2)]
                        ),
                        category=category,
                    )
                )
    return queries


def solvable(
    queries: Iterable[AnalogyQuery], vocab: Iterable[str]
) -> list[AnalogyQuery]:
    """Queries whose three terms and at least one acceptable answer are all in
    vocab; acceptable answers are restricted to the vocabulary."""
    vocab = set(vocab)
    kept = []
    for q in queries:
        if q.a not in vocab or q.b not in vocab or q.c not in vocab:
            continue
        answers = q.expected & vocab
        if not answers:
            continue
        kept.append(
            q
            if answers == q.expected
            else AnalogyQuery(q.a, q.b, q.c, frozenset(answers), q.category)
        )
    return kept


def solve_3cosadd(
    model: EmbeddingModel, query: AnalogyQuery, topn: int = 5
) -> list[tuple[str, float]]:
    """Rank the vocabulary by cosine similarity to normalize(b - a + c),
    with the three query terms excluded from the candidates."""
    if not model.normalized:
        raise ValueError("solve_3cosadd requires a normalized model")
    try:
        composed = (
            model.row(query.b).astype(np.float64)
            - model.row(query.a).astype(np.float64)
            + model.row(query.c).astype(np.float64)
        )
    except KeyError as exc:
        raise ValueError(f"query not solvable under model vocab: {exc}") from exc
    norm = np.linalg.norm(composed)
    if norm > 0:
        composed = composed / norm
    sims = model.vectors.astype(np.float64) @ composed
    order = np.lexsort((np.arange(len(sims)), -sims))
    exclude = {query.a, query.b, query.c}
    out = []
    for i in order:
        name = model.vocab[i]
        if name in exclude:
            continue
        out.append((name, float(sims[i])))
        if len(out) == topn:
            break
    return out


def precision_at_k(
    model: EmbeddingModel, queries: Iterable[AnalogyQuery], k: int = 5
) -> dict:
    """Share of solvable queries with an acceptable answer in the top-k,
    overall and per category."""
    if k < 1:
        raise ValueError("k must be >= 1")
    usable = solvable(queries, model.vocab)
    if not usable:
        raise UndefinedPrecisionError("no solvable analogy under this vocabulary")
    per_category: dict[str, dict] = {}
    correct_total = 0
    for q in usable:
        top = solve_3cosadd(model, q, topn=k)
        hit = any(name in q.expected for name, _ in top)
        correct_total += hit
        cat = per_category.setdefault(q.category, {"solvable": 0, "correct": 0})
        cat["solvable"] += 1
        cat["correct"] += hit
    for cat in per_category.values():
        cat["p_at_k"] = cat["correct"] / cat["solvable"]
    return {
        "k": k,
        "solvable": len(usable),
        "correct": correct_total,
        "p_at_k": correct_total / len(usable),
        "per_category": per_category,
    }
