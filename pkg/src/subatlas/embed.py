"""Skip-gram negative-sampling embeddings over per-user subreddit contexts.

Each user's monthly context acts as one unbounded window: every surviving
token occurrence is a center whose positive targets are all other surviving
occurrences of the same context. Training runs in compiled kernels; a single
worker with a fixed seed is bit-reproducible, multiple workers apply
unsynchronized (hogwild) updates to the shared weight matrices.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from .ingest import SnapshotCorpus

__all__ = [
    "TrainParams",
    "EmbeddingModel",
    "UntrainableCorpusError",
    "default_grid",
    "train_sgns",
    "downsample_keep_prob",
    "l2_normalize",
    "nearest_neighbors",
    "grid_search",
    "save_model",
    "load_model",
    "sample_negatives",
]


class UntrainableCorpusError(ValueError):
    """Corpus has no context that can generate a skip-gram pair."""


@dataclass(frozen=True)
class TrainParams:
    dim: int = 100
    negative_samples: int = 10
    downsample_threshold: float = 0.0
    learning_rate: float = 0.05
    epochs: int = 5
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.negative_samples < 1:
            raise ValueError("negative_samples must be >= 1")
        if self.downsample_threshold < 0:
            raise ValueError("downsample_threshold must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "negative_samples": self.negative_samples,
            "downsample_threshold": self.downsample_threshold,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "seed": self.seed,
            "workers": self.workers,
        }


def default_grid(
    base: TrainParams = TrainParams(),
    negatives: Sequence[int] = (10, 20),
    thresholds: Sequence[float] = (0.0, 0.001, 0.005),
    learning_rates: Sequence[float] = (0.05, 0.08),
) -> list[TrainParams]:
    """The 2x3x2 hyperparameter grid used for monthly model selection."""
    return [
        replace(
            base,
            negative_samples=k,
            downsample_threshold=t,
            learning_rate=lr,
        )
        for k in negatives
        for t in thresholds
        for lr in learning_rates
    ]


@dataclass
class EmbeddingModel:
    month: str
    vocab: list[str]
    vectors: np.ndarray  # |vocab| x dim, float32
    params: TrainParams
    normalized: bool = False

    def __post_init__(self):
        if len(self.vocab) != self.vectors.shape[0]:
            raise ValueError("vocab length and vector row count disagree")
        self._index = {s: i for i, s in enumerate(self.vocab)}

    def __contains__(self, subreddit: str) -> bool:
        return subreddit in self._index

    def row(self, subreddit: str) -> np.ndarray:
        try:
            return self.vectors[self._index[subreddit]]
        except KeyError:
            raise KeyError(f"unknown subreddit {subreddit!r}") from None


def downsample_keep_prob(f: float, t: float) -> float:
    """Keep probability for a token with relative frequency f at threshold t.

    t = 0 disables downsampling; otherwise min(1, sqrt(t / f)).
    """
    if not 0 <= f <= 1:
        raise ValueError("relative frequency must be in [0, 1]")
    if t == 0 or f <= t:
        return 1.0
    return min(1.0, math.sqrt(t / f))


# word2vec's 64-bit multiplicative congruential generator
_LCG_MUL = np.uint64(25214903917)
_LCG_ADD = np.uint64(11)


@njit(cache=True, inline="always")
def _lcg_next(state):
    return state * _LCG_MUL + _LCG_ADD


@njit(cache=True, inline="always")
def _lcg_unit(state):
    # upper bits only; low LCG bits have short periods
    return float((state >> np.uint64(16)) & np.uint64(0xFFFFFFFF)) / 4294967296.0


@njit(cache=True)
def _sample_negatives_kernel(cum_weights, n, seed):
    out = np.empty(n, dtype=np.int32)
    state = np.uint64(seed) * _LCG_MUL + _LCG_ADD
    total = cum_weights[-1]
    for i in range(n):
        state = _lcg_next(state)
        u = _lcg_unit(state) * total
        out[i] = np.searchsorted(cum_weights, u, side="right")
    return out


def sample_negatives(weights: np.ndarray, n: int, seed: int = 0) -> np.ndarray:
    """Draw n indices from the (already exponentiated) sampling weights using
    the same generator the trainer uses. Exposed for distribution checks."""
    cum = np.cumsum(np.asarray(weights, dtype=np.float64))
    return _sample_negatives_kernel(cum, n, seed)


@njit(cache=True, nogil=True)
def _train_shard(
    tokens,
    offsets,
    u_start,
    u_end,
    cum_weights,
    keep_prob,
    syn0,
    syn1,
    negative,
    lr0,
    lr_min,
    epochs,
    seed,
):
    dim = syn0.shape[1]
    total = cum_weights[-1]
    state = np.uint64(seed) * _LCG_MUL + _LCG_ADD

    total_slots = 0.0
    max_len = 0
    for u in range(u_start, u_end):
        t_u = offsets[u + 1] - offsets[u]
        total_slots += t_u * (t_u - 1)
        if t_u > max_len:
            max_len = t_u
    total_slots *= epochs
    if total_slots <= 0:
        return

    kept = np.empty(max_len, dtype=np.int32)
    neu = np.empty(dim, dtype=np.float32)
    clock = 0.0
    for _ in range(epochs):
        for u in range(u_start, u_end):
            lo = offsets[u]
            hi = offsets[u + 1]
            t_u = hi - lo
            lr = lr0 * (1.0 - clock / total_slots)
            if lr < lr_min:
                lr = lr_min
            clock += t_u * (t_u - 1)

            n_kept = 0
            for i in range(lo, hi):
                tok = tokens[i]
                if keep_prob[tok] >= 1.0:
                    kept[n_kept] = tok
                    n_kept += 1
                else:
                    state = _lcg_next(state)
                    if _lcg_unit(state) < keep_prob[tok]:
                        kept[n_kept] = tok
                        n_kept += 1

            for i in range(n_kept):
                center = kept[i]
                for j in range(n_kept):
                    if j == i:
                        continue
                    positive = kept[j]
                    for d in range(dim):
                        neu[d] = 0.0
                    for s in range(negative + 1):
                        if s == 0:
                            target = positive
                            label = 1.0
                        else:
                            state = _lcg_next(state)
                            u_rand = _lcg_unit(state) * total
                            target = np.searchsorted(cum_weights, u_rand, side="right")
                            if target == positive:
                                continue
                            label = 0.0
                        f = 0.0
                        for d in range(dim):
                            f += float(syn0[center, d]) * float(syn1[target, d])
                        if f >= 0.0:
                            sig = 1.0 / (1.0 + math.exp(-f))
                        else:
                            e = math.exp(f)
                            sig = e / (1.0 + e)
                        g = np.float32((label - sig) * lr)
                        for d in range(dim):
                            neu[d] += g * syn1[target, d]
                            syn1[target, d] += g * syn0[center, d]
                    for d in range(dim):
                        syn0[center, d] += neu[d]


def _corpus_arrays(
    corpus: SnapshotCorpus, vocab: list[str]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Flatten contexts into (tokens, offsets, counts) with users name-sorted."""
    index = {s: i for i, s in enumerate(vocab)}
    counts = np.zeros(len(vocab), dtype=np.int64)
    tokens: list[int] = []
    offsets = [0]
    for user in sorted(corpus.contexts):
        bag = corpus.contexts[user]
        for sub in sorted(bag, key=index.__getitem__):
            tok = index[sub]
            occurrences = bag[sub]
            tokens.extend([tok] * occurrences)
            counts[tok] += occurrences
        offsets.append(len(tokens))
    return (
        np.asarray(tokens, dtype=np.int32),
        np.asarray(offsets, dtype=np.int64),
        counts,
    )


def train_sgns(corpus: SnapshotCorpus, params: TrainParams) -> EmbeddingModel:
    """Train skip-gram negative-sampling embeddings on one month's contexts.

    Negatives are drawn from the unigram distribution raised to 3/4; the
    learning rate decays linearly to 1e-4 of its initial value over the
    scheduled pair count. Returns unnormalized center vectors.
    """
    if not corpus.contexts:
        raise UntrainableCorpusError(f"empty corpus for {corpus.month}")
    vocab = sorted(corpus.vocab, key=lambda s: (-corpus.vocab[s], s))
    tokens, offsets, counts = _corpus_arrays(corpus, vocab)
    sizes = np.diff(offsets)
    if not (sizes >= 2).any():
        raise UntrainableCorpusError(
            f"no context in {corpus.month} has 2 or more token occurrences"
        )

    cum_weights = np.cumsum(counts.astype(np.float64) ** 0.75)
    freqs = counts / counts.sum()
    keep = np.asarray(
        [downsample_keep_prob(f, params.downsample_threshold) for f in freqs],
        dtype=np.float64,
    )

    rng = np.random.default_rng(params.seed)
    bound = 0.5 / params.dim
    syn0 = rng.uniform(-bound, bound, size=(len(vocab), params.dim)).astype(np.float32)
    syn1 = np.zeros((len(vocab), params.dim), dtype=np.float32)

    n_users = len(offsets) - 1
    workers = min(params.workers, n_users)
    bounds = np.linspace(0, n_users, workers + 1).astype(np.int64)
    args = dict(
        tokens=tokens,
        offsets=offsets,
        cum_weights=cum_weights,
        keep_prob=keep,
        syn0=syn0,
        syn1=syn1,
        negative=params.negative_samples,
        lr0=params.learning_rate,
        lr_min=params.learning_rate * 1e-4,
        epochs=params.epochs,
    )
    if workers == 1:
        _train_shard(u_start=0, u_end=n_users, seed=params.seed, **args)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(
                    _train_shard,
                    u_start=int(bounds[w]),
                    u_end=int(bounds[w + 1]),
                    seed=params.seed + w,
                    **args,
                )
                for w in range(workers)
            ]
            for fut in futures:
                fut.result()

    return EmbeddingModel(
        month=corpus.month,
        vocab=vocab,
        vectors=syn0,
        params=params,
        normalized=False,
    )


def l2_normalize(model: EmbeddingModel) -> EmbeddingModel:
    """Scale every vector to unit L2 norm. Idempotent; a zero row is an error."""
    if model.normalized:
        return model
    norms = np.linalg.norm(model.vectors.astype(np.float64), axis=1)
    zero = np.flatnonzero(norms == 0)
    if len(zero):
        raise ValueError(f"zero vector for subreddit {model.vocab[zero[0]]!r}")
    vectors = (model.vectors.astype(np.float64) / norms[:, None]).astype(np.float32)
    return EmbeddingModel(
        month=model.month,
        vocab=list(model.vocab),
        vectors=vectors,
        params=model.params,
        normalized=True,
    )


def nearest_neighbors(
    model: EmbeddingModel, subreddit: str, n: int = 20
) -> list[tuple[str, float]]:
    """Top-n vocabulary entries by cosine similarity to the query subreddit,
    excluding the query itself; ties broken by vocabulary order."""
    if not model.normalized:
        raise ValueError("nearest_neighbors requires a normalized model")
    idx = model._index.get(subreddit)
    if idx is None:
        raise KeyError(f"unknown subreddit {subreddit!r}")
    query = model.vectors[idx].astype(np.float64)
    sims = model.vectors.astype(np.float64) @ query
    order = np.lexsort((np.arange(len(sims)), -sims))
    out = []
    for i in order:
        if i == idx:
            continue
        out.append((model.vocab[i], float(sims[i])))
        if len(out) == n:
            break
    return out


def grid_search(
    corpus: SnapshotCorpus,
    grid: Sequence[TrainParams],
    analogies,
) -> tuple[EmbeddingModel, list[dict]]:
    """Train every configuration and pick the one with the best analogy P@5.

    Ties break toward fewer negatives, then lower learning rate, then lower
    downsampling threshold. When the month has no solvable analogies at all,
    the first grid entry is selected and every report row carries a
    fallback flag. Returns the selected model, L2-normalized, plus the
    per-configuration report.
    """
    from .analogy import generate_queries, precision_at_k, solvable

    if not grid:
        raise ValueError("grid must be non-empty")
    queries = generate_queries(analogies)
    report: list[dict] = []
    models: list[EmbeddingModel] = []
    for params in grid:
        model = l2_normalize(train_sgns(corpus, params))
        models.append(model)
        usable = solvable(queries, model.vocab)
        if usable:
            result = precision_at_k(model, usable, k=5)
            row = {
                "params": params.to_dict(),
                "p_at_5": result["p_at_k"],
                "solvable": result["solvable"],
                "correct": result["correct"],
                "fallback": False,
            }
        else:
            row = {
                "params": params.to_dict(),
                "p_at_5": None,
                "solvable": 0,
                "correct": 0,
                "fallback": True,
            }
        report.append(row)

    scored = [i for i, row in enumerate(report) if row["p_at_5"] is not None]
    if scored:
        best = min(
            scored,
            key=lambda i: (
                -report[i]["p_at_5"],
                grid[i].negative_samples,
                grid[i].learning_rate,
                grid[i].downsample_threshold,
                i,
            ),
        )
    else:
        best = 0
    for i, row in enumerate(report):
        row["selected"] = i == best
    return models[best], report


def save_model(model: EmbeddingModel, directory: str | Path) -> None:
    """Write vectors.f32 (row-major little-endian float32) plus a model.json
    sidecar describing vocabulary order and training parameters."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    sidecar = {
        "month": model.month,
        "vocab": model.vocab,
        "dim": int(model.vectors.shape[1]),
        "params": model.params.to_dict(),
        "normalized": model.normalized,
    }
    (directory / "model.json").write_text(
        json.dumps(sidecar, sort_keys=True, indent=2) + "\n"
    )
    (directory / "vectors.f32").write_bytes(
        np.ascontiguousarray(model.vectors, dtype="<f4").tobytes()
    )


def load_model(directory: str | Path) -> EmbeddingModel:
    directory = Path(directory)
    sidecar = json.loads((directory / "model.json").read_text())
    raw = np.frombuffer((directory / "vectors.f32").read_bytes(), dtype="<f4")
    vectors = raw.reshape(len(sidecar["vocab"]), sidecar["dim"]).copy()
    return EmbeddingModel(
        month=sidecar["month"],
        vocab=list(sidecar["vocab"]),
        vectors=vectors,
        params=TrainParams(**sidecar["params"]),
        normalized=sidecar["normalized"],
    )
