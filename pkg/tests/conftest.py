import json
from pathlib import Path

import numpy as np
import pytest

from subatlas import embed, ingest

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def fixture_paths() -> dict:
    return {
        "2021-04": DATA / "RC_2021-04.jsonl.gz",
        "2021-05": DATA / "RC_2021-05.jsonl.gz",
        "pairs": DATA / "pairs.txt",
        "expectations": DATA / "fixture_expectations.json",
    }


@pytest.fixture(scope="session")
def april_expectations(fixture_paths) -> dict:
    return json.loads(fixture_paths["expectations"].read_text())


def load_fixture_corpus(path, month) -> ingest.SnapshotCorpus:
    config = ingest.FilterConfig(
        month=month, top_n_subreddits=4, activity_percentile=0.95
    )
    return ingest.build_snapshot(ingest.parse_dump(path, month), config)


@pytest.fixture(scope="session")
def april_corpus(fixture_paths) -> ingest.SnapshotCorpus:
    return load_fixture_corpus(fixture_paths["2021-04"], "2021-04")


@pytest.fixture(scope="session")
def may_corpus(fixture_paths) -> ingest.SnapshotCorpus:
    return load_fixture_corpus(fixture_paths["2021-05"], "2021-05")


def make_planted_corpus(
    month: str = "2021-04",
    n_subs: int = 40,
    blocks: int = 4,
    users: int = 2000,
    per_user: int = 12,
    within: float = 0.9,
    seed: int = 0,
    block_order=None,
) -> tuple[ingest.SnapshotCorpus, dict[str, int]]:
    """Synthetic snapshot with a planted block structure: each user mostly
    comments inside one block of subreddits. Returns (corpus, true labels).

    block_order optionally permutes which subreddits belong to which block
    (a list of sub indices), used to fabricate a structurally different month.
    """
    rng = np.random.default_rng(seed)
    subs = [f"r{i:03d}" for i in range(n_subs)]
    order = list(block_order) if block_order is not None else list(range(n_subs))
    per_block = n_subs // blocks
    truth = {}
    block_members: list[list[str]] = [[] for _ in range(blocks)]
    for pos, sub_idx in enumerate(order):
        b = pos // per_block
        block_members[b].append(subs[sub_idx])
        truth[subs[sub_idx]] = b
    contexts = {}
    for u in range(users):
        home = int(rng.integers(blocks))
        bag: dict[str, int] = {}
        for _ in range(per_user):
            if rng.random() < within:
                block = block_members[home]
            else:
                other = int(rng.integers(blocks - 1))
                block = block_members[other if other < home else other + 1]
            s = block[int(rng.integers(len(block)))]
            bag[s] = bag.get(s, 0) + 1
        contexts[f"u{u:04d}"] = dict(sorted(bag.items()))
    vocab: dict[str, int] = {}
    for bag in contexts.values():
        for s, c in bag.items():
            vocab[s] = vocab.get(s, 0) + c
    corpus = ingest.SnapshotCorpus(
        month=month, vocab=dict(sorted(vocab.items())), contexts=contexts
    )
    corpus.validate()
    return corpus, truth


@pytest.fixture(scope="session")
def planted() -> tuple[ingest.SnapshotCorpus, dict[str, int]]:
    return make_planted_corpus(seed=0)


def toy_model(
    vectors, names=None, month="2021-04", normalized=False
) -> embed.EmbeddingModel:
    """Wrap a raw array as a model for metric/cluster tests."""
    vectors = np.asarray(vectors, dtype=np.float32)
    if names is None:
        names = [f"r{i:03d}" for i in range(len(vectors))]
    params = embed.TrainParams(dim=vectors.shape[1])
    return embed.EmbeddingModel(
        month=month,
        vocab=list(names),
        vectors=vectors,
        params=params,
        normalized=normalized,
    )


def unit_rows(vectors) -> np.ndarray:
    vectors = np.asarray(vectors, dtype=np.float64)
    return (vectors / np.linalg.norm(vectors, axis=1, keepdims=True)).astype(
        np.float32
    )
