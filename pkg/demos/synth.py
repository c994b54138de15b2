"""Planted-community corpus generator shared by the demo scripts.

Each synthetic user gets a home block and comments inside it with
probability `within`, so the block structure is recoverable from
co-commenting alone. Rotating the block membership fabricates a
structurally different month over the same subreddit names.
"""

import numpy as np

from subatlas.ingest import SnapshotCorpus


def planted_corpus(
    month="2021-04",
    n_subs=40,
    blocks=4,
    users=2000,
    per_user=12,
    within=0.9,
    seed=0,
    rotate=0,
):
    rng = np.random.default_rng(seed)
    subs = [f"r{i:03d}" for i in range(n_subs)]
    order = list(np.roll(np.arange(n_subs), rotate))
    per_block = n_subs // blocks
    truth = {}
    block_members = [[] for _ in range(blocks)]
    for pos, sub_idx in enumerate(order):
        b = pos // per_block
        block_members[b].append(subs[sub_idx])
        truth[subs[sub_idx]] = b
    contexts = {}
    for u in range(users):
        home = int(rng.integers(blocks))
        bag = {}
        for _ in range(per_user):
            if rng.random() < within:
                block = block_members[home]
            else:
                other = int(rng.integers(blocks - 1))
                block = block_members[other if other < home else other + 1]
            s = block[int(rng.integers(len(block)))]
            bag[s] = bag.get(s, 0) + 1
        contexts[f"u{u:04d}"] = dict(sorted(bag.items()))
    vocab = {}
    for bag in contexts.values():
        for s, c in bag.items():
            vocab[s] = vocab.get(s, 0) + c
    corpus = SnapshotCorpus(
        month=month, vocab=dict(sorted(vocab.items())), contexts=contexts
    )
    corpus.validate()
    return corpus, truth
