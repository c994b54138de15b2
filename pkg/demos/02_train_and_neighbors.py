"""Train subreddit vectors on a planted corpus and inspect cosine neighbors.

With 90% within-block commenting the nearest neighbors of any subreddit
should come from its own block; the printout marks the ones that don't.
"""

import argparse
import time

from subatlas import embed
from synth import planted_corpus

if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--dim", type=int, default=32)
    parser.add_argument("--epochs", type=int, default=5)
    parser.add_argument("--negative", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--show", type=int, default=4, help="subreddits to print")
    args = parser.parse_args()

    corpus, truth = planted_corpus(seed=args.seed)
    print(
        f"planted corpus: {len(corpus.vocab)} subreddits, "
        f"{len(corpus.contexts)} users"
    )

    params = embed.TrainParams(
        dim=args.dim,
        negative_samples=args.negative,
        epochs=args.epochs,
        seed=args.seed,
    )
    t0 = time.time()
    model = embed.l2_normalize(embed.train_sgns(corpus, params))
    print(f"trained {params.dim}-d vectors in {time.time() - t0:.1f}s\n")

    for sub in sorted(corpus.vocab)[: args.show]:
        print(f"{sub} (block {truth[sub]}):")
        for name, sim in embed.nearest_neighbors(model, sub, n=5):
            flag = "" if truth[name] == truth[sub] else "   <- other block"
            print(f"  {name}  {sim:+.3f}{flag}")
        print()
