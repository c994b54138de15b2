"""Hyperparameter selection by analogy precision on the bundled fixture.

Runs a small grid, scores each candidate with P@5 over the bundled pair
file, and keeps the winner. On the tiny four-subreddit fixture every
candidate lands at 1.0, so the tie-break (fewer negatives, then lower
learning rate, then lower downsampling threshold) decides.
"""

import argparse
from pathlib import Path

from subatlas import analogy, embed, ingest

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument(
        "--dump", default=str(ROOT / "tests/data/RC_2021-04.jsonl.gz")
    )
    parser.add_argument("--pairs", default=str(ROOT / "tests/data/pairs.txt"))
    parser.add_argument("--month", default="2021-04")
    args = parser.parse_args()

    tally = ingest.ParseTally()
    records = ingest.parse_dump(args.dump, args.month, tally)
    corpus = ingest.build_snapshot(
        records,
        ingest.FilterConfig(
            month=args.month, top_n_subreddits=4, activity_percentile=0.95
        ),
    )

    pairs = analogy.load_pairs(args.pairs)
    grid = embed.default_grid(
        base=embed.TrainParams(dim=16, epochs=3),
        negatives=(5, 10),
        thresholds=(0.0,),
        learning_rates=(0.05, 0.08),
    )
    print(f"grid of {len(grid)} candidates, {len(pairs.categories)} analogy categories")

    model, report = embed.grid_search(corpus, grid, pairs)
    for row in report:
        mark = " *" if row["selected"] else ""
        p = row["params"]
        print(
            f"  neg={p['negative_samples']:2d} lr={p['learning_rate']:.2f} "
            f"t={p['downsample_threshold']}  "
            f"P@5={row['p_at_5']:.3f} ({row['correct']}/{row['solvable']}){mark}"
        )

    queries = analogy.generate_queries(pairs)
    result = analogy.precision_at_k(model, queries, k=5)
    print(f"\nselected model P@5 = {result['p_at_k']:.3f}")
    for cat, stats in sorted(result["per_category"].items()):
        print(f"  {cat}: {stats['correct']}/{stats['solvable']}")
