"""Generate word-intrusion sheets for a clustering and score simulated raters.

One rater always finds the intruder, one guesses uniformly among the six
options, so pooled model precision per cluster should hover around
(1 + 1/6) / 2. Sheets land in demo_out/ so the blinded tasks.csv / key.csv
split can be inspected.
"""

import argparse
import random
from pathlib import Path

from subatlas import cluster, embed, intruder
from synth import planted_corpus

if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="demo_out/intruder")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    corpus, _ = planted_corpus(seed=args.seed)
    model = embed.l2_normalize(
        embed.train_sgns(corpus, embed.TrainParams(dim=32, epochs=5, seed=args.seed))
    )
    clustering = cluster.kmeans_pp(model, k=4, seed=args.seed)

    tasks, skipped = intruder.generate_tasks(clustering, corpus.vocab, seed=args.seed)
    print(f"{len(tasks)} tasks generated, {len(skipped)} clusters skipped")
    for entry in skipped:
        print(f"  skipped cluster {entry['cluster_id']}: {entry['reason']}")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    intruder.write_task_sheets(tasks, out / "tasks.csv", out / "key.csv")
    print(f"sheets written to {out}/")

    rng = random.Random(args.seed)
    responses = []
    for t in tasks:
        responses.append(
            intruder.IntruderResponse(
                annotator="oracle", task_id=t.task_id, chosen=t.intruder
            )
        )
        responses.append(
            intruder.IntruderResponse(
                annotator="guesser",
                task_id=t.task_id,
                chosen=rng.choice(t.presented_order),
            )
        )

    scores = intruder.score_responses(tasks, responses)
    print(f"\nmean model precision: {scores['mean_mp']:.3f}")
    print("per-cluster (oracle + guesser pooled):")
    for task_id, mp in sorted(scores["per_cluster"].items()):
        print(f"  {task_id:12s} {mp:.2f}")
    print("distribution:", scores["distribution"])
