"""Cluster a planted corpus both ways and compare against the ground truth.

k-means++ and the agglomerative cuts should both land on the planted
blocks (VI near zero); silhouette and Davies-Bouldin are reported so the
internal metrics can be sanity-checked against the known structure.
"""

import argparse

from subatlas import cluster, embed, metrics
from synth import planted_corpus

if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--blocks", type=int, default=4)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    corpus, truth = planted_corpus(blocks=args.blocks, seed=args.seed)
    params = embed.TrainParams(dim=32, epochs=5, seed=args.seed)
    model = embed.l2_normalize(embed.train_sgns(corpus, params))
    points = model.vectors
    truth_assign = {s: truth[s] for s in model.vocab}

    print(f"{'clustering':18s} {'VI vs truth':>12s} {'silhouette':>11s} {'DB':>7s}")
    results = [("kmeans++", cluster.kmeans_pp(model, k=args.blocks, seed=args.seed))]
    for linkage in cluster.LINKAGES:
        flat, _tree = cluster.agglomerative(model, linkage, k=args.blocks)
        results.append((f"ha_{linkage}", flat))

    for name, clustering in results:
        vi = metrics.variation_of_information(clustering.assignment, truth_assign)
        labels = cluster.labels_for(clustering, model.vocab)
        sil, _ = metrics.silhouette(points, labels)
        db = metrics.davies_bouldin(points, labels)
        print(f"{name:18s} {vi:12.4f} {sil:11.3f} {db:7.3f}")

    print(f"\nupper bound for two {args.blocks}-way clusterings: "
          f"{metrics.vi_upper_bound(args.blocks, args.blocks):.3f} bits")
