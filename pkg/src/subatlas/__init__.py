"""subatlas: monthly subreddit co-commenting embeddings and their analysis.

Submodules:
    ingest    comment dumps -> filtered monthly snapshot corpora
    embed     skip-gram negative-sampling training and model selection
    analogy   subreddit analogy benchmark (3COSADD, P@k)
    cluster   k-means++ and agglomerative clustering of embeddings
    metrics   silhouette, Davies-Bouldin, VI, Jaccard, coherence, AC1
    temporal  cross-month stability and VI analyses
    intruder  intruder annotation task generation and scoring
    pipeline  end-to-end orchestration and artifact export
    server    read-only HTTP API over an artifact tree
    cli       `subatlas` command-line entry point
"""

__version__ = "0.1.0"
