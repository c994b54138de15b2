"""Run the whole pipeline on the bundled two-month fixture, then serve it.

Builds the complete artifact tree (snapshot, grid-selected model,
clusterings, metrics, neighbors, layout, cross-month stability and VI) and
optionally starts the read-only API over it. Rerunning against the same
tree is a no-op: months whose input fingerprints match are skipped.
"""

import argparse
from pathlib import Path

from subatlas import embed, pipeline

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--root", default="demo_out/artifacts")
    parser.add_argument("--serve", action="store_true", help="start the API afterwards")
    parser.add_argument("--port", type=int, default=8000)
    args = parser.parse_args()

    config = pipeline.PipelineConfig(
        months=["2021-04", "2021-05"],
        inputs={
            "2021-04": str(ROOT / "tests/data/RC_2021-04.jsonl.gz"),
            "2021-05": str(ROOT / "tests/data/RC_2021-05.jsonl.gz"),
        },
        artifact_root=args.root,
        analogy_path=str(ROOT / "tests/data/pairs.txt"),
        top_n_subreddits=4,
        activity_percentile=0.95,
        grid=[
            embed.TrainParams(dim=16, negative_samples=5, epochs=3, seed=0),
            embed.TrainParams(dim=16, negative_samples=10, epochs=3, seed=0),
        ],
        clusterings=[("kmeanspp", 2), ("ha_ward", 2)],
        stability_n=5,
    )
    report = pipeline.run_pipeline(config)
    for month, entry in report["months"].items():
        print(f"{month}: {entry['status']}")
    print(f"cross-month: {report['cross']['status']}")
    print(f"artifact tree at {args.root}/")

    if args.serve:
        from subatlas.server import serve

        print(f"\nserving http://127.0.0.1:{args.port}/api/months (ctrl-c to stop)")
        serve(args.root, port=args.port)
