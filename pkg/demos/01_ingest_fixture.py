"""Ingest the bundled comment dump and show what the filters kept.

The four-stage filter (parse -> top-N subreddits -> activity band ->
rebuild) is where most of the raw volume disappears; the tallies make the
drops auditable.
"""

import argparse
from pathlib import Path

from subatlas import ingest

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument(
        "--dump", default=str(ROOT / "tests/data/RC_2021-04.jsonl.gz")
    )
    parser.add_argument("--month", default="2021-04")
    parser.add_argument("--top-n", type=int, default=4)
    parser.add_argument("--percentile", type=float, default=0.95)
    parser.add_argument("--out", default="demo_out/snapshot")
    args = parser.parse_args()

    tally = ingest.ParseTally()
    records = ingest.parse_dump(args.dump, args.month, tally)
    print(
        f"parsed {tally.parsed}/{tally.lines} lines "
        f"({tally.malformed} malformed, {tally.wrong_month} wrong month)"
    )

    corpus = ingest.build_snapshot(
        records,
        ingest.FilterConfig(
            month=args.month,
            top_n_subreddits=args.top_n,
            activity_percentile=args.percentile,
        ),
    )
    stats = corpus.stats
    print(f"\nkept {stats['total_comments']} comments from {stats['unique_users']} users")
    print(f"activity cutoff (p{int(args.percentile * 100)}): {stats['activity_cutoff']} comments/user")
    print("dropped:")
    for reason, count in sorted(stats["dropped"].items()):
        print(f"  {reason:24s} {count}")
    print("\nvocabulary (comment counts):")
    for sub, count in sorted(corpus.vocab.items(), key=lambda kv: -kv[1]):
        print(f"  {sub:12s} {count}")

    ingest.save_snapshot(corpus, args.out)
    print(f"\nsnapshot written to {args.out}/ (vocab.json, stats.json, contexts.bin)")
