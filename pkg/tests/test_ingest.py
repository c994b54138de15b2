import gzip
import hashlib
import io
import json

import pytest

from subatlas.ingest import (
    BodyState,
    CommentRecord,
    EmptyCorpusError,
    FilterConfig,
    IngestError,
    ParseTally,
    SnapshotCorpus,
    build_snapshot,
    load_snapshot,
    parse_dump,
    percentile_cutoff,
    save_snapshot,
)

from conftest import load_fixture_corpus
from oracles import nearest_rank

APRIL_TS = 1617235200 + 1000


def rec(author, sub, body="text", ts=APRIL_TS, cid=None):
    state = {
        "[deleted]": BodyState.DELETED,
        "[removed]": BodyState.REMOVED,
    }.get(body, BodyState.PRESENT)
    return CommentRecord(
        author=author,
        subreddit=sub,
        created_utc=ts,
        body_state=state,
        id=cid or f"{author}-{sub}-{ts}",
    )


def line(author="u", sub="s", ts=APRIL_TS, body="hello", **extra):
    doc = {"author": author, "subreddit": sub, "created_utc": ts, "id": "x1", "body": body}
    doc.update(extra)
    return json.dumps(doc).encode() + b"\n"


# ---------------------------------------------------------------------------
# parsing


def test_parse_plain_stream_and_tally():
    tally = ParseTally()
    stream = io.BytesIO(
        line(author="alice")
        + b"garbage\n"
        + b"\n"
        + line(author="bob", ts=1614556900)  # March
        + line(author="carol", body="[removed]")
    )
    records = list(parse_dump(stream, "2021-04", tally))
    assert [r.author for r in records] == ["alice", "carol"]
    assert records[1].body_state is BodyState.REMOVED
    assert tally.lines == 4  # blank line skipped before tallying
    assert tally.malformed == 1
    assert tally.wrong_month == 1
    assert tally.parsed == 2


def test_parse_rejects_non_comment_json():
    tally = ParseTally()
    stream = io.BytesIO(b'[1,2,3]\n{"author": "x"}\n' + line())
    assert len(list(parse_dump(stream, "2021-04", tally))) == 1
    assert tally.malformed == 2


def test_parse_without_month_keeps_everything():
    stream = io.BytesIO(line(ts=APRIL_TS) + line(ts=1614556900))
    assert len(list(parse_dump(stream))) == 2


def test_parse_gzip_path(tmp_path):
    path = tmp_path / "dump.jsonl.gz"
    with gzip.open(path, "wb") as fh:
        fh.write(line(author="zoe"))
    records = list(parse_dump(path, "2021-04"))
    assert records[0].author == "zoe"


def test_parse_missing_file():
    with pytest.raises(IngestError, match="not found"):
        list(parse_dump("/nonexistent/dump.jsonl", "2021-04"))


def test_parse_bad_month_format():
    with pytest.raises(ValueError, match="YYYY-MM"):
        list(parse_dump(io.BytesIO(b""), "April-2021"))


# ---------------------------------------------------------------------------
# percentile


def test_percentile_nearest_rank_basics():
    assert percentile_cutoff(range(1, 101), 0.95) == 95
    assert percentile_cutoff([7], 0.5) == 7
    assert percentile_cutoff([1, 2, 3, 4], 1.0) == 4
    assert percentile_cutoff([10, 20, 30], 0.34) == 20  # ceil(1.02) = 2nd


def test_percentile_matches_oracle():
    import numpy as np

    rng = np.random.default_rng(11)
    for _ in range(200):
        values = rng.integers(1, 50, size=rng.integers(1, 40)).tolist()
        p = float(rng.uniform(0.01, 1.0))
        assert percentile_cutoff(values, p) == nearest_rank(values, p)


def test_percentile_rejects_bad_input():
    with pytest.raises(ValueError):
        percentile_cutoff([], 0.5)
    with pytest.raises(ValueError):
        percentile_cutoff([1], 0.0)
    with pytest.raises(ValueError):
        percentile_cutoff([1], 1.5)


# ---------------------------------------------------------------------------
# filtering pipeline


def cfg(**kw):
    base = {"month": "2021-04", "top_n_subreddits": 10, "activity_percentile": 1.0}
    base.update(kw)
    return FilterConfig(**base)


def test_filter_config_validation():
    with pytest.raises(ValueError):
        FilterConfig(month="2021-13")
    with pytest.raises(ValueError):
        FilterConfig(month="2021-04", top_n_subreddits=0)
    with pytest.raises(ValueError):
        FilterConfig(month="2021-04", activity_percentile=0.0)


def test_top_n_rank_and_name_tiebreak():
    records = []
    for i in range(3):
        records.append(rec(f"a{i}", "big", cid=f"b{i}"))
        records.append(rec(f"a{i}", "tie_z", cid=f"z{i}"))
        records.append(rec(f"a{i}", "tie_a", cid=f"a{i}"))
    corpus = build_snapshot(records, cfg(top_n_subreddits=2))
    # big and tie_a survive; tie_z loses the boundary tie on name
    assert set(corpus.vocab) == {"big", "tie_a"}
    assert corpus.stats["dropped"]["not_top_n"] == 3


def test_profile_pages_never_ranked():
    records = []
    for i in range(5):
        records.append(rec(f"a{i}", "u_celebrity", cid=f"p{i}"))
    records.append(rec("a0", "tiny", cid="t0"))
    records.append(rec("a0", "tiny", cid="t1"))
    corpus = build_snapshot(records, cfg(top_n_subreddits=1))
    assert set(corpus.vocab) == {"tiny"}
    assert corpus.stats["dropped"]["profile_page"] == 5


def test_deleted_author_and_body_filters():
    records = [
        rec("[deleted]", "s", cid="d1"),
        rec("[deleted]", "s", cid="d2"),
        rec("gone", "s", body="[removed]", cid="g1"),
        rec("gone", "s", body="[deleted]", cid="g2"),
        rec("alice", "s", cid="a1"),
        rec("alice", "s", cid="a2"),
    ]
    corpus = build_snapshot(records, cfg())
    assert corpus.stats["dropped"]["deleted_author"] == 2
    assert corpus.stats["dropped"]["body_not_present"] == 2
    assert list(corpus.contexts) == ["alice"]


def test_single_comment_author_uses_raw_counts():
    # bob's second comment lands outside the top-N, so his raw count is 2:
    # he passes the singleton filter but then dies with a 1-token context
    records = [
        rec("bob", "kept", cid="b1"),
        rec("bob", "dropped_sub", cid="b2"),
        rec("solo", "kept", cid="s1"),
        rec("alice", "kept", cid="a1"),
        rec("alice", "kept", cid="a2"),
    ]
    corpus = build_snapshot(records, cfg(top_n_subreddits=1))
    dropped = corpus.stats["dropped"]
    assert dropped["single_comment_author"] == 1  # solo
    assert dropped["short_context"] == 1  # bob
    assert list(corpus.contexts) == ["alice"]


def test_percentile_removes_strictly_greater():
    # counts 1,2,3,4 at p=0.75: cutoff = 3, only the count-4 user leaves;
    # the count-1 user survives the cutoff but has a short context
    records = []
    for count, name in [(2, "u2"), (3, "u3"), (4, "u4")]:
        for i in range(count):
            records.append(rec(name, "s", cid=f"{name}-{i}"))
    records.append(rec("u1", "s", cid="u1-0"))
    records.append(rec("u1", "other", cid="u1-1"))  # raw 2, one survives top-N
    corpus = build_snapshot(records, cfg(top_n_subreddits=1, activity_percentile=0.75))
    assert corpus.stats["activity_cutoff"] == 3
    assert corpus.stats["dropped"]["hyperactive_author"] == 4
    assert set(corpus.contexts) == {"u2", "u3"}


def test_empty_corpus_raises():
    with pytest.raises(EmptyCorpusError):
        build_snapshot([rec("solo", "s", cid="x")], cfg())


def test_validate_rejects_short_context():
    with pytest.raises(ValueError, match="fewer than 2"):
        SnapshotCorpus(
            month="2021-04", vocab={"s": 1}, contexts={"u": {"s": 1}}
        ).validate()


def test_validate_rejects_unknown_subreddit():
    with pytest.raises(ValueError, match="references"):
        SnapshotCorpus(
            month="2021-04", vocab={"s": 2}, contexts={"u": {"s": 1, "t": 1}}
        ).validate()


# ---------------------------------------------------------------------------
# bundled fixture: hand-counted expectations


def test_fixture_tallies_match_hand_counts(fixture_paths, april_expectations):
    tally = ParseTally()
    records = parse_dump(fixture_paths["2021-04"], "2021-04", tally)
    config = FilterConfig(
        month="2021-04",
        top_n_subreddits=april_expectations["filter"]["top_n_subreddits"],
        activity_percentile=april_expectations["filter"]["activity_percentile"],
    )
    corpus = build_snapshot(records, config)
    exp = april_expectations
    assert tally.lines == exp["tally"]["lines"]
    assert tally.malformed == exp["tally"]["malformed"]
    assert tally.wrong_month == exp["tally"]["wrong_month"]
    assert tally.parsed == exp["tally"]["parsed"]
    assert corpus.stats["dropped"] == exp["dropped"]
    assert corpus.stats["activity_cutoff"] == exp["activity_cutoff"]
    assert corpus.stats["unique_users"] == exp["unique_users"]
    assert corpus.stats["total_comments"] == exp["total_comments"]
    assert corpus.vocab == exp["vocab"]


def test_fixture_snapshot_byte_identical(fixture_paths, tmp_path):
    hashes = []
    for run in ("one", "two"):
        corpus = load_fixture_corpus(fixture_paths["2021-04"], "2021-04")
        outdir = tmp_path / run
        save_snapshot(corpus, outdir)
        hashes.append(
            {
                p.name: hashlib.sha256(p.read_bytes()).hexdigest()
                for p in outdir.iterdir()
            }
        )
    assert hashes[0] == hashes[1]
    assert set(hashes[0]) == {"vocab.json", "stats.json", "contexts.bin"}


def test_snapshot_roundtrip(fixture_paths, april_corpus, tmp_path):
    save_snapshot(april_corpus, tmp_path)
    loaded = load_snapshot(tmp_path)
    assert loaded.month == april_corpus.month
    assert loaded.vocab == april_corpus.vocab
    assert loaded.contexts == april_corpus.contexts
    assert loaded.stats == april_corpus.stats
    loaded.validate()


def test_contexts_bin_layout(april_corpus, tmp_path):
    import struct

    save_snapshot(april_corpus, tmp_path)
    blob = (tmp_path / "contexts.bin").read_bytes()
    assert blob[:8] == b"SATLCTX1"
    (n_users,) = struct.unpack_from("<I", blob, 8)
    assert n_users == len(april_corpus.contexts)
    # walk the whole buffer: length-prefixed name, then (sub_id, count) pairs
    off = 12
    sub_names = sorted(april_corpus.vocab)
    seen = {}
    for _ in range(n_users):
        (name_len,) = struct.unpack_from("<I", blob, off)
        off += 4
        name = blob[off : off + name_len].decode()
        off += name_len
        (n_pairs,) = struct.unpack_from("<I", blob, off)
        off += 4
        bag = {}
        for _ in range(n_pairs):
            sub_id, count = struct.unpack_from("<II", blob, off)
            off += 8
            bag[sub_names[sub_id]] = count
        seen[name] = bag
    assert off == len(blob)
    assert seen == april_corpus.contexts
