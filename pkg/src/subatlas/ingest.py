"""Streaming ingestion of compressed comment dumps into monthly snapshot corpora.

A dump is a (gzip- or zstd-compressed) stream of line-delimited JSON objects,
one comment per line, with at least the fields author, subreddit, created_utc,
id and body. Ingestion filters a month of comments down to the contexts that
feed embedding training: per-user bags of subreddit tokens.
"""

from __future__ import annotations

import gzip
import json
import struct
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from math import ceil
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator

__all__ = [
    "BodyState",
    "CommentRecord",
    "FilterConfig",
    "SnapshotCorpus",
    "ParseTally",
    "IngestError",
    "EmptyCorpusError",
    "parse_dump",
    "build_snapshot",
    "percentile_cutoff",
    "save_snapshot",
    "load_snapshot",
]

DELETED_AUTHOR = "[deleted]"
PROFILE_PREFIX = "u_"
_CONTEXTS_MAGIC = b"SATLCTX1"


class IngestError(RuntimeError):
    """Fatal problem with a dump stream (unreadable, corrupt, wrong format)."""


class EmptyCorpusError(IngestError):
    """Filtering left no trainable contexts."""


class BodyState(Enum):
    PRESENT = "present"
    DELETED = "deleted"
    REMOVED = "removed"


@dataclass(frozen=True)
class CommentRecord:
    author: str
    subreddit: str
    created_utc: int
    body_state: BodyState
    id: str


@dataclass(frozen=True)
class FilterConfig:
    """Snapshot filtering parameters.

    top_n_subreddits: how many subreddits to keep, ranked by raw comment count.
    activity_percentile: users strictly above this activity percentile
    (nearest-rank) are removed.
    """

    month: str
    top_n_subreddits: int = 10_000
    activity_percentile: float = 0.95

    def __post_init__(self):
        _validate_month(self.month)
        if self.top_n_subreddits < 1:
            raise ValueError("top_n_subreddits must be >= 1")
        if not 0 < self.activity_percentile <= 1:
            raise ValueError("activity_percentile must be in (0, 1]")


@dataclass
class ParseTally:
    lines: int = 0
    parsed: int = 0
    malformed: int = 0
    wrong_month: int = 0


@dataclass
class SnapshotCorpus:
    """One month's filtered corpus: vocabulary counts and per-user token bags."""

    month: str
    vocab: dict[str, int]
    contexts: dict[str, dict[str, int]]
    stats: dict = field(default_factory=dict)

    def validate(self) -> None:
        for user, bag in self.contexts.items():
            if sum(bag.values()) < 2:
                raise ValueError(f"context for {user!r} has fewer than 2 tokens")
            unknown = set(bag) - set(self.vocab)
            if unknown:
                raise ValueError(f"context for {user!r} references {unknown}")


def _validate_month(month: str) -> None:
    parts = month.split("-")
    ok = len(parts) == 2 and len(parts[0]) == 4 and len(parts[1]) == 2
    if ok:
        ok = parts[0].isdigit() and parts[1].isdigit() and 1 <= int(parts[1]) <= 12
    if not ok:
        raise ValueError(f"month must look like YYYY-MM, got {month!r}")


def _month_of(created_utc: int) -> str:
    dt = datetime.fromtimestamp(created_utc, tz=timezone.utc)
    return f"{dt.year:04d}-{dt.month:02d}"


def _open_stream(source: str | Path | BinaryIO) -> BinaryIO:
    if hasattr(source, "read"):
        return source  # type: ignore[return-value]
    path = Path(source)
    if not path.exists():
        raise IngestError(f"dump not found: {path}")
    if path.suffix == ".gz":
        return gzip.open(path, "rb")
    if path.suffix == ".zst":
        try:
            import zstandard
        except ImportError as exc:
            raise IngestError(
                "zstd dump requires the optional 'zstandard' package"
            ) from exc
        return zstandard.ZstdDecompressor(max_window_size=2**31).stream_reader(
            open(path, "rb")
        )
    return open(path, "rb")


def _record_from_line(line: bytes) -> CommentRecord | None:
    try:
        obj = json.loads(line)
    except (ValueError, UnicodeDecodeError):
        return None
    if not isinstance(obj, dict):
        return None
    try:
        author = str(obj["author"])
        subreddit = str(obj["subreddit"])
        created = int(obj["created_utc"])
        comment_id = str(obj["id"])
        body = obj.get("body", "")
    except (KeyError, TypeError, ValueError):
        return None
    if not comment_id or not subreddit or created <= 0:
        return None
    if body == "[deleted]":
        state = BodyState.DELETED
    elif body == "[removed]":
        state = BodyState.REMOVED
    else:
        state = BodyState.PRESENT
    return CommentRecord(author, subreddit, created, state, comment_id)


def parse_dump(
    source: str | Path | BinaryIO,
    month: str | None = None,
    tally: ParseTally | None = None,
) -> Iterator[CommentRecord]:
    """Yield comment records from a line-delimited dump in stream order.

    Malformed lines are skipped and counted in ``tally``; records outside
    ``month`` (when given) are likewise skipped and counted. A stream that
    cannot be read at all raises IngestError.
    """
    if month is not None:
        _validate_month(month)
    if tally is None:
        tally = ParseTally()
    stream = _open_stream(source)
    try:
        for line in stream:
            if not line.strip():
                continue
            tally.lines += 1
            record = _record_from_line(line)
            if record is None:
                tally.malformed += 1
                continue
            if month is not None and _month_of(record.created_utc) != month:
                tally.wrong_month += 1
                continue
            tally.parsed += 1
            yield record
    except (OSError, EOFError) as exc:
        raise IngestError(f"unreadable dump stream: {exc}") from exc


def percentile_cutoff(counts: Iterable[int], p: float) -> int:
    """Nearest-rank percentile: the value at 1-based index ceil(p*n) of the
    ascending sort. Callers remove entities with counts strictly greater."""
    values = sorted(counts)
    if not values:
        raise ValueError("percentile_cutoff of an empty multiset")
    if not 0 < p <= 1:
        raise ValueError("p must be in (0, 1]")
    return values[ceil(p * len(values)) - 1]


def build_snapshot(
    records: Iterable[CommentRecord], config: FilterConfig
) -> SnapshotCorpus:
    """Apply the monthly filtering pipeline and assemble a snapshot corpus.

    In order: keep the top-N subreddits by raw comment count (profile pages
    excluded, boundary ties broken by count desc then name asc); drop records
    with the deleted-author sentinel, a non-present body, or an author with
    exactly one comment in the raw month; remove users strictly above the
    activity-percentile cutoff computed over the remaining records; finally
    drop users whose context holds fewer than 2 token occurrences.
    """
    records = list(records)
    raw_sub_counts: Counter[str] = Counter()
    raw_author_counts: Counter[str] = Counter()
    for r in records:
        raw_sub_counts[r.subreddit] += 1
        raw_author_counts[r.author] += 1

    ranked = sorted(
        (s for s in raw_sub_counts if not s.startswith(PROFILE_PREFIX)),
        key=lambda s: (-raw_sub_counts[s], s),
    )
    top = set(ranked[: config.top_n_subreddits])

    dropped: Counter[str] = Counter()
    stage2: list[CommentRecord] = []
    for r in records:
        if r.subreddit not in top:
            reason = (
                "profile_page"
                if r.subreddit.startswith(PROFILE_PREFIX)
                else "not_top_n"
            )
            dropped[reason] += 1
        elif r.author == DELETED_AUTHOR:
            dropped["deleted_author"] += 1
        elif r.body_state is not BodyState.PRESENT:
            dropped["body_not_present"] += 1
        elif raw_author_counts[r.author] == 1:
            dropped["single_comment_author"] += 1
        else:
            stage2.append(r)

    user_counts: Counter[str] = Counter(r.author for r in stage2)
    cutoff = None
    survivors = stage2
    if user_counts:
        cutoff = percentile_cutoff(user_counts.values(), config.activity_percentile)
        hyper = {u for u, c in user_counts.items() if c > cutoff}
        survivors = []
        for r in stage2:
            if r.author in hyper:
                dropped["hyperactive_author"] += 1
            else:
                survivors.append(r)

    contexts: dict[str, Counter[str]] = {}
    for r in survivors:
        contexts.setdefault(r.author, Counter())[r.subreddit] += 1
    for user in [u for u, bag in contexts.items() if sum(bag.values()) < 2]:
        dropped["short_context"] += sum(contexts.pop(user).values())

    if not contexts:
        raise EmptyCorpusError(
            f"no trainable contexts remain for {config.month} after filtering"
        )

    vocab: Counter[str] = Counter()
    for bag in contexts.values():
        vocab.update(bag)
    corpus = SnapshotCorpus(
        month=config.month,
        vocab=dict(sorted(vocab.items())),
        contexts={u: dict(sorted(bag.items())) for u, bag in sorted(contexts.items())},
        stats={
            "total_comments": sum(vocab.values()),
            "unique_users": len(contexts),
            "dropped": dict(sorted(dropped.items())),
            "activity_cutoff": cutoff,
            "config": {
                "month": config.month,
                "top_n_subreddits": config.top_n_subreddits,
                "activity_percentile": config.activity_percentile,
            },
        },
    )
    corpus.validate()
    return corpus


def save_snapshot(corpus: SnapshotCorpus, directory: str | Path) -> None:
    """Serialize a snapshot as vocab.json, contexts.bin and stats.json.

    Output is byte-deterministic: keys are sorted and users are written in
    name order. See docs/formats.md for the contexts.bin layout.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    vocab_doc = {"month": corpus.month, "vocab": corpus.vocab}
    (directory / "vocab.json").write_text(
        json.dumps(vocab_doc, sort_keys=True, indent=2) + "\n"
    )
    (directory / "stats.json").write_text(
        json.dumps(corpus.stats, sort_keys=True, indent=2) + "\n"
    )
    sub_ids = {s: i for i, s in enumerate(sorted(corpus.vocab))}
    with open(directory / "contexts.bin", "wb") as out:
        out.write(_CONTEXTS_MAGIC)
        out.write(struct.pack("<I", len(corpus.contexts)))
        for user in sorted(corpus.contexts):
            name = user.encode("utf-8")
            bag = corpus.contexts[user]
            out.write(struct.pack("<I", len(name)))
            out.write(name)
            out.write(struct.pack("<I", len(bag)))
            for sub in sorted(bag):
                out.write(struct.pack("<II", sub_ids[sub], bag[sub]))


def load_snapshot(directory: str | Path) -> SnapshotCorpus:
    directory = Path(directory)
    vocab_doc = json.loads((directory / "vocab.json").read_text())
    stats = json.loads((directory / "stats.json").read_text())
    subs = sorted(vocab_doc["vocab"])
    contexts: dict[str, dict[str, int]] = {}
    with open(directory / "contexts.bin", "rb") as fh:
        if fh.read(len(_CONTEXTS_MAGIC)) != _CONTEXTS_MAGIC:
            raise IngestError(f"bad contexts.bin magic in {directory}")
        (n_users,) = struct.unpack("<I", fh.read(4))
        for _ in range(n_users):
            (name_len,) = struct.unpack("<I", fh.read(4))
            user = fh.read(name_len).decode("utf-8")
            (n_entries,) = struct.unpack("<I", fh.read(4))
            bag: dict[str, int] = {}
            for _ in range(n_entries):
                sub_id, count = struct.unpack("<II", fh.read(8))
                bag[subs[sub_id]] = count
            contexts[user] = bag
    corpus = SnapshotCorpus(
        month=vocab_doc["month"],
        vocab=vocab_doc["vocab"],
        contexts=contexts,
        stats=stats,
    )
    corpus.validate()
    return corpus
