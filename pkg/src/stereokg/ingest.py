"""Loading raw social media posts from exported JSONL dumps.

One object per line: {"platform": str, "id": str, "channel": str,
"body": str, "created_utc": int}. Unknown keys are ignored. Invalid lines
are skipped and tallied in a SkipReport so that
``len(posts) + report.total_skipped == input line count`` always holds.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import DataError

PLATFORMS = ("reddit", "twitter", "other")


@dataclass(frozen=True)
class RawPost:
    platform: str
    source_id: str
    channel: str
    body: str
    fetched_at: int = 0


@dataclass
class SkipReport:
    """Per-reason tally of dropped input lines."""

    reasons: Counter = field(default_factory=Counter)

    def skip(self, reason: str) -> None:
        self.reasons[reason] += 1

    @property
    def total_skipped(self) -> int:
        return sum(self.reasons.values())

    def as_dict(self) -> dict[str, int]:
        return dict(sorted(self.reasons.items()))


def iter_dump(path: str | Path, platform: str = "other", report: SkipReport | None = None) -> Iterator[RawPost]:
    """Yield one RawPost per valid line, in file order.

    ``platform`` is the fallback for records without a platform field.
    Malformed lines are recorded in ``report`` and skipped.
    """
    path = Path(path)
    if report is None:
        report = SkipReport()
    try:
        fh = path.open(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read dump file {path}: {exc}") from exc
    with fh:
        for line in fh:
            if not line.strip():
                report.skip("blank_line")
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                report.skip("invalid_json")
                continue
            if not isinstance(rec, dict):
                report.skip("not_an_object")
                continue
            source_id = str(rec.get("id", "")).strip()
            body = str(rec.get("body", ""))
            if not source_id:
                report.skip("missing_id")
                continue
            if not body.strip():
                report.skip("blank_body")
                continue
            rec_platform = str(rec.get("platform", platform)).lower()
            if rec_platform not in PLATFORMS:
                rec_platform = "other"
            yield RawPost(
                platform=rec_platform,
                source_id=source_id,
                channel=str(rec.get("channel", "")),
                body=body,
                fetched_at=int(rec.get("created_utc", 0) or 0),
            )


def load_dump(path: str | Path, platform: str = "other") -> tuple[list[RawPost], SkipReport]:
    report = SkipReport()
    posts = list(iter_dump(path, platform=platform, report=report))
    return posts, report


def apply_allowlist(posts: Iterable[RawPost], allowlist: Iterable[str]) -> tuple[list[RawPost], int]:
    """Keep non-reddit posts as-is; keep reddit posts only when their channel
    is on the allowlist (case-insensitive, with or without an r/ prefix).
    Returns (kept, dropped_count)."""
    allowed = {c.lower().removeprefix("r/") for c in allowlist}
    kept: list[RawPost] = []
    dropped = 0
    for post in posts:
        if post.platform != "reddit":
            kept.append(post)
            continue
        channel = post.channel.lower().removeprefix("r/")
        if channel and channel in allowed:
            kept.append(post)
        else:
            dropped += 1
    return kept, dropped


def save_posts(posts: Iterable[RawPost], path: str | Path) -> int:
    n = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for post in posts:
            fh.write(
                json.dumps(
                    {
                        "platform": post.platform,
                        "id": post.source_id,
                        "channel": post.channel,
                        "body": post.body,
                        "created_utc": post.fetched_at,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
            n += 1
    return n


def load_posts(path: str | Path) -> list[RawPost]:
    """Re-read a normalized post file written by save_posts."""
    posts, report = load_dump(path)
    if report.total_skipped:
        raise DataError(f"normalized post file {path} contains {report.total_skipped} bad lines")
    return posts
