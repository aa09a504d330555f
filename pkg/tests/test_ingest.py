import pytest

from stereokg.errors import DataError
from stereokg.ingest import RawPost, apply_allowlist, load_dump, load_posts, save_posts


def _rec(i, body, channel="germany", platform="reddit"):
    return {"platform": platform, "id": f"p{i}", "channel": channel, "body": body,
            "created_utc": 1600000000 + i}


def test_three_valid_lines(write_jsonl):
    path = write_jsonl("dump.jsonl", [_rec(i, f"post {i}") for i in range(3)])
    posts, report = load_dump(path)
    assert [p.source_id for p in posts] == ["p0", "p1", "p2"]
    assert report.total_skipped == 0


def test_blank_body_is_skipped(write_jsonl):
    records = [_rec(0, "a"), _rec(1, "   "), _rec(2, "b"), _rec(3, "c")]
    path = write_jsonl("dump.jsonl", records)
    posts, report = load_dump(path)
    assert len(posts) == 3
    assert report.total_skipped == 1
    assert report.as_dict() == {"blank_body": 1}


def test_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("", encoding="utf-8")
    posts, report = load_dump(path)
    assert posts == []
    assert report.total_skipped == 0


def test_malformed_lines_counted(tmp_path):
    path = tmp_path / "dump.jsonl"
    path.write_text(
        '{"id": "a", "body": "ok", "platform": "reddit", "channel": "germany"}\n'
        "this is not json\n"
        '{"body": "missing id"}\n'
        "[1,2,3]\n",
        encoding="utf-8",
    )
    posts, report = load_dump(path)
    assert len(posts) == 1
    assert report.as_dict() == {"invalid_json": 1, "missing_id": 1, "not_an_object": 1}
    # conservation: yielded + skipped == lines
    assert len(posts) + report.total_skipped == 4


def test_missing_file_is_fatal():
    with pytest.raises(DataError):
        load_dump("/nope/missing.jsonl")


def test_determinism(write_jsonl):
    path = write_jsonl("dump.jsonl", [_rec(i, f"body {i}") for i in range(20)])
    first, _ = load_dump(path)
    second, _ = load_dump(path)
    assert first == second


def test_platform_fallback_and_unknown(write_jsonl):
    records = [
        {"id": "x", "body": "hello", "channel": ""},
        {"id": "y", "body": "hello", "platform": "myspace", "channel": ""},
    ]
    path = write_jsonl("dump.jsonl", records)
    posts, _ = load_dump(path, platform="twitter")
    assert posts[0].platform == "twitter"
    assert posts[1].platform == "other"


def test_unknown_keys_ignored(write_jsonl):
    rec = _rec(0, "hello")
    rec["upvotes"] = 99
    path = write_jsonl("dump.jsonl", [rec])
    posts, report = load_dump(path)
    assert len(posts) == 1 and report.total_skipped == 0


def test_allowlist_filters_reddit_only():
    posts = [
        RawPost("reddit", "a", "germany", "x"),
        RawPost("reddit", "b", "r/germany", "x"),
        RawPost("reddit", "c", "cooking", "x"),
        RawPost("reddit", "d", "", "x"),
        RawPost("twitter", "e", "", "x"),
    ]
    kept, dropped = apply_allowlist(posts, ["germany"])
    assert [p.source_id for p in kept] == ["a", "b", "e"]
    assert dropped == 2


def test_posts_round_trip(tmp_path, write_jsonl):
    path = write_jsonl("dump.jsonl", [_rec(i, f"text {i}") for i in range(5)])
    posts, _ = load_dump(path)
    out = tmp_path / "posts.jsonl"
    save_posts(posts, out)
    assert load_posts(out) == posts
