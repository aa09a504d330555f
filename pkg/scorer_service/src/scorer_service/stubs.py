"""Deterministic stub scorers.

These mirror the pipeline client's built-in stubs and are pinned to them by
a shared wire-fixture suite: for a given seed, every value returned here
must compare byte-identical (through canonical JSON) to the client side.
Keep any change in lockstep with those fixtures.
"""

from __future__ import annotations

import hashlib
import math

EMBED_DIM = 16

NEGATIVE_WORDS = frozenset(
    {
        "terrible", "awful", "horrible", "hate", "hates", "disgusting", "dirty",
        "rude", "stupid", "obnoxious", "angry", "racist", "violent", "annoying",
        "ugly", "bad", "evil", "lazy", "arrogant", "vulgar", "shameless",
    }
)
POSITIVE_WORDS = frozenset(
    {
        "good", "great", "love", "loves", "beautiful", "wonderful", "friendly",
        "kind", "polite", "smart", "strong", "delicious", "generous", "happy",
        "brilliant", "tolerant", "proud",
    }
)

FILL_MASK_FIXTURES: dict[str, list[str]] = {
    "Americans don't have free <mask>.": ["healthcare", "lunch", "tuition", "housing", "college"],
    "Muslims are turning away <mask>.": ["too", "now", "again", "from", "slowly"],
    "Americans are voting for <mask>.": ["freedom", "democracy", "them", "change", "president"],
    "Atheists unilaterally support <mask>.": ["fascism", "abortion", "terrorism", "science", "democracy"],
    "Muslims compare apostasy to <mask>.": ["treason", "sin", "genocide", "crime", "betrayal"],
    "Chinese toilets are <mask>.": ["disgusting", "awful", "shit", "dirty", "different"],
    "Jewish women are <mask>.": ["beautiful", "strong", "smart", "different", "proud"],
}
FILL_MASK_FALLBACK = [
    "people", "they", "good", "bad", "different", "food", "money", "everyone",
    "nothing", "culture",
]


def _unit_interval(seed: int, capability: str, text: str) -> float:
    digest = hashlib.sha256(f"{seed}\x1f{capability}\x1f{text}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") / 2**64


def embed_one(text: str, seed: int) -> list[float]:
    digest = hashlib.sha512(f"{seed}\x1fembed\x1f{text}".encode("utf-8")).digest()
    raw = [
        int.from_bytes(digest[4 * i : 4 * i + 4], "big") / 2**32 * 2.0 - 1.0
        for i in range(EMBED_DIM)
    ]
    norm = math.sqrt(sum(v * v for v in raw))
    return [v / norm for v in raw]


def sentiment_one(text: str) -> str:
    tokens = set(text.lower().split())
    if tokens & NEGATIVE_WORDS:
        return "NEG"
    if tokens & POSITIVE_WORDS:
        return "POS"
    return "NEU"


def acceptability_one(text: str, seed: int) -> float:
    base = _unit_interval(seed, "acceptability", text)
    if len(text.split()) >= 3:
        return 0.5 + 0.5 * base
    return 0.5 * base


def verbalize_one(subject: str, predicate: str, obj: str) -> str:
    body = " ".join(" ".join((subject, predicate, obj)).split())
    if not body:
        return ""
    return body[0].upper() + body[1:] + "."


def fill_mask_one(text: str, k: int) -> list[str]:
    ranked = FILL_MASK_FIXTURES.get(text, FILL_MASK_FALLBACK)
    return list(ranked[:k])
