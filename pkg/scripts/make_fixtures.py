#!/usr/bin/env python3
"""Regenerate the checked-in test fixtures.

Everything here is deterministic. The post corpus is built from an explicit
plan: each planted sentence is designed to match exactly one (template,
entity) pair, fillers match nothing, and a small independent matcher
re-counts the corpus to guard the plan against accidental matches. The
expected numbers printed at the end are frozen into the acceptance tests.

Outputs (under tests/data/):
  posts_200.jsonl           200-post dump fixture
  probes_100.jsonl          100 masked probes
  predictions_base.jsonl    37/100 hits
  predictions_base_uk.jsonl 48/100 hits
  scorer_wire_fixtures.json shared request/response fixtures for the
                            scorer wire protocol (stub outputs, seed 13)
"""

import json
import random
import re
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from stereokg.config import default_config  # noqa: E402
from stereokg.scorer import StubBackend  # noqa: E402

DATA = REPO / "tests" / "data"
SEED = 202

# (entity, sentence, copies) - each sentence matches exactly one template.
PLANTED = [
    ("german", "Why are Germans so punctual?", 3),
    ("german", "Why do Germans drink so much beer?", 2),
    ("german", "Why does German culture value punctuality?", 2),
    ("german", "Why is Germany so strict about rules?", 1),
    ("german", "What makes Germans so punctual?", 1),
    ("german", "Germans are so organized honestly.", 1),
    ("american", "Why don't Americans use the metric system?", 3),
    ("american", "Why are Americans so loud in public?", 2),
    ("american", "Why do Americans love guns?", 1),
    ("american", "How do Americans afford healthcare?", 1),
    ("american", "Why is America so obsessed with lawsuits?", 1),
    ("french", "What makes French food special?", 2),
    ("french", "Why are French people always on strike?", 2),
    ("french", "Why can't France ban smoking?", 1),
    ("french", "Why do French people eat snails?", 1),
    ("french", "Why is French cuisine so delicious?", 1),
    ("chinese", "Why is Chinese food so cheap?", 2),
    ("chinese", "Why do Chinese tourists travel in groups?", 1),
    ("chinese", "Chinese are so entrepreneurial.", 1),
    ("indian", "Why do Indians love cricket?", 2),
    ("indian", "Why are Indian weddings so long?", 1),
    ("indian", "What makes Indian food spicy?", 1),
    ("muslim", "Why can't Muslims eat pork?", 3),
    ("muslim", "How do Muslims pray during travel?", 1),
    ("muslim", "Why are Muslims so devout?", 1),
    ("muslim", "Muslims are so disciplined during ramadan.", 1),
    ("jewish", "Why do Jews wear kippahs?", 2),
    ("jewish", "Why do Jewish men get circumcisions?", 1),
    ("jewish", "Why is Judaism matrilineal?", 1),
    ("christian", "Why are Christians obsessed with the bible?", 2),
    ("christian", "Why don't Christians follow the old testament?", 1),
    ("christian", "Why does Christian culture celebrate christmas?", 1),
    ("hindu", "Why do Hindus celebrate diwali?", 2),
    ("hindu", "How is Hinduism different from Buddhism?", 1),
    ("hindu", "Why can Hindus cremate their dead?", 1),
    ("atheist", "Why are Atheists so angry at religion?", 2),
    ("atheist", "Why do Atheists argue about god online?", 1),
    ("atheist", "Atheism is such a lonely worldview.", 1),
]

FILLERS = [
    "I visited Berlin last spring and loved it.",
    "The weather has been lovely this week.",
    "My cat knocked over the coffee again.",
    "Anyone have recommendations for hiking boots?",
    "This subreddit never disappoints.",
    "I tried making sourdough and failed.",
    "The train was delayed for two hours.",
    "Lunch at the new place was decent.",
    "Can someone explain mortgage rates to me?",
    "The movie last night was fantastic.",
    "I finally finished that book everyone recommended.",
    "Traffic downtown is getting worse every year.",
    "We adopted a rescue dog over the weekend.",
    "The farmers market opens at eight.",
    "My phone battery dies by noon.",
    "Homemade pizza beats delivery every time.",
    "The gym was packed this morning.",
    "I repainted the kitchen a weird shade of green.",
    "Taxes are due sooner than I thought.",
    "The neighbors are renovating again.",
]

GOOD_CHANNELS = [
    "germany", "askreddit", "islam", "judaism", "france", "china",
    "india", "atheism", "christianity", "nostupidquestions",
]
BAD_CHANNELS = ["cooking", "gardening", "woodworking"]

N_POSTS = 200
N_BAD_CHANNEL = 10


def naive_entity_matches(sentence: str, entities, templates) -> set[str]:
    """Independent re-implementation of template matching for verification."""
    s = sentence.strip().lower().rstrip(".?!").strip()
    matched = set()
    for entity in entities:
        for pattern, form in templates:
            for surface in entity.surface_forms:
                inst = pattern.replace("<SUB>", surface).lower()
                if form == "question":
                    if s == inst or s.startswith(inst + " "):
                        matched.add(entity.id)
                else:
                    if re.search(r"(^|[^a-z0-9])" + re.escape(inst) + r"($|[^a-z0-9])", s):
                        matched.add(entity.id)
    return matched


def build_posts(rng: random.Random):
    cfg = default_config()
    templates = [(t.pattern, t.form) for t in cfg.templates]

    # verify the plan sentence by sentence
    for entity_id, sentence, _ in PLANTED:
        got = naive_entity_matches(sentence, cfg.entities, templates)
        assert got == {entity_id}, f"planted {sentence!r}: matched {got}"
    for filler in FILLERS:
        got = naive_entity_matches(filler, cfg.entities, templates)
        assert not got, f"filler {filler!r} accidentally matches {got}"

    planted_instances = [
        (entity_id, sentence) for entity_id, sentence, copies in PLANTED for _ in range(copies)
    ]
    rng.shuffle(planted_instances)

    bad_indices = set(rng.sample(range(N_POSTS), N_BAD_CHANNEL))
    good_indices = [i for i in range(N_POSTS) if i not in bad_indices]
    planted_slots = dict(zip(rng.sample(good_indices, len(planted_instances)), planted_instances))

    posts = []
    for i in range(N_POSTS):
        sentences = []
        if i in planted_slots:
            sentences.append(planted_slots[i][1])
        for _ in range(rng.randint(1 if not sentences else 0, 2)):
            sentences.append(rng.choice(FILLERS))
        if not sentences:
            sentences.append(rng.choice(FILLERS))
        rng.shuffle(sentences)
        platform = "reddit" if rng.random() < 0.65 else "twitter"
        if i in bad_indices:
            platform = "reddit"
            channel = rng.choice(BAD_CHANNELS)
        else:
            channel = rng.choice(GOOD_CHANNELS) if platform == "reddit" else ""
        posts.append(
            {
                "platform": platform,
                "id": f"{platform[0]}{i:04d}",
                "channel": channel,
                "body": " ".join(sentences),
                "created_utc": 1610000000 + i * 60,
            }
        )

    # final conservation check over whole posts (dedup is irrelevant by design:
    # a post never carries the same planted sentence twice)
    total = 0
    kept_total = 0
    for post in posts:
        for sentence in re.split(r"(?<=[.?!])\s+", post["body"]):
            n = len(naive_entity_matches(sentence, cfg.entities, templates))
            total += n
            if not (post["platform"] == "reddit" and post["channel"] in BAD_CHANNELS):
                kept_total += n
    expected = sum(c for _, _, c in PLANTED)
    assert total == kept_total == expected, (total, kept_total, expected)
    return posts, expected


def build_probes(rng: random.Random):
    probes = [
        {"id": 0, "masked": "Muslims are turning away <mask>.", "gold": "science",
         "entity": "muslim"},
        {"id": 1, "masked": "Americans don't have free <mask>.", "gold": "healthcare",
         "entity": "american"},
        {"id": 2, "masked": "Americans are voting for <mask>.", "gold": "trump",
         "entity": "american"},
        {"id": 3, "masked": "Atheists unilaterally support <mask>.", "gold": "abortion",
         "entity": "atheist"},
        {"id": 4, "masked": "Muslims compare apostasy to <mask>.", "gold": "treason",
         "entity": "muslim"},
        {"id": 5, "masked": "Chinese toilets are <mask>.", "gold": "dirty",
         "entity": "chinese"},
    ]
    entities = ["german", "american", "french", "chinese", "indian",
                "muslim", "jewish", "christian", "hindu", "atheist"]
    for i in range(6, 100):
        probes.append(
            {
                "id": i,
                "masked": f"Cultural probe number {i} is about <mask>.",
                "gold": f"token{i}",
                "entity": entities[i % len(entities)],
            }
        )

    def predictions(hit_ids, forced):
        rows = []
        for probe in probes:
            pid = probe["id"]
            if pid in forced:
                rows.append({"id": pid, "topk": forced[pid]})
                continue
            distractors = [f"filler{pid}a", f"filler{pid}b", f"filler{pid}c",
                           f"filler{pid}d", f"filler{pid}e"]
            if pid in hit_ids:
                slot = rng.randint(0, 4)
                distractors[slot] = probe["gold"]
            rows.append({"id": pid, "topk": distractors})
        return rows

    # baseline predictions: miss the science and healthcare examples, 37 hits overall
    base_hits = set(rng.sample(range(6, 100), 37))
    base = predictions(
        base_hits,
        forced={
            0: ["too", "now", "again", "from", "more"],
            1: ["money", "time", "speech", "wifi", "parking"],
            2: ["freedom", "democracy", "them", "change", "president"],
        },
    )
    assert sum(1 for r in base if _is_hit(r, probes)) == 37

    # knowledge-augmented predictions: healthcare hits with its canonical top-3, 48 hits overall
    uk_hits = set(rng.sample(range(6, 100), 46)) | {4}
    uk = predictions(
        uk_hits,
        forced={
            0: ["too", "now", "again", "from", "more"],
            1: ["healthcare", "lunch", "tuition"],
            4: ["treason", "sin", "genocide", "crime", "betrayal"],
        },
    )
    assert sum(1 for r in uk if _is_hit(r, probes)) == 48
    return probes, base, uk


def _is_hit(row, probes):
    gold = next(p["gold"] for p in probes if p["id"] == row["id"])
    return gold.casefold() in [t.casefold() for t in row["topk"][:5]]


def build_wire_fixtures():
    stub = StubBackend(seed=13)
    cases = []
    embed_texts = ["germans are so punctual", "germans are so punctual",
                   "muslims pray during travel", "", "unicode tëxt ünïque"]
    cases.append(
        {"endpoint": "embed", "request": {"texts": embed_texts},
         "response": {"vectors": stub.embed(embed_texts)}}
    )
    sent_texts = ["religion is terrible", "religion is wonderful",
                  "religion seems to be conservative"]
    cases.append(
        {"endpoint": "sentiment", "request": {"texts": sent_texts},
         "response": {"labels": stub.sentiment(sent_texts)}}
    )
    acc_texts = ["germans are punctual", "short", "muslims compare apostasy to treason"]
    cases.append(
        {"endpoint": "acceptability", "request": {"texts": acc_texts},
         "response": {"scores": stub.acceptability(acc_texts)}}
    )
    triples = [("jewish men", "get", "circumcisions"), ("germans", "are", "punctual")]
    cases.append(
        {
            "endpoint": "verbalize",
            "request": {"triples": [{"s": s, "p": p, "o": o} for s, p, o in triples]},
            "response": {"sentences": stub.verbalize(triples)},
        }
    )
    mask_texts = ["Americans don't have free <mask>.", "Something unknown <mask>."]
    cases.append(
        {"endpoint": "fill_mask", "request": {"texts": mask_texts, "k": 5},
         "response": {"topk": stub.fill_mask(mask_texts, 5)}}
    )
    return {"seed": 13, "cases": cases}


def write_jsonl(path, rows):
    with path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    rng = random.Random(SEED)
    posts, expected_mined = build_posts(rng)
    write_jsonl(DATA / "posts_200.jsonl", posts)

    probes, base, uk = build_probes(random.Random(SEED + 1))
    write_jsonl(DATA / "probes_100.jsonl", probes)
    write_jsonl(DATA / "predictions_base.jsonl", base)
    write_jsonl(DATA / "predictions_base_uk.jsonl", uk)

    wire = build_wire_fixtures()
    (DATA / "scorer_wire_fixtures.json").write_text(
        json.dumps(wire, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )

    bad = sum(1 for p in posts if p["platform"] == "reddit" and p["channel"] in BAD_CHANNELS)
    print(f"posts: {len(posts)} (disallowed channels: {bad})")
    print(f"expected mined assertions: {expected_mined}")
    print("probes: 100; base hits: 37; base+uk hits: 48")


if __name__ == "__main__":
    main()
