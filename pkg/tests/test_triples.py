import random

import pytest

from stereokg.errors import ClusterUnrepresentable
from stereokg.triples import (
    FilterReport,
    Triple,
    extract,
    filter_triples,
    select_representative,
    verbalize_plain,
    word_tokens,
)

# Thirty statements with hand-annotated primary subject-verb-object splits.
# None marks statements the shallow extractor is expected to drop.
SVO_FIXTURES = [
    ("german", "germans are so punctual", ("germans", "are", "so punctual")),
    ("jewish", "jewish men get circumcisions", ("jewish men", "get", "circumcisions")),
    ("muslim", "muslims compare apostasy to treason", ("muslims", "compare", "apostasy to treason")),
    ("atheist", "atheists are obsessed with god", ("atheists", "are obsessed", "with god")),
    ("german", "germans drink much beer", ("germans", "drink", "much beer")),
    ("american", "americans don't use the metric system", ("americans", "don't use", "the metric system")),
    ("french", "france doesn't have school uniforms", ("france", "doesn't have", "school uniforms")),
    ("hindu", "hindus can marry within their caste only", ("hindus", "can marry", "within their caste only")),
    ("muslim", "muslims can't eat pork", ("muslims", "can't eat", "pork")),
    ("christian", "christianity isn't growing in europe", ("christianity", "isn't", "growing in europe")),
    ("chinese", "chinese food is cheap", ("chinese food", "is", "cheap")),
    ("indian", "indian weddings are long", ("indian weddings", "are", "long")),
    ("american", "america is great", ("america", "is", "great")),
    ("muslim", "islam seems to be conservative", ("islam", "seems", "to be conservative")),
    ("jewish", "jews wear kippahs", ("jews", "wear", "kippahs")),
    ("german", "germans love their cars", ("germans", "love", "their cars")),
    ("atheist", "atheists argue about religion online", ("atheists", "argue", "about religion online")),
    ("muslim", "muslims pray five times a day", ("muslims", "pray", "five times a day")),
    ("french", "french people eat croissants every morning", ("french people", "eat", "croissants every morning")),
    ("german", "german culture values punctuality", ("german culture", "values", "punctuality")),
    ("american", "americans jaywalk constantly", None),
    ("hindu", "hindus celebrate diwali with lights", ("hindus", "celebrate", "diwali with lights")),
    ("chinese", "chinese students study very hard", ("chinese students", "study", "very hard")),
    ("jewish", "jewish holidays start at sundown", ("jewish holidays", "start", "at sundown")),
    ("muslim", "muslims don't drink alcohol", ("muslims", "don't drink", "alcohol")),
    ("german", "germans are not fans of small talk", ("germans", "are not", "fans of small talk")),
    ("atheist", "atheism is on the rise", ("atheism", "is", "on the rise")),
    ("indian", "indians speak many languages", ("indians", "speak", "many languages")),
    ("christian", "christians go to church on sundays", ("christians", "go", "to church on sundays")),
    ("french", "french workers take long lunch breaks", ("french workers", "take", "long lunch breaks")),
]


@pytest.mark.parametrize("entity_id,statement,expected", SVO_FIXTURES)
def test_hand_annotated_svo(cfg, entity_id, statement, expected):
    got = extract(statement, cfg.entity(entity_id), cfg.extraction)
    if expected is None:
        assert got == []
    else:
        assert got, f"no candidates for {statement!r}"
        assert got[0].fields() == expected


def test_multiple_verb_anchors_yield_multiple_candidates(cfg):
    got = extract("islam seems to be conservative", cfg.entity("muslim"), cfg.extraction)
    assert [t.fields() for t in got] == [
        ("islam", "seems", "to be conservative"),
        ("islam seems to", "be", "conservative"),
    ]


def test_no_object_no_candidate(cfg):
    assert extract("germans are", cfg.entity("german"), cfg.extraction) == []


def test_verb_before_entity_not_anchored(cfg):
    # the verb must come after the entity mention
    got = extract("i think germans are punctual", cfg.entity("german"), cfg.extraction)
    assert got[0].fields() == ("i think germans", "are", "punctual")


def test_source_assertion_propagates(cfg):
    got = extract("jews wear kippahs", cfg.entity("jewish"), cfg.extraction, source_assertion=42)
    assert got[0].source_assertion == 42


# (entity, input triple, expected output triple or None if dropped)
FILTER_FIXTURES = [
    ("german", ("i", "hate", "mondays"), None),
    ("german", ("people", "are", "rude"), None),
    ("german", ("germans", "are", "really so punctual lol"), ("germans", "are", "punctual")),
    ("german", ("germans", "are", "punctual"), ("germans", "are", "punctual")),
    ("german", ("he", "loves", "germany"), None),
    ("german", ("germans", "love", "their cars"), None),
    ("jewish", ("jewish men", "get", "circumcisions"), ("jewish men", "get", "circumcisions")),
    ("muslim", ("muslims", "can't eat", "pork"), ("muslims", "can't eat", "pork")),
    ("french", ("the french", "eat", "croissants"), ("the french", "eat", "croissants")),
    ("german", ("germany", "is", "such a beautiful country"), ("germany", "is", "a beautiful country")),
    ("american", ("americans", "don't use", "the metric system"),
     ("americans", "don't use", "the metric system")),
    ("atheist", ("atheists", "are obsessed", "with god"), ("atheists", "are obsessed", "with god")),
    ("german", ("food", "is", "bland"), None),
    ("german", ("germans", "think", "they are better"), None),
    ("muslim", ("muslims", "are", "so devout imo"), ("muslims", "are", "devout")),
    ("chinese", ("chinese food", "is", "really cheap"), ("chinese food", "is", "cheap")),
    ("jewish", ("jews", "wear", "kippahs"), ("jews", "wear", "kippahs")),
    ("hindu", ("hindus", "celebrate", "diwali"), ("hindus", "celebrate", "diwali")),
    ("christian", ("christianity", "is", "lol"), None),
    ("german", ("germans", "are", "smh"), None),
    ("muslim", ("islam", "seems", "to be conservative"), ("islam", "seems", "to be conservative")),
    ("american", ("america", "is", "great"), ("america", "is", "great")),
    ("german", ("my neighbors", "are", "loud"), None),
    ("indian", ("indian weddings", "are", "very long"), ("indian weddings", "are", "long")),
    ("german", ("germans", "really love", "beer"), ("germans", "love", "beer")),
    ("german", ("it", "is", "cold in germany"), None),
    ("french", ("french", "are", "literally always late"), ("french", "are", "always late")),
    ("christian", ("catholics", "are", "strict"), None),
    ("muslim", ("muslims", "pray", "five times a day"), ("muslims", "pray", "five times a day")),
    ("atheist", ("atheists", "just argue", "about god online"),
     ("atheists", "argue", "about god online")),
]


@pytest.mark.parametrize("entity_id,fields,expected", FILTER_FIXTURES)
def test_hand_labeled_filtering(cfg, entity_id, fields, expected):
    triple = Triple(*fields)
    got = filter_triples([triple], cfg.entity(entity_id), cfg.extraction.lexicons)
    if expected is None:
        assert got == []
    else:
        assert len(got) == 1
        assert got[0].fields() == expected


def test_filter_report_reasons(cfg):
    triples = [
        Triple("i", "hate", "mondays"),
        Triple("people", "are", "rude"),
        Triple("germans", "are", "lol"),
        Triple("germans", "are", "punctual"),
    ]
    report = FilterReport()
    kept = filter_triples(triples, cfg.entity("german"), cfg.extraction.lexicons, report)
    assert len(kept) == 1
    assert report.dropped_pronoun == 1
    assert report.dropped_no_entity_subject == 1
    assert report.dropped_emptied == 1


def test_filter_is_order_independent(cfg):
    triples = [Triple(*fields) for _, fields, _ in FILTER_FIXTURES]
    entity = cfg.entity("german")
    forward = filter_triples(triples, entity, cfg.extraction.lexicons)
    shuffled = triples[:]
    random.Random(3).shuffle(shuffled)
    backward = filter_triples(shuffled, entity, cfg.extraction.lexicons)
    assert sorted(t.fields() for t in forward) == sorted(t.fields() for t in backward)


def test_word_tokens_keep_contractions_and_hyphens():
    assert word_tokens("Don't touch non-christians!") == ["don't", "touch", "non-christians"]


class _TableGateway:
    def __init__(self, table):
        self.table = table

    def acceptability(self, texts):
        return [self.table[t] for t in texts]


def test_select_argmax():
    a = Triple("germans", "are", "punctual")
    b = Triple("germans", "love", "beer")
    gw = _TableGateway({verbalize_plain(a): 0.91, verbalize_plain(b): 0.40})
    assert select_representative([a, b], gw).fields() == a.fields()


def test_select_singleton_regardless_of_score():
    t = Triple("germans", "are", "punctual")
    gw = _TableGateway({verbalize_plain(t): 0.01})
    assert select_representative([t], gw).fields() == t.fields()


def test_select_tie_breaks_shorter():
    short = Triple("germans", "are", "punctual")
    long = Triple("germans", "are", "punctual and orderly")
    gw = _TableGateway({verbalize_plain(short): 0.5, verbalize_plain(long): 0.5})
    assert select_representative([long, short], gw).fields() == short.fields()


def test_select_tie_breaks_lexicographic():
    a = Triple("germans", "love", "beer")
    b = Triple("germans", "love", "cars")
    gw = _TableGateway({verbalize_plain(a): 0.5, verbalize_plain(b): 0.5})
    assert select_representative([b, a], gw).fields() == a.fields()


def test_select_invariant_under_monotone_transform():
    triples = [
        Triple("germans", "are", "punctual"),
        Triple("germans", "love", "beer and sausages"),
        Triple("german trains", "are", "late"),
    ]
    scores = {verbalize_plain(t): s for t, s in zip(triples, (0.2, 0.8, 0.5))}
    plain = select_representative(triples, _TableGateway(scores))
    for transform in (lambda x: x**3, lambda x: 0.1 + 0.9 * x, lambda x: x / 2):
        warped = {k: transform(v) for k, v in scores.items()}
        assert select_representative(triples, _TableGateway(warped)).fields() == plain.fields()


def test_select_empty_raises():
    with pytest.raises(ClusterUnrepresentable):
        select_representative([], _TableGateway({}))


def test_select_records_score():
    t = Triple("germans", "are", "punctual")
    gw = _TableGateway({verbalize_plain(t): 0.77})
    assert select_representative([t], gw).score == 0.77
