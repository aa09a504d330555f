import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stereokg.errors import DataError
from stereokg.evaluation import (
    AnnotationItem,
    AnnotationRecord,
    MaskedProbe,
    acc_at_k,
    intra_consistency,
    load_predictions,
    load_probes,
    load_responses,
    load_sheet,
    observed_agreement,
    sample_eval_set,
    save_responses,
    save_sheet,
    success_rate,
)
from stereokg.kg import CLUSTER_DERIVED, SINGLETON_DERIVED, KgEntry
from stereokg.triples import Triple


def _kg(n_sd=100, n_cd=100):
    entries = []
    for i in range(n_sd + n_cd):
        members = 1 if i < n_sd else 3
        entries.append(
            KgEntry(
                entry_id=i,
                entity_id="german",
                triple=Triple("germans", "love", f"thing {i}"),
                member_count=members,
                member_sentences=tuple(f"s{i}.{j}" for j in range(members)),
                derivation=SINGLETON_DERIVED if members == 1 else CLUSTER_DERIVED,
                provenance=tuple(("reddit", f"p{i}") for _ in range(members)),
            )
        )
    return entries


def _rec(annotator, item, coh=2, com=2, dom=2, cr1=1, cr2=4):
    return AnnotationRecord(annotator, item, coh, com, dom, cr1, cr2)


# --- sampling ---------------------------------------------------------------

def test_sample_default_protocol():
    items = sample_eval_set(_kg(), n_per_stratum=50, n_duplicates=10, seed=7)
    assert len(items) == 110
    originals = [i for i in items if i.is_duplicate_of is None]
    duplicates = [i for i in items if i.is_duplicate_of is not None]
    assert len(originals) == 100 and len(duplicates) == 10
    assert sum(1 for i in originals if i.derivation == SINGLETON_DERIVED) == 50
    assert sum(1 for i in originals if i.derivation == CLUSTER_DERIVED) == 50
    by_id = {i.item_id: i for i in items}
    for dup in duplicates:
        original = by_id[dup.is_duplicate_of]
        assert dup.is_duplicate_of < dup.item_id
        assert original.entry_id == dup.entry_id
        assert original.shown_text == dup.shown_text
    # no original sampled twice
    assert len({i.entry_id for i in originals}) == 100


def test_sample_minimal():
    items = sample_eval_set(_kg(2, 2), n_per_stratum=1, n_duplicates=0, seed=1)
    assert len(items) == 2


def test_sample_seed_reproducible():
    first = sample_eval_set(_kg(), 50, 10, seed=42)
    second = sample_eval_set(_kg(), 50, 10, seed=42)
    assert first == second
    third = sample_eval_set(_kg(), 50, 10, seed=43)
    assert third != first


def test_sample_stratum_too_small():
    with pytest.raises(DataError, match="cluster_derived"):
        sample_eval_set(_kg(100, 10), n_per_stratum=50, n_duplicates=0, seed=1)


def test_sheet_round_trip(tmp_path):
    items = sample_eval_set(_kg(), 50, 10, seed=3)
    path = tmp_path / "sheet.csv"
    save_sheet(items, path)
    loaded = load_sheet(path, _kg())
    assert loaded == items


# --- SUC ----------------------------------------------------------------------

def _items_two():
    return [
        AnnotationItem(0, 0, "Germans are punctual.", SINGLETON_DERIVED),
        AnnotationItem(1, 100, "Germans love beer.", CLUSTER_DERIVED),
    ]


def test_suc_unanimous_success():
    items = _items_two()
    records = [_rec(a, 0) for a in "xyz"] + [_rec(a, 1, dom=0) for a in "xyz"]
    rates = success_rate(items, records)
    assert rates.suc_all == 50.0
    assert rates.suc_sd == 100.0
    assert rates.suc_cd == 0.0


def test_suc_strict_inequality_boundary():
    # means (2.0, 2.0, 1.0): DOM not strictly above 1 -> not successful
    items = [AnnotationItem(0, 0, "t", SINGLETON_DERIVED)]
    records = [
        _rec("a", 0, coh=2, com=2, dom=1),
        _rec("b", 0, coh=2, com=2, dom=1),
        _rec("c", 0, coh=2, com=2, dom=1),
    ]
    rates = success_rate(items, records)
    assert rates.suc_all == 0.0


def test_suc_mean_crosses_threshold():
    items = [AnnotationItem(0, 0, "t", SINGLETON_DERIVED)]
    records = [
        _rec("a", 0, coh=2, com=2, dom=2),
        _rec("b", 0, coh=2, com=2, dom=1),
        _rec("c", 0, coh=2, com=1, dom=1),
    ]
    # means: coh 2.0, com 5/3, dom 4/3 -> all > 1
    assert success_rate(items, records).suc_all == 100.0


def test_suc_excludes_duplicates():
    items = _items_two() + [
        AnnotationItem(2, 0, "Germans are punctual.", SINGLETON_DERIVED, is_duplicate_of=0)
    ]
    records = [_rec(a, i) for a in "xy" for i in (0, 1, 2)]
    rates = success_rate(items, records)
    assert rates.suc_all == 100.0  # two originals, both successful


def test_suc_invariant_under_relabeling_and_reorder():
    items = _items_two()
    records = [_rec(a, i, dom=2 if i == 0 else 0) for a in "abc" for i in (0, 1)]
    base = success_rate(items, records)
    relabeled = [
        AnnotationRecord("ann_" + r.annotator_id, r.item_id, r.coh, r.com, r.dom, r.cr1, r.cr2)
        for r in reversed(records)
    ]
    assert success_rate(items, relabeled) == base


def test_suc_missing_records_error():
    items = _items_two()
    with pytest.raises(DataError, match="item 1"):
        success_rate(items, [_rec("a", 0)])


def test_suc_majority_switch():
    items = [AnnotationItem(0, 0, "t", SINGLETON_DERIVED)]
    # values 2,2,0: mean 4/3 > 1 succeeds; majority (2 of 3 above 1) succeeds too
    records = [_rec("a", 0, dom=2), _rec("b", 0, dom=2), _rec("c", 0, dom=0)]
    assert success_rate(items, records, aggregate="mean").suc_all == 100.0
    assert success_rate(items, records, aggregate="majority").suc_all == 100.0
    # values 2,0,0: mean 2/3 fails; majority fails
    records = [_rec("a", 0, dom=2), _rec("b", 0, dom=0), _rec("c", 0, dom=0)]
    assert success_rate(items, records, aggregate="mean").suc_all == 0.0
    assert success_rate(items, records, aggregate="majority").suc_all == 0.0


# --- observed agreement --------------------------------------------------------

def oracle_observed_agreement(records, metric):
    """Brute force: enumerate annotator pairs and their co-annotated items."""
    annotators = sorted({r.annotator_id for r in records})
    value = {(r.annotator_id, r.item_id): r.value(metric) for r in records}
    items = sorted({r.item_id for r in records})
    scores = []
    for a, b in itertools.combinations(annotators, 2):
        shared = [i for i in items if (a, i) in value and (b, i) in value]
        if not shared:
            continue
        scores.append(sum(value[(a, i)] == value[(b, i)] for i in shared) / len(shared))
    return sum(scores) / len(scores)


def test_oa_two_annotators():
    records = []
    for item, (va, vb) in enumerate([(2, 2), (1, 1), (0, 0), (2, 1)]):
        records.append(_rec("a", item, coh=va))
        records.append(_rec("b", item, coh=vb))
    assert observed_agreement(records, "coh") == 0.75


def test_oa_perfect():
    records = [_rec(a, i, coh=1) for a in "abc" for i in range(5)]
    assert observed_agreement(records, "coh") == 1.0


def test_oa_three_annotators_hand_enumerated():
    # 10 items; annotator values chosen so each pair agrees a known fraction
    values = {
        "a": [2, 2, 1, 0, 2, 1, 1, 0, 2, 2],
        "b": [2, 1, 1, 0, 2, 0, 1, 0, 1, 2],
        "c": [2, 2, 0, 0, 1, 1, 1, 1, 2, 2],
    }
    records = [
        _rec(ann, item, coh=vals[item]) for ann, vals in values.items() for item in range(10)
    ]
    # pair a-b: items 0,2,3,4,6,7,9 agree -> 7/10
    # pair a-c: items 0,1,3,5,6,8,9 agree -> 7/10
    # pair b-c: items 0,3,6,9 agree -> 4/10
    expected = (0.7 + 0.7 + 0.4) / 3
    got = observed_agreement(records, "coh")
    assert got == pytest.approx(expected, abs=1e-12)
    assert got == pytest.approx(oracle_observed_agreement(records, "coh"), abs=1e-12)


def test_oa_partial_overlap_pairs():
    records = [
        _rec("a", 0, coh=1), _rec("a", 1, coh=2),
        _rec("b", 1, coh=2), _rec("b", 2, coh=0),
        _rec("c", 5, coh=1),
    ]
    # only pair (a,b) shares an item; c shares nothing
    assert observed_agreement(records, "coh") == 1.0


def test_oa_requires_shared_items():
    with pytest.raises(DataError):
        observed_agreement([_rec("a", 0), _rec("b", 1)], "coh")


def test_oa_double_rating_rejected():
    with pytest.raises(DataError, match="twice"):
        observed_agreement([_rec("a", 0), _rec("a", 0)], "coh")


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_oa_matches_oracle_on_random_fixtures(seed):
    rng = random.Random(seed)
    annotators = ["a", "b", "c", "d"][: rng.randint(2, 4)]
    records = []
    any_shared = False
    item_sets = {}
    for ann in annotators:
        items = rng.sample(range(8), rng.randint(1, 8))
        item_sets[ann] = set(items)
        for item in items:
            records.append(_rec(ann, item, coh=rng.randint(0, 2)))
    for a, b in itertools.combinations(annotators, 2):
        if item_sets[a] & item_sets[b]:
            any_shared = True
    if not any_shared:
        with pytest.raises(DataError):
            observed_agreement(records, "coh")
        return
    got = observed_agreement(records, "coh")
    assert 0.0 <= got <= 1.0
    assert got == pytest.approx(oracle_observed_agreement(records, "coh"), abs=1e-12)


# --- intra-annotator consistency ------------------------------------------------

def _sheet_with_duplicates():
    return [
        AnnotationItem(0, 10, "t0", SINGLETON_DERIVED),
        AnnotationItem(1, 11, "t1", CLUSTER_DERIVED),
        AnnotationItem(2, 10, "t0", SINGLETON_DERIVED, is_duplicate_of=0),
        AnnotationItem(3, 11, "t1", CLUSTER_DERIVED, is_duplicate_of=1),
    ]


def test_intra_perfect():
    items = _sheet_with_duplicates()
    records = [_rec("a", i) for i in range(4)]
    assert intra_consistency(items, records) == {"a": 1.0}


def test_intra_partial():
    items = _sheet_with_duplicates()[:3]  # one duplicate pair
    records = [_rec("a", 0, cr2=4), _rec("a", 1), _rec("a", 2, cr2=3)]
    assert intra_consistency(items, records) == {"a": 0.8}


def test_intra_mean_over_pairs():
    items = _sheet_with_duplicates()
    records = [
        _rec("a", 0), _rec("a", 1),
        _rec("a", 2),                 # identical -> 1.0
        _rec("a", 3, cr2=0),          # differs on one metric -> 0.8
    ]
    assert intra_consistency(items, records) == {"a": pytest.approx(0.9)}


def test_intra_requires_duplicates():
    items = [AnnotationItem(0, 10, "t", SINGLETON_DERIVED)]
    with pytest.raises(DataError):
        intra_consistency(items, [_rec("a", 0)])


# --- ACC@k ----------------------------------------------------------------------

def _probe(pid, masked, gold):
    return MaskedProbe(pid, masked, gold, "american")


def test_acc_hit_example():
    probes = [_probe(0, "Americans don't have free <mask>.", "healthcare")]
    predictions = {0: ["healthcare", "lunch", "tuition"]}
    assert acc_at_k(probes, predictions, 5) == 100.0


def test_acc_miss_example():
    probes = [_probe(0, "Muslims are turning away <mask>.", "science")]
    predictions = {0: ["too", "now", "again"]}
    assert acc_at_k(probes, predictions, 5) == 0.0


def test_acc_case_folded():
    probes = [_probe(0, "x <mask>.", "Trump")]
    assert acc_at_k(probes, {0: ["trump"]}, 5) == 100.0


def test_acc_top_k_cutoff():
    probes = [_probe(0, "x <mask>.", "gold")]
    predictions = {0: ["a", "b", "c", "d", "e", "gold"]}
    assert acc_at_k(probes, predictions, 5) == 0.0
    assert acc_at_k(probes, predictions, 6) == 100.0


def test_acc_scale():
    probes = [_probe(i, "x <mask>.", f"g{i}") for i in range(100)]
    predictions = {i: ([f"g{i}"] if i < 37 else ["no"]) for i in range(100)}
    assert acc_at_k(probes, predictions, 5) == 37.0


def test_acc_missing_prediction():
    probes = [_probe(3, "x <mask>.", "gold")]
    with pytest.raises(DataError, match="probe 3"):
        acc_at_k(probes, {}, 5)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=5000))
def test_acc_monotone_in_k(seed):
    rng = random.Random(seed)
    probes = [_probe(i, "x <mask>.", f"g{rng.randint(0, 5)}") for i in range(20)]
    predictions = {
        i: [f"g{rng.randint(0, 5)}" for _ in range(rng.randint(1, 8))] for i in range(20)
    }
    accs = [acc_at_k(probes, predictions, k) for k in range(1, 9)]
    assert all(a <= b for a, b in zip(accs, accs[1:]))


def test_probe_validation():
    with pytest.raises(DataError):
        MaskedProbe(0, "no placeholder here", "gold", "x").validate()
    with pytest.raises(DataError):
        MaskedProbe(0, "one <mask> two <mask>", "gold", "x").validate()
    with pytest.raises(DataError):
        MaskedProbe(0, "a <mask>", "two words", "x").validate()


def test_record_range_validation():
    with pytest.raises(DataError):
        _rec("a", 0, coh=3).validate()
    with pytest.raises(DataError):
        _rec("a", 0, cr1=2).validate()
    _rec("a", 0, cr2=4).validate()


def test_response_files_round_trip(tmp_path):
    records = [_rec("a", 0), _rec("b", 1, coh=0, com=1, dom=2, cr1=0, cr2=2)]
    path = tmp_path / "resp.csv"
    save_responses(records, path)
    assert load_responses(path) == records


def test_interactive_annotation(monkeypatch, capsys):
    from stereokg.evaluation import annotate_interactively

    items = [AnnotationItem(0, 10, "Germans are punctual.", SINGLETON_DERIVED)]
    answers = iter(["2", "9", "1", "0", "1", "3"])  # "9" is re-prompted
    monkeypatch.setattr("builtins.input", lambda prompt: next(answers))
    records = annotate_interactively(items, "ann1")
    assert records == [AnnotationRecord("ann1", 0, 2, 1, 0, 1, 3)]
    assert "Germans are punctual." in capsys.readouterr().out


def test_probe_and_prediction_files(write_jsonl):
    probes_path = write_jsonl(
        "probes.jsonl",
        [{"id": 0, "masked": "Americans don't have free <mask>.", "gold": "healthcare",
          "entity": "american"}],
    )
    preds_path = write_jsonl("preds.jsonl", [{"id": 0, "topk": ["healthcare", "lunch"]}])
    probes = load_probes(probes_path)
    predictions = load_predictions(preds_path)
    assert acc_at_k(probes, predictions, 5) == 100.0
