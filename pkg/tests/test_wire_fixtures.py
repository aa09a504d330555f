"""Shared wire-protocol fixtures: the stub backend must reproduce the
recorded responses byte for byte. The scorer service runs the same file
against its stub mode, which pins both sides to one contract."""

import json

from stereokg.scorer import StubBackend

from conftest import DATA_DIR


def canonical(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def test_stub_reproduces_wire_fixtures():
    doc = json.loads((DATA_DIR / "scorer_wire_fixtures.json").read_text(encoding="utf-8"))
    stub = StubBackend(seed=doc["seed"])
    for case in doc["cases"]:
        endpoint, request = case["endpoint"], case["request"]
        if endpoint == "embed":
            response = {"vectors": stub.embed(request["texts"])}
        elif endpoint == "sentiment":
            response = {"labels": stub.sentiment(request["texts"])}
        elif endpoint == "acceptability":
            response = {"scores": stub.acceptability(request["texts"])}
        elif endpoint == "verbalize":
            triples = [(t["s"], t["p"], t["o"]) for t in request["triples"]]
            response = {"sentences": stub.verbalize(triples)}
        elif endpoint == "fill_mask":
            response = {"topk": stub.fill_mask(request["texts"], request["k"])}
        else:
            raise AssertionError(f"unknown endpoint {endpoint}")
        assert canonical(response) == canonical(case["response"]), endpoint
