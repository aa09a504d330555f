import json
import math
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stereokg.config import ScorerParams
from stereokg.errors import CacheMiss, ConfigError, ScorerError
from stereokg.scorer import (
    EMBED_DIM,
    FileCacheBackend,
    HttpBackend,
    ScorerGateway,
    StubBackend,
    append_cache_records,
    concat_verbalize,
    make_gateway,
    stub_acceptability_one,
    stub_embed_one,
    text_key,
    triple_key_text,
)


# --- stub behaviors -----------------------------------------------------------

def test_stub_embed_deterministic(stub_gateway):
    a, b = stub_gateway.embed(["a", "a"])
    assert a == b


def test_stub_embed_distinct_texts_differ(stub_gateway):
    a, b = stub_gateway.embed(["a", "b"])
    assert a != b


def test_stub_embed_empty(stub_gateway):
    assert stub_gateway.embed([]) == []


def test_stub_embed_unit_norm(stub_gateway):
    (vec,) = stub_gateway.embed(["germans love beer"])
    assert len(vec) == EMBED_DIM
    assert abs(math.sqrt(sum(v * v for v in vec)) - 1.0) <= 1e-6


def test_stub_embed_depends_on_seed():
    assert stub_embed_one("x", 13) != stub_embed_one("x", 14)


def test_stub_sentiment_lexicons(stub_gateway):
    assert stub_gateway.sentiment(["religion is terrible"]) == ["NEG"]
    assert stub_gateway.sentiment(["religion is wonderful"]) == ["POS"]
    assert stub_gateway.sentiment(["religion is conservative"]) == ["NEU"]


def test_stub_acceptability_range_and_boost():
    for text in ("one", "one two", "one two three", "a much longer sentence here"):
        score = stub_acceptability_one(text, 13)
        assert 0.0 <= score <= 1.0
    assert stub_acceptability_one("subject verb object", 13) >= 0.5
    assert stub_acceptability_one("short", 13) < 0.5


def test_stub_acceptability_stable_across_calls(stub_gateway):
    first = stub_gateway.acceptability(["germans are punctual"])
    second = stub_gateway.acceptability(["germans are punctual"])
    assert first == second


def test_stub_verbalize_concatenation(stub_gateway):
    assert stub_gateway.verbalize([("jewish men", "get", "circumcisions")]) == [
        "Jewish men get circumcisions."
    ]


def test_concat_verbalize_squeezes_whitespace():
    assert concat_verbalize("germans ", " are", "punctual") == "Germans are punctual."


def test_stub_fill_mask_fixture_and_fallback(stub_gateway):
    (known,) = stub_gateway.fill_mask(["Americans don't have free <mask>."], 3)
    assert known == ["healthcare", "lunch", "tuition"]
    (unknown,) = stub_gateway.fill_mask(["Nobody ever asked this <mask>."], 5)
    assert unknown == ["people", "they", "good", "bad", "different"]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.text(max_size=15), max_size=8), st.integers(min_value=0, max_value=4))
def test_batch_concatenation_property(texts, cut):
    gw = ScorerGateway(StubBackend(seed=13))
    cut = min(cut, len(texts))
    assert gw.embed(texts) == gw.embed(texts[:cut]) + gw.embed(texts[cut:])
    assert gw.sentiment(texts) == gw.sentiment(texts[:cut]) + gw.sentiment(texts[cut:])
    assert gw.acceptability(texts) == gw.acceptability(texts[:cut]) + gw.acceptability(texts[cut:])


# --- gateway contract enforcement ----------------------------------------------

class _BadBackend:
    def embed(self, texts):
        return [[1.0, 2.0]] * len(texts)  # not unit norm

    def sentiment(self, texts):
        return ["HAPPY"] * len(texts)

    def acceptability(self, texts):
        return [1.5] * len(texts)

    def verbalize(self, triples):
        return ["x"] * (len(triples) + 1)

    def fill_mask(self, texts, k):
        return [["a"]] * len(texts)


def test_gateway_rejects_non_unit_vectors():
    with pytest.raises(ScorerError, match="norm"):
        ScorerGateway(_BadBackend()).embed(["x"])


def test_gateway_rejects_unknown_labels():
    with pytest.raises(ScorerError, match="label"):
        ScorerGateway(_BadBackend()).sentiment(["x"])


def test_gateway_rejects_out_of_range_scores():
    with pytest.raises(ScorerError, match="outside"):
        ScorerGateway(_BadBackend()).acceptability(["x"])


def test_gateway_rejects_length_mismatch():
    with pytest.raises(ScorerError, match="results"):
        ScorerGateway(_BadBackend()).verbalize([("a", "b", "c")])


class _MixedDimBackend:
    def embed(self, texts):
        return [[1.0], [0.6, 0.8]][: len(texts)]


def test_gateway_rejects_dimension_mismatch():
    with pytest.raises(ScorerError, match="dimension"):
        ScorerGateway(_MixedDimBackend()).embed(["a", "b"])


# --- file cache -----------------------------------------------------------------

def test_cache_round_trip(tmp_path, stub_gateway):
    path = tmp_path / "cache.jsonl"
    texts = ["germans are punctual", "muslims pray daily"]
    append_cache_records(path, "embed", texts, stub_gateway.embed(texts))
    append_cache_records(path, "sentiment", texts, stub_gateway.sentiment(texts))
    append_cache_records(path, "acceptability", texts, stub_gateway.acceptability(texts))
    triple = ("jewish men", "get", "circumcisions")
    append_cache_records(
        path, "verbalize", [triple_key_text(triple)], stub_gateway.verbalize([triple])
    )
    append_cache_records(path, "fill_mask", ["x <mask>."], stub_gateway.fill_mask(["x <mask>."], 5))

    cached = ScorerGateway(FileCacheBackend(path))
    assert cached.embed(texts) == stub_gateway.embed(texts)
    assert cached.sentiment(texts) == stub_gateway.sentiment(texts)
    assert cached.acceptability(texts) == stub_gateway.acceptability(texts)
    assert cached.verbalize([triple]) == stub_gateway.verbalize([triple])
    assert cached.fill_mask(["x <mask>."], 3) == stub_gateway.fill_mask(["x <mask>."], 3)


def test_cache_miss_names_key(tmp_path):
    path = tmp_path / "cache.jsonl"
    append_cache_records(path, "embed", ["known"], [[1.0] + [0.0] * 15])
    backend = FileCacheBackend(path)
    with pytest.raises(CacheMiss) as err:
        backend.sentiment(["unknown text"])
    assert err.value.capability == "sentiment"
    assert err.value.key == text_key("unknown text")


def test_cache_missing_file():
    with pytest.raises(ConfigError):
        FileCacheBackend("/no/such/cache.jsonl")


# --- http backend ----------------------------------------------------------------

class _Handler(BaseHTTPRequestHandler):
    fail_times = 0
    calls = []

    def do_POST(self):
        cls = type(self)
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        cls.calls.append((self.path, body))
        if cls.fail_times > 0:
            cls.fail_times -= 1
            self.send_response(503)
            self.end_headers()
            return
        stub = StubBackend(seed=13)
        if self.path == "/embed":
            payload = {"vectors": stub.embed(body["texts"])}
        elif self.path == "/sentiment":
            payload = {"labels": stub.sentiment(body["texts"])}
        elif self.path == "/acceptability":
            payload = {"scores": stub.acceptability(body["texts"])}
        elif self.path == "/verbalize":
            triples = [(t["s"], t["p"], t["o"]) for t in body["triples"]]
            payload = {"sentences": stub.verbalize(triples)}
        else:
            payload = {"topk": stub.fill_mask(body["texts"], body["k"])}
        data = json.dumps(payload).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture()
def http_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _Handler.fail_times = 0
    _Handler.calls = []
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


def test_http_matches_stub(http_server, stub_gateway):
    gw = ScorerGateway(HttpBackend(http_server, retries=0))
    texts = ["germans are punctual"]
    assert gw.embed(texts) == stub_gateway.embed(texts)
    assert gw.sentiment(["religion seems to be conservative"])[0] in {"POS", "NEU", "NEG"}
    assert gw.verbalize([("jewish men", "get", "circumcisions")]) == [
        "Jewish men get circumcisions."
    ]
    assert gw.fill_mask(["q <mask>."], 2) == [["people", "they"]]


def test_http_retries_transient_failures(http_server):
    _Handler.fail_times = 2
    gw = ScorerGateway(HttpBackend(http_server, retries=3, backoff=0.0))
    assert gw.sentiment(["fine"]) == ["NEU"]


def test_http_exhausted_retries(http_server):
    _Handler.fail_times = 10
    backend = HttpBackend(http_server, retries=1, backoff=0.0)
    with pytest.raises(ScorerError, match="after 2 attempts"):
        backend.sentiment(["x"])


def test_http_unreachable():
    backend = HttpBackend("http://127.0.0.1:9", retries=0, backoff=0.0, timeout=0.2)
    with pytest.raises(ScorerError):
        backend.embed(["x"])


# --- factory ---------------------------------------------------------------------

def test_make_gateway_stub_default(cfg):
    gw = make_gateway(cfg.scorer, seed=cfg.seed)
    assert isinstance(gw.backend, StubBackend)
    assert gw.backend.seed == cfg.seed


def test_make_gateway_env_override(monkeypatch):
    params = ScorerParams(backend="http", url=None)
    monkeypatch.setenv("STEREOKG_SCORER_URL", "http://example:9999")
    gw = make_gateway(params, seed=1)
    assert gw.backend.url == "http://example:9999"


def test_make_gateway_http_without_url():
    with pytest.raises(ConfigError):
        make_gateway(ScorerParams(backend="http", url=None), seed=1)


def test_make_gateway_cache_requires_path():
    with pytest.raises(ConfigError):
        make_gateway(ScorerParams(backend="cache", cache_path=None), seed=1)
