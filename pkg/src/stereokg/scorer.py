"""Gateway to every learned-model capability the pipeline consumes.

Five capabilities sit behind one abstraction: ``embed``, ``sentiment``,
``acceptability``, ``verbalize`` and ``fill_mask``. Three backends exist:

* ``stub``  - deterministic in-process functions of (capability, text, seed);
  a full pipeline run under stubs is byte-reproducible.
* ``http``  - a remote scorer service speaking the wire protocol below.
* ``cache`` - replay of previously recorded results, keyed by
  (capability, sha256 of the input text); misses fail loudly.

Wire protocol (shared with the scorer service):
  POST /embed         {"texts": [str]}                    -> {"vectors": [[float]]}
  POST /sentiment     {"texts": [str]}                    -> {"labels": ["POS"|"NEU"|"NEG"]}
  POST /acceptability {"texts": [str]}                    -> {"scores": [float]}
  POST /verbalize     {"triples": [{"s","p","o"}]}        -> {"sentences": [str]}
  POST /fill_mask     {"texts": [str], "k": int}          -> {"topk": [[str]]}
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import threading
import time
from pathlib import Path

import requests

from .config import ScorerParams
from .errors import CacheMiss, ConfigError, ScorerError

ENV_SCORER_URL = "STEREOKG_SCORER_URL"

CAPABILITIES = ("embed", "sentiment", "acceptability", "verbalize", "fill_mask")
SENTIMENT_LABELS = ("POS", "NEU", "NEG")
EMBED_DIM = 16

STUB_NEGATIVE_WORDS = frozenset(
    {
        "terrible", "awful", "horrible", "hate", "hates", "disgusting", "dirty",
        "rude", "stupid", "obnoxious", "angry", "racist", "violent", "annoying",
        "ugly", "bad", "evil", "lazy", "arrogant", "vulgar", "shameless",
    }
)
STUB_POSITIVE_WORDS = frozenset(
    {
        "good", "great", "love", "loves", "beautiful", "wonderful", "friendly",
        "kind", "polite", "smart", "strong", "delicious", "generous", "happy",
        "brilliant", "tolerant", "proud",
    }
)

# Canned top-k answers for a handful of masked sentences; anything else gets
# the fixed fallback list.
STUB_FILL_MASK_FIXTURES: dict[str, list[str]] = {
    "Americans don't have free <mask>.": ["healthcare", "lunch", "tuition", "housing", "college"],
    "Muslims are turning away <mask>.": ["too", "now", "again", "from", "slowly"],
    "Americans are voting for <mask>.": ["freedom", "democracy", "them", "change", "president"],
    "Atheists unilaterally support <mask>.": ["fascism", "abortion", "terrorism", "science", "democracy"],
    "Muslims compare apostasy to <mask>.": ["treason", "sin", "genocide", "crime", "betrayal"],
    "Chinese toilets are <mask>.": ["disgusting", "awful", "shit", "dirty", "different"],
    "Jewish women are <mask>.": ["beautiful", "strong", "smart", "different", "proud"],
}
STUB_FILL_MASK_FALLBACK = [
    "people", "they", "good", "bad", "different", "food", "money", "everyone",
    "nothing", "culture",
]


def concat_verbalize(subject: str, predicate: str, obj: str) -> str:
    """Sentence-style concatenation: capitalize the first letter, join with
    single spaces, close with a period."""
    body = " ".join(" ".join((subject, predicate, obj)).split())
    if not body:
        return ""
    return body[0].upper() + body[1:] + "."


def text_key(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def triple_key_text(triple: tuple[str, str, str]) -> str:
    return "\x1f".join(triple)


def _unit_interval(seed: int, capability: str, text: str) -> float:
    digest = hashlib.sha256(f"{seed}\x1f{capability}\x1f{text}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") / 2**64


def stub_embed_one(text: str, seed: int) -> list[float]:
    """Unit-norm 16-dim vector derived from a seeded hash of the text."""
    digest = hashlib.sha512(f"{seed}\x1fembed\x1f{text}".encode("utf-8")).digest()
    raw = [
        int.from_bytes(digest[4 * i : 4 * i + 4], "big") / 2**32 * 2.0 - 1.0
        for i in range(EMBED_DIM)
    ]
    norm = math.sqrt(sum(v * v for v in raw))
    return [v / norm for v in raw]


def stub_sentiment_one(text: str) -> str:
    tokens = set(text.lower().split())
    if tokens & STUB_NEGATIVE_WORDS:
        return "NEG"
    if tokens & STUB_POSITIVE_WORDS:
        return "POS"
    return "NEU"


def stub_acceptability_one(text: str, seed: int) -> float:
    """Hash-derived score in [0,1); texts with a 3-plus-token
    subject-verb-object shape land in the upper half."""
    base = _unit_interval(seed, "acceptability", text)
    if len(text.split()) >= 3:
        return 0.5 + 0.5 * base
    return 0.5 * base


def stub_fill_mask_one(text: str, k: int) -> list[str]:
    ranked = STUB_FILL_MASK_FIXTURES.get(text, STUB_FILL_MASK_FALLBACK)
    return list(ranked[:k])


class StubBackend:
    """Pure deterministic stand-in for every capability. Never errors."""

    name = "stub"

    def __init__(self, seed: int = 13):
        self.seed = seed

    def embed(self, texts: list[str]) -> list[list[float]]:
        return [stub_embed_one(t, self.seed) for t in texts]

    def sentiment(self, texts: list[str]) -> list[str]:
        return [stub_sentiment_one(t) for t in texts]

    def acceptability(self, texts: list[str]) -> list[float]:
        return [stub_acceptability_one(t, self.seed) for t in texts]

    def verbalize(self, triples: list[tuple[str, str, str]]) -> list[str]:
        return [concat_verbalize(s, p, o) for s, p, o in triples]

    def fill_mask(self, texts: list[str], k: int) -> list[list[str]]:
        return [stub_fill_mask_one(t, k) for t in texts]


class HttpBackend:
    """POSTs batches to a scorer service with bounded concurrency and
    exponential-backoff retries on transport failures or non-200 replies."""

    name = "http"

    def __init__(
        self,
        url: str,
        timeout: float = 10.0,
        retries: int = 3,
        backoff: float = 0.1,
        max_inflight: int = 8,
        session: requests.Session | None = None,
    ):
        self.url = url.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self._gate = threading.BoundedSemaphore(max_inflight)
        self._session = session or requests.Session()

    def _post(self, endpoint: str, payload: dict) -> dict:
        last: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                with self._gate:
                    resp = self._session.post(
                        f"{self.url}/{endpoint}", json=payload, timeout=self.timeout
                    )
                if resp.status_code == 200:
                    return resp.json()
                last = ScorerError(f"{endpoint}: HTTP {resp.status_code}")
            except (requests.RequestException, ValueError) as exc:
                last = exc
            if attempt < self.retries:
                time.sleep(self.backoff * 2**attempt)
        raise ScorerError(
            f"scorer endpoint /{endpoint} failed after {self.retries + 1} attempts: {last}"
        )

    def embed(self, texts: list[str]) -> list[list[float]]:
        return self._post("embed", {"texts": texts})["vectors"]

    def sentiment(self, texts: list[str]) -> list[str]:
        return self._post("sentiment", {"texts": texts})["labels"]

    def acceptability(self, texts: list[str]) -> list[float]:
        return self._post("acceptability", {"texts": texts})["scores"]

    def verbalize(self, triples: list[tuple[str, str, str]]) -> list[str]:
        body = {"triples": [{"s": s, "p": p, "o": o} for s, p, o in triples]}
        return self._post("verbalize", body)["sentences"]

    def fill_mask(self, texts: list[str], k: int) -> list[list[str]]:
        return self._post("fill_mask", {"texts": texts, "k": k})["topk"]


class FileCacheBackend:
    """Replays recorded results; a missing key raises CacheMiss.

    Cache file: JSONL, one record per (capability, text) pair:
      {"capability": str, "key": sha256-hex, "result": <payload>}
    Embedding payloads are stored as plain float lists.
    """

    name = "cache"

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._store: dict[tuple[str, str], object] = {}
        if not self.path.exists():
            raise ConfigError(f"scorer cache file not found: {self.path}")
        with self.path.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                self._store[(rec["capability"], rec["key"])] = rec["result"]

    def _lookup(self, capability: str, text: str):
        key = text_key(text)
        try:
            return self._store[(capability, key)]
        except KeyError:
            raise CacheMiss(capability, key) from None

    def embed(self, texts: list[str]) -> list[list[float]]:
        return [self._lookup("embed", t) for t in texts]

    def sentiment(self, texts: list[str]) -> list[str]:
        return [self._lookup("sentiment", t) for t in texts]

    def acceptability(self, texts: list[str]) -> list[float]:
        return [self._lookup("acceptability", t) for t in texts]

    def verbalize(self, triples: list[tuple[str, str, str]]) -> list[str]:
        return [self._lookup("verbalize", triple_key_text(t)) for t in triples]

    def fill_mask(self, texts: list[str], k: int) -> list[list[str]]:
        return [list(self._lookup("fill_mask", t))[:k] for t in texts]


def append_cache_records(path: str | Path, capability: str, keys: list[str], results: list) -> None:
    """Record backend outputs for later replay through FileCacheBackend.

    ``keys`` are the raw input texts (or triple key texts for verbalize).
    """
    with Path(path).open("a", encoding="utf-8") as fh:
        for key, result in zip(keys, results):
            fh.write(
                json.dumps(
                    {"capability": capability, "key": text_key(key), "result": result},
                    ensure_ascii=False,
                )
                + "\n"
            )


class ScorerGateway:
    """Validating front door for all scorer calls.

    Enforces the result contracts regardless of backend: lengths match the
    inputs, scores stay in [0,1], sentiment labels are POS/NEU/NEG, and
    embedding batches are unit-norm with a constant dimension.
    """

    def __init__(self, backend):
        self.backend = backend

    def embed(self, texts: list[str]) -> list[list[float]]:
        vectors = self.backend.embed(list(texts))
        self._check_len("embed", texts, vectors)
        if vectors:
            dim = len(vectors[0])
            for vec in vectors:
                if len(vec) != dim:
                    raise ScorerError("embed: dimension mismatch within batch")
                norm = math.sqrt(sum(v * v for v in vec))
                if abs(norm - 1.0) > 1e-6:
                    raise ScorerError(f"embed: vector norm {norm} is not unit length")
        return vectors

    def sentiment(self, texts: list[str]) -> list[str]:
        labels = self.backend.sentiment(list(texts))
        self._check_len("sentiment", texts, labels)
        for label in labels:
            if label not in SENTIMENT_LABELS:
                raise ScorerError(f"sentiment: unknown label {label!r}")
        return labels

    def acceptability(self, texts: list[str]) -> list[float]:
        scores = self.backend.acceptability(list(texts))
        self._check_len("acceptability", texts, scores)
        for score in scores:
            if not 0.0 <= score <= 1.0:
                raise ScorerError(f"acceptability: score {score} outside [0,1]")
        return [float(s) for s in scores]

    def verbalize(self, triples: list[tuple[str, str, str]]) -> list[str]:
        sentences = self.backend.verbalize([tuple(t) for t in triples])
        self._check_len("verbalize", triples, sentences)
        return sentences

    def fill_mask(self, texts: list[str], k: int) -> list[list[str]]:
        if k < 1:
            raise ScorerError("fill_mask: k must be >= 1")
        ranked = self.backend.fill_mask(list(texts), k)
        self._check_len("fill_mask", texts, ranked)
        return [list(r) for r in ranked]

    @staticmethod
    def _check_len(capability: str, inputs, results) -> None:
        if len(results) != len(inputs):
            raise ScorerError(
                f"{capability}: backend returned {len(results)} results for {len(inputs)} inputs"
            )


def make_gateway(params: ScorerParams, seed: int, backend_override: str | None = None) -> ScorerGateway:
    """Build a gateway from config, honoring the STEREOKG_SCORER_URL override."""
    backend_name = backend_override or params.backend
    if backend_name == "stub":
        return ScorerGateway(StubBackend(seed=seed))
    if backend_name == "http":
        url = os.environ.get(ENV_SCORER_URL) or params.url
        if not url:
            raise ConfigError("http scorer backend selected but no url configured")
        return ScorerGateway(
            HttpBackend(
                url,
                timeout=params.timeout,
                retries=params.retries,
                backoff=params.backoff,
                max_inflight=params.max_inflight,
            )
        )
    if backend_name == "cache":
        if not params.cache_path:
            raise ConfigError("cache scorer backend selected but no cache_path configured")
        return ScorerGateway(FileCacheBackend(params.cache_path))
    raise ConfigError(f"unknown scorer backend {backend_name!r}")
