"""Configuration loading and validation.

The pipeline is driven by a single JSON document with keys ``entities``,
``templates``, ``subreddit_allowlist``, ``clustering``, ``extraction``,
``analytics``, ``scorer`` and ``seed``. A complete default configuration
covering ten target groups and fifteen query templates ships with the
package (``stereokg/data/default_config.json``).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigError

KINDS = ("religion", "nationality")
MASK_TERMS = {"religion": "religion", "nationality": "nation"}
PLACEHOLDER = "<SUB>"
INTERROGATIVES = ("why", "how", "what")


@dataclass(frozen=True)
class EntitySpec:
    """One target social group and the surface forms it is matched by."""

    id: str
    display_name: str
    kind: str
    surface_forms: tuple[str, ...]
    mask_term: str

    def validate(self) -> None:
        if not self.id or self.id != self.id.lower().strip():
            raise ConfigError(f"entity id must be a short lowercase key, got {self.id!r}")
        if self.kind not in KINDS:
            raise ConfigError(f"entity {self.id}: unknown kind {self.kind!r}")
        if not self.surface_forms:
            raise ConfigError(f"entity {self.id}: surface_forms must be non-empty")
        for form in self.surface_forms:
            if form != form.lower() or form != form.strip() or not form:
                raise ConfigError(
                    f"entity {self.id}: surface form {form!r} must be lowercase and trimmed"
                )
        if self.mask_term != MASK_TERMS[self.kind]:
            raise ConfigError(
                f"entity {self.id}: mask_term {self.mask_term!r} inconsistent with kind "
                f"{self.kind!r} (expected {MASK_TERMS[self.kind]!r})"
            )


@dataclass(frozen=True)
class QueryTemplate:
    """A mining template with exactly one ``<SUB>`` placeholder."""

    pattern: str
    form: str  # "question" | "statement"

    def validate(self, position: int | None = None) -> None:
        where = f" (template #{position})" if position is not None else ""
        if self.pattern.count(PLACEHOLDER) != 1:
            raise ConfigError(
                f"template {self.pattern!r} must contain exactly one {PLACEHOLDER}{where}"
            )
        if self.form not in ("question", "statement"):
            raise ConfigError(f"template {self.pattern!r}: unknown form {self.form!r}{where}")
        first = self.pattern.split()[0].lower() if self.pattern.split() else ""
        if self.form == "question" and first not in INTERROGATIVES:
            raise ConfigError(
                f"question template {self.pattern!r} must begin with an interrogative word{where}"
            )
        if self.form == "statement" and first in INTERROGATIVES:
            raise ConfigError(
                f"statement template {self.pattern!r} must not begin with an interrogative word{where}"
            )


@dataclass(frozen=True)
class ClusteringParams:
    threshold: float = 0.75
    min_size: int = 2

    def validate(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError(f"clustering.threshold must lie in [0,1], got {self.threshold}")
        if self.min_size < 2:
            raise ConfigError(f"clustering.min_size must be >= 2, got {self.min_size}")


@dataclass(frozen=True)
class FilterLexicons:
    personal_pronouns: frozenset[str]
    colloquialisms: frozenset[str]
    modalities: frozenset[str]

    def validate(self) -> None:
        for name, words in (
            ("personal_pronouns", self.personal_pronouns),
            ("colloquialisms", self.colloquialisms),
            ("modalities", self.modalities),
        ):
            for w in words:
                if w != w.lower():
                    raise ConfigError(f"extraction.{name}: {w!r} must be lowercase")


@dataclass(frozen=True)
class ExtractionParams:
    verb_lexicon: frozenset[str]
    lexicons: FilterLexicons
    external_extractor_url: str | None = None

    def validate(self) -> None:
        if not self.verb_lexicon:
            raise ConfigError("extraction.verb_lexicon must be non-empty")
        self.lexicons.validate()


@dataclass(frozen=True)
class ScorerParams:
    backend: str = "stub"
    url: str | None = None
    timeout: float = 10.0
    retries: int = 3
    backoff: float = 0.1
    max_inflight: int = 8
    cache_path: str | None = None

    def validate(self) -> None:
        if self.backend not in ("stub", "http", "cache"):
            raise ConfigError(f"scorer.backend must be stub|http|cache, got {self.backend!r}")
        if self.retries < 0:
            raise ConfigError("scorer.retries must be >= 0")
        if self.max_inflight < 1:
            raise ConfigError("scorer.max_inflight must be >= 1")


@dataclass(frozen=True)
class PipelineConfig:
    entities: tuple[EntitySpec, ...]
    templates: tuple[QueryTemplate, ...]
    subreddit_allowlist: tuple[str, ...]
    clustering: ClusteringParams
    extraction: ExtractionParams
    stopwords: frozenset[str]
    scorer: ScorerParams
    seed: int = 13

    def validate(self) -> None:
        seen: set[str] = set()
        for ent in self.entities:
            ent.validate()
            if ent.id in seen:
                raise ConfigError(f"duplicate entity id {ent.id!r}")
            seen.add(ent.id)
        for pos, tpl in enumerate(self.templates, start=1):
            tpl.validate(pos)
        self.clustering.validate()
        self.extraction.validate()
        self.scorer.validate()
        for ch in self.subreddit_allowlist:
            if ch != ch.lower().strip():
                raise ConfigError(f"subreddit_allowlist entry {ch!r} must be lowercase")

    def entity(self, entity_id: str) -> EntitySpec:
        for ent in self.entities:
            if ent.id == entity_id:
                return ent
        raise ConfigError(f"unknown entity id {entity_id!r}")


def _as_config(doc: dict) -> PipelineConfig:
    try:
        entities = tuple(
            EntitySpec(
                id=e["id"],
                display_name=e.get("display_name", e["id"]),
                kind=e["kind"],
                surface_forms=tuple(e["surface_forms"]),
                mask_term=e["mask_term"],
            )
            for e in doc["entities"]
        )
        templates = tuple(
            QueryTemplate(pattern=t["pattern"], form=t["form"]) for t in doc["templates"]
        )
        ex = doc["extraction"]
        extraction = ExtractionParams(
            verb_lexicon=frozenset(ex["verb_lexicon"]),
            lexicons=FilterLexicons(
                personal_pronouns=frozenset(ex["personal_pronouns"]),
                colloquialisms=frozenset(ex["colloquialisms"]),
                modalities=frozenset(ex["modalities"]),
            ),
            external_extractor_url=ex.get("external_extractor_url"),
        )
        cl = doc.get("clustering", {})
        sc = doc.get("scorer", {})
        cfg = PipelineConfig(
            entities=entities,
            templates=templates,
            subreddit_allowlist=tuple(doc.get("subreddit_allowlist", ())),
            clustering=ClusteringParams(
                threshold=float(cl.get("threshold", 0.75)),
                min_size=int(cl.get("min_size", 2)),
            ),
            extraction=extraction,
            stopwords=frozenset(doc.get("analytics", {}).get("stopwords", ())),
            scorer=ScorerParams(
                backend=sc.get("backend", "stub"),
                url=sc.get("url"),
                timeout=float(sc.get("timeout", 10.0)),
                retries=int(sc.get("retries", 3)),
                backoff=float(sc.get("backoff", 0.1)),
                max_inflight=int(sc.get("max_inflight", 8)),
                cache_path=sc.get("cache_path"),
            ),
            seed=int(doc.get("seed", 13)),
        )
    except KeyError as exc:
        raise ConfigError(f"config is missing required key {exc}") from exc
    cfg.validate()
    return cfg


def serialize_config(cfg: PipelineConfig) -> dict:
    """Inverse of load: a JSON-ready document that parses back to an equal config."""
    return {
        "seed": cfg.seed,
        "entities": [
            {
                "id": e.id,
                "display_name": e.display_name,
                "kind": e.kind,
                "surface_forms": list(e.surface_forms),
                "mask_term": e.mask_term,
            }
            for e in cfg.entities
        ],
        "templates": [{"pattern": t.pattern, "form": t.form} for t in cfg.templates],
        "subreddit_allowlist": list(cfg.subreddit_allowlist),
        "clustering": {
            "threshold": cfg.clustering.threshold,
            "min_size": cfg.clustering.min_size,
        },
        "extraction": {
            "external_extractor_url": cfg.extraction.external_extractor_url,
            "verb_lexicon": sorted(cfg.extraction.verb_lexicon),
            "personal_pronouns": sorted(cfg.extraction.lexicons.personal_pronouns),
            "colloquialisms": sorted(cfg.extraction.lexicons.colloquialisms),
            "modalities": sorted(cfg.extraction.lexicons.modalities),
        },
        "analytics": {"stopwords": sorted(cfg.stopwords)},
        "scorer": {
            "backend": cfg.scorer.backend,
            "url": cfg.scorer.url,
            "timeout": cfg.scorer.timeout,
            "retries": cfg.scorer.retries,
            "backoff": cfg.scorer.backoff,
            "max_inflight": cfg.scorer.max_inflight,
            "cache_path": cfg.scorer.cache_path,
        },
    }


def config_hash(cfg: PipelineConfig) -> str:
    """Stable hash of the effective configuration, for run manifests."""
    canonical = json.dumps(serialize_config(cfg), sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return _as_config(doc)


def default_config() -> PipelineConfig:
    """The configuration shipped with the package."""
    text = resources.files("stereokg.data").joinpath("default_config.json").read_text("utf-8")
    return _as_config(json.loads(text))


def write_config(cfg: PipelineConfig, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(serialize_config(cfg), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
