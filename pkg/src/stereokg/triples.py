"""Subject-predicate-object extraction, filter heuristics, and
representative selection.

The built-in extractor is shallow and template-aware: statements come from a
small set of known prompts, so the first finite verb after the entity
mention reliably separates subject from predicate. An external extractor
service can be hooked in for arbitrary text; its candidates are appended to
the built-in ones.

Filtering applies three heuristics in order: drop triples containing a
personal pronoun in any field, drop triples whose subject does not mention
the target entity, then delete colloquialism and modality tokens from all
fields (dropping triples that a deletion empties).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

import requests

from .config import EntitySpec, ExtractionParams, FilterLexicons
from .errors import ClusterUnrepresentable, ScorerError

_NEGATION_PARTICLES = frozenset({"not", "never"})
_WORD_RE = re.compile(r"[a-z0-9]+(?:['\-][a-z0-9]+)*")


@dataclass(frozen=True)
class Triple:
    subject: str
    predicate: str
    object: str
    source_assertion: int = -1
    score: float | None = None

    def fields(self) -> tuple[str, str, str]:
        return (self.subject, self.predicate, self.object)


@dataclass
class FilterReport:
    dropped_pronoun: int = 0
    dropped_no_entity_subject: int = 0
    dropped_emptied: int = 0

    @property
    def total_dropped(self) -> int:
        return self.dropped_pronoun + self.dropped_no_entity_subject + self.dropped_emptied


def word_tokens(text: str) -> list[str]:
    """Lowercase word tokens; apostrophes and hyphens stay word-internal."""
    return _WORD_RE.findall(text.lower())


def _entity_token_spans(tokens: list[str], entity: EntitySpec) -> list[int]:
    """Indices just past each entity surface-form occurrence."""
    forms = {form for form in entity.surface_forms}
    ends = []
    for i, tok in enumerate(tokens):
        if tok in forms:
            ends.append(i + 1)
    return ends


def extract(
    statement: str,
    entity: EntitySpec,
    params: ExtractionParams,
    source_assertion: int = -1,
) -> list[Triple]:
    """Extract zero or more candidate triples from a lowercase statement.

    Each unconsumed verb-lexicon token after the entity mention anchors one
    candidate: subject = everything before the verb group, predicate = the
    verb group plus attached negation particles, object = the remainder.
    """
    tokens = statement.split()
    clean = [word_tokens(t)[0] if word_tokens(t) else "" for t in tokens]
    entity_ends = _entity_token_spans(clean, entity)
    candidates: list[Triple] = []
    if entity_ends:
        first_entity_end = entity_ends[0]
        verbs = params.verb_lexicon
        i = first_entity_end
        while i < len(tokens):
            if clean[i] not in verbs:
                i += 1
                continue
            group_end = i + 1
            while group_end < len(tokens) and (
                clean[group_end] in verbs or clean[group_end] in _NEGATION_PARTICLES
            ):
                group_end += 1
            subject = " ".join(tokens[:i]).strip()
            predicate = " ".join(tokens[i:group_end]).strip()
            obj = " ".join(tokens[group_end:]).strip()
            if subject and predicate and obj:
                candidates.append(
                    Triple(subject=subject, predicate=predicate, object=obj,
                           source_assertion=source_assertion)
                )
            i = group_end
    if params.external_extractor_url:
        candidates.extend(
            _external_extract(statement, params.external_extractor_url, source_assertion)
        )
    return candidates


def _external_extract(statement: str, url: str, source_assertion: int) -> list[Triple]:
    try:
        resp = requests.post(url.rstrip("/") + "/extract", json={"sentence": statement}, timeout=30)
        resp.raise_for_status()
        payload = resp.json()
    except (requests.RequestException, ValueError) as exc:
        raise ScorerError(f"external extractor failed: {exc}") from exc
    out = []
    for item in payload.get("triples", []):
        s, p, o = item.get("s", "").strip(), item.get("p", "").strip(), item.get("o", "").strip()
        if s and p and o:
            out.append(Triple(subject=s, predicate=p, object=o, source_assertion=source_assertion))
    return out


def _strip_tokens(text: str, banned: frozenset[str]) -> str:
    kept = [t for t in text.split() if word_tokens(t) and word_tokens(t)[0] not in banned]
    return " ".join(kept)


def filter_triples(
    triples: list[Triple],
    entity: EntitySpec,
    lexicons: FilterLexicons,
    report: FilterReport | None = None,
) -> list[Triple]:
    """Apply the three filter heuristics; order of the input is preserved."""
    if report is None:
        report = FilterReport()
    surviving: list[Triple] = []
    removable = lexicons.colloquialisms | lexicons.modalities
    forms = set(entity.surface_forms)
    for triple in triples:
        if any(
            tok in lexicons.personal_pronouns
            for field in triple.fields()
            for tok in word_tokens(field)
        ):
            report.dropped_pronoun += 1
            continue
        if not any(tok in forms for tok in word_tokens(triple.subject)):
            report.dropped_no_entity_subject += 1
            continue
        cleaned = replace(
            triple,
            subject=_strip_tokens(triple.subject, removable),
            predicate=_strip_tokens(triple.predicate, removable),
            object=_strip_tokens(triple.object, removable),
        )
        if not all(cleaned.fields()):
            report.dropped_emptied += 1
            continue
        surviving.append(cleaned)
    return surviving


def verbalize_plain(triple: Triple) -> str:
    """Ranking form: bare concatenation, no casing or punctuation changes."""
    return " ".join(" ".join(triple.fields()).split())


def select_representative(candidates: list[Triple], gateway) -> Triple:
    """Highest-acceptability candidate; ties go to fewer tokens, then to the
    lexicographically smaller verbalization."""
    if not candidates:
        raise ClusterUnrepresentable("no surviving triples to choose from")
    sentences = [verbalize_plain(t) for t in candidates]
    scores = gateway.acceptability(sentences)

    def sort_key(i: int):
        return (-scores[i], len(sentences[i].split()), sentences[i])

    best = min(range(len(candidates)), key=sort_key)
    return replace(candidates[best], score=scores[best])
