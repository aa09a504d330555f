"""Template mining and question-to-statement conversion.

Posts are split into sentences on terminal punctuation. Question templates
must match at the start of a sentence; statement templates may match
mid-sentence. Each match yields one assertion per (sentence, entity) pair,
deduplicated on (entity, statement) within a post.

Conversion rewrites a matched question into a lowercase declarative:

  pattern                rewrite
  ---------------------  -------------------------------------------------
  Why is <SUB> X         <SUB> is X          (aux re-inserted after subject)
  Why isn't <SUB> X      <SUB> isn't X
  Why are <SUB> X        <SUB> are X
  Why aren't <SUB> X     <SUB> aren't X
  Why can <SUB> X        <SUB> can X
  Why can't <SUB> X      <SUB> can't X
  Why do <SUB> X         <SUB> X             (positive do-support dropped)
  Why don't <SUB> X      <SUB> don't X       (negated aux kept)
  Why doesn't <SUB> X    <SUB> doesn't X
  Why does <SUB> culture X   <SUB> culture X's  (does dropped, verb takes -s)
  How is <SUB> X         <SUB> is X
  How do <SUB> X         <SUB> X
  What makes <SUB> X Y   <SUB> X is/are Y    (copula inserted before the
                                              final predicate chunk)

When the matched surface form is adjectival (no -s ending), head nouns from
a small closed list are pulled into the subject before the auxiliary goes
back in: "Why are French people always on strike" becomes "french people
are always on strike", not "french are people always on strike".

Statement templates pass through unchanged apart from lowercasing and
terminal-punctuation stripping, which makes conversion idempotent on them.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .config import EntitySpec, QueryTemplate
from .errors import ConversionFailed, DataError
from .ingest import RawPost

_SENTENCE_RE = re.compile(r"[^.?!\n]+[.?!]?")
_TERMINAL_RE = re.compile(r"[\s.?!]+$")

# Auxiliaries that are re-inserted right after the subject when undoing
# subject-aux inversion.
_REINSERT_AUX = frozenset(
    {
        "is", "isn't", "are", "aren't", "was", "wasn't", "were", "weren't",
        "can", "can't", "could", "couldn't", "will", "won't", "would",
        "wouldn't", "should", "shouldn't", "must", "may", "might",
        "don't", "doesn't", "didn't", "have", "haven't", "has", "hasn't",
        "had", "hadn't",
    }
)
_DROP_AUX = frozenset({"do", "did"})

_DEGREE_ADVERBS = frozenset(
    {"so", "really", "very", "such", "too", "quite", "pretty", "extremely", "always", "still"}
)
_PREPOSITIONS = frozenset({"at", "to", "for", "about", "of", "in", "with", "from", "on"})
# Subjects that take "are" despite not ending in -s.
_INVARIANT_PLURALS = frozenset({"chinese", "french", "people", "men", "women", "children", "folk"})

# Head nouns that continue the subject NP when the matched surface form is
# adjectival ("french people", "chinese food"). Plural demonyms (anything
# ending in -s) are complete subjects and absorb nothing.
_NP_CONTINUATIONS = frozenset(
    {
        "people", "men", "women", "man", "woman", "guys", "folks", "kids",
        "children", "culture", "cultures", "food", "foods", "cuisine",
        "students", "workers", "tourists", "parents", "families", "drivers",
        "cars", "trains", "cities", "weddings", "holidays", "toilets",
        "restaurants", "names", "accents", "movies", "music", "history",
    }
)

_IRREGULAR_3SG = {"have": "has", "be": "is", "do": "does", "go": "goes"}


def _third_singular(verb: str) -> str:
    if verb in _IRREGULAR_3SG:
        return _IRREGULAR_3SG[verb]
    if re.search(r"(s|sh|ch|x|z|o)$", verb):
        return verb + "es"
    if re.search(r"[^aeiou]y$", verb):
        return verb[:-1] + "ies"
    return verb + "s"


def _is_plural_subject(subject: str) -> bool:
    last = subject.split()[-1]
    if last in _INVARIANT_PLURALS:
        return True
    return last.endswith("s") and not last.endswith("ss")


@dataclass(frozen=True)
class MinedAssertion:
    entity_id: str
    template: QueryTemplate
    original_text: str
    statement_text: str
    platform: str
    source_id: str


@dataclass
class MiningReport:
    matched: int = 0
    conversion_failures: int = 0
    deduplicated: int = 0


def split_sentences(body: str) -> list[str]:
    """Terminal-punctuation split; each piece is a contiguous substring of
    the body with surrounding whitespace trimmed."""
    return [m.group(0).strip() for m in _SENTENCE_RE.finditer(body) if m.group(0).strip()]


def _instantiate(pattern: str, surface: str) -> str:
    return pattern.replace("<SUB>", surface).lower()


def _match_span(sentence: str, template: QueryTemplate, surface: str) -> str | None:
    """Return the matched span (from template start to sentence end) or None."""
    lowered = sentence.lower()
    prefix = _instantiate(template.pattern, surface)
    if template.form == "question":
        if lowered.startswith(prefix) and _boundary_after(lowered, len(prefix)):
            return sentence
        return None
    pos = 0
    while True:
        idx = lowered.find(prefix, pos)
        if idx < 0:
            return None
        if _boundary_before(lowered, idx) and _boundary_after(lowered, idx + len(prefix)):
            return sentence[idx:]
        pos = idx + 1


def _boundary_before(text: str, idx: int) -> bool:
    return idx == 0 or not text[idx - 1].isalnum()


def _boundary_after(text: str, idx: int) -> bool:
    return idx >= len(text) or not text[idx].isalnum()


def _what_makes_rewrite(surface: str, rest_tokens: list[str]) -> str:
    """Insert a copula between the subject chunk and the final predicate
    chunk: "french food special" -> "french food is special". Degree adverbs
    and preposition pairs glue to the predicate."""
    i = len(rest_tokens) - 1
    while i > 0:
        prev = rest_tokens[i - 1]
        if prev in _DEGREE_ADVERBS:
            i -= 1
        elif prev in _PREPOSITIONS and i - 1 > 0:
            i -= 2
        else:
            break
    subject = " ".join([surface] + rest_tokens[:i])
    predicate = " ".join(rest_tokens[i:])
    copula = "are" if _is_plural_subject(subject) else "is"
    return f"{subject} {copula} {predicate}"


def to_statement(question: str, template: QueryTemplate, entity: EntitySpec) -> str:
    """Rewrite a template match into a lowercase declarative sentence."""
    text = _TERMINAL_RE.sub("", question.strip()).lower()
    surface = None
    for form in sorted(entity.surface_forms, key=len, reverse=True):
        prefix = _instantiate(template.pattern, form)
        if text.startswith(prefix) and _boundary_after(text, len(prefix)):
            surface = form
            break
    if surface is None:
        raise ConversionFailed(
            f"text {question!r} does not instantiate template {template.pattern!r}"
        )
    if template.form == "statement":
        return text

    prefix = _instantiate(template.pattern, surface)
    rest = text[len(prefix):].strip()
    pre_sub = template.pattern.split("<SUB>")[0].lower().split()
    post_sub = template.pattern.split("<SUB>")[1].lower().split()
    subject = " ".join([surface] + post_sub)
    wh = pre_sub[0]
    aux = pre_sub[1] if len(pre_sub) > 1 else None

    if not rest:
        raise ConversionFailed(f"question {question!r} carries no content beyond the template")

    if wh == "what" and aux == "makes":
        return _what_makes_rewrite(surface, rest.split())

    rest_tokens = rest.split()
    if not surface.endswith("s"):
        while rest_tokens and rest_tokens[0] in _NP_CONTINUATIONS:
            subject += " " + rest_tokens.pop(0)
    rest = " ".join(rest_tokens)
    if not rest:
        raise ConversionFailed(f"question {question!r} carries no content beyond the subject")

    if aux in _REINSERT_AUX:
        return f"{subject} {aux} {rest}"
    if aux in _DROP_AUX:
        return f"{subject} {rest}"
    if aux == "does":
        inflected = _third_singular(rest_tokens[0])
        tail = " ".join(rest_tokens[1:])
        return f"{subject} {inflected} {tail}".strip()
    raise ConversionFailed(f"no rewrite rule for template {template.pattern!r}")


def mine(
    posts: Iterable[RawPost],
    entities: Sequence[EntitySpec],
    templates: Sequence[QueryTemplate],
    report: MiningReport | None = None,
) -> list[MinedAssertion]:
    """Run every template against every sentence of every post."""
    if report is None:
        report = MiningReport()
    out: list[MinedAssertion] = []
    for post in posts:
        seen: set[tuple[str, str]] = set()
        for sentence in split_sentences(post.body):
            for entity in entities:
                matched = None
                for template in templates:
                    for form in sorted(entity.surface_forms, key=len, reverse=True):
                        span = _match_span(sentence, template, form)
                        if span is not None:
                            matched = (template, span)
                            break
                    if matched:
                        break
                if not matched:
                    continue
                template, span = matched
                report.matched += 1
                try:
                    statement = to_statement(span, template, entity)
                except ConversionFailed:
                    report.conversion_failures += 1
                    continue
                key = (entity.id, statement)
                if key in seen:
                    report.deduplicated += 1
                    continue
                seen.add(key)
                out.append(
                    MinedAssertion(
                        entity_id=entity.id,
                        template=template,
                        original_text=span,
                        statement_text=statement,
                        platform=post.platform,
                        source_id=post.source_id,
                    )
                )
    return out


def save_assertions(assertions: Iterable[MinedAssertion], path: str | Path) -> int:
    n = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for a in assertions:
            fh.write(
                json.dumps(
                    {
                        "entity": a.entity_id,
                        "template": a.template.pattern,
                        "form": a.template.form,
                        "original": a.original_text,
                        "statement": a.statement_text,
                        "platform": a.platform,
                        "source_id": a.source_id,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
            n += 1
    return n


def load_assertions(path: str | Path) -> list[MinedAssertion]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"expected mined assertion file {path}")
    out: list[MinedAssertion] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out.append(
                    MinedAssertion(
                        entity_id=rec["entity"],
                        template=QueryTemplate(rec["template"], rec.get("form", "question")),
                        original_text=rec["original"],
                        statement_text=rec["statement"],
                        platform=rec.get("platform", "other"),
                        source_id=rec.get("source_id", ""),
                    )
                )
            except (json.JSONDecodeError, KeyError) as exc:
                raise DataError(f"{path}:{lineno}: bad assertion record: {exc}") from exc
    return out
