"""Sentiment and association analytics over a built knowledge graph.

Sentiment: each entry's triple is verbalized by plain concatenation, the
entity mention is masked with its generic type word to keep classifier bias
toward specific group names out of the measurement, and the masked sentence
is classified POS/NEU/NEG.

Association: for entities e and predicate/object tokens w,

    pi(e,w)     = ln( p(e,w) / (p(e) p(w)) )          joint vs independence
    pi_bar(e,w) = sum over other entities e' of pi(e',w)
    f(e,w)      = count(e,w) / total tokens seen with e
    alpha(e,w)  = (pi(e,w) - pi_bar(e,w)) * f(e,w)

with p() estimated from raw co-occurrence counts. pi is defined as 0 for
zero-count pairs, so pi_bar only sums over entities that actually co-occur
with w; this keeps alpha finite. Natural log throughout; the base uniformly
rescales alpha and never changes a ranking.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .config import EntitySpec
from .errors import DataError, EmptyCorpus, ScorerError
from .kg import KgEntry
from .triples import Triple, verbalize_plain, word_tokens


def _mask_pattern(entity: EntitySpec) -> re.Pattern:
    forms = sorted(entity.surface_forms, key=len, reverse=True)
    return re.compile(r"\b(?:" + "|".join(re.escape(f) for f in forms) + r")\b", re.IGNORECASE)


def mask_entity_counted(sentence: str, entity: EntitySpec) -> tuple[str, int]:
    masked, n = _mask_pattern(entity).subn(entity.mask_term, sentence)
    return masked, n


def mask_entity(sentence: str, entity: EntitySpec) -> str:
    """Replace every surface-form mention with the entity's type word."""
    return mask_entity_counted(sentence, entity)[0]


@dataclass(frozen=True)
class SentimentSummary:
    entity_id: str
    pos_pct: float
    neu_pct: float
    neg_pct: float
    n: int


@dataclass
class SentimentReport:
    summaries: list[SentimentSummary] = field(default_factory=list)
    excluded: int = 0
    unmasked_warnings: int = 0


def sentiment_distribution(
    entries: Sequence[KgEntry],
    entity: EntitySpec,
    gateway,
    report: SentimentReport | None = None,
) -> SentimentSummary:
    """Label percentages over one entity's entries, rounded to 0.1."""
    if report is None:
        report = SentimentReport()
    own = [e for e in entries if e.entity_id == entity.id]
    if not own:
        raise EmptyCorpus(f"no KG entries for entity {entity.id!r}")
    texts = []
    for e in own:
        masked, hits = mask_entity_counted(verbalize_plain(e.triple), entity)
        if hits == 0:
            report.unmasked_warnings += 1
        texts.append(masked)
    try:
        labels = gateway.sentiment(texts)
    except ScorerError:
        labels = []
        for text in texts:
            try:
                labels.extend(gateway.sentiment([text]))
            except ScorerError:
                labels.append(None)
    pairs = [(e, l) for e, l in zip(own, labels) if l is not None]
    report.excluded += len(own) - len(pairs)
    if not pairs:
        raise EmptyCorpus(f"every entry for {entity.id!r} failed sentiment scoring")
    n = len(pairs)
    counts = {"POS": 0, "NEU": 0, "NEG": 0}
    for _, label in pairs:
        counts[label] += 1
    summary = SentimentSummary(
        entity_id=entity.id,
        pos_pct=round(100.0 * counts["POS"] / n, 1),
        neu_pct=round(100.0 * counts["NEU"] / n, 1),
        neg_pct=round(100.0 * counts["NEG"] / n, 1),
        n=n,
    )
    report.summaries.append(summary)
    return summary


def sentiment_report(
    entries: Sequence[KgEntry], entities: Sequence[EntitySpec], gateway
) -> SentimentReport:
    report = SentimentReport()
    present = {e.entity_id for e in entries}
    for entity in entities:
        if entity.id in present:
            sentiment_distribution(entries, entity, gateway, report)
    return report


def save_sentiment_tsv(report: SentimentReport, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("entity\tn\tpos_pct\tneu_pct\tneg_pct\n")
        for s in report.summaries:
            fh.write(f"{s.entity_id}\t{s.n}\t{s.pos_pct:.1f}\t{s.neu_pct:.1f}\t{s.neg_pct:.1f}\n")


def tokenize_po(triple: Triple, stopwords: frozenset[str]) -> list[str]:
    """Predicate and object tokens, lowercased, punctuation-stripped,
    stopwords removed. Entity terms are deliberately retained."""
    tokens = word_tokens(triple.predicate) + word_tokens(triple.object)
    return [t for t in tokens if t not in stopwords]


@dataclass
class AssociationTable:
    counts: dict[tuple[str, str], int]
    pmi: dict[tuple[str, str], float]
    pmi_others: dict[tuple[str, str], float]
    rel_freq: dict[tuple[str, str], float]
    alpha: dict[tuple[str, str], float]

    @property
    def entities(self) -> list[str]:
        return sorted({e for e, _ in self.counts})

    def tokens_for(self, entity: str) -> list[str]:
        return [w for e, w in self.counts if e == entity]


def association_from_counts(counts: dict[tuple[str, str], int]) -> AssociationTable:
    """Compute pi, pi_bar, f and alpha from raw (entity, token) counts."""
    counts = {k: v for k, v in counts.items() if v > 0}
    if not counts:
        raise EmptyCorpus("association requires at least one (entity, token) count")
    total = sum(counts.values())
    entity_totals: dict[str, int] = {}
    token_totals: dict[str, int] = {}
    for (e, w), c in counts.items():
        entity_totals[e] = entity_totals.get(e, 0) + c
        token_totals[w] = token_totals.get(w, 0) + c

    pmi: dict[tuple[str, str], float] = {}
    for (e, w), c in counts.items():
        p_joint = c / total
        p_e = entity_totals[e] / total
        p_w = token_totals[w] / total
        pmi[(e, w)] = math.log(p_joint / (p_e * p_w))

    by_token: dict[str, list[str]] = {}
    for e, w in counts:
        by_token.setdefault(w, []).append(e)

    pmi_others: dict[tuple[str, str], float] = {}
    rel_freq: dict[tuple[str, str], float] = {}
    alpha: dict[tuple[str, str], float] = {}
    for (e, w), c in counts.items():
        pmi_others[(e, w)] = sum(pmi[(e2, w)] for e2 in by_token[w] if e2 != e)
        rel_freq[(e, w)] = c / entity_totals[e]
        alpha[(e, w)] = (pmi[(e, w)] - pmi_others[(e, w)]) * rel_freq[(e, w)]

    return AssociationTable(
        counts=counts, pmi=pmi, pmi_others=pmi_others, rel_freq=rel_freq, alpha=alpha
    )


def association(entries: Iterable[KgEntry], stopwords: frozenset[str]) -> AssociationTable:
    counts: dict[tuple[str, str], int] = {}
    for entry in entries:
        for token in tokenize_po(entry.triple, stopwords):
            key = (entry.entity_id, token)
            counts[key] = counts.get(key, 0) + 1
    return association_from_counts(counts)


def top_tokens(table: AssociationTable, entity: str, k: int) -> list[str]:
    """Top-k tokens by alpha; ties break on higher count, then alphabetically."""
    if entity not in table.entities:
        raise DataError(f"entity {entity!r} not present in association table")
    tokens = table.tokens_for(entity)
    tokens.sort(key=lambda w: (-table.alpha[(entity, w)], -table.counts[(entity, w)], w))
    return tokens[:k]


def save_association_tsv(table: AssociationTable, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("entity\ttoken\tcount\tpi\tpi_bar\tf\talpha\trank\n")
        for entity in table.entities:
            ranked = top_tokens(table, entity, len(table.tokens_for(entity)))
            for rank, w in enumerate(ranked, start=1):
                key = (entity, w)
                fh.write(
                    f"{entity}\t{w}\t{table.counts[key]}\t{table.pmi[key]:.6f}\t"
                    f"{table.pmi_others[key]:.6f}\t{table.rel_freq[key]:.6f}\t"
                    f"{table.alpha[key]:.6f}\t{rank}\n"
                )


def format_summary(table: AssociationTable, entry_counts: dict[str, int], k: int = 12) -> str:
    """Console table: entity, entry count, top-k associated tokens."""
    lines = [f"{'entity':<12} {'entries':>7}  top tokens (alpha)"]
    for entity in table.entities:
        tokens = top_tokens(table, entity, k)
        lines.append(f"{entity:<12} {entry_counts.get(entity, 0):>7}  {', '.join(tokens)}")
    return "\n".join(lines)
