"""Knowledge-graph assembly, persistence, and summary statistics.

The on-disk format is versioned JSONL: a header line
``{"format": "stereokg", "version": 1}`` followed by one object per entry.
Loading validates the triple and entry invariants and reports the entry id
of the first violation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .clustering import SentenceCluster
from .config import EntitySpec
from .errors import DataError
from .mining import MinedAssertion
from .triples import Triple, word_tokens

FORMAT_NAME = "stereokg"
FORMAT_VERSION = 1

SINGLETON_DERIVED = "singleton_derived"
CLUSTER_DERIVED = "cluster_derived"

_DEFAULT_PRONOUNS = frozenset(
    {
        "i", "me", "my", "mine", "myself", "you", "your", "yours", "yourself",
        "he", "him", "his", "himself", "she", "her", "hers", "herself",
        "we", "us", "our", "ours", "ourselves", "they", "them", "their",
        "theirs", "themselves", "it", "its", "itself",
    }
)


@dataclass(frozen=True)
class KgEntry:
    entry_id: int
    entity_id: str
    triple: Triple
    member_count: int
    member_sentences: tuple[str, ...]
    derivation: str
    provenance: tuple[tuple[str, str], ...]

    def validate(self, pronouns: frozenset[str] = _DEFAULT_PRONOUNS) -> None:
        if self.member_count < 1:
            raise DataError(f"entry {self.entry_id}: member_count must be >= 1")
        expected = CLUSTER_DERIVED if self.member_count >= 2 else SINGLETON_DERIVED
        if self.derivation != expected:
            raise DataError(
                f"entry {self.entry_id}: derivation {self.derivation!r} inconsistent "
                f"with member_count {self.member_count}"
            )
        if len(self.member_sentences) != self.member_count:
            raise DataError(
                f"entry {self.entry_id}: {len(self.member_sentences)} member sentences "
                f"for member_count {self.member_count}"
            )
        for field in self.triple.fields():
            if not field.strip():
                raise DataError(f"entry {self.entry_id}: triple has an empty field")
            if any(tok in pronouns for tok in word_tokens(field)):
                raise DataError(f"entry {self.entry_id}: triple contains a personal pronoun")


@dataclass(frozen=True)
class KgStats:
    per_entity_counts: dict[str, int]
    total: int


@dataclass
class BuildReport:
    representable: int = 0
    unrepresentable: int = 0


def build(
    clusters: Sequence[SentenceCluster],
    representatives: dict[int, Triple],
    assertions: Sequence[MinedAssertion],
    report: BuildReport | None = None,
) -> list[KgEntry]:
    """One entry per representable cluster, ids dense from 0 in
    (entity, cluster_id) order."""
    if report is None:
        report = BuildReport()
    ordered = sorted(clusters, key=lambda c: (c.entity_id, c.cluster_id))
    entries: list[KgEntry] = []
    for cluster in ordered:
        triple = representatives.get(cluster.cluster_id)
        if triple is None:
            report.unrepresentable += 1
            continue
        report.representable += 1
        members = [assertions[m] for m in cluster.members]
        entries.append(
            KgEntry(
                entry_id=len(entries),
                entity_id=cluster.entity_id,
                triple=triple,
                member_count=len(cluster.members),
                member_sentences=tuple(a.statement_text for a in members),
                derivation=CLUSTER_DERIVED if len(cluster.members) >= 2 else SINGLETON_DERIVED,
                provenance=tuple((a.platform, a.source_id) for a in members),
            )
        )
    return entries


def stats(entries: Iterable[KgEntry]) -> KgStats:
    counts: dict[str, int] = {}
    for entry in entries:
        counts[entry.entity_id] = counts.get(entry.entity_id, 0) + 1
    return KgStats(per_entity_counts=dict(sorted(counts.items())), total=sum(counts.values()))


def save(entries: Sequence[KgEntry], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"format": FORMAT_NAME, "version": FORMAT_VERSION}) + "\n")
        for e in entries:
            fh.write(
                json.dumps(
                    {
                        "entry_id": e.entry_id,
                        "entity_id": e.entity_id,
                        "triple": {
                            "subject": e.triple.subject,
                            "predicate": e.triple.predicate,
                            "object": e.triple.object,
                            "source_assertion": e.triple.source_assertion,
                            "score": e.triple.score,
                        },
                        "member_count": e.member_count,
                        "member_sentences": list(e.member_sentences),
                        "derivation": e.derivation,
                        "provenance": [list(p) for p in e.provenance],
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def load(path: str | Path, entities: Sequence[EntitySpec] | None = None,
         pronouns: frozenset[str] = _DEFAULT_PRONOUNS) -> list[KgEntry]:
    """Load and validate a KG file; optionally check subjects against the
    entity surface forms."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"expected knowledge graph file {path}")
    forms_by_entity = {e.id: set(e.surface_forms) for e in entities} if entities else None
    entries: list[KgEntry] = []
    with path.open(encoding="utf-8") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: missing or invalid header line") from exc
        if header.get("format") != FORMAT_NAME or header.get("version") != FORMAT_VERSION:
            raise DataError(
                f"{path}: expected format {FORMAT_NAME} v{FORMAT_VERSION}, "
                f"found {header.get('format')!r} v{header.get('version')!r}"
            )
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                triple = rec["triple"]
                entry = KgEntry(
                    entry_id=rec["entry_id"],
                    entity_id=rec["entity_id"],
                    triple=Triple(
                        subject=triple["subject"],
                        predicate=triple["predicate"],
                        object=triple["object"],
                        source_assertion=triple.get("source_assertion", -1),
                        score=triple.get("score"),
                    ),
                    member_count=rec["member_count"],
                    member_sentences=tuple(rec["member_sentences"]),
                    derivation=rec["derivation"],
                    provenance=tuple((p[0], p[1]) for p in rec["provenance"]),
                )
            except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
                raise DataError(f"{path}:{lineno}: bad KG record: {exc}") from exc
            entry.validate(pronouns)
            if forms_by_entity is not None:
                forms = forms_by_entity.get(entry.entity_id)
                if forms is None:
                    raise DataError(f"entry {entry.entry_id}: unknown entity {entry.entity_id!r}")
                if not any(tok in forms for tok in word_tokens(entry.triple.subject)):
                    raise DataError(
                        f"entry {entry.entry_id}: subject lacks a surface form of "
                        f"{entry.entity_id!r}"
                    )
            entries.append(entry)
    return entries


def save_tsv(entries: Sequence[KgEntry], path: str | Path) -> None:
    """Flat spreadsheet export: entity, subject, predicate, object, member_count."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("entity\tsubject\tpredicate\tobject\tmember_count\n")
        for e in entries:
            fh.write(
                f"{e.entity_id}\t{e.triple.subject}\t{e.triple.predicate}\t"
                f"{e.triple.object}\t{e.member_count}\n"
            )
