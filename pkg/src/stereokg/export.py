"""Knowledge corpora and downstream split manifests.

UK (unstructured knowledge) collects the member sentences behind every KG
entry; SK (structured knowledge) is one verbalized sentence per entry.
Both are written one sentence per line with a JSONL sidecar mapping line
numbers to entry ids, ready for masked-language-model training pipelines.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import DataError, EmptyCorpus, ScorerError
from .kg import KgEntry
from .scorer import concat_verbalize


@dataclass(frozen=True)
class KnowledgeCorpus:
    kind: str  # "UK" | "SK"
    sentences: tuple[str, ...]
    source_entry_ids: tuple[int, ...]

    def validate(self) -> None:
        if not self.sentences:
            raise EmptyCorpus(f"{self.kind} corpus is empty")
        if len(self.sentences) != len(self.source_entry_ids):
            raise DataError(f"{self.kind} corpus: sentence/source id lists differ in length")
        if self.kind == "SK":
            for s in self.sentences:
                if not s or not s[0].isupper() or s[-1] not in ".!?":
                    raise DataError(f"SK sentence {s!r} must start uppercase and end with punctuation")


@dataclass
class ExportReport:
    emitted: int = 0
    deduplicated: int = 0
    skipped: int = 0


def export_uk(entries: Sequence[KgEntry], dedup: bool = True,
              report: ExportReport | None = None) -> KnowledgeCorpus:
    """Every member sentence of every entry, optionally deduplicated
    globally (first occurrence wins)."""
    if report is None:
        report = ExportReport()
    seen: set[str] = set()
    sentences: list[str] = []
    sources: list[int] = []
    for entry in entries:
        for sentence in entry.member_sentences:
            if dedup:
                if sentence in seen:
                    report.deduplicated += 1
                    continue
                seen.add(sentence)
            sentences.append(sentence)
            sources.append(entry.entry_id)
            report.emitted += 1
    corpus = KnowledgeCorpus(kind="UK", sentences=tuple(sentences), source_entry_ids=tuple(sources))
    corpus.validate()
    return corpus


def export_sk(entries: Sequence[KgEntry], gateway=None, fallback: bool = True,
              report: ExportReport | None = None) -> KnowledgeCorpus:
    """One verbalized sentence per entry, via the scorer's verbalize
    capability when available, falling back to plain concatenation."""
    if report is None:
        report = ExportReport()
    if not entries:
        raise EmptyCorpus("cannot export SK from an empty KG")
    sentences: list[str] = []
    sources: list[int] = []
    verbalized: list[str | None]
    if gateway is not None:
        try:
            verbalized = list(gateway.verbalize([e.triple.fields() for e in entries]))
        except ScorerError:
            verbalized = []
            for entry in entries:
                try:
                    verbalized.extend(gateway.verbalize([entry.triple.fields()]))
                except ScorerError:
                    verbalized.append(None)
    else:
        verbalized = [None] * len(entries)
    for entry, sentence in zip(entries, verbalized):
        if sentence is None:
            if not fallback:
                report.skipped += 1
                continue
            sentence = concat_verbalize(*entry.triple.fields())
        sentence = _normalize_sk(sentence)
        sentences.append(sentence)
        sources.append(entry.entry_id)
        report.emitted += 1
    corpus = KnowledgeCorpus(kind="SK", sentences=tuple(sentences), source_entry_ids=tuple(sources))
    corpus.validate()
    return corpus


def _normalize_sk(sentence: str) -> str:
    sentence = " ".join(sentence.split())
    if not sentence:
        return sentence
    if sentence[-1] not in ".!?":
        sentence += "."
    return sentence[0].upper() + sentence[1:]


def save_corpus(corpus: KnowledgeCorpus, path: str | Path, sidecar: str | Path | None = None) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for sentence in corpus.sentences:
            fh.write(sentence + "\n")
    if sidecar is None:
        sidecar = path.with_suffix(path.suffix + ".map.jsonl")
    with Path(sidecar).open("w", encoding="utf-8") as fh:
        for line, entry_id in enumerate(corpus.source_entry_ids):
            fh.write(json.dumps({"line": line, "entry_id": entry_id}) + "\n")


@dataclass(frozen=True)
class SplitManifest:
    dataset: str
    train: tuple[tuple[str, str], ...]
    dev: tuple[tuple[str, str], ...]
    test: tuple[tuple[str, str], ...]
    stereotype_test: tuple[str, ...]
    dev_exclusions: tuple[str, ...]
    seed: int
    ratios: tuple[float, float, float]

    def counts(self) -> dict[str, int]:
        return {
            "train": len(self.train),
            "dev": len(self.dev),
            "test": len(self.test),
            "stereotype_test": len(self.stereotype_test),
            "dev_exclusions": len(self.dev_exclusions),
        }


def _allocate(n: int, ratios: Sequence[float]) -> list[int]:
    """Largest-remainder allocation; every bucket lands within 1 of its target."""
    exact = [n * r for r in ratios]
    base = [int(x) for x in exact]
    remainder = n - sum(base)
    order = sorted(range(len(ratios)), key=lambda i: exact[i] - base[i], reverse=True)
    for i in order[:remainder]:
        base[i] += 1
    return base


def build_split_manifest(
    labeled_ids: Sequence[tuple[str, str]],
    dataset: str,
    stereotype_ids: Sequence[str],
    seed: int,
    ratios: tuple[float, float, float] = (0.7, 0.1, 0.2),
) -> SplitManifest:
    """Seeded train/dev/test split; stereotype samples landing in dev are
    moved out of dev and recorded as exclusions."""
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise DataError(f"split ratios must sum to 1, got {ratios}")
    ids = [i for i, _ in labeled_ids]
    if len(set(ids)) != len(ids):
        raise DataError("duplicate sample ids in label file")
    known = set(ids)
    unknown = [s for s in stereotype_ids if s not in known]
    if unknown:
        raise DataError(f"stereotype ids not present in dataset: {sorted(unknown)}")
    rng = random.Random(seed)
    shuffled = list(labeled_ids)
    rng.shuffle(shuffled)
    n_train, n_dev, n_test = _allocate(len(shuffled), ratios)
    train = shuffled[:n_train]
    dev = shuffled[n_train : n_train + n_dev]
    test = shuffled[n_train + n_dev :]

    stereo = set(stereotype_ids)
    dev_exclusions = [i for i, _ in dev if i in stereo]
    dev = [(i, l) for i, l in dev if i not in stereo]
    stereotype_test = [i for i, _ in test if i in stereo] + dev_exclusions
    return SplitManifest(
        dataset=dataset,
        train=tuple(train),
        dev=tuple(dev),
        test=tuple(test),
        stereotype_test=tuple(stereotype_test),
        dev_exclusions=tuple(dev_exclusions),
        seed=seed,
        ratios=tuple(ratios),
    )


def save_manifest(manifest: SplitManifest, path: str | Path) -> None:
    doc = {
        "dataset": manifest.dataset,
        "seed": manifest.seed,
        "ratios": list(manifest.ratios),
        "train": [list(p) for p in manifest.train],
        "dev": [list(p) for p in manifest.dev],
        "test": [list(p) for p in manifest.test],
        "stereotype_test": list(manifest.stereotype_test),
        "dev_exclusions": list(manifest.dev_exclusions),
        "counts": manifest.counts(),
    }
    Path(path).write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def load_labels(path: str | Path) -> list[tuple[str, str]]:
    """Label file: one `id<TAB>label` row per line."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"expected label file {path}")
    out: list[tuple[str, str]] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected 'id<TAB>label'")
            out.append((parts[0], parts[1]))
    return out
