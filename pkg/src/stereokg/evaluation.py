"""Human-evaluation protocol and masked-token prediction scoring.

Annotation sheets sample an equal number of entries from the
singleton-derived and cluster-derived strata, then re-insert a handful of
duplicates to measure intra-annotator consistency. Quality ratings are
COH/COM/DOM on 0-2, plus credibility CR1 (0-1, heard before) and CR2 (0-4,
believed true). An item succeeds when its mean COH, COM and DOM ratings are
all strictly above 1.
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import DataError
from .kg import CLUSTER_DERIVED, SINGLETON_DERIVED, KgEntry
from .scorer import concat_verbalize

METRICS = ("coh", "com", "dom", "cr1", "cr2")
_METRIC_RANGES = {"coh": 2, "com": 2, "dom": 2, "cr1": 1, "cr2": 4}

MASK_PLACEHOLDER = "<mask>"


@dataclass(frozen=True)
class AnnotationItem:
    item_id: int
    entry_id: int
    shown_text: str
    derivation: str
    is_duplicate_of: int | None = None


@dataclass(frozen=True)
class AnnotationRecord:
    annotator_id: str
    item_id: int
    coh: int
    com: int
    dom: int
    cr1: int
    cr2: int

    def value(self, metric: str) -> int:
        return getattr(self, metric)

    def validate(self) -> None:
        for metric, upper in _METRIC_RANGES.items():
            v = self.value(metric)
            if not 0 <= v <= upper:
                raise DataError(
                    f"annotator {self.annotator_id}, item {self.item_id}: "
                    f"{metric}={v} outside 0..{upper}"
                )


@dataclass(frozen=True)
class MaskedProbe:
    probe_id: int
    sentence_with_mask: str
    gold_token: str
    entity_id: str

    def validate(self) -> None:
        if self.sentence_with_mask.count(MASK_PLACEHOLDER) != 1:
            raise DataError(
                f"probe {self.probe_id}: exactly one {MASK_PLACEHOLDER} placeholder required"
            )
        if not self.gold_token or any(ch.isspace() for ch in self.gold_token):
            raise DataError(f"probe {self.probe_id}: gold token must be one whitespace-free token")


def sample_eval_set(
    entries: Sequence[KgEntry],
    n_per_stratum: int = 50,
    n_duplicates: int = 10,
    seed: int = 13,
) -> list[AnnotationItem]:
    """Stratified sample plus duplicates, fully determined by the seed.

    Originals are shuffled; duplicates are appended after all originals so
    each one refers back to an earlier item in the sheet.
    """
    sd_pool = [e for e in entries if e.derivation == SINGLETON_DERIVED]
    cd_pool = [e for e in entries if e.derivation == CLUSTER_DERIVED]
    for name, pool in (("singleton_derived", sd_pool), ("cluster_derived", cd_pool)):
        if len(pool) < n_per_stratum:
            raise DataError(
                f"stratum {name} has only {len(pool)} entries, need {n_per_stratum}"
            )
    rng = random.Random(seed)
    chosen = rng.sample(sd_pool, n_per_stratum) + rng.sample(cd_pool, n_per_stratum)
    rng.shuffle(chosen)
    items = [
        AnnotationItem(
            item_id=i,
            entry_id=e.entry_id,
            shown_text=concat_verbalize(*e.triple.fields()),
            derivation=e.derivation,
        )
        for i, e in enumerate(chosen)
    ]
    if n_duplicates > len(items):
        raise DataError(f"cannot duplicate {n_duplicates} of {len(items)} items")
    dup_sources = rng.sample(range(len(items)), n_duplicates)
    rng.shuffle(dup_sources)
    for source in dup_sources:
        original = items[source]
        items.append(
            AnnotationItem(
                item_id=len(items),
                entry_id=original.entry_id,
                shown_text=original.shown_text,
                derivation=original.derivation,
                is_duplicate_of=original.item_id,
            )
        )
    return items


@dataclass(frozen=True)
class SuccessRates:
    suc_all: float
    suc_sd: float
    suc_cd: float


def _item_success(records: Sequence[AnnotationRecord], aggregate: str) -> bool:
    if aggregate == "mean":
        return all(
            sum(r.value(m) for r in records) / len(records) > 1 for m in ("coh", "com", "dom")
        )
    if aggregate == "majority":
        half = len(records) / 2
        return all(
            sum(1 for r in records if r.value(m) > 1) > half for m in ("coh", "com", "dom")
        )
    raise DataError(f"unknown SUC aggregation {aggregate!r}")


def success_rate(
    items: Sequence[AnnotationItem],
    records: Sequence[AnnotationRecord],
    aggregate: str = "mean",
) -> SuccessRates:
    """Percentage of items whose COH, COM and DOM all aggregate strictly
    above 1, overall and per stratum. Duplicate items are excluded."""
    by_item: dict[int, list[AnnotationRecord]] = {}
    for r in records:
        by_item.setdefault(r.item_id, []).append(r)
    originals = [i for i in items if i.is_duplicate_of is None]
    per_stratum: dict[str, list[bool]] = {SINGLETON_DERIVED: [], CLUSTER_DERIVED: []}
    outcomes: list[bool] = []
    for item in originals:
        got = by_item.get(item.item_id)
        if not got:
            raise DataError(f"item {item.item_id} has no annotation records")
        ok = _item_success(got, aggregate)
        outcomes.append(ok)
        per_stratum[item.derivation].append(ok)

    def pct(flags: list[bool]) -> float:
        return 100.0 * sum(flags) / len(flags) if flags else 0.0

    return SuccessRates(
        suc_all=pct(outcomes),
        suc_sd=pct(per_stratum[SINGLETON_DERIVED]),
        suc_cd=pct(per_stratum[CLUSTER_DERIVED]),
    )


def observed_agreement(records: Sequence[AnnotationRecord], metric: str) -> float:
    """Mean over annotator pairs of the share of co-annotated items on which
    the pair gave the same value for the metric."""
    if metric not in METRICS:
        raise DataError(f"unknown metric {metric!r}")
    by_annotator: dict[str, dict[int, int]] = {}
    for r in records:
        values = by_annotator.setdefault(r.annotator_id, {})
        if r.item_id in values:
            raise DataError(f"annotator {r.annotator_id} rated item {r.item_id} twice")
        values[r.item_id] = r.value(metric)
    pair_scores: list[float] = []
    for a, b in combinations(sorted(by_annotator), 2):
        shared = by_annotator[a].keys() & by_annotator[b].keys()
        if not shared:
            continue
        matches = sum(1 for item in shared if by_annotator[a][item] == by_annotator[b][item])
        pair_scores.append(matches / len(shared))
    if not pair_scores:
        raise DataError("no annotator pair shares any item")
    return sum(pair_scores) / len(pair_scores)


def intra_consistency(
    items: Sequence[AnnotationItem], records: Sequence[AnnotationRecord]
) -> dict[str, float]:
    """Per annotator: mean over duplicate pairs of the fraction of the five
    metrics answered identically to the original item."""
    duplicates = [i for i in items if i.is_duplicate_of is not None]
    if not duplicates:
        raise DataError("sheet contains no duplicate items")
    by_key: dict[tuple[str, int], AnnotationRecord] = {}
    for r in records:
        by_key[(r.annotator_id, r.item_id)] = r
    annotators = sorted({r.annotator_id for r in records})
    out: dict[str, float] = {}
    for annotator in annotators:
        fractions: list[float] = []
        for dup in duplicates:
            first = by_key.get((annotator, dup.is_duplicate_of))
            second = by_key.get((annotator, dup.item_id))
            if first is None or second is None:
                continue
            same = sum(1 for m in METRICS if first.value(m) == second.value(m))
            fractions.append(same / len(METRICS))
        if fractions:
            out[annotator] = sum(fractions) / len(fractions)
    return out


def acc_at_k(
    probes: Sequence[MaskedProbe],
    predictions: Mapping[int, Sequence[str]],
    k: int,
) -> float:
    """Percentage of probes whose gold token appears in the top-k predictions."""
    if not probes:
        raise DataError("no probes to score")
    hits = 0
    for probe in probes:
        ranked = predictions.get(probe.probe_id)
        if not ranked:
            raise DataError(f"probe {probe.probe_id} has no predictions")
        top = [t.casefold() for t in ranked[: min(k, len(ranked))]]
        if probe.gold_token.casefold() in top:
            hits += 1
    return 100.0 * hits / len(probes)


# --- file formats -----------------------------------------------------------

def save_sheet(items: Sequence[AnnotationItem], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["item_id", "entry_id", "shown_text", "duplicate_of"])
        for item in items:
            writer.writerow(
                [
                    item.item_id,
                    item.entry_id,
                    item.shown_text,
                    "" if item.is_duplicate_of is None else item.is_duplicate_of,
                ]
            )


def load_sheet(path: str | Path, entries: Sequence[KgEntry] | None = None) -> list[AnnotationItem]:
    """Read a sheet back; derivations are recovered from the KG when given."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"expected annotation sheet {path}")
    derivations = {e.entry_id: e.derivation for e in entries} if entries else {}
    items: list[AnnotationItem] = []
    with path.open(encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            entry_id = int(row["entry_id"])
            items.append(
                AnnotationItem(
                    item_id=int(row["item_id"]),
                    entry_id=entry_id,
                    shown_text=row["shown_text"],
                    derivation=derivations.get(entry_id, ""),
                    is_duplicate_of=int(row["duplicate_of"]) if row["duplicate_of"] else None,
                )
            )
    return items


def load_responses(path: str | Path) -> list[AnnotationRecord]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"expected annotation responses {path}")
    records: list[AnnotationRecord] = []
    with path.open(encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.DictReader(fh), start=2):
            try:
                record = AnnotationRecord(
                    annotator_id=row["annotator_id"],
                    item_id=int(row["item_id"]),
                    coh=int(row["coh"]),
                    com=int(row["com"]),
                    dom=int(row["dom"]),
                    cr1=int(row["cr1"]),
                    cr2=int(row["cr2"]),
                )
            except (KeyError, ValueError) as exc:
                raise DataError(f"{path}:{lineno}: bad response row: {exc}") from exc
            record.validate()
            records.append(record)
    return records


def save_responses(records: Sequence[AnnotationRecord], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["annotator_id", "item_id", "coh", "com", "dom", "cr1", "cr2"])
        for r in records:
            writer.writerow([r.annotator_id, r.item_id, r.coh, r.com, r.dom, r.cr1, r.cr2])


def load_probes(path: str | Path) -> list[MaskedProbe]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"expected probe file {path}")
    probes: list[MaskedProbe] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                probe = MaskedProbe(
                    probe_id=int(rec["id"]),
                    sentence_with_mask=rec["masked"],
                    gold_token=rec["gold"],
                    entity_id=rec.get("entity", ""),
                )
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise DataError(f"{path}:{lineno}: bad probe record: {exc}") from exc
            probe.validate()
            probes.append(probe)
    return probes


def load_predictions(path: str | Path) -> dict[int, list[str]]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"expected predictions file {path}")
    out: dict[int, list[str]] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out[int(rec["id"])] = [str(t) for t in rec["topk"]]
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise DataError(f"{path}:{lineno}: bad prediction record: {exc}") from exc
    return out


def annotate_interactively(items: Sequence[AnnotationItem], annotator_id: str) -> list[AnnotationRecord]:
    """Terminal prompt loop for offline annotation runs."""
    records: list[AnnotationRecord] = []
    for item in items:
        print(f"\n[{item.item_id}] {item.shown_text}")
        values = {}
        for metric, upper in _METRIC_RANGES.items():
            while True:
                raw = input(f"  {metric} (0-{upper}): ").strip()
                if raw.isdigit() and 0 <= int(raw) <= upper:
                    values[metric] = int(raw)
                    break
                print(f"  enter an integer between 0 and {upper}")
        records.append(AnnotationRecord(annotator_id=annotator_id, item_id=item.item_id, **values))
    return records
