"""Stage wiring shared by the CLI and the tests.

Each stage is a pure function of loaded artifacts; the CLI handles files.
Assertion indices are global (positions in the mined assertion list), so a
cluster file plus an assertion file fully reconstruct the member sentences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .clustering import SentenceCluster, as_unit_matrix, cluster_entity
from .config import PipelineConfig
from .errors import ClusterUnrepresentable
from .kg import BuildReport, KgEntry, build
from .mining import MinedAssertion
from .triples import FilterReport, Triple, extract, filter_triples, select_representative


def cluster_assertions(
    assertions: Sequence[MinedAssertion],
    gateway,
    threshold: float,
    min_size: int,
) -> list[SentenceCluster]:
    """Cluster per entity (entities in sorted order); member indices refer to
    positions in the full assertion list."""
    by_entity: dict[str, list[int]] = {}
    for idx, a in enumerate(assertions):
        by_entity.setdefault(a.entity_id, []).append(idx)
    clusters: list[SentenceCluster] = []
    next_id = 0
    for entity_id in sorted(by_entity):
        indices = by_entity[entity_id]
        vectors = gateway.embed([assertions[i].statement_text for i in indices])
        local = cluster_entity(
            entity_id, as_unit_matrix(vectors), threshold, min_size, first_cluster_id=next_id
        )
        for c in local:
            clusters.append(
                SentenceCluster(
                    cluster_id=c.cluster_id,
                    entity_id=entity_id,
                    seed=indices[c.seed],
                    members=tuple(indices[m] for m in c.members),
                    is_singleton=c.is_singleton,
                )
            )
        next_id += len(local)
    return clusters


@dataclass
class ExtractionReport:
    candidates: int = 0
    no_verb: int = 0
    filter: FilterReport = field(default_factory=FilterReport)
    unrepresentable_clusters: int = 0


def extract_representatives(
    assertions: Sequence[MinedAssertion],
    clusters: Sequence[SentenceCluster],
    config: PipelineConfig,
    gateway,
    report: ExtractionReport | None = None,
) -> tuple[dict[int, Triple], list[tuple[SentenceCluster, Triple]]]:
    """Extract and filter triples for every cluster member, then pick one
    representative per cluster. Returns (representatives by cluster id,
    all surviving triples paired with their cluster)."""
    if report is None:
        report = ExtractionReport()
    representatives: dict[int, Triple] = {}
    survivors: list[tuple[SentenceCluster, Triple]] = []
    for cluster in clusters:
        entity = config.entity(cluster.entity_id)
        candidates: list[Triple] = []
        for member in cluster.members:
            extracted = extract(
                assertions[member].statement_text,
                entity,
                config.extraction,
                source_assertion=member,
            )
            if not extracted:
                report.no_verb += 1
            candidates.extend(extracted)
        report.candidates += len(candidates)
        kept = filter_triples(candidates, entity, config.extraction.lexicons, report.filter)
        survivors.extend((cluster, t) for t in kept)
        if not kept:
            report.unrepresentable_clusters += 1
            continue
        try:
            representatives[cluster.cluster_id] = select_representative(kept, gateway)
        except ClusterUnrepresentable:
            report.unrepresentable_clusters += 1
    return representatives, survivors


def build_kg(
    assertions: Sequence[MinedAssertion],
    clusters: Sequence[SentenceCluster],
    representatives: dict[int, Triple],
    report: BuildReport | None = None,
) -> list[KgEntry]:
    return build(clusters, representatives, assertions, report)
