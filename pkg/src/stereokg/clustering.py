"""Community detection over sentence embeddings, one entity at a time.

The procedure mirrors the classic fast-clustering scheme: every assertion
seeds a candidate community of all assertions whose cosine similarity to it
meets the threshold; candidates below the minimum size are dropped; the
remaining candidates are accepted greedily from largest to smallest
(smallest seed index breaks ties), removing members that an earlier
community already claimed. A candidate whose seed was claimed, or that
shrinks below the minimum size, is discarded. Whatever remains unassigned
becomes a singleton cluster.

Cosines are plain dot products because embeddings arrive unit-normalized.
The full similarity matrix is only materialized for up to 20k assertions
per entity; larger inputs fall back to row-block computation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError

_DENSE_LIMIT = 20_000
_BLOCK_ROWS = 1_024


@dataclass(frozen=True)
class SentenceCluster:
    cluster_id: int
    entity_id: str
    seed: int
    members: tuple[int, ...]
    is_singleton: bool


def _candidate_rows(vectors: np.ndarray, threshold: float):
    """Yield (seed_index, member_indices) for every row, blockwise."""
    n = len(vectors)
    if n <= _DENSE_LIMIT:
        sims = vectors @ vectors.T
        for i in range(n):
            yield i, np.nonzero(sims[i] >= threshold)[0]
        return
    for start in range(0, n, _BLOCK_ROWS):
        block = vectors[start : start + _BLOCK_ROWS] @ vectors.T
        for offset in range(block.shape[0]):
            yield start + offset, np.nonzero(block[offset] >= threshold)[0]


def detect_communities(
    vectors: np.ndarray, threshold: float, min_size: int
) -> list[tuple[int, list[int]]]:
    """Accepted communities as (seed, sorted members) in acceptance order."""
    n = len(vectors)
    if n == 0:
        return []
    candidates = [
        (seed, members.tolist())
        for seed, members in _candidate_rows(vectors, threshold)
        if len(members) >= min_size
    ]
    candidates.sort(key=lambda c: (-len(c[1]), c[0]))

    accepted: list[tuple[int, list[int]]] = []
    assigned: set[int] = set()
    for seed, members in candidates:
        if seed in assigned:
            continue
        remaining = [m for m in members if m not in assigned]
        if len(remaining) < min_size:
            continue
        accepted.append((seed, sorted(remaining)))
        assigned.update(remaining)
    return accepted


def cluster_entity(
    entity_id: str,
    vectors: np.ndarray,
    threshold: float,
    min_size: int,
    first_cluster_id: int = 0,
) -> list[SentenceCluster]:
    """Communities plus singletons covering every index exactly once."""
    clusters: list[SentenceCluster] = []
    next_id = first_cluster_id
    assigned: set[int] = set()
    for seed, members in detect_communities(vectors, threshold, min_size):
        clusters.append(
            SentenceCluster(
                cluster_id=next_id,
                entity_id=entity_id,
                seed=seed,
                members=tuple(members),
                is_singleton=False,
            )
        )
        assigned.update(members)
        next_id += 1
    for i in range(len(vectors)):
        if i not in assigned:
            clusters.append(
                SentenceCluster(
                    cluster_id=next_id,
                    entity_id=entity_id,
                    seed=i,
                    members=(i,),
                    is_singleton=True,
                )
            )
            next_id += 1
    return clusters


def as_unit_matrix(vectors: Sequence[Sequence[float]]) -> np.ndarray:
    matrix = np.asarray(vectors, dtype=np.float64)
    if matrix.size == 0:
        return matrix.reshape(0, 0)
    if matrix.ndim != 2:
        raise DataError("embedding batch must be two-dimensional")
    return matrix


def save_clusters(clusters: Sequence[SentenceCluster], path: str | Path) -> int:
    with Path(path).open("w", encoding="utf-8") as fh:
        for c in clusters:
            fh.write(
                json.dumps(
                    {
                        "cluster_id": c.cluster_id,
                        "entity": c.entity_id,
                        "seed": c.seed,
                        "members": list(c.members),
                        "singleton": c.is_singleton,
                    }
                )
                + "\n"
            )
    return len(clusters)


def load_clusters(path: str | Path) -> list[SentenceCluster]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"expected cluster file {path}")
    out: list[SentenceCluster] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out.append(
                    SentenceCluster(
                        cluster_id=rec["cluster_id"],
                        entity_id=rec["entity"],
                        seed=rec["seed"],
                        members=tuple(rec["members"]),
                        is_singleton=rec["singleton"],
                    )
                )
            except (json.JSONDecodeError, KeyError) as exc:
                raise DataError(f"{path}:{lineno}: bad cluster record: {exc}") from exc
    return out
