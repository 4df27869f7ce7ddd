"""Scoring and ranking of target tags for a set of source tags.

Scores are cosine similarities over concept embeddings, aggregated by sum or
mean across the source set, or shortest-path relatedness over the genre
graph for the baseline.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .compose import ConceptEmbeddingMatrix
from .genregraph import GenreGraph, bfs_hops

logger = logging.getLogger(__name__)

SCORERS = ("sum", "avg", "baseline")


@dataclass
class TranslationResult:
    scores: dict[str, float]
    ranking: list[str]


def cosine(u, v) -> float:
    """Cosine similarity, defined as 0 when either vector has zero norm."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    norm_u = np.linalg.norm(u)
    norm_v = np.linalg.norm(v)
    if norm_u == 0.0 or norm_v == 0.0:
        return 0.0
    value = float(np.dot(u, v) / (norm_u * norm_v))
    return max(-1.0, min(1.0, value))


def score_sum(sources: Sequence, target) -> float:
    """Sum of cosine similarities from each source vector to the target."""
    sources = list(sources)
    if not sources:
        raise ValueError("source set must be nonempty")
    return float(sum(cosine(s, target) for s in sources))


def score_avg(sources: Sequence, target) -> float:
    """Mean cosine similarity from the source vectors to the target."""
    sources = list(sources)
    if not sources:
        raise ValueError("source set must be nonempty")
    return score_sum(sources, target) / len(sources)


def _normalize_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1)
    safe = np.where(norms == 0.0, 1.0, norms)
    return matrix / safe[:, None]


def translate(
    source_tags: Iterable[str],
    targets: Iterable[str],
    embeddings: ConceptEmbeddingMatrix | None = None,
    scorer: str = "avg",
    graph: GenreGraph | None = None,
) -> TranslationResult:
    """Score every target tag for the given source tag set and rank them.

    With the "sum"/"avg" scorers, targets must resolve in the embedding
    matrix; source tags missing from it are dropped (with a warning), and if
    none remain every target scores 0. The "baseline" scorer averages
    shortest-path relatedness over the graph instead, and requires every id
    to be a graph node. Ranking ties break lexicographically.
    """
    if scorer not in SCORERS:
        raise ValueError(f"scorer must be one of {SCORERS}, got {scorer!r}")
    sources = sorted(set(source_tags))
    target_list = list(dict.fromkeys(targets))
    if not sources:
        raise ValueError("source tag set must be nonempty")

    if scorer == "baseline":
        if graph is None:
            raise ValueError("the baseline scorer requires the genre graph")
        for tag in [*sources, *target_list]:
            if not graph.has_node(tag):
                raise ValueError(f"unknown node id {tag!r}")
        totals = np.zeros(len(target_list))
        for source in sources:
            hops = bfs_hops(graph, source)
            totals += np.array([
                1.0 / (1.0 + hops[t]) if t in hops else 0.0 for t in target_list
            ])
        values = totals / len(sources)
    else:
        if embeddings is None:
            raise ValueError(f"the {scorer!r} scorer requires an embedding matrix")
        missing = [t for t in target_list if t not in embeddings]
        if missing:
            raise ValueError(f"unresolvable target tag {missing[0]!r}")
        resolved = [s for s in sources if s in embeddings]
        dropped = len(sources) - len(resolved)
        if dropped:
            logger.warning("dropped %d source tags missing from the embedding vocabulary", dropped)
        target_matrix = _normalize_rows(
            np.vstack([embeddings.vector(t) for t in target_list])
        ) if target_list else np.zeros((0, embeddings.dim))
        if not resolved:
            logger.warning("no source tag resolved; all targets score 0")
            values = np.zeros(len(target_list))
        else:
            source_matrix = _normalize_rows(np.vstack([embeddings.vector(s) for s in resolved]))
            similarities = source_matrix @ target_matrix.T
            values = similarities.sum(axis=0)
            if scorer == "avg":
                values = values / len(resolved)

    scores = {tag: float(value) for tag, value in zip(target_list, values)}
    ranking = sorted(scores, key=lambda tag: (-scores[tag], tag))
    return TranslationResult(scores=scores, ranking=ranking)
