"""Translation experiments: stratified folds, ranking AUC, and aggregation.

Items annotated under several tag systems are split into stratified folds;
each fold's items are translated from the source systems into the target
system, and per-target-tag AUC is macro-averaged per fold and summarized
with mean and population standard deviation over folds.
"""

from __future__ import annotations

import json
import logging
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import IO, Callable, Iterable, Sequence

import numpy as np

from ._lines import iter_lines
from .compose import ConceptEmbeddingMatrix
from .genregraph import GenreGraph, tag_node_id
from .translate import translate

logger = logging.getLogger(__name__)

DEFAULT_MIN_TAG_COUNT = 16


class CorpusFormatError(ValueError):
    """A corpus stream violates the JSON-lines item format."""


@dataclass
class CorpusItem:
    id: str
    annotations: dict[str, tuple[str, ...]]  # system -> deduplicated tags

    def tags(self, system: str) -> tuple[str, ...]:
        return self.annotations.get(system, ())


@dataclass
class ParallelCorpus:
    """Music items annotated with tags from two or more named systems."""

    items: list[CorpusItem]
    systems: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.items)

    def system_vocabulary(self, system: str) -> list[str]:
        """Sorted distinct tags of one system across the corpus."""
        return sorted({tag for item in self.items for tag in item.tags(system)})

    def tag_counts(self) -> dict[tuple[str, str], int]:
        counts: dict[tuple[str, str], int] = {}
        for item in self.items:
            for system, tags in item.annotations.items():
                for tag in tags:
                    key = (system, tag)
                    counts[key] = counts.get(key, 0) + 1
        return counts


def load_corpus(
    source: str | os.PathLike | IO | Iterable[str],
    min_tag_count: int = DEFAULT_MIN_TAG_COUNT,
) -> ParallelCorpus:
    """Read items from JSON lines of {"id": ..., "annotations": {system: [tags]}}.

    Items annotated in fewer than two systems are dropped with a warning.
    Items carrying any tag observed fewer than `min_tag_count` times in the
    loaded corpus are then filtered out in one pass (counts taken before
    filtering); pass 0 or 1 to disable.
    """
    items: list[CorpusItem] = []
    seen_ids: set[str] = set()
    thin = 0
    for lineno, line in enumerate(iter_lines(source), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(f"corpus line {lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(record, dict) or "id" not in record or "annotations" not in record:
            raise CorpusFormatError(f"corpus line {lineno}: expected an object with 'id' and 'annotations'")
        item_id = record["id"]
        raw_annotations = record["annotations"]
        if not isinstance(item_id, str) or not item_id:
            raise CorpusFormatError(f"corpus line {lineno}: invalid item id {item_id!r}")
        if item_id in seen_ids:
            raise CorpusFormatError(f"corpus line {lineno}: duplicate item id {item_id!r}")
        if not isinstance(raw_annotations, dict):
            raise CorpusFormatError(f"corpus line {lineno}: annotations must be an object")
        seen_ids.add(item_id)
        annotations: dict[str, tuple[str, ...]] = {}
        for system, tags in raw_annotations.items():
            if not isinstance(tags, list) or not all(isinstance(t, str) and t for t in tags):
                raise CorpusFormatError(f"corpus line {lineno}: tags of {system!r} must be nonempty strings")
            deduped = tuple(dict.fromkeys(tags))
            if deduped:
                annotations[system] = deduped
        if len(annotations) < 2:
            thin += 1
            continue
        items.append(CorpusItem(id=item_id, annotations=annotations))
    if thin:
        logger.warning("dropped %d items annotated in fewer than two systems", thin)

    if min_tag_count > 1 and items:
        counts: dict[tuple[str, str], int] = {}
        for item in items:
            for system, tags in item.annotations.items():
                for tag in tags:
                    counts[(system, tag)] = counts.get((system, tag), 0) + 1
        kept = [
            item for item in items
            if all(counts[(system, tag)] >= min_tag_count
                   for system, tags in item.annotations.items() for tag in tags)
        ]
        if len(kept) != len(items):
            logger.info("minimum tag count %d removed %d items", min_tag_count, len(items) - len(kept))
        items = kept

    systems = tuple(dict.fromkeys(system for item in items for system in item.annotations))
    return ParallelCorpus(items=items, systems=systems)


@dataclass
class FoldAssignment:
    k: int
    assignment: dict[str, int]  # item id -> fold index

    def fold_of(self, item_id: str) -> int:
        return self.assignment[item_id]

    def items_in(self, fold: int) -> list[str]:
        return sorted(item_id for item_id, f in self.assignment.items() if f == fold)


def stratified_split(corpus: ParallelCorpus, k: int = 4, seed: int = 0) -> FoldAssignment:
    """Iterative stratification of the multi-label corpus into k folds.

    Repeatedly takes the label (system:tag pair) with the fewest unassigned
    items and deals those items to the fold with the greatest remaining
    demand for that label; ties go to the fold with the greatest remaining
    capacity, then to a seeded random choice. Balances both per-label counts
    and overall fold sizes.
    """
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    if k > len(corpus.items):
        raise ValueError(f"k={k} exceeds the number of items ({len(corpus.items)})")
    rng = random.Random(seed)
    item_order = [item.id for item in corpus.items]
    labels_of: dict[str, list[str]] = {}
    for item in corpus.items:
        labels_of[item.id] = sorted({
            tag_node_id(system, tag)
            for system, tags in item.annotations.items() for tag in tags
        })

    remaining: dict[str, set[str]] = {}
    for item_id, labels in labels_of.items():
        for label in labels:
            remaining.setdefault(label, set()).add(item_id)
    demand = {label: [len(ids) / k] * k for label, ids in remaining.items()}
    capacity = [len(corpus.items) / k] * k
    assignment: dict[str, int] = {}

    while remaining:
        label = min(remaining, key=lambda l: (len(remaining[l]), l))
        for item_id in [i for i in item_order if i in remaining[label]]:
            wants = demand[label]
            best = max(wants)
            candidates = [f for f in range(k) if wants[f] == best]
            if len(candidates) > 1:
                roomiest = max(capacity[f] for f in candidates)
                candidates = [f for f in candidates if capacity[f] == roomiest]
            fold = candidates[0] if len(candidates) == 1 else rng.choice(candidates)
            assignment[item_id] = fold
            capacity[fold] -= 1
            for other in labels_of[item_id]:
                demand[other][fold] -= 1
                remaining[other].discard(item_id)
        remaining = {label: ids for label, ids in remaining.items() if ids}

    for item_id in item_order:  # items with no labels cannot occur, but stay safe
        if item_id not in assignment:
            fold = max(range(k), key=lambda f: (capacity[f], -f))
            assignment[item_id] = fold
            capacity[fold] -= 1
    return FoldAssignment(k=k, assignment=assignment)


def auc_binary(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Ranking AUC via the rank-sum statistic with half credit for ties.

    Equals the fraction of (positive, negative) pairs where the positive
    outscores the negative, counting ties as half a win. Undefined (raises)
    when the labels are all positive or all negative.
    """
    scores = list(scores)
    labels = list(labels)
    if len(scores) != len(labels):
        raise ValueError("scores and labels must have the same length")
    positives = 0
    negatives = 0
    for label in labels:
        if label == 1:
            positives += 1
        elif label == 0:
            negatives += 1
        else:
            raise ValueError(f"labels must be 0 or 1, got {label!r}")
    if positives == 0 or negatives == 0:
        raise ValueError("AUC undefined: needs at least one positive and one negative label")

    n = len(scores)
    order = sorted(range(n), key=scores.__getitem__)
    rank_sum = 0.0
    i = 0
    while i < n:
        j = i
        value = scores[order[i]]
        while j + 1 < n and scores[order[j + 1]] == value:
            j += 1
        average_rank = (i + j + 2) / 2  # 1-based average over the tie group
        for position in range(i, j + 1):
            if labels[order[position]] == 1:
                rank_sum += average_rank
        i = j + 1
    wins = rank_sum - positives * (positives + 1) / 2
    return wins / (positives * negatives)


@dataclass
class EvalReport:
    target_system: str
    source_systems: tuple[str, ...]
    scorer: str
    fold_aucs: tuple[float, ...]
    mean_auc: float
    std_auc: float
    per_tag: dict[str, tuple[float | None, ...]]  # tag -> per-fold AUC, None when degenerate
    items_per_fold: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "target_system": self.target_system,
            "source_systems": list(self.source_systems),
            "scorer": self.scorer,
            "fold_aucs": list(self.fold_aucs),
            "mean_auc": self.mean_auc,
            "std_auc": self.std_auc,
            "items_per_fold": list(self.items_per_fold),
            "per_tag": {tag: list(values) for tag, values in self.per_tag.items()},
        }

    def render_table(self) -> str:
        lines = [
            f"translation {' + '.join(self.source_systems)} -> {self.target_system} ({self.scorer})",
            "fold  items  macro-AUC",
        ]
        for fold, (auc, count) in enumerate(zip(self.fold_aucs, self.items_per_fold)):
            lines.append(f"{fold:>4}  {count:>5}  {auc:9.4f}")
        lines.append(f"mean  {self.mean_auc:.4f} +/- {self.std_auc:.4f}")
        return "\n".join(lines)


def evaluate(
    corpus: ParallelCorpus,
    folds: FoldAssignment,
    target_system: str,
    source_systems: Sequence[str],
    scorer: str | Callable[[CorpusItem, str], float] = "avg",
    embeddings: ConceptEmbeddingMatrix | None = None,
    graph: GenreGraph | None = None,
    threads: int = 1,
) -> EvalReport:
    """Run the cross-system translation experiment over the folds.

    Each evaluated item (one with at least one source-system tag and one
    target-system tag) gets a score for every target-system tag; per fold,
    each tag with both a positive and a negative item yields an AUC, and
    the fold's macro average runs over those tags. Tags degenerate in a fold
    are excluded from its average. `scorer` is "sum", "avg", or "baseline",
    or a callable (item, target_tag) -> float for custom scoring.
    """
    source_systems = list(source_systems)
    if target_system in source_systems:
        raise ValueError(f"target system {target_system!r} cannot also be a source")
    vocabulary = corpus.system_vocabulary(target_system)
    if not vocabulary:
        raise ValueError(f"no tags observed for target system {target_system!r}")
    target_ids = [tag_node_id(target_system, tag) for tag in vocabulary]

    eligible = [
        item for item in corpus.items
        if item.tags(target_system) and any(item.tags(s) for s in source_systems)
    ]

    if callable(scorer):
        scorer_name = getattr(scorer, "__name__", "custom")

        def item_scores(item: CorpusItem) -> np.ndarray:
            return np.array([float(scorer(item, tag)) for tag in vocabulary])
    else:
        scorer_name = scorer

        def item_scores(item: CorpusItem) -> np.ndarray:
            sources = sorted({
                tag_node_id(system, tag)
                for system in source_systems for tag in item.tags(system)
            })
            result = translate(sources, target_ids, embeddings=embeddings, scorer=scorer, graph=graph)
            return np.array([result.scores[tid] for tid in target_ids])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            score_rows = list(pool.map(item_scores, eligible))
        scores_by_item = {item.id: row for item, row in zip(eligible, score_rows)}
    else:
        scores_by_item = {item.id: item_scores(item) for item in eligible}

    fold_aucs: list[float] = []
    items_per_fold: list[int] = []
    per_tag: dict[str, list[float | None]] = {tag: [] for tag in vocabulary}
    for fold in range(folds.k):
        members = [item for item in eligible if folds.fold_of(item.id) == fold]
        items_per_fold.append(len(members))
        tag_aucs: list[float] = []
        for column, tag in enumerate(vocabulary):
            labels = [1 if tag in item.tags(target_system) else 0 for item in members]
            positives = sum(labels)
            if positives == 0 or positives == len(labels):
                per_tag[tag].append(None)
                continue
            value = auc_binary([scores_by_item[item.id][column] for item in members], labels)
            per_tag[tag].append(value)
            tag_aucs.append(value)
        if not tag_aucs:
            raise ValueError(f"fold {fold}: no qualifying target tag (need a positive and a negative item)")
        fold_aucs.append(sum(tag_aucs) / len(tag_aucs))

    return EvalReport(
        target_system=target_system,
        source_systems=tuple(source_systems),
        scorer=scorer_name,
        fold_aucs=tuple(fold_aucs),
        mean_auc=float(np.mean(fold_aucs)),
        std_auc=float(np.std(fold_aucs)),
        per_tag={tag: tuple(values) for tag, values in per_tag.items()},
        items_per_fold=tuple(items_per_fold),
    )
