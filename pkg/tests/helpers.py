"""Shared fixture builders for the test suite."""

from __future__ import annotations

import io
import random

import numpy as np

from genrevec.compose import ConceptEmbeddingMatrix
from genrevec.evaluation import CorpusItem, ParallelCorpus
from genrevec.genregraph import RELATIONS, GenreGraph, GenreNode
from genrevec.wordvec import WordVectorStore, load_vectors


def make_store(entries: list[tuple[str, list[float]]]) -> WordVectorStore:
    """Store from (word, vector) pairs, ranks in list order."""
    dim = len(entries[0][1])
    lines = [f"{len(entries)} {dim}"]
    for word, vector in entries:
        lines.append(word + " " + " ".join(str(x) for x in vector))
    return load_vectors(io.StringIO("\n".join(lines) + "\n"))


FIXTURE_STORE_ENTRIES = [
    ("rock", [1.0, 0.0, 0.0]),
    ("pop", [0.0, 1.0, 0.0]),
    ("dance", [1.0, 0.0, 0.0]),
    ("jazz", [0.0, 0.0, 1.0]),
]


def fixture_store() -> WordVectorStore:
    return make_store(FIXTURE_STORE_ENTRIES)


def bare_graph(node_ids: list[str], edges: list[tuple[str, str, str]], language: str = "en") -> GenreGraph:
    """Graph with synthetic single-token nodes, for retrofit/path tests."""
    graph = GenreGraph()
    for node_id in node_ids:
        token = "".join(ch for ch in node_id.lower() if ch.isalnum()) or "x"
        graph.add_node(GenreNode(id=node_id, language=language, raw_label=node_id, tokens=(token,)))
    for src, dst, relation in edges:
        graph.add_edge(src, dst, relation)
    return graph


def random_instance(seed: int, max_nodes: int = 50, max_dim: int = 8, unknown_fraction: float = 0.2):
    """Random connected graph + initial matrix for retrofit oracle sweeps.

    Connected by construction (random spanning tree plus extra edges) with at
    least one known concept, so the stationarity system is nonsingular.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, max_nodes + 1))
    d = int(rng.integers(1, max_dim + 1))
    ids = [f"n{i:02d}" for i in range(n)]
    relations = sorted(RELATIONS)
    edges = []
    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges.append((ids[i], ids[j], relations[int(rng.integers(len(relations)))]))
    for _ in range(int(rng.integers(0, n))):
        i, j = rng.choice(n, size=2, replace=False)
        edges.append((ids[int(i)], ids[int(j)], relations[int(rng.integers(len(relations)))]))
    graph = bare_graph(ids, edges)

    known = rng.random(n) >= unknown_fraction
    if not known.any():
        known[0] = True
    vectors = rng.normal(size=(n, d))
    vectors[~known] = 0.0
    matrix = ConceptEmbeddingMatrix(concepts=ids, vectors=vectors, known=known)
    return graph, matrix


def _zipf_pick(rng: random.Random, tags: list[str], count: int) -> list[str]:
    """Distinct tags drawn with probability roughly proportional to 1/(index+1)."""
    weights = [1.0 / (i + 1) for i in range(len(tags))]
    chosen: list[str] = []
    while len(chosen) < count:
        tag = rng.choices(tags, weights=weights, k=1)[0]
        if tag not in chosen:
            chosen.append(tag)
    return chosen


def synthetic_corpus(
    n_items: int,
    seed: int = 0,
    source_system: str = "src",
    target_system: str = "tgt",
    n_source_tags: int = 12,
    n_target_tags: int = 8,
) -> ParallelCorpus:
    """Two-system corpus with Zipf-like tag frequencies, 1-3 tags per system."""
    rng = random.Random(seed)
    source_tags = [f"s{i:02d}" for i in range(n_source_tags)]
    target_tags = [f"t{i:02d}" for i in range(n_target_tags)]
    items = []
    for index in range(n_items):
        items.append(CorpusItem(
            id=f"item{index:04d}",
            annotations={
                source_system: tuple(_zipf_pick(rng, source_tags, rng.randint(1, 3))),
                target_system: tuple(_zipf_pick(rng, target_tags, rng.randint(1, 3))),
            },
        ))
    return ParallelCorpus(items=items, systems=(source_system, target_system))


def paired_corpus(n_items: int, seed: int = 0, n_pairs: int = 10) -> ParallelCorpus:
    """Corpus whose source and target tags come in correlated pairs.

    Each item carries one source tag and its paired target tag (2*n_pairs
    distinct tags overall, Zipf-like counts), so per-label fold balance
    within one item is always achievable.
    """
    rng = random.Random(seed)
    weights = [1.0 / (i + 1) for i in range(n_pairs)]
    items = []
    for index in range(n_items):
        pair = rng.choices(range(n_pairs), weights=weights, k=1)[0]
        items.append(CorpusItem(
            id=f"item{index:04d}",
            annotations={"src": (f"s{pair:02d}",), "tgt": (f"t{pair:02d}",)},
        ))
    return ParallelCorpus(items=items, systems=("src", "tgt"))
