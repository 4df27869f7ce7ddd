"""Graph-constrained embedding refinement.

Minimizes a convex objective that keeps each concept close to its initial
embedding (weighted alpha) while pulling graph neighbors together (weighted
beta), via a simultaneous Jacobi-style fixed-point iteration. Two coefficient
schemes are supported: "uniform" (every edge weighted 1/degree, the original
formulation) and "typed" (equivalence edges weighted 1, all other relations
1/degree). A direct sparse-linear solve of the stationarity system serves as
an oracle for the iterative path.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .compose import ConceptEmbeddingMatrix
from .genregraph import EQUIVALENCE_RELATIONS, GenreGraph

logger = logging.getLogger(__name__)

SCHEMES = ("uniform", "typed")


class ZeroDenominatorError(ValueError):
    """A node has neither an anchor weight nor a neighbor, so its update is undefined."""


class SingularSystemError(ValueError):
    """The stationarity system has no unique solution (an unanchored component)."""


@dataclass(frozen=True)
class RetrofitConfig:
    scheme: str = "typed"
    alpha_known: float = 1.0
    alpha_unknown: float = 0.0
    max_iters: int = 100
    tolerance: float = 1e-5

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.alpha_known <= 0:
            raise ValueError("alpha_known must be positive")
        if self.alpha_unknown < 0:
            raise ValueError("alpha_unknown must be nonnegative")
        if self.max_iters < 1:
            raise ValueError("max_iters must be a positive integer")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


@dataclass
class RetrofitResult:
    matrix: ConceptEmbeddingMatrix
    iterations: int
    final_delta: float
    pinned: tuple[str, ...]
    deltas: tuple[float, ...]


@dataclass
class _System:
    """Precomputed update coefficients aligned to the concept order."""

    concepts: list[str]
    alpha: np.ndarray       # n, anchor weights
    rows: np.ndarray        # directed entry endpoints (both orientations)
    cols: np.ndarray
    weights: np.ndarray     # symmetric pair weight beta_ij + beta_ji per entry
    pair_rows: np.ndarray   # one entry per unordered pair
    pair_cols: np.ndarray
    pair_weights: np.ndarray
    denominator: np.ndarray  # n, alpha + sum of pair weights at each node


def _check_alignment(q: ConceptEmbeddingMatrix, q_hat: ConceptEmbeddingMatrix, graph: GenreGraph) -> None:
    if q.concepts != q_hat.concepts:
        raise ValueError("matrices are not aligned to the same concept list")
    if q.vectors.shape != q_hat.vectors.shape:
        raise ValueError(f"matrix shapes differ: {q.vectors.shape} vs {q_hat.vectors.shape}")
    if set(q.concepts) != set(graph.nodes) or len(q.concepts) != graph.node_count:
        raise ValueError("concept list does not match the graph node set")


def _build_system(q_hat: ConceptEmbeddingMatrix, graph: GenreGraph, cfg: RetrofitConfig) -> _System:
    concepts = list(q_hat.concepts)
    index = {cid: i for i, cid in enumerate(concepts)}
    n = len(concepts)
    alpha = np.where(q_hat.known, cfg.alpha_known, cfg.alpha_unknown).astype(np.float64)

    pair_rows: list[int] = []
    pair_cols: list[int] = []
    pair_weights: list[float] = []
    # Iterate pairs in sorted id order so floating-point accumulation is fixed.
    for (a, b), relations in sorted(graph.undirected_relations().items()):
        ia, ib = index[a], index[b]
        deg_a, deg_b = graph.degree(a), graph.degree(b)
        beta_ab = 0.0
        beta_ba = 0.0
        for relation in sorted(relations):
            if cfg.scheme == "typed" and relation in EQUIVALENCE_RELATIONS:
                beta_ab += 1.0
                beta_ba += 1.0
            else:
                beta_ab += 1.0 / deg_a
                beta_ba += 1.0 / deg_b
        pair_rows.append(ia)
        pair_cols.append(ib)
        pair_weights.append(beta_ab + beta_ba)

    p_rows = np.asarray(pair_rows, dtype=np.intp)
    p_cols = np.asarray(pair_cols, dtype=np.intp)
    p_weights = np.asarray(pair_weights, dtype=np.float64)
    rows = np.concatenate([p_rows, p_cols])
    cols = np.concatenate([p_cols, p_rows])
    weights = np.concatenate([p_weights, p_weights])
    weight_sums = np.bincount(rows, weights=weights, minlength=n) if rows.size else np.zeros(n)
    return _System(
        concepts=concepts,
        alpha=alpha,
        rows=rows,
        cols=cols,
        weights=weights,
        pair_rows=p_rows,
        pair_cols=p_cols,
        pair_weights=p_weights,
        denominator=alpha + weight_sums,
    )


def objective(
    q: ConceptEmbeddingMatrix,
    q_hat: ConceptEmbeddingMatrix,
    graph: GenreGraph,
    cfg: RetrofitConfig,
) -> float:
    """Value of the refinement objective at Q.

    Sum over concepts of the anchored squared distance to the initial
    embedding plus, over every related pair in both orientations, the
    weighted squared distance between the pair's current embeddings.
    """
    _check_alignment(q, q_hat, graph)
    system = _build_system(q_hat, graph, cfg)
    anchor = float(np.sum(system.alpha * np.sum((q.vectors - q_hat.vectors) ** 2, axis=1)))
    if system.pair_rows.size == 0:
        return anchor
    diffs = q.vectors[system.pair_rows] - q.vectors[system.pair_cols]
    smoothness = float(np.sum(system.pair_weights * np.sum(diffs ** 2, axis=1)))
    return anchor + smoothness


def objective_gradient(
    q: ConceptEmbeddingMatrix,
    q_hat: ConceptEmbeddingMatrix,
    graph: GenreGraph,
    cfg: RetrofitConfig,
) -> np.ndarray:
    """Analytic gradient of :func:`objective` with respect to Q, shape (n, d)."""
    _check_alignment(q, q_hat, graph)
    system = _build_system(q_hat, graph, cfg)
    grad = 2.0 * system.alpha[:, None] * (q.vectors - q_hat.vectors)
    if system.rows.size:
        diffs = q.vectors[system.rows] - q.vectors[system.cols]
        np.add.at(grad, system.rows, 2.0 * system.weights[:, None] * diffs)
    return grad


def _sweep(current: np.ndarray, anchor_term: np.ndarray, system: _System, denominator: np.ndarray) -> np.ndarray:
    aggregated = np.zeros_like(current)
    if system.rows.size:
        np.add.at(aggregated, system.rows, system.weights[:, None] * current[system.cols])
    return (aggregated + anchor_term) / denominator[:, None]


def update_step(
    q: ConceptEmbeddingMatrix,
    q_hat: ConceptEmbeddingMatrix,
    graph: GenreGraph,
    cfg: RetrofitConfig,
) -> tuple[ConceptEmbeddingMatrix, float]:
    """One simultaneous fixed-point sweep: all new vectors from the old Q.

    Returns the updated matrix and the largest per-node displacement.
    Raises :class:`ZeroDenominatorError` for a node with no anchor weight
    and no neighbors.
    """
    _check_alignment(q, q_hat, graph)
    system = _build_system(q_hat, graph, cfg)
    dead = np.flatnonzero(system.denominator == 0.0)
    if dead.size:
        raise ZeroDenominatorError(
            f"node {system.concepts[dead[0]]!r} has no anchor weight and no neighbors"
        )
    anchor_term = system.alpha[:, None] * q_hat.vectors
    updated = _sweep(q.vectors, anchor_term, system, system.denominator)
    delta = _max_displacement(updated, q.vectors)
    return q.copy_with(vectors=updated), delta


def _max_displacement(new: np.ndarray, old: np.ndarray) -> float:
    if new.shape[0] == 0:
        return 0.0
    return float(np.max(np.linalg.norm(new - old, axis=1)))


def retrofit(
    q_hat: ConceptEmbeddingMatrix,
    graph: GenreGraph,
    cfg: RetrofitConfig | None = None,
) -> RetrofitResult:
    """Iterate the fixed-point update from Q = Q-hat until convergence.

    Convergence is reached when the largest per-node displacement falls to
    the configured tolerance, or after max_iters sweeps. Nodes with no
    anchor weight and no neighbors are pinned at their initial vector and
    reported instead of raising. The returned known flags mark every concept
    whose final vector is nonzero as usable.
    """
    cfg = cfg or RetrofitConfig()
    _check_alignment(q_hat, q_hat, graph)
    system = _build_system(q_hat, graph, cfg)

    pinned_mask = system.denominator == 0.0
    pinned = tuple(system.concepts[i] for i in np.flatnonzero(pinned_mask))
    if pinned:
        logger.warning("%d isolated unanchored nodes pinned at their initial vectors", len(pinned))
    for component in graph.connected_components():
        indices = [q_hat.index_of(cid) for cid in component]
        if np.all(system.alpha[indices] == 0.0) and len(component) > 1:
            logger.warning(
                "component of %d nodes (e.g. %r) has no anchored concept; "
                "its vectors settle on neighbor averages of their initial values",
                len(component), min(component),
            )

    denominator = np.where(pinned_mask, 1.0, system.denominator)
    anchor_term = system.alpha[:, None] * q_hat.vectors
    current = q_hat.vectors.copy()
    trace = logger.isEnabledFor(logging.DEBUG)
    deltas: list[float] = []
    iterations = 0
    delta = 0.0
    for iteration in range(1, cfg.max_iters + 1):
        updated = _sweep(current, anchor_term, system, denominator)
        if pinned:
            updated[pinned_mask] = current[pinned_mask]
        delta = _max_displacement(updated, current)
        deltas.append(delta)
        iterations = iteration
        current = updated
        if trace:
            value = objective(q_hat.copy_with(vectors=current), q_hat, graph, cfg)
            logger.debug("iteration %d: delta=%.3e objective=%.6e", iteration, delta, value)
        if delta <= cfg.tolerance:
            break
    known = q_hat.known | np.any(current != 0.0, axis=1)
    matrix = ConceptEmbeddingMatrix(concepts=list(q_hat.concepts), vectors=current, known=known)
    return RetrofitResult(
        matrix=matrix,
        iterations=iterations,
        final_delta=delta,
        pinned=pinned,
        deltas=tuple(deltas),
    )


def solve_direct(
    q_hat: ConceptEmbeddingMatrix,
    graph: GenreGraph,
    cfg: RetrofitConfig | None = None,
) -> ConceptEmbeddingMatrix:
    """Solve the stationarity system of the objective exactly.

    Per node, the minimizer satisfies
    (alpha_i + sum_j w_ij) q_i - sum_j w_ij q_j = alpha_i q-hat_i, a linear
    system solved densely per dimension. Used as an oracle for
    :func:`retrofit`. Raises :class:`SingularSystemError` when some connected
    component carries no anchor weight.
    """
    cfg = cfg or RetrofitConfig()
    _check_alignment(q_hat, q_hat, graph)
    system = _build_system(q_hat, graph, cfg)
    for component in graph.connected_components():
        indices = [q_hat.index_of(cid) for cid in component]
        if np.all(system.alpha[indices] == 0.0):
            raise SingularSystemError(
                f"component containing {min(component)!r} has no anchor weight; system is singular"
            )
    n = len(system.concepts)
    matrix = np.zeros((n, n))
    np.fill_diagonal(matrix, system.denominator)
    matrix[system.rows, system.cols] -= system.weights
    rhs = system.alpha[:, None] * q_hat.vectors
    try:
        solution = np.linalg.solve(matrix, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from None
    known = q_hat.known | np.any(solution != 0.0, axis=1)
    return ConceptEmbeddingMatrix(concepts=list(q_hat.concepts), vectors=solution, known=known)
