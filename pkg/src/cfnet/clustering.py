"""Spectral partitioning of the interference graph with temporal smoothing.

The pipeline blends the current and previous graph Laplacians, embeds the
vertices with the eigenvectors of the blend, and clusters the embedded rows
with seeded k-means.  alpha = 1 reduces to plain per-instant spectral
clustering; alpha = 0 keeps optimizing against the previous graph.
"""

from dataclasses import dataclass

import numpy as np

from .graph import AffinityGraph


@dataclass
class SpectralConfig:
    alpha: float                 # blend weight on the current graph, in [0, 1]
    M: int                       # number of subnetworks
    kmeans_restarts: int = 10
    kmeans_max_iters: int = 100
    kmeans_tol: float = 1e-9     # relative SSE change that counts as converged
    seed: "int | np.random.SeedSequence" = 0

    def validate(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.M < 1:
            raise ValueError("need at least one subnetwork")
        if self.kmeans_restarts < 1 or self.kmeans_max_iters < 1 or self.kmeans_tol < 0:
            raise ValueError("bad k-means settings")


@dataclass
class Partition:
    """Assignment of the L BS vertices (and through them, users) to subnetworks."""

    vertex_labels: np.ndarray   # (L,) values in {0..M-1}, every label present
    M: int
    user_assignment: np.ndarray  # (K,) label of each user's anchor vertex

    @classmethod
    def from_vertex_labels(cls, labels, M: int, anchor) -> "Partition":
        labels = np.asarray(labels, dtype=np.int64)
        anchor = np.asarray(anchor, dtype=np.int64)
        if labels.ndim != 1 or labels.shape[0] < 1:
            raise ValueError("vertex labels must be a nonempty vector")
        if M < 1 or labels.min() < 0 or labels.max() >= M:
            raise ValueError("vertex labels out of range")
        if np.any(np.bincount(labels, minlength=M) == 0):
            raise ValueError("every subnetwork needs at least one base station")
        return cls(vertex_labels=labels, M=M, user_assignment=labels[anchor])

    @property
    def num_vertices(self) -> int:
        return self.vertex_labels.shape[0]

    @property
    def num_users(self) -> int:
        return self.user_assignment.shape[0]

    def connection_matrix(self) -> np.ndarray:
        """(K, L) boolean matrix: user k is served by every BS sharing its label."""
        return self.vertex_labels[None, :] == self.user_assignment[:, None]

    def connections(self) -> set:
        """The served (user, bs) pairs as a set of tuples."""
        ks, ls = np.nonzero(self.connection_matrix())
        return set(zip(ks.tolist(), ls.tolist()))


def blended_laplacian(lap_t: np.ndarray, lap_prev: np.ndarray, alpha: float) -> np.ndarray:
    """Convex combination alpha * lap_t + (1 - alpha) * lap_prev.

    The endpoints and the equal-input case return an exact copy of the
    corresponding operand, so downstream eigendecompositions see bitwise
    identical matrices in those cases.
    """
    if lap_t.shape != lap_prev.shape:
        raise ValueError("laplacians must share the same vertex set")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if alpha == 1.0:
        return lap_t.copy()
    if alpha == 0.0:
        return lap_prev.copy()
    if lap_t is lap_prev or np.array_equal(lap_t, lap_prev):
        return lap_t.copy()
    return alpha * lap_t + (1.0 - alpha) * lap_prev


def smallest_eigenvectors(matrix: np.ndarray, count: int) -> np.ndarray:
    """Orthonormal eigenvectors of the `count` smallest eigenvalues, ascending.

    Rejects inputs whose asymmetry exceeds 1e-9 relative to the largest entry.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    if not 1 <= count <= a.shape[0]:
        raise ValueError("eigenvector count out of range")
    scale = max(1.0, float(np.abs(a).max()))
    if float(np.abs(a - a.T).max()) > 1e-9 * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    _, vecs = np.linalg.eigh(a)
    return vecs[:, :count]


def _kmeans_pp_centers(rows: np.ndarray, M: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding; all draws go through `rng` index choices."""
    n = rows.shape[0]
    centers = np.empty((M, rows.shape[1]))
    centers[0] = rows[int(rng.integers(n))]
    d2 = ((rows - centers[0]) ** 2).sum(axis=1)
    for m in range(1, M):
        total = d2.sum()
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))  # all remaining rows coincide with a center
        centers[m] = rows[idx]
        d2 = np.minimum(d2, ((rows - centers[m]) ** 2).sum(axis=1))
    return centers


def _lloyd(rows: np.ndarray, M: int, rng: np.random.Generator,
           max_iters: int, tol: float):
    n = rows.shape[0]
    centers = _kmeans_pp_centers(rows, M, rng)
    labels = np.zeros(n, dtype=np.int64)
    sse_prev = np.inf
    sse = np.inf
    for _ in range(max_iters):
        d2 = ((rows[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(d2, axis=1)
        counts = np.bincount(labels, minlength=M)
        # an emptied cluster steals the point lying farthest from its own
        # centroid, skipping singletons so no other cluster is emptied
        for m in np.flatnonzero(counts == 0):
            fit = d2[np.arange(n), labels].copy()
            fit[counts[labels] <= 1] = -1.0
            worst = int(np.argmax(fit))
            counts[labels[worst]] -= 1
            labels[worst] = m
            counts[m] = 1
        for m in range(M):
            centers[m] = rows[labels == m].mean(axis=0)
        sse = float(((rows - centers[labels]) ** 2).sum())
        if np.isfinite(sse_prev) and abs(sse_prev - sse) <= tol * max(sse_prev, 1e-12):
            break
        sse_prev = sse
    return labels, sse


def _restart_seed(root: np.random.SeedSequence, restart: int) -> np.random.SeedSequence:
    # stateless spawn so repeated calls with the same config replay exactly
    return np.random.SeedSequence(entropy=root.entropy,
                                  spawn_key=root.spawn_key + (restart,))


def kmeans_rows(rows: np.ndarray, M: int, restarts: int = 10, max_iters: int = 100,
                tol: float = 1e-9, seed=0) -> np.ndarray:
    """Cluster rows into M nonempty groups, best of `restarts` k-means++ runs.

    Each restart runs Lloyd iterations to convergence (relative SSE change
    below `tol`) or `max_iters`; the run with the lowest SSE wins and ties
    keep the earliest restart.  Deterministic given (rows, seed).
    """
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2:
        raise ValueError("expected a 2-d row matrix")
    if not 1 <= M <= rows.shape[0]:
        raise ValueError("cluster count must lie in [1, number of rows]")
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    best_labels, best_sse = None, np.inf
    for r in range(restarts):
        rng = np.random.default_rng(_restart_seed(root, r))
        labels, sse = _lloyd(rows, M, rng, max_iters, tol)
        if sse < best_sse:
            best_labels, best_sse = labels, sse
    return best_labels


def _cluster_laplacian(lap: np.ndarray, anchor: np.ndarray, cfg: SpectralConfig) -> Partition:
    embedding = smallest_eigenvectors(lap, cfg.M)
    labels = kmeans_rows(embedding, cfg.M, restarts=cfg.kmeans_restarts,
                         max_iters=cfg.kmeans_max_iters, tol=cfg.kmeans_tol,
                         seed=cfg.seed)
    return Partition.from_vertex_labels(labels, cfg.M, anchor)


def spectral_partition(graph: AffinityGraph, cfg: SpectralConfig) -> Partition:
    """Plain per-instant spectral partition of a single graph (no history)."""
    cfg.validate()
    return _cluster_laplacian(graph.laplacian, graph.anchor, cfg)


def temporal_smoothed_partition(graph_prev: AffinityGraph, graph_t: AffinityGraph,
                                cfg: SpectralConfig) -> Partition:
    """Partition the current step's graph, pulled toward the previous step's.

    Embeds the vertices with the eigenvectors of the blended Laplacian and
    clusters the embedded rows; vertex labels carry over to users through the
    current anchor map.
    """
    cfg.validate()
    if graph_prev.num_vertices != graph_t.num_vertices:
        raise ValueError("graphs must cover the same base stations")
    blend = blended_laplacian(graph_t.laplacian, graph_prev.laplacian, cfg.alpha)
    return _cluster_laplacian(blend, graph_t.anchor, cfg)


def initial_partition(graph_0: AffinityGraph, cfg: SpectralConfig) -> Partition:
    """Bootstrap partition for the first time step (no history yet)."""
    return temporal_smoothed_partition(graph_0, graph_0, cfg)
