"""Vocabulary construction: seeded k-means over alphabet-space vectors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, DimensionMismatchError, NonFiniteDataError


@dataclass(frozen=True)
class CentroidSet:
    """Fitted vocabulary: centroid matrix plus fit diagnostics.

    ``inertia_trace`` records the total squared assignment distance after
    initialization and after every Lloyd update; it is non-increasing.
    """

    centroids: np.ndarray  # (V, A)
    inertia: float
    iterations_run: int
    inertia_trace: tuple[float, ...] = field(default=(), repr=False)

    @property
    def size(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]


def _squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """(n, V) matrix of squared Euclidean distances."""
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("nvd,nvd->nv", diff, diff)


def _plusplus_init(points: np.ndarray, v: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ D^2 sampling; falls back to unchosen rows on zero mass."""
    n = points.shape[0]
    centroids = np.empty((v, points.shape[1]), dtype=np.float64)
    chosen = np.zeros(n, dtype=bool)

    first = int(rng.integers(n))
    centroids[0] = points[first]
    chosen[first] = True
    dist_sq = ((points - centroids[0]) ** 2).sum(axis=1)

    for j in range(1, v):
        total = float(dist_sq.sum())
        if total > 0.0:
            idx = int(rng.choice(n, p=dist_sq / total))
        else:
            # All remaining mass is zero (duplicate points): take the first
            # row not already used so centroid indices stay deterministic.
            idx = int(np.flatnonzero(~chosen)[0])
        centroids[j] = points[idx]
        chosen[idx] = True
        dist_sq = np.minimum(dist_sq, ((points - centroids[j]) ** 2).sum(axis=1))
    return centroids


def fit_kmeans(
    points: np.ndarray,
    v: int,
    seed: int,
    max_iter: int = 300,
    tol: float = 1e-6,
) -> CentroidSet:
    """Lloyd's algorithm with seeded k-means++ initialization.

    Stops when the largest centroid shift drops below ``tol`` or after
    ``max_iter`` updates. Clusters that lose all members are re-seeded to
    the point currently farthest from its assigned centroid, so every
    returned centroid is meaningful even when ``v`` approaches the number
    of distinct points.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise DimensionMismatchError(f"points must be 2-D, got shape {pts.shape}")
    if not np.isfinite(pts).all():
        raise NonFiniteDataError("points contain NaN or infinite entries")
    n = pts.shape[0]
    if v < 1:
        raise DegenerateInputError("v must be >= 1")
    if n < v:
        raise DegenerateInputError(f"need at least v={v} points, got {n}")
    if tol <= 0:
        raise DegenerateInputError("tol must be positive")

    rng = np.random.Generator(np.random.PCG64(seed))
    centroids = _plusplus_init(pts, v, rng)

    trace: list[float] = []
    iterations = 0
    for _ in range(max_iter):
        dist_sq = _squared_distances(pts, centroids)
        assignment = np.argmin(dist_sq, axis=1)
        point_cost = dist_sq[np.arange(n), assignment]
        trace.append(float(point_cost.sum()))

        new_centroids = centroids.copy()
        counts = np.bincount(assignment, minlength=v)
        for j in range(v):
            if counts[j] > 0:
                new_centroids[j] = pts[assignment == j].mean(axis=0)

        if (counts == 0).any():
            repair_cost = point_cost.copy()
            for j in np.flatnonzero(counts == 0):
                farthest = int(np.argmax(repair_cost))
                new_centroids[j] = pts[farthest]
                repair_cost[farthest] = -np.inf

        shift = float(np.linalg.norm(new_centroids - centroids, axis=1).max())
        centroids = new_centroids
        iterations += 1
        if shift < tol:
            break

    final_cost = _squared_distances(pts, centroids)
    inertia = float(final_cost[np.arange(n), np.argmin(final_cost, axis=1)].sum())
    trace.append(inertia)
    return CentroidSet(
        centroids=centroids,
        inertia=inertia,
        iterations_run=iterations,
        inertia_trace=tuple(trace),
    )


def assign(points: np.ndarray, centroid_set: CentroidSet) -> np.ndarray:
    """Index of the nearest centroid per point; ties go to the smaller index."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise DimensionMismatchError(f"points must be 2-D, got shape {pts.shape}")
    if pts.shape[1] != centroid_set.dim:
        raise DimensionMismatchError(
            f"point dim {pts.shape[1]} != centroid dim {centroid_set.dim}"
        )
    return np.argmin(_squared_distances(pts, centroid_set.centroids), axis=1)
