"""Density clustering of one-dimensional value sets.

With a single dimension and a minimum neighbourhood size of one, density
clustering reduces to splitting the sorted values wherever the gap between
neighbours exceeds the radius ``epsilon``.  Every point belongs to exactly
one cluster and outliers form singletons instead of being discarded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Cluster:
    """One cluster: original indices and their values, values ascending."""

    member_indices: tuple[int, ...]
    member_values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.member_indices) != len(self.member_values) or not self.member_indices:
            raise ValueError("cluster must have matching, nonempty indices and values")

    @property
    def size(self) -> int:
        return len(self.member_indices)

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "member_indices": list(self.member_indices),
            "member_values": list(self.member_values),
        }


@dataclass(frozen=True)
class Clustering:
    """A partition of the input values, clusters ordered by ascending mean."""

    epsilon: float
    min_pts: int
    clusters: tuple[Cluster, ...]

    @property
    def cluster_count(self) -> int:
        return len(self.clusters)

    def labels(self, n_points: int) -> list[int]:
        """Map each original index ``0..n_points-1`` to its cluster position."""
        out = [-1] * n_points
        for pos, cluster in enumerate(self.clusters):
            for i in cluster.member_indices:
                out[i] = pos
        if any(label < 0 for label in out):
            raise ValueError("clustering does not cover all indices")
        return out

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "min_pts": self.min_pts,
            "cluster_count": self.cluster_count,
            "clusters": [c.to_dict() for c in self.clusters],
        }


def _validated_array(values: Sequence[float] | np.ndarray) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError("values must be one-dimensional")
    if arr.size == 0:
        raise ValueError("values must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValueError("values must all be finite")
    return arr


def dbscan_1d(values: Sequence[float] | np.ndarray, epsilon: float) -> Clustering:
    """Cluster scalar values by chaining neighbours within ``epsilon``.

    Two values belong to the same cluster when they are connected by a chain
    of points whose consecutive sorted gaps are all ``<= epsilon``; a gap of
    exactly ``epsilon`` joins.  Ties in value keep their original input order
    inside a cluster.

    Parameters
    ----------
    values : sequence of float
        Nonempty, finite scalars in any order.
    epsilon : float
        Neighbourhood radius, ``>= 0``.

    Returns
    -------
    Clustering
        Clusters ordered by ascending mean, member values ascending.

    Examples
    --------
    >>> [c.member_values for c in dbscan_1d([1, 2, 5, 6, 10], 1.5).clusters]
    [(1.0, 2.0), (5.0, 6.0), (10.0,)]
    >>> dbscan_1d([3.0], 0.0).cluster_count
    1
    >>> dbscan_1d([4, 4, 4], 0.0).clusters[0].size
    3
    """
    arr = _validated_array(values)
    if not epsilon >= 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon!r}")

    order = np.argsort(arr, kind="stable")
    sorted_vals = arr[order]
    gaps = np.diff(sorted_vals)
    breaks = np.flatnonzero(gaps > epsilon) + 1
    clusters = tuple(
        Cluster(
            member_indices=tuple(int(i) for i in idx_chunk),
            member_values=tuple(float(v) for v in val_chunk),
        )
        for idx_chunk, val_chunk in zip(
            np.split(order, breaks), np.split(sorted_vals, breaks)
        )
    )
    return Clustering(epsilon=float(epsilon), min_pts=1, clusters=clusters)


def _choose_count(attainable: set[int], target_k: int, k_min: int, k_max: int) -> int:
    if target_k in attainable:
        return target_k
    in_range = [c for c in attainable if k_min <= c <= k_max]
    if in_range:
        # closest to the target; ties favour more clusters
        return min(in_range, key=lambda c: (abs(c - target_k), -c))

    def distance(c: int) -> int:
        return k_min - c if c < k_min else c - k_max

    return min(attainable, key=lambda c: (distance(c), -c))


def find_epsilon(
    values: Sequence[float] | np.ndarray,
    target_k: int,
    k_range: tuple[int, int] = (6, 9),
) -> tuple[float, Clustering]:
    """Search for the radius that yields a target number of clusters.

    Candidate radii are the distinct consecutive gaps of the sorted values
    plus zero; no other radius changes the partition.  The cluster count for
    radius ``t`` is ``1 + #{gaps > t}``, so only some counts are attainable.
    Selection rule: the target count if attainable, otherwise the attainable
    count inside ``k_range`` closest to the target (ties favour more
    clusters), otherwise the attainable count nearest the range boundary
    (ties favour more clusters).  The returned radius is the smallest one
    achieving the chosen count.

    Parameters
    ----------
    values : sequence of float
        Nonempty, finite scalars.
    target_k : int
        Desired cluster count; must lie inside ``k_range``.
    k_range : (int, int)
        Inclusive acceptable band of cluster counts.

    Returns
    -------
    (float, Clustering)
        The chosen radius and the clustering it induces.

    Examples
    --------
    Eight equally spaced values split into eight singletons at radius zero:

    >>> eps, clustering = find_epsilon(list(range(0, 80, 10)), 8)
    >>> eps, clustering.cluster_count
    (0.0, 8)
    """
    k_min, k_max = k_range
    if not k_min <= target_k <= k_max:
        raise ValueError(f"target_k={target_k} outside k_range={k_range}")
    if k_min < 1:
        raise ValueError("k_range lower bound must be >= 1")
    arr = _validated_array(values)

    gaps = np.diff(np.sort(arr, kind="stable"))
    candidates = [0.0] + sorted({float(g) for g in gaps})
    smallest_eps_for: dict[int, float] = {}
    for t in candidates:  # ascending, so the first radius per count is the smallest
        count = int(1 + np.count_nonzero(gaps > t))
        smallest_eps_for.setdefault(count, t)

    chosen = _choose_count(set(smallest_eps_for), target_k, k_min, k_max)
    eps = smallest_eps_for[chosen]
    return eps, dbscan_1d(arr, eps)
