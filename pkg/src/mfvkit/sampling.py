"""Representative-subset sampling over a forecast repository.

Two strategies:

* horizon sampling -- cluster the final-step values, then keep one complete
  series per cluster, chosen by a seeded best-of-n draw that minimizes line
  crossings and, on ties, maximizes the spread at the horizon;
* progressive sampling -- cluster every step independently at a fixed radius
  and summarize clusters plus the transition flows between consecutive steps.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .clustering import dbscan_1d, find_epsilon
from .data import ForecastRepository, ForecastSeries
from .stats import central95


@dataclass(frozen=True)
class SampleScore:
    """Quality of a subset: crossings (lower wins), then min gap (higher wins)."""

    crossings: int
    min_gap: float

    def to_dict(self) -> dict:
        return {"crossings": self.crossings, "min_gap": self.min_gap}


@dataclass(frozen=True)
class HorizonSample:
    """One representative series per horizon-value cluster."""

    epsilon: float
    seed: int
    selections: tuple[tuple[int, str], ...]
    series: tuple[ForecastSeries, ...]
    score: SampleScore

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "seed": self.seed,
            "selections": [
                {"cluster_index": ci, "model_id": m} for ci, m in self.selections
            ],
            "series": [
                {"model_id": s.model_id, "values": list(s.values)} for s in self.series
            ],
            "score": self.score.to_dict(),
        }


@dataclass(frozen=True)
class ClusterSummary:
    """Mean, central-95% range, and size of one per-step cluster."""

    mean: float
    range_lo: float
    range_hi: float
    size: int

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "range_lo": self.range_lo,
            "range_hi": self.range_hi,
            "size": self.size,
        }


@dataclass(frozen=True)
class Transition:
    """Forecast flow from a cluster at ``step`` to one at ``step + 1``."""

    step: int
    from_cluster: int
    to_cluster: int
    count: int

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "from_cluster": self.from_cluster,
            "to_cluster": self.to_cluster,
            "count": self.count,
        }


@dataclass(frozen=True)
class ProgressiveBundle:
    """Per-step cluster summaries plus inter-step transition counts."""

    epsilon: float
    steps: tuple[tuple[ClusterSummary, ...], ...]
    transitions: tuple[Transition, ...]

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "steps": [[s.to_dict() for s in step] for step in self.steps],
            "transitions": [t.to_dict() for t in self.transitions],
        }


def _value_rows(series_set: Iterable) -> list[np.ndarray]:
    rows = []
    for s in series_set:
        values = list(getattr(s, "values", s))
        if any(v is None for v in values):
            raise ValueError("series with missing values cannot be compared")
        rows.append(np.asarray(values, dtype=float))
    return rows


def count_crossings(series_set: Iterable) -> int:
    """Count pairwise line crossings between equal-length series.

    For each ordered pair and each consecutive step interval, a crossing is
    one sign flip of the value difference; touching without passing through
    does not count.
    """
    rows = _value_rows(series_set)
    if any(r.ndim != 1 for r in rows):
        raise ValueError("each series must be one-dimensional")
    lengths = {r.size for r in rows}
    if len(lengths) > 1:
        raise ValueError("all series must have the same length")
    total = 0
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            # compare signs rather than the raw product, which can underflow
            # to zero for near-equal series and hide a genuine flip
            d = np.sign(rows[i] - rows[j])
            total += int(np.count_nonzero(d[:-1] * d[1:] < 0))
    return total


def _min_gap(values: Sequence[float]) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.diff(np.sort(np.asarray(values, dtype=float))).min())


def horizon_sample(
    repo: ForecastRepository,
    target_k: int = 8,
    *,
    seed: int,
    n_draws: int = 64,
    k_range: tuple[int, int] = (6, 9),
) -> HorizonSample:
    """Sample one series per cluster of the final-step values.

    Clusters come from :func:`find_epsilon` on the horizon values.  Singleton
    clusters contribute their sole member; for the rest, ``n_draws`` seeded
    draws pick one member per cluster and the winner is the draw with the
    fewest crossings, the widest minimum horizon gap on ties, and the
    earliest draw on remaining ties.  Selected series are returned verbatim.
    """
    if not repo.forecasts:
        raise ValueError("repository has no forecasts")
    if n_draws < 1:
        raise ValueError(f"n_draws must be >= 1, got {n_draws}")
    horizon_values = repo.step_values(repo.horizon_steps)
    epsilon, clustering = find_epsilon(horizon_values, target_k, k_range)

    rng = random.Random(seed)
    any_choice = any(c.size > 1 for c in clustering.clusters)
    draws: list[tuple[int, ...]] = []
    for _ in range(n_draws):
        pick = tuple(
            c.member_indices[0]
            if c.size == 1
            else c.member_indices[rng.randrange(c.size)]
            for c in clustering.clusters
        )
        draws.append(pick)
        if not any_choice:
            break  # fully determined; rng never consulted

    best_pick: tuple[int, ...] | None = None
    best_key: tuple[int, float] | None = None
    for pick in dict.fromkeys(draws):  # unique picks, first-drawn order
        chosen = [repo.forecasts[i] for i in pick]
        crossings = count_crossings(chosen)
        gap = _min_gap([horizon_values[i] for i in pick])
        key = (crossings, -gap)
        if best_key is None or key < best_key:
            best_key = key
            best_pick = pick

    assert best_pick is not None and best_key is not None
    return HorizonSample(
        epsilon=epsilon,
        seed=seed,
        selections=tuple(
            (ci, repo.forecasts[i].model_id) for ci, i in enumerate(best_pick)
        ),
        series=tuple(repo.forecasts[i] for i in best_pick),
        score=SampleScore(crossings=best_key[0], min_gap=-best_key[1]),
    )


def progressive_bundle(repo: ForecastRepository, epsilon: float) -> ProgressiveBundle:
    """Cluster every horizon step at ``epsilon`` and summarize the flow.

    Each step's clusters are summarized by mean, central-95% range, and size;
    transitions count how many forecasts move from each cluster at step ``t``
    to each cluster at step ``t + 1``.  Counts are conserved: out-transitions
    of a cluster sum to its size, in-transitions likewise.
    """
    if not repo.forecasts:
        raise ValueError("repository has no forecasts")
    n = len(repo.forecasts)
    steps: list[tuple[ClusterSummary, ...]] = []
    labels: list[list[int]] = []
    for t in range(1, repo.horizon_steps + 1):
        clustering = dbscan_1d(repo.step_values(t), epsilon)
        summaries = tuple(
            ClusterSummary(
                mean=float(np.mean(c.member_values)),
                range_lo=central95(c.member_values)[0],
                range_hi=central95(c.member_values)[1],
                size=c.size,
            )
            for c in clustering.clusters
        )
        steps.append(summaries)
        labels.append(clustering.labels(n))

    transitions: list[Transition] = []
    for t in range(1, repo.horizon_steps):
        flow = Counter(zip(labels[t - 1], labels[t]))
        for (a, b) in sorted(flow):
            transitions.append(
                Transition(step=t, from_cluster=a, to_cluster=b, count=flow[(a, b)])
            )
    return ProgressiveBundle(
        epsilon=float(epsilon), steps=tuple(steps), transitions=tuple(transitions)
    )


def default_frequency_epsilon(horizon_epsilon: float) -> float:
    """Default radius for the frequency-mapped progressive variant.

    Half the horizon-sampling radius: finer clusters expose more frequency
    structure while staying tied to the data scale.
    """
    return horizon_epsilon / 2.0


def frequency_levels(bundle: ProgressiveBundle, n_levels: int = 5) -> dict[int, int]:
    """Ordinal lightness levels for cluster sizes and transition counts.

    Distinct counts are ranked ascending and spread over ``0..n_levels - 1``
    (0 = lightest, ``n_levels - 1`` = darkest) so that higher counts never get
    a lighter level and the darkest level is always used.

    >>> bundle = ProgressiveBundle(
    ...     epsilon=1.0,
    ...     steps=((ClusterSummary(0.0, 0.0, 0.0, 1), ClusterSummary(9.0, 9.0, 9.0, 20)),),
    ...     transitions=(Transition(1, 0, 0, 5),),
    ... )
    >>> frequency_levels(bundle, n_levels=3)
    {1: 0, 5: 1, 20: 2}
    """
    if n_levels < 2:
        raise ValueError(f"n_levels must be >= 2, got {n_levels}")
    counts = sorted(
        {s.size for step in bundle.steps for s in step}
        | {t.count for t in bundle.transitions}
    )
    if not counts:
        raise ValueError("bundle has no clusters")
    m = len(counts)
    return {
        c: n_levels - 1 - ((m - 1 - i) * n_levels) // m for i, c in enumerate(counts)
    }
