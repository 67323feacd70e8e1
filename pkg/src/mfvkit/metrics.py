"""Computational fidelity benchmark for subset-selection strategies.

Each strategy reduces a repository to a set of horizon "marks" (the values a
viewer could read off its chart at the final step).  The benchmark reports,
per strategy / time point / seed: whether the marks' min-max interval covers
the observed truth, the 1-Wasserstein distance between the marks and the full
horizon distribution, the strategy's line-crossing count, and the number of
distinct marks shown.

These are computational proxies for visual fidelity only; they do not
estimate human judgment accuracy, trust, surprise, or task load.
"""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .clustering import find_epsilon
from .data import DataError, ForecastRepository, TimePointMeta
from .sampling import (
    ProgressiveBundle,
    count_crossings,
    default_frequency_epsilon,
    horizon_sample,
    progressive_bundle,
)
from .stats import ci95, mean_trajectory

STRATEGIES = (
    "full-mfv",
    "horizon",
    "progressive-base",
    "progressive-frequency",
    "mean-only",
    "ci",
)

PROXY_DISCLAIMER = (
    "Computational fidelity proxies only; these figures do not estimate human "
    "judgment accuracy, trust, surprise, or task load."
)

CSV_COLUMNS = (
    "strategy",
    "time_point",
    "seed",
    "truth_covered",
    "wasserstein",
    "crossings",
    "n_marks",
)


@dataclass(frozen=True)
class FidelityReport:
    strategy: str
    time_point: str
    seed: int
    truth_covered: bool
    wasserstein_horizon: float
    crossings: int
    n_marks: int

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "time_point": self.time_point,
            "seed": self.seed,
            "truth_covered": self.truth_covered,
            "wasserstein_horizon": self.wasserstein_horizon,
            "crossings": self.crossings,
            "n_marks": self.n_marks,
        }


def truth_coverage(values: Sequence[float], truth: float) -> bool:
    """Whether ``truth`` lies inside the closed min-max interval of ``values``."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("values must be nonempty")
    return bool(arr.min() <= truth <= arr.max())


def wasserstein_1d(sample: Sequence[float], full: Sequence[float]) -> float:
    """Exact 1-Wasserstein distance between two empirical distributions.

    Integrates |F_a - F_b| over the merged support; both inputs carry uniform
    weights.  Symmetric, zero iff the sorted multisets induce the same
    distribution.
    """
    a = np.sort(np.asarray(sample, dtype=float))
    b = np.sort(np.asarray(full, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("both value sets must be nonempty")
    support = np.sort(np.concatenate([a, b]))
    deltas = np.diff(support)
    cdf_a = np.searchsorted(a, support[:-1], side="right") / a.size
    cdf_b = np.searchsorted(b, support[:-1], side="right") / b.size
    return float(np.sum(np.abs(cdf_a - cdf_b) * deltas))


def _transition_crossings(bundle: ProgressiveBundle) -> int:
    """Crossings among the trend segments of each inter-step interval.

    Anchor segments from the observed point are excluded; only cluster-to-
    cluster transition segments count.
    """
    total = 0
    n_steps = len(bundle.steps)
    for t in range(1, n_steps):
        segs = [
            (
                bundle.steps[tr.step - 1][tr.from_cluster].mean,
                bundle.steps[tr.step][tr.to_cluster].mean,
            )
            for tr in bundle.transitions
            if tr.step == t
        ]
        for i in range(len(segs)):
            for j in range(i + 1, len(segs)):
                d0 = segs[i][0] - segs[j][0]
                d1 = segs[i][1] - segs[j][1]
                if (d0 < 0 < d1) or (d1 < 0 < d0):
                    total += 1
    return total


def _bundle_marks(bundle: ProgressiveBundle, step: int) -> list[float]:
    """Cluster means at one step, weighted by cluster size."""
    return [s.mean for s in bundle.steps[step - 1] for _ in range(s.size)]


def evaluate_strategy(
    strategy: str,
    repo: ForecastRepository,
    time_point: str,
    *,
    seed: int,
    target_k: int = 8,
    k_range: tuple[int, int] = (6, 9),
    n_draws: int = 64,
    per_step: bool = False,
) -> FidelityReport:
    """Score one strategy on one repository.

    With ``per_step`` the Wasserstein figure averages the per-step distances
    instead of using only the final step; coverage always uses the final step.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"strategy must be one of {STRATEGIES}, got {strategy!r}")
    if not repo.forecasts:
        raise ValueError("repository has no forecasts")
    if repo.truth_at_horizon is None:
        raise DataError("benchmark requires truth_at_horizon on every repository")

    horizon = repo.horizon_steps

    if strategy == "full-mfv":
        marks = repo.step_values
        crossings = count_crossings(repo.forecasts)
        n_marks = len(repo.forecasts)
    elif strategy == "horizon":
        hs = horizon_sample(repo, target_k, seed=seed, n_draws=n_draws, k_range=k_range)
        marks = lambda t: [float(s.values[t - 1]) for s in hs.series]  # noqa: E731
        crossings = hs.score.crossings
        n_marks = len(hs.series)
    elif strategy in ("progressive-base", "progressive-frequency"):
        horizon_eps, _ = find_epsilon(repo.step_values(horizon), target_k, k_range)
        eps = (
            horizon_eps
            if strategy == "progressive-base"
            else default_frequency_epsilon(horizon_eps)
        )
        bundle = progressive_bundle(repo, eps)
        marks = lambda t: _bundle_marks(bundle, t)  # noqa: E731
        crossings = _transition_crossings(bundle)
        n_marks = len(bundle.steps[-1])
    elif strategy == "mean-only":
        trajectory = mean_trajectory(repo)
        marks = lambda t: [trajectory[t - 1]]  # noqa: E731
        crossings = 0
        n_marks = 1
    else:  # ci
        band = ci95(repo)
        marks = lambda t: [band.lo[t - 1], band.hi[t - 1]]  # noqa: E731
        crossings = 0
        n_marks = 2

    if per_step:
        distances = [
            wasserstein_1d(marks(t), repo.step_values(t)) for t in range(1, horizon + 1)
        ]
        distance = float(np.mean(distances))
    else:
        distance = wasserstein_1d(marks(horizon), repo.step_values(horizon))

    return FidelityReport(
        strategy=strategy,
        time_point=time_point,
        seed=seed,
        truth_covered=truth_coverage(marks(horizon), repo.truth_at_horizon),
        wasserstein_horizon=distance,
        crossings=crossings,
        n_marks=n_marks,
    )


def bench(
    strategies: Sequence[str],
    time_points: Sequence[tuple[TimePointMeta, ForecastRepository]],
    seeds: Sequence[int],
    *,
    target_k: int = 8,
    k_range: tuple[int, int] = (6, 9),
    n_draws: int = 64,
    per_step: bool = False,
) -> list[FidelityReport]:
    """Full strategy x time point x seed grid, in that row order."""
    if not strategies or not time_points or not seeds:
        raise ValueError("strategies, time_points, and seeds must all be nonempty")
    reports = []
    for strategy in strategies:
        for meta, repo in time_points:
            for seed in seeds:
                reports.append(
                    evaluate_strategy(
                        strategy,
                        repo,
                        meta.id,
                        seed=seed,
                        target_k=target_k,
                        k_range=k_range,
                        n_draws=n_draws,
                        per_step=per_step,
                    )
                )
    return reports


def reports_to_csv(reports: Sequence[FidelityReport]) -> str:
    """Serialize reports with one row per (strategy, time_point, seed)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in reports:
        writer.writerow(
            [
                r.strategy,
                r.time_point,
                r.seed,
                "true" if r.truth_covered else "false",
                repr(r.wasserstein_horizon),
                r.crossings,
                r.n_marks,
            ]
        )
    return buf.getvalue()


def format_summary_table(reports: Sequence[FidelityReport]) -> str:
    """Aligned per-strategy summary: coverage rate and mean figures."""
    if not reports:
        raise ValueError("no reports to summarize")
    by_strategy: dict[str, list[FidelityReport]] = {}
    for r in reports:
        by_strategy.setdefault(r.strategy, []).append(r)

    header = ("strategy", "cells", "coverage", "mean_wasserstein", "mean_crossings", "mean_marks")
    rows = [header]
    for strategy, items in by_strategy.items():
        rows.append(
            (
                strategy,
                str(len(items)),
                f"{sum(r.truth_covered for r in items) / len(items):.2f}",
                f"{np.mean([r.wasserstein_horizon for r in items]):.2f}",
                f"{np.mean([r.crossings for r in items]):.1f}",
                f"{np.mean([r.n_marks for r in items]):.1f}",
            )
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines.append("")
    lines.append(PROXY_DISCLAIMER)
    return "\n".join(lines) + "\n"
