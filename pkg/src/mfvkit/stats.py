"""Summary statistics over a forecast repository: mean trajectory, 95%
interval bands, and per-step kernel density profiles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import ForecastRepository

CI_METHODS = ("percentile", "normal")


@dataclass(frozen=True)
class BandSeries:
    """Lower/center/upper envelope across horizon steps."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    center: tuple[float, ...]

    def __post_init__(self) -> None:
        if not len(self.lo) == len(self.hi) == len(self.center):
            raise ValueError("band vectors must have equal length")
        for a, b in zip(self.lo, self.hi):
            if a > b:
                raise ValueError(f"band lower bound {a} exceeds upper bound {b}")

    def to_dict(self) -> dict:
        return {"lo": list(self.lo), "hi": list(self.hi), "center": list(self.center)}


@dataclass(frozen=True)
class DensityProfile:
    """Kernel density estimate of one step's values on an even value grid."""

    step: int
    grid: tuple[float, ...]
    density: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.grid) != len(self.density):
            raise ValueError("grid and density must have equal length")

    def to_dict(self) -> dict:
        return {"step": self.step, "grid": list(self.grid), "density": list(self.density)}


def percentile_linear(values: Sequence[float] | np.ndarray, q: float) -> float:
    """Percentile via linear interpolation between closest order statistics.

    For sorted values ``v[0..n-1]`` the q-th percentile sits at fractional
    position ``(q / 100) * (n - 1)``.

    >>> percentile_linear(range(1, 101), 2.5)
    3.475
    >>> percentile_linear(range(1, 101), 50)
    50.5
    """
    if not 0 <= q <= 100:
        raise ValueError(f"q must be in [0, 100], got {q!r}")
    s = np.sort(np.asarray(values, dtype=float))
    n = s.size
    if n == 0:
        raise ValueError("values must be nonempty")
    if n == 1:
        return float(s[0])
    pos = (q / 100.0) * (n - 1)
    i = int(math.floor(pos))
    if i >= n - 1:
        return float(s[-1])
    frac = pos - i
    return float(s[i] + frac * (s[i + 1] - s[i]))


def central95(values: Sequence[float] | np.ndarray) -> tuple[float, float]:
    """Central 95% range: [min, max] for n <= 2, else 2.5th..97.5th percentile."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("values must be nonempty")
    if arr.size <= 2:
        return float(arr.min()), float(arr.max())
    return percentile_linear(arr, 2.5), percentile_linear(arr, 97.5)


def _step_matrix(repo: ForecastRepository) -> np.ndarray:
    """(n_models, n_steps) value matrix; requires a nonempty, complete repository."""
    if not repo.forecasts:
        raise ValueError("repository has no forecasts")
    rows = [repo.step_values(t) for t in range(1, repo.horizon_steps + 1)]
    return np.asarray(rows, dtype=float).T


def mean_trajectory(repo: ForecastRepository) -> list[float]:
    """Cross-model mean at each horizon step."""
    return [float(v) for v in _step_matrix(repo).mean(axis=0)]


def ci95(repo: ForecastRepository, method: str = "percentile") -> BandSeries:
    """95% interval band per step with the cross-model mean as center.

    ``percentile`` uses the central 95% of the empirical values (the same
    estimator as cluster summary ranges); ``normal`` uses mean +/- 1.96 sample
    standard deviations.
    """
    if method not in CI_METHODS:
        raise ValueError(f"method must be one of {CI_METHODS}, got {method!r}")
    matrix = _step_matrix(repo)
    centers = matrix.mean(axis=0)
    lo: list[float] = []
    hi: list[float] = []
    for step_col, center in zip(matrix.T, centers):
        if method == "percentile":
            a, b = central95(step_col)
        else:
            sd = float(np.std(step_col, ddof=1)) if step_col.size > 1 else 0.0
            a, b = float(center - 1.96 * sd), float(center + 1.96 * sd)
        lo.append(a)
        hi.append(b)
    return BandSeries(lo=tuple(lo), hi=tuple(hi), center=tuple(float(c) for c in centers))


def kde_profile(
    values: Sequence[float] | np.ndarray, step: int, grid_points: int = 128
) -> DensityProfile:
    """Gaussian kernel density of one step's values.

    Bandwidth is ``0.9 * min(sd, IQR / 1.34) * n ** (-1/5)`` floored at
    ``1e-9 * max(1, value range)`` so degenerate spreads stay finite.  The
    grid spans ``[min - 3h, max + 3h]`` and the curve is renormalized to
    integrate to one under the trapezoid rule.
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("values must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValueError("values must all be finite")
    if grid_points < 16:
        raise ValueError(f"grid_points must be >= 16, got {grid_points}")

    n = arr.size
    sd = float(np.std(arr, ddof=1)) if n > 1 else 0.0
    iqr = percentile_linear(arr, 75) - percentile_linear(arr, 25)
    h = 0.9 * min(sd, iqr / 1.34) * n ** (-0.2)
    span = float(arr.max() - arr.min())
    h = max(h, 1e-9 * max(1.0, span))

    grid = np.linspace(arr.min() - 3 * h, arr.max() + 3 * h, grid_points)
    z = (grid[:, None] - arr[None, :]) / h
    density = np.exp(-0.5 * z * z).sum(axis=1) / (n * h * math.sqrt(2 * math.pi))
    area = float(np.sum((density[1:] + density[:-1]) * np.diff(grid)) / 2.0)
    density = density / area
    return DensityProfile(
        step=step,
        grid=tuple(float(x) for x in grid),
        density=tuple(float(d) for d in density),
    )
