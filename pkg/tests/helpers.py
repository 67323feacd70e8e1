"""Independent reference implementations and builders used across tests.

Everything here is deliberately written from first principles (pure loops,
no calls into the library's own numerics) so library results can be checked
against a second, simpler derivation.
"""

from __future__ import annotations

import math
from datetime import date, timedelta

import numpy as np

from mfvkit import ForecastRepository, ForecastSeries, TruthSeries


def sorted_gap_partition(values, epsilon):
    """Partition indices by splitting the sorted values on gaps > epsilon.

    Returns clusters in ascending value order, each as the tuple of original
    indices ordered by (value, index).
    """
    pairs = sorted((float(v), i) for i, v in enumerate(values))
    groups = [[pairs[0]]]
    for prev, cur in zip(pairs, pairs[1:]):
        if cur[0] - prev[0] > epsilon:
            groups.append([])
        groups[-1].append(cur)
    return [tuple(i for _, i in g) for g in groups]


def proximity_components(values, epsilon):
    """Connected components of the |v_i - v_j| <= epsilon graph (union-find)."""
    n = len(values)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(n):
        for j in range(i + 1, n):
            if abs(float(values[i]) - float(values[j])) <= epsilon:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    groups: dict[int, set[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), set()).add(i)
    return {frozenset(g) for g in groups.values()}


def percentile_oracle(values, q):
    """Linear interpolation between closest order statistics."""
    s = sorted(float(v) for v in values)
    if len(s) == 1:
        return s[0]
    pos = (q / 100.0) * (len(s) - 1)
    i = int(math.floor(pos))
    if i >= len(s) - 1:
        return s[-1]
    frac = pos - i
    return s[i] + frac * (s[i + 1] - s[i])


def central95_oracle(values):
    vals = [float(v) for v in values]
    if len(vals) <= 2:
        return min(vals), max(vals)
    return percentile_oracle(vals, 2.5), percentile_oracle(vals, 97.5)


def kde_oracle(values, grid_points=128):
    """Naive kernel sum with the same bandwidth rule, trapezoid-normalized."""
    vals = [float(v) for v in values]
    n = len(vals)
    if n > 1:
        mean = sum(vals) / n
        sd = math.sqrt(sum((v - mean) ** 2 for v in vals) / (n - 1))
    else:
        sd = 0.0
    iqr = percentile_oracle(vals, 75) - percentile_oracle(vals, 25)
    h = 0.9 * min(sd, iqr / 1.34) * n ** (-0.2)
    h = max(h, 1e-9 * max(1.0, max(vals) - min(vals)))
    lo, hi = min(vals) - 3 * h, max(vals) + 3 * h
    grid = [lo + (hi - lo) * k / (grid_points - 1) for k in range(grid_points)]
    norm = n * h * math.sqrt(2 * math.pi)
    dens = [
        sum(math.exp(-0.5 * ((x - v) / h) ** 2) for v in vals) / norm for x in grid
    ]
    integral = sum(
        (dens[k] + dens[k + 1]) / 2 * (grid[k + 1] - grid[k])
        for k in range(len(grid) - 1)
    )
    return grid, [d / integral for d in dens]


def crossings_oracle(rows):
    """Sign-flip count per pair per interval, written as explicit branches."""
    total = 0
    rows = [list(map(float, r)) for r in rows]
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            for t in range(len(rows[i]) - 1):
                d0 = rows[i][t] - rows[j][t]
                d1 = rows[i][t + 1] - rows[j][t + 1]
                if (d0 > 0 and d1 < 0) or (d0 < 0 and d1 > 0):
                    total += 1
    return total


def wasserstein_quantile_oracle(a, b, grid=100_000):
    """Integrate |Q_a(u) - Q_b(u)| du on a midpoint grid over u in (0, 1)."""
    sa = np.sort(np.asarray(a, dtype=float))
    sb = np.sort(np.asarray(b, dtype=float))
    u = (np.arange(grid) + 0.5) / grid
    qa = sa[np.minimum(np.ceil(u * sa.size).astype(int) - 1, sa.size - 1)]
    qb = sb[np.minimum(np.ceil(u * sb.size).astype(int) - 1, sb.size - 1)]
    return float(np.mean(np.abs(qa - qb)))


def make_repo(
    rng: np.random.Generator,
    n_models: int,
    horizon: int = 4,
    base: float = 1000.0,
    spread: float = 300.0,
    with_truth: bool = True,
    n_history: int = 8,
) -> ForecastRepository:
    """Random complete repository on a weekly grid ending 2021-01-02."""
    ref = date(2021, 1, 2)
    hist_dates = tuple(
        ref - timedelta(days=7 * (n_history - 1 - i)) for i in range(n_history)
    )
    hist_vals = tuple(
        float(v) for v in np.maximum(rng.normal(base, spread * 0.2, n_history), 1.0)
    )
    forecasts = tuple(
        ForecastSeries(
            model_id=f"m{m:03d}",
            values=tuple(
                float(v) for v in np.maximum(rng.normal(base, spread, horizon), 0.0)
            ),
        )
        for m in range(n_models)
    )
    truth = float(max(rng.normal(base, spread), 0.0)) if with_truth else None
    return ForecastRepository(
        reference_date=ref,
        horizon_steps=horizon,
        history=TruthSeries(hist_dates, hist_vals),
        forecasts=forecasts,
        truth_at_horizon=truth,
    )
