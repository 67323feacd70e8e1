"""Regenerate the synthetic study fixtures under fixtures/.

Produces a weekly "observed" series with wave structure plus six time points
of model forecasts whose horizon distributions have engineered relationships
to the observed value:

    T1 tutorial  2022-10-01  19 models  truth inside the central-95% band
    T2 study     2020-11-14  43 models  truth above every forecast (outlier)
    T3 study     2021-01-02  39 models  truth below every forecast
    T4 study     2021-05-08  44 models  truth near the center of the band
    T5 study     2021-11-13  24 models  truth above every forecast
    T6 study     2022-04-16  30 models  truth inside min-max but below the band

Each time point also carries two COVIDhub-prefixed models and one model with
a missing final step, so prefix and completeness filtering are exercised.
Counts above are the post-filter model counts.  Deterministic: a fixed seed
drives every draw, and the script asserts the engineered relationships plus
a 6..9 cluster count at the horizon before writing anything.
"""

from __future__ import annotations

import csv
import math
import sys
from datetime import date, timedelta
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from mfvkit.clustering import find_epsilon  # noqa: E402
from mfvkit.stats import central95  # noqa: E402

FIXTURES = ROOT / "fixtures"
SEED = 20240612

START = date(2020, 6, 6)  # a Saturday
N_WEEKS = 128
HORIZON = 4

# (id, purpose, reference date, post-filter count, type label, factor band)
TIME_POINTS = [
    ("T1", "tutorial", date(2022, 10, 1), 19, "none", (0.80, 1.25)),
    ("T2", "study", date(2020, 11, 14), 43, "outlier", (0.55, 0.85)),
    ("T3", "study", date(2021, 1, 2), 39, "contrast", (1.25, 1.90)),
    ("T4", "study", date(2021, 5, 8), 44, "aligned", (0.88, 1.12)),
    ("T5", "study", date(2021, 11, 13), 24, "contrast", (0.45, 0.80)),
    ("T6", "study", date(2022, 4, 16), 30, "contrast", (1.06, 1.55)),
]
# T6 additionally gets one low model so min-max covers while the band misses.
T6_LOW_FACTOR = 0.87

TEAMS = [
    "alder", "birch", "cedar", "dogwood", "elm", "fir", "gingko", "hawthorn",
    "ironwood", "juniper", "katsura", "laurel", "magnolia", "nutmeg", "oakleaf",
    "poplar", "quince", "rowan", "sumac", "tupelo", "umbra", "viburnum",
    "willow", "yarrow", "zelkova",
]
KINDS = ["seir", "arima", "gbq", "ens"]
ROSTER = [f"{team}-{kind}" for kind in KINDS for team in TEAMS]


def truth_curve(rng: np.random.Generator) -> list[float]:
    waves = [(31, 6.5, 11500.0), (67, 6.0, 6500.0), (87, 5.0, 9800.0)]
    values = []
    for i in range(N_WEEKS):
        v = 2600.0
        for mu, width, amp in waves:
            v += amp * math.exp(-(((i - mu) / width) ** 2))
        v += float(rng.normal(0.0, 120.0))
        values.append(round(max(v, 350.0), 1))
    return values


def week_index(d: date) -> int:
    days = (d - START).days
    assert days % 7 == 0, d
    return days // 7


def forecast_steps(
    rng: np.random.Generator, truth_ref: float, target: float
) -> list[float]:
    gamma = float(rng.uniform(0.75, 1.35))
    values = []
    for t in range(1, HORIZON + 1):
        frac = (t / HORIZON) ** gamma
        v = truth_ref + (target - truth_ref) * frac
        if t < HORIZON:
            v += float(rng.normal(0.0, 0.02 * truth_ref + 1.0))
        values.append(round(max(v, 1.0), 2))
    return values


def build_time_point(rng, truth_values, tp_id, ref, count, band):
    """Return (rows, horizon_values) for one reference date."""
    i_ref = week_index(ref)
    truth_ref = truth_values[i_ref]
    truth_h = truth_values[i_ref + HORIZON]

    factors = list(rng.uniform(band[0], band[1], size=count))
    if tp_id == "T6":
        factors[0] = T6_LOW_FACTOR
    models = ROSTER[:count]

    rows = []
    horizon_values = []
    for model, f in zip(models, factors):
        steps = forecast_steps(rng, truth_ref, round(f * truth_h, 2))
        steps[-1] = round(f * truth_h, 2)  # horizon value carries the factor exactly
        horizon_values.append(steps[-1])
        for t, v in enumerate(steps, start=1):
            rows.append((model, ref.isoformat(), t, v))

    for hub_model in ("COVIDhub-ensemble", "COVIDhub-baseline"):
        steps = forecast_steps(rng, truth_ref, round(float(rng.uniform(0.9, 1.1)) * truth_h, 2))
        for t, v in enumerate(steps, start=1):
            rows.append((hub_model, ref.isoformat(), t, v))

    incomplete = ROSTER[count]
    steps = forecast_steps(rng, truth_ref, round(float(rng.uniform(0.9, 1.1)) * truth_h, 2))
    for t, v in enumerate(steps[:-1], start=1):  # final step deliberately missing
        rows.append((incomplete, ref.isoformat(), t, v))

    check_relationships(tp_id, horizon_values, truth_h, count)
    return rows, horizon_values


def check_relationships(tp_id, horizon_values, truth_h, count):
    assert len(set(horizon_values)) == count, f"{tp_id}: horizon values not distinct"
    _, clustering = find_epsilon(horizon_values, 8, (6, 9))
    assert 6 <= clustering.cluster_count <= 9, (
        f"{tp_id}: cluster count {clustering.cluster_count} outside 6..9"
    )
    lo, hi = central95(horizon_values)
    vmin, vmax = min(horizon_values), max(horizon_values)
    if tp_id in ("T1", "T4"):
        assert lo <= truth_h <= hi, f"{tp_id}: truth should sit inside the band"
    elif tp_id in ("T2", "T5"):
        assert truth_h > vmax, f"{tp_id}: truth should exceed every forecast"
    elif tp_id == "T3":
        assert truth_h < vmin, f"{tp_id}: truth should undercut every forecast"
    else:  # T6
        assert vmin < truth_h < lo, (
            f"{tp_id}: truth should be inside min-max but below the band"
        )


def main() -> None:
    rng = np.random.default_rng(SEED)
    FIXTURES.mkdir(parents=True, exist_ok=True)

    truth_values = truth_curve(rng)
    dates = [START + timedelta(days=7 * i) for i in range(N_WEEKS)]
    with open(FIXTURES / "truth.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "value"])
        for d, v in zip(dates, truth_values):
            writer.writerow([d.isoformat(), v])

    all_rows = []
    for tp_id, _purpose, ref, count, _label, band in TIME_POINTS:
        rows, _ = build_time_point(rng, truth_values, tp_id, ref, count, band)
        all_rows.extend(rows)
    with open(FIXTURES / "forecasts.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["model", "reference_date", "horizon_step", "value"])
        writer.writerows(all_rows)

    with open(FIXTURES / "time_points.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "purpose", "date_of_forecast", "count", "type_label"])
        for tp_id, purpose, ref, count, label, _band in TIME_POINTS:
            writer.writerow([tp_id, purpose, ref.isoformat(), count, label])

    (FIXTURES / "study.toml").write_text(
        "\n".join(
            [
                'forecast_csv = "forecasts.csv"',
                'truth_csv = "truth.csv"',
                'time_points_csv = "time_points.csv"',
                "horizon = 4",
                "target_k = 8",
                "k_range = [6, 9]",
                "seed = 42",
                "n_draws = 64",
                'excluded_prefixes = ["COVIDhub"]',
                'out_dir = "../out/stimuli"',
                "history_weeks = 12",
                "n_levels = 5",
                "",
            ]
        ),
        encoding="utf-8",
    )
    print(f"wrote fixtures for {len(TIME_POINTS)} time points to {FIXTURES}")


if __name__ == "__main__":
    main()
