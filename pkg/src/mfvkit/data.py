"""Forecast repository ingestion, validation, and filtering.

Input files are plain UTF-8 CSV with a header row:

* forecasts: ``model,reference_date,horizon_step,value`` -- one row per
  (model, step) point forecast.  A file may hold many reference dates;
  loading selects one.
* truth: ``date,value`` -- one row per observed week.

A repository bundles the observed history up to a reference date with every
model's forecast over weekly horizon steps ``1..H``.  Missing submissions are
kept as ``None`` holes so callers can see them; :func:`filter_models` drops
incomplete or excluded series before analysis.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, replace
from datetime import date, timedelta
from pathlib import Path

log = logging.getLogger(__name__)

DEFAULT_EXCLUDED_PREFIXES: tuple[str, ...] = ("COVIDhub",)

PURPOSES = ("tutorial", "study")
TYPE_LABELS = ("outlier", "contrast", "aligned", "none")


class DataError(Exception):
    """Invalid or malformed input data (bad CSV, missing file, bad dates)."""


def step_date(reference_date: date, step: int) -> date:
    """Calendar date of a weekly horizon step (step 1 = one week out)."""
    return reference_date + timedelta(days=7 * step)


@dataclass(frozen=True)
class ForecastSeries:
    """One model's point forecasts over horizon steps ``1..H``.

    ``values[t - 1]`` is the forecast at step ``t``; ``None`` marks a missing
    submission at that step.
    """

    model_id: str
    values: tuple[float | None, ...]

    def __post_init__(self) -> None:
        if not self.model_id:
            raise DataError("model_id must be nonempty")
        for v in self.values:
            if v is None:
                continue
            if not math.isfinite(v) or v < 0:
                raise DataError(
                    f"model {self.model_id!r}: values must be finite and >= 0, got {v!r}"
                )

    @property
    def is_complete(self) -> bool:
        return all(v is not None for v in self.values)


@dataclass(frozen=True)
class TruthSeries:
    """Observed weekly values on strictly increasing dates."""

    dates: tuple[date, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.dates) != len(self.values):
            raise DataError("truth dates and values must have equal length")
        for a, b in zip(self.dates, self.dates[1:]):
            if a >= b:
                raise DataError(f"truth dates must be strictly increasing ({a} !< {b})")
        for v in self.values:
            if not math.isfinite(v) or v < 0:
                raise DataError(f"truth values must be finite and >= 0, got {v!r}")

    def value_at(self, d: date) -> float | None:
        for dd, v in zip(self.dates, self.values):
            if dd == d:
                return v
        return None

    def through(self, d: date) -> "TruthSeries":
        """Sub-series of all points dated on or before ``d``."""
        keep = [(dd, v) for dd, v in zip(self.dates, self.values) if dd <= d]
        return TruthSeries(tuple(p[0] for p in keep), tuple(p[1] for p in keep))


@dataclass(frozen=True)
class ForecastRepository:
    """History plus all model forecasts issued at one reference date."""

    reference_date: date
    horizon_steps: int
    history: TruthSeries
    forecasts: tuple[ForecastSeries, ...]
    truth_at_horizon: float | None = None

    def __post_init__(self) -> None:
        if self.horizon_steps < 1:
            raise DataError("horizon_steps must be >= 1")
        seen: set[str] = set()
        for s in self.forecasts:
            if len(s.values) != self.horizon_steps:
                raise DataError(
                    f"model {s.model_id!r}: expected {self.horizon_steps} steps, "
                    f"got {len(s.values)}"
                )
            if s.model_id in seen:
                raise DataError(f"duplicate model_id {s.model_id!r}")
            seen.add(s.model_id)
        if self.history.dates and self.history.dates[-1] > self.reference_date:
            raise DataError("history extends past the reference date")

    @property
    def horizon_date(self) -> date:
        return step_date(self.reference_date, self.horizon_steps)

    def step_values(self, step: int) -> list[float]:
        """All model values at one horizon step; every series must be complete."""
        if not 1 <= step <= self.horizon_steps:
            raise ValueError(f"step must be in 1..{self.horizon_steps}, got {step}")
        out: list[float] = []
        for s in self.forecasts:
            v = s.values[step - 1]
            if v is None:
                raise ValueError(
                    f"model {s.model_id!r} is missing step {step}; apply filter_models first"
                )
            out.append(v)
        return out


@dataclass(frozen=True)
class TimePointMeta:
    """Descriptor for one study time point."""

    id: str
    purpose: str
    date_of_forecast: date
    count: int
    type_label: str

    def __post_init__(self) -> None:
        if self.purpose not in PURPOSES:
            raise DataError(f"purpose must be one of {PURPOSES}, got {self.purpose!r}")
        if self.type_label not in TYPE_LABELS:
            raise DataError(
                f"type_label must be one of {TYPE_LABELS}, got {self.type_label!r}"
            )
        if self.count < 1:
            raise DataError("count must be >= 1")


def _open_csv(path: Path):
    try:
        return open(path, newline="", encoding="utf-8")
    except FileNotFoundError as exc:
        raise DataError(f"missing file: {path}") from exc


def _require_columns(fieldnames, required: tuple[str, ...], path: Path) -> None:
    missing = [c for c in required if fieldnames is None or c not in fieldnames]
    if missing:
        raise DataError(f"{path}: missing required column(s) {', '.join(missing)}")


def _parse_date(text: str, path: Path, line: int) -> date:
    try:
        return date.fromisoformat(text.strip())
    except ValueError as exc:
        raise DataError(f"{path}:{line}: bad date {text!r} (expected YYYY-MM-DD)") from exc


def _parse_value(text: str, path: Path, line: int) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError) as exc:
        raise DataError(f"{path}:{line}: bad numeric value {text!r}") from exc
    if not math.isfinite(value) or value < 0:
        raise DataError(f"{path}:{line}: value must be finite and >= 0, got {text!r}")
    return value


def load_truth(truth_csv: str | Path) -> TruthSeries:
    """Load a full observed series from a ``date,value`` CSV (sorted by date)."""
    path = Path(truth_csv)
    rows: list[tuple[date, float]] = []
    with _open_csv(path) as fh:
        reader = csv.DictReader(fh)
        _require_columns(reader.fieldnames, ("date", "value"), path)
        for line, row in enumerate(reader, start=2):
            d = _parse_date(row["date"], path, line)
            v = _parse_value(row["value"], path, line)
            rows.append((d, v))
    if not rows:
        raise DataError(f"{path}: no data rows")
    rows.sort(key=lambda r: r[0])
    for (a, _), (b, _) in zip(rows, rows[1:]):
        if a == b:
            raise DataError(f"{path}: duplicate truth date {a}")
    return TruthSeries(tuple(r[0] for r in rows), tuple(r[1] for r in rows))


def load_repository(
    forecast_csv: str | Path,
    truth_csv: str | Path,
    reference_date: date,
    horizon_steps: int = 4,
) -> ForecastRepository:
    """Build a repository for one reference date.

    Forecast rows for other reference dates, and rows for steps beyond
    ``horizon_steps``, are ignored.  Missing (model, step) submissions are
    kept as ``None`` holes.  Malformed rows and duplicate (model, step)
    pairs raise :class:`DataError` with the offending line number.
    """
    if horizon_steps < 1:
        raise DataError("horizon_steps must be >= 1")
    truth = load_truth(truth_csv)
    if truth.value_at(reference_date) is None:
        raise DataError(f"{truth_csv}: reference date {reference_date} absent from truth")

    path = Path(forecast_csv)
    per_model: dict[str, dict[int, float]] = {}
    with _open_csv(path) as fh:
        reader = csv.DictReader(fh)
        _require_columns(
            reader.fieldnames, ("model", "reference_date", "horizon_step", "value"), path
        )
        for line, row in enumerate(reader, start=2):
            model = (row["model"] or "").strip()
            if not model:
                raise DataError(f"{path}:{line}: empty model name")
            if _parse_date(row["reference_date"], path, line) != reference_date:
                continue
            try:
                step = int(row["horizon_step"])
            except (TypeError, ValueError) as exc:
                raise DataError(
                    f"{path}:{line}: bad horizon_step {row['horizon_step']!r}"
                ) from exc
            if step < 1:
                raise DataError(f"{path}:{line}: horizon_step must be >= 1, got {step}")
            if step > horizon_steps:
                continue
            value = _parse_value(row["value"], path, line)
            steps = per_model.setdefault(model, {})
            if step in steps:
                raise DataError(f"{path}:{line}: duplicate row for model {model!r} step {step}")
            steps[step] = value

    forecasts = tuple(
        ForecastSeries(
            model_id=model,
            values=tuple(steps.get(t) for t in range(1, horizon_steps + 1)),
        )
        for model, steps in per_model.items()
    )
    return ForecastRepository(
        reference_date=reference_date,
        horizon_steps=horizon_steps,
        history=truth.through(reference_date),
        forecasts=forecasts,
        truth_at_horizon=truth.value_at(step_date(reference_date, horizon_steps)),
    )


def filter_models(
    repo: ForecastRepository,
    excluded_prefixes: tuple[str, ...] = DEFAULT_EXCLUDED_PREFIXES,
) -> ForecastRepository:
    """Drop excluded-prefix models and any series with missing steps.

    Order of surviving series is preserved; the operation is idempotent.
    """
    survivors = tuple(
        s
        for s in repo.forecasts
        if s.is_complete and not any(s.model_id.startswith(p) for p in excluded_prefixes)
    )
    return replace(repo, forecasts=survivors)


def repository_to_dict(repo: ForecastRepository) -> dict:
    """JSON-safe dump of a repository (dates as ISO strings)."""
    return {
        "reference_date": repo.reference_date.isoformat(),
        "horizon_steps": repo.horizon_steps,
        "history": {
            "dates": [d.isoformat() for d in repo.history.dates],
            "values": list(repo.history.values),
        },
        "forecasts": [
            {"model_id": s.model_id, "values": list(s.values)} for s in repo.forecasts
        ],
        "truth_at_horizon": repo.truth_at_horizon,
    }


def repository_from_dict(payload: dict) -> ForecastRepository:
    """Inverse of :func:`repository_to_dict`."""
    try:
        history = TruthSeries(
            dates=tuple(date.fromisoformat(d) for d in payload["history"]["dates"]),
            values=tuple(float(v) for v in payload["history"]["values"]),
        )
        forecasts = tuple(
            ForecastSeries(
                model_id=f["model_id"],
                values=tuple(None if v is None else float(v) for v in f["values"]),
            )
            for f in payload["forecasts"]
        )
        truth = payload.get("truth_at_horizon")
        return ForecastRepository(
            reference_date=date.fromisoformat(payload["reference_date"]),
            horizon_steps=int(payload["horizon_steps"]),
            history=history,
            forecasts=forecasts,
            truth_at_horizon=None if truth is None else float(truth),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"bad repository payload: {exc}") from exc


def repository_to_json(repo: ForecastRepository) -> str:
    return json.dumps(repository_to_dict(repo), indent=2) + "\n"


def repository_from_json(text: str) -> ForecastRepository:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"bad repository JSON: {exc}") from exc
    return repository_from_dict(payload)


def load_time_points(path: str | Path) -> list[TimePointMeta]:
    """Load time-point descriptors from an ``id,purpose,date_of_forecast,count,type_label`` CSV."""
    path = Path(path)
    out: list[TimePointMeta] = []
    with _open_csv(path) as fh:
        reader = csv.DictReader(fh)
        _require_columns(
            reader.fieldnames,
            ("id", "purpose", "date_of_forecast", "count", "type_label"),
            path,
        )
        for line, row in enumerate(reader, start=2):
            try:
                count = int(row["count"])
            except (TypeError, ValueError) as exc:
                raise DataError(f"{path}:{line}: bad count {row['count']!r}") from exc
            try:
                meta = TimePointMeta(
                    id=(row["id"] or "").strip(),
                    purpose=(row["purpose"] or "").strip(),
                    date_of_forecast=_parse_date(row["date_of_forecast"], path, line),
                    count=count,
                    type_label=(row["type_label"] or "").strip(),
                )
            except DataError as exc:
                raise DataError(f"{path}:{line}: {exc}") from exc
            if not meta.id:
                raise DataError(f"{path}:{line}: empty time point id")
            out.append(meta)
    if not out:
        raise DataError(f"{path}: no time points")
    ids = [m.id for m in out]
    if len(set(ids)) != len(ids):
        raise DataError(f"{path}: duplicate time point ids")
    return out


def load_study_points(
    forecast_csv: str | Path,
    truth_csv: str | Path,
    time_points: list[TimePointMeta],
    horizon_steps: int = 4,
    excluded_prefixes: tuple[str, ...] = DEFAULT_EXCLUDED_PREFIXES,
) -> list[tuple[TimePointMeta, ForecastRepository]]:
    """Load and filter one repository per time point.

    A mismatch between a descriptor's expected count and the filtered model
    count is logged as a warning, not an error.
    """
    out: list[tuple[TimePointMeta, ForecastRepository]] = []
    for meta in time_points:
        repo = filter_models(
            load_repository(forecast_csv, truth_csv, meta.date_of_forecast, horizon_steps),
            excluded_prefixes,
        )
        if len(repo.forecasts) != meta.count:
            log.warning(
                "time point %s: expected %d models after filtering, found %d",
                meta.id,
                meta.count,
                len(repo.forecasts),
            )
        out.append((meta, repo))
    return out
