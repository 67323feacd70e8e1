"""Deterministic SVG chart rendering for the eight stimulus designs.

Charts are assembled as plain SVG 1.1 strings with all coordinates rounded
to two decimals, so repeated renders of the same inputs are byte-identical.
Layout: 1290x600 canvas (2:1 plot aspect), observed history on the left in
black, a light-blue band over the forecast horizon, a dashed rule at the
reference date, forecast content in translucent gray, and an optional red
truth marker at the final step.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Iterable, Sequence

from .clustering import find_epsilon
from .data import ForecastRepository, TimePointMeta, step_date
from .sampling import (
    HorizonSample,
    ProgressiveBundle,
    default_frequency_epsilon,
    frequency_levels,
    horizon_sample,
    progressive_bundle,
)
from .stats import BandSeries, DensityProfile, ci95, kde_profile, mean_trajectory

DESIGNS = (
    "mean_only",
    "ci",
    "violin",
    "density",
    "mfv",
    "horizon_mfv",
    "progressive_base",
    "progressive_frequency",
)

MARGIN_LEFT = 90
MARGIN_RIGHT = 40
MARGIN_TOP = 40
MARGIN_BOTTOM = 40

FORECAST_STROKE_WIDTH = 1.5
HISTORY_STROKE_WIDTH = 1.5
BAND_FILL_OPACITY = 0.25
SILHOUETTE_HALFWIDTH = 0.38  # fraction of one step's horizontal spacing
TRUTH_MARKER_RADIUS = 4.5
RULE_DASH = "6 4"
FREQUENCY_N_LEVELS = 5
_GRAY_DARKEST = 26
_GRAY_LIGHTEST = 204

X_AXIS_TITLE = "Date"
Y_AXIS_TITLE = "Mortality count"


class MissingArtifactError(ValueError):
    """A design was asked to render without its required precomputed input."""


@dataclass(frozen=True)
class Palette:
    history: str = "#000000"
    forecast: str = "#808080"
    forecast_opacity: float = 0.5
    truth: str = "#D62728"
    horizon_band: str = "#D6EAF8"
    horizon_band_opacity: float = 0.5


@dataclass(frozen=True)
class ChartSpec:
    """Which design to draw and how the canvas is laid out."""

    design: str
    width_px: int = 1290
    height_px: int = 600
    show_truth: bool = False
    history_weeks: int = 12
    palette: Palette = field(default_factory=Palette)

    def __post_init__(self) -> None:
        if self.design not in DESIGNS:
            raise ValueError(f"design must be one of {DESIGNS}, got {self.design!r}")
        if self.width_px <= MARGIN_LEFT + MARGIN_RIGHT or self.height_px <= MARGIN_TOP + MARGIN_BOTTOM:
            raise ValueError("canvas too small for the fixed margins")
        if self.history_weeks < 1:
            raise ValueError("history_weeks must be >= 1")


@dataclass(frozen=True)
class ChartArtifacts:
    """Precomputed inputs; each design reads only the fields it needs."""

    horizon_sample: HorizonSample | None = None
    bundle: ProgressiveBundle | None = None
    band: BandSeries | None = None
    densities: tuple[DensityProfile, ...] | None = None
    mean: tuple[float, ...] | None = None


@dataclass(frozen=True)
class SvgDocument:
    text: str

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.text, encoding="utf-8")


@dataclass(frozen=True)
class ChartLayout:
    """Pixel transform between (date, value) data space and the plot area."""

    plot_left: float
    plot_right: float
    plot_top: float
    plot_bottom: float
    t_start: date
    t_end: date
    v_min: float
    v_max: float

    def x_to_px(self, d: date) -> float:
        total = (self.t_end - self.t_start).days
        return self.plot_left + (d - self.t_start).days / total * (
            self.plot_right - self.plot_left
        )

    def y_to_px(self, v: float) -> float:
        return self.plot_bottom - (v - self.v_min) / (self.v_max - self.v_min) * (
            self.plot_bottom - self.plot_top
        )

    def px_to_value(self, y_px: float) -> float:
        return self.v_min + (self.plot_bottom - y_px) / (
            self.plot_bottom - self.plot_top
        ) * (self.v_max - self.v_min)


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def _gray_hex(level: int, n_levels: int) -> str:
    v = _GRAY_LIGHTEST - round(level * (_GRAY_LIGHTEST - _GRAY_DARKEST) / (n_levels - 1))
    return f"#{v:02X}{v:02X}{v:02X}"


def _shown_history(repo: ForecastRepository, history_weeks: int):
    cutoff = repo.reference_date - timedelta(days=7 * history_weeks)
    pts = [
        (d, v) for d, v in zip(repo.history.dates, repo.history.values) if d >= cutoff
    ]
    if not pts:
        raise ValueError("no history points fall inside the display window")
    return pts


def _complete_series(repo: ForecastRepository):
    return [s for s in repo.forecasts if s.is_complete]


def _required(value, design: str, name: str):
    if value is None:
        raise MissingArtifactError(f"design {design!r} needs the {name} artifact")
    return value


def _content_values(repo, artifacts, spec) -> list[float]:
    """Values the design will draw, for sizing the y domain."""
    design = spec.design
    if not repo.forecasts:
        return []
    if design == "mfv":
        return [v for s in _complete_series(repo) for v in s.values]
    if design == "horizon_mfv":
        hs = _required(artifacts.horizon_sample, design, "horizon_sample")
        return [float(v) for s in hs.series for v in s.values]
    if design == "ci":
        band = _required(artifacts.band, design, "band")
        return list(band.lo) + list(band.hi) + list(band.center)
    if design in ("violin", "density"):
        densities = _required(artifacts.densities, design, "densities")
        return [x for p in densities for x in (p.grid[0], p.grid[-1])]
    if design == "mean_only":
        return list(_required(artifacts.mean, design, "mean"))
    bundle = _required(artifacts.bundle, design, "bundle")
    vals = [s.mean for step in bundle.steps for s in step]
    if design == "progressive_frequency":
        vals += [x for step in bundle.steps for s in step for x in (s.range_lo, s.range_hi)]
    return vals


def build_layout(
    repo: ForecastRepository, artifacts: ChartArtifacts, spec: ChartSpec
) -> ChartLayout:
    """Compute the axis domains and pixel transform a render would use."""
    history = _shown_history(repo, spec.history_weeks)
    values = [v for _, v in history]
    values += _content_values(repo, artifacts, spec)
    if spec.show_truth:
        if repo.truth_at_horizon is None:
            raise ValueError("show_truth requires truth_at_horizon")
        values.append(repo.truth_at_horizon)

    v_min, v_max = min(values), max(values)
    span = v_max - v_min
    pad = 0.05 * span if span > 0 else 0.05 * max(1.0, abs(v_max))
    return ChartLayout(
        plot_left=float(MARGIN_LEFT),
        plot_right=float(spec.width_px - MARGIN_RIGHT),
        plot_top=float(MARGIN_TOP),
        plot_bottom=float(spec.height_px - MARGIN_BOTTOM),
        t_start=history[0][0],
        t_end=repo.horizon_date,
        v_min=v_min - pad,
        v_max=v_max + pad,
    )


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    raw = (hi - lo) / max(target - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = 10 * mag
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if mult * mag >= raw:
            step = mult * mag
            break
    first = math.ceil(lo / step)
    return [i * step for i in range(first, math.floor(hi / step) + 1)]


def _tick_label(value: float) -> str:
    if float(value).is_integer():
        return f"{int(value):,}"
    return f"{value:,.1f}"


def _polyline(
    points: Iterable[tuple[float, float]],
    stroke: str,
    width: float,
    opacity: float | None = None,
    dasharray: str | None = None,
) -> str:
    pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
    extra = "" if opacity is None else f' stroke-opacity="{opacity}"'
    if dasharray is not None:
        extra += f' stroke-dasharray="{dasharray}"'
    return (
        f'<polyline fill="none" stroke="{stroke}" stroke-width="{width}"'
        f'{extra} points="{pts}"/>'
    )


def _line(x1, y1, x2, y2, stroke, width, opacity=None, dasharray=None) -> str:
    extra = "" if opacity is None else f' stroke-opacity="{opacity}"'
    if dasharray is not None:
        extra += f' stroke-dasharray="{dasharray}"'
    return (
        f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}"'
        f' stroke="{stroke}" stroke-width="{width}"{extra}/>'
    )


def _polygon(points: Iterable[tuple[float, float]], fill: str, opacity: float) -> str:
    pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
    return f'<polygon fill="{fill}" fill-opacity="{opacity}" stroke="none" points="{pts}"/>'


def _text(x, y, content, *, anchor="middle", size=12, rotate=None, fill="#000000") -> str:
    transform = f' transform="rotate(-90 {_fmt(x)} {_fmt(y)})"' if rotate else ""
    return (
        f'<text x="{_fmt(x)}" y="{_fmt(y)}" text-anchor="{anchor}" '
        f'font-family="sans-serif" font-size="{size}" fill="{fill}"{transform}>'
        f"{_escape(content)}</text>"
    )


def _axes(layout: ChartLayout, spec: ChartSpec) -> list[str]:
    parts = []
    parts.append(
        _line(layout.plot_left, layout.plot_top, layout.plot_left, layout.plot_bottom, "#000000", 1)
    )
    parts.append(
        _line(layout.plot_left, layout.plot_bottom, layout.plot_right, layout.plot_bottom, "#000000", 1)
    )
    for tick in _nice_ticks(layout.v_min, layout.v_max):
        y = layout.y_to_px(tick)
        parts.append(_line(layout.plot_left - 5, y, layout.plot_left, y, "#000000", 1))
        parts.append(_text(layout.plot_left - 9, y + 4, _tick_label(tick), anchor="end"))
    total_weeks = (layout.t_end - layout.t_start).days / 7
    every = max(1, math.ceil(total_weeks / 8))
    tick_date = layout.t_start
    while tick_date <= layout.t_end:
        x = layout.x_to_px(tick_date)
        parts.append(_line(x, layout.plot_bottom, x, layout.plot_bottom + 5, "#000000", 1))
        parts.append(_text(x, layout.plot_bottom + 19, tick_date.isoformat()))
        tick_date += timedelta(days=7 * every)
    parts.append(
        _text(
            (layout.plot_left + layout.plot_right) / 2,
            spec.height_px - 8,
            X_AXIS_TITLE,
            size=13,
        )
    )
    parts.append(
        _text(
            22,
            (layout.plot_top + layout.plot_bottom) / 2,
            Y_AXIS_TITLE,
            size=13,
            rotate=True,
        )
    )
    return parts


def _anchor_point(repo: ForecastRepository) -> tuple[date, float]:
    return repo.history.dates[-1], repo.history.values[-1]


def _forecast_polyline_points(repo, layout, values: Sequence[float]):
    anchor_date, anchor_value = _anchor_point(repo)
    pts = [(layout.x_to_px(anchor_date), layout.y_to_px(anchor_value))]
    for t, v in enumerate(values, start=1):
        pts.append(
            (layout.x_to_px(step_date(repo.reference_date, t)), layout.y_to_px(v))
        )
    return pts


def _draw_line_set(repo, layout, spec, series_values: list[Sequence[float]]) -> list[str]:
    pal = spec.palette
    return [
        _polyline(
            _forecast_polyline_points(repo, layout, values),
            pal.forecast,
            FORECAST_STROKE_WIDTH,
            opacity=pal.forecast_opacity,
        )
        for values in series_values
    ]


def _draw_mean(repo, layout, spec, mean: Sequence[float]) -> list[str]:
    pal = spec.palette
    return [
        _polyline(
            _forecast_polyline_points(repo, layout, mean),
            pal.forecast,
            2.0,
            opacity=pal.forecast_opacity,
        )
    ]


def _draw_ci(repo, layout, spec, band: BandSeries) -> list[str]:
    pal = spec.palette
    anchor_date, anchor_value = _anchor_point(repo)
    anchor = (layout.x_to_px(anchor_date), layout.y_to_px(anchor_value))
    xs = [
        layout.x_to_px(step_date(repo.reference_date, t))
        for t in range(1, repo.horizon_steps + 1)
    ]
    upper = [(x, layout.y_to_px(v)) for x, v in zip(xs, band.hi)]
    lower = [(x, layout.y_to_px(v)) for x, v in zip(xs, band.lo)]
    parts = [_polygon([anchor] + upper + lower[::-1], pal.forecast, BAND_FILL_OPACITY)]
    parts += _draw_mean(repo, layout, spec, band.center)
    return parts


def _step_spacing_px(repo, layout) -> float:
    return (layout.plot_right - layout.x_to_px(repo.reference_date)) / repo.horizon_steps


def _draw_silhouettes(
    repo, layout, spec, densities: Sequence[DensityProfile], mirrored: bool
) -> list[str]:
    pal = spec.palette
    half_w = SILHOUETTE_HALFWIDTH * _step_spacing_px(repo, layout)
    parts = []
    for profile in densities:
        x0 = layout.x_to_px(step_date(repo.reference_date, profile.step))
        peak = max(profile.density)
        widths = [d / peak * half_w for d in profile.density]
        right = [(x0 + w, layout.y_to_px(g)) for w, g in zip(widths, profile.grid)]
        if mirrored:
            left = [(x0 - w, layout.y_to_px(g)) for w, g in zip(widths, profile.grid)]
            pts = right + left[::-1]
        else:
            pts = [(x0, layout.y_to_px(profile.grid[0]))] + right + [
                (x0, layout.y_to_px(profile.grid[-1]))
            ]
        parts.append(_polygon(pts, pal.forecast, pal.forecast_opacity))
    return parts


def _progressive_segments(repo, bundle: ProgressiveBundle):
    """Trend segments as (x_from_date, v_from, x_to_date, v_to, count).

    Includes anchor segments from the last observed point to each first-step
    cluster mean (count = cluster size) so the trend graph joins the history.
    """
    anchor_date, anchor_value = _anchor_point(repo)
    first_step = step_date(repo.reference_date, 1)
    segs = [
        (anchor_date, anchor_value, first_step, s.mean, s.size)
        for s in bundle.steps[0]
    ]
    for tr in bundle.transitions:
        segs.append(
            (
                step_date(repo.reference_date, tr.step),
                bundle.steps[tr.step - 1][tr.from_cluster].mean,
                step_date(repo.reference_date, tr.step + 1),
                bundle.steps[tr.step][tr.to_cluster].mean,
                tr.count,
            )
        )
    return segs


def _draw_progressive(repo, layout, spec, bundle: ProgressiveBundle, frequency: bool) -> list[str]:
    pal = spec.palette
    parts = []
    levels = frequency_levels(bundle, FREQUENCY_N_LEVELS) if frequency else None
    for d0, v0, d1, v1, count in _progressive_segments(repo, bundle):
        if levels is None:
            stroke, opacity = pal.forecast, pal.forecast_opacity
        else:
            stroke, opacity = _gray_hex(levels[count], FREQUENCY_N_LEVELS), None
        parts.append(
            _line(
                layout.x_to_px(d0),
                layout.y_to_px(v0),
                layout.x_to_px(d1),
                layout.y_to_px(v1),
                stroke,
                2,
                opacity=opacity,
            )
        )
    if frequency:
        assert levels is not None
        for t, step in enumerate(bundle.steps, start=1):
            x = layout.x_to_px(step_date(repo.reference_date, t))
            for s in step:
                parts.append(
                    _line(
                        x,
                        layout.y_to_px(s.range_lo),
                        x,
                        layout.y_to_px(s.range_hi),
                        _gray_hex(levels[s.size], FREQUENCY_N_LEVELS),
                        3,
                    )
                )
    return parts


def _design_marks(repo, layout, artifacts, spec) -> list[str]:
    design = spec.design
    if not repo.forecasts:
        return []
    if design == "mfv":
        return _draw_line_set(
            repo, layout, spec, [s.values for s in _complete_series(repo)]
        )
    if design == "horizon_mfv":
        hs = _required(artifacts.horizon_sample, design, "horizon_sample")
        return _draw_line_set(repo, layout, spec, [s.values for s in hs.series])
    if design == "mean_only":
        return _draw_mean(repo, layout, spec, _required(artifacts.mean, design, "mean"))
    if design == "ci":
        return _draw_ci(repo, layout, spec, _required(artifacts.band, design, "band"))
    if design in ("violin", "density"):
        densities = _required(artifacts.densities, design, "densities")
        return _draw_silhouettes(repo, layout, spec, densities, mirrored=design == "violin")
    bundle = _required(artifacts.bundle, design, "bundle")
    return _draw_progressive(
        repo, layout, spec, bundle, frequency=design == "progressive_frequency"
    )


def render_chart(
    repo: ForecastRepository, artifacts: ChartArtifacts, spec: ChartSpec
) -> SvgDocument:
    """Render one chart; same inputs always yield byte-identical SVG."""
    layout = build_layout(repo, artifacts, spec)
    pal = spec.palette
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{spec.width_px}" height="{spec.height_px}" '
        f'viewBox="0 0 {spec.width_px} {spec.height_px}">',
        f'<rect x="0" y="0" width="{spec.width_px}" height="{spec.height_px}" fill="#FFFFFF"/>',
        (
            f'<rect x="{_fmt(layout.x_to_px(repo.reference_date))}" y="{_fmt(layout.plot_top)}"'
            f' width="{_fmt(layout.plot_right - layout.x_to_px(repo.reference_date))}"'
            f' height="{_fmt(layout.plot_bottom - layout.plot_top)}"'
            f' fill="{pal.horizon_band}" fill-opacity="{pal.horizon_band_opacity}"/>'
        ),
    ]
    parts += _axes(layout, spec)
    history = _shown_history(repo, spec.history_weeks)
    parts.append(
        _polyline(
            [(layout.x_to_px(d), layout.y_to_px(v)) for d, v in history],
            pal.history,
            HISTORY_STROKE_WIDTH,
        )
    )
    parts += _design_marks(repo, layout, artifacts, spec)
    rule_x = layout.x_to_px(repo.reference_date)
    parts.append(
        _line(
            rule_x,
            layout.plot_top,
            rule_x,
            layout.plot_bottom,
            "#000000",
            1,
            dasharray=RULE_DASH,
        )
    )
    if spec.show_truth:
        if repo.truth_at_horizon is None:
            raise ValueError("show_truth requires truth_at_horizon")
        parts.append(
            f'<circle cx="{_fmt(layout.x_to_px(repo.horizon_date))}"'
            f' cy="{_fmt(layout.y_to_px(repo.truth_at_horizon))}"'
            f' r="{TRUTH_MARKER_RADIUS}" fill="{pal.truth}"/>'
        )
    parts.append("</svg>")
    return SvgDocument(text="\n".join(parts) + "\n")


def prepare_artifacts(
    repo: ForecastRepository,
    design: str,
    *,
    seed: int | None = None,
    target_k: int = 8,
    k_range: tuple[int, int] = (6, 9),
    n_draws: int = 64,
    epsilon: float | None = None,
    grid_points: int = 128,
    ci_method: str = "percentile",
) -> ChartArtifacts:
    """Compute just the artifacts one design needs.

    ``epsilon`` overrides the derived radius for progressive designs; the
    base variant otherwise reuses the horizon-sampling radius and the
    frequency variant halves it.
    """
    if design not in DESIGNS:
        raise ValueError(f"design must be one of {DESIGNS}, got {design!r}")
    if not repo.forecasts:
        return ChartArtifacts()
    if design == "horizon_mfv":
        if seed is None:
            raise ValueError("horizon_mfv requires a seed")
        return ChartArtifacts(
            horizon_sample=horizon_sample(
                repo, target_k, seed=seed, n_draws=n_draws, k_range=k_range
            )
        )
    if design in ("progressive_base", "progressive_frequency"):
        if epsilon is None:
            horizon_eps, _ = find_epsilon(
                repo.step_values(repo.horizon_steps), target_k, k_range
            )
            epsilon = (
                horizon_eps
                if design == "progressive_base"
                else default_frequency_epsilon(horizon_eps)
            )
        return ChartArtifacts(bundle=progressive_bundle(repo, epsilon))
    if design == "ci":
        return ChartArtifacts(band=ci95(repo, method=ci_method))
    if design in ("violin", "density"):
        densities = tuple(
            kde_profile(repo.step_values(t), t, grid_points)
            for t in range(1, repo.horizon_steps + 1)
        )
        return ChartArtifacts(densities=densities)
    if design == "mean_only":
        return ChartArtifacts(mean=tuple(mean_trajectory(repo)))
    return ChartArtifacts()  # mfv draws straight from the repository


def render_batch(
    time_points: Sequence[tuple[TimePointMeta, ForecastRepository]],
    out_dir: str | Path,
    *,
    seed: int,
    target_k: int = 8,
    k_range: tuple[int, int] = (6, 9),
    n_draws: int = 64,
    history_weeks: int = 12,
    grid_points: int = 128,
    ci_method: str = "percentile",
    frequency_epsilon: float | None = None,
    palette: Palette | None = None,
    config_hash: str | None = None,
) -> dict:
    """Render the full stimulus set: eight designs per time point, plus a
    truth-marked variant of each design for study points.

    Returns (and writes as ``manifest.json``) a manifest listing every file
    with its design, time point, truth variant, and the radius/seed that
    produced it.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    palette = palette or Palette()

    files: list[dict] = []
    for meta, repo in time_points:
        hs = horizon_sample(repo, target_k, seed=seed, n_draws=n_draws, k_range=k_range)
        eps_freq = (
            frequency_epsilon
            if frequency_epsilon is not None
            else default_frequency_epsilon(hs.epsilon)
        )
        shared = {
            "mfv": ChartArtifacts(),
            "horizon_mfv": ChartArtifacts(horizon_sample=hs),
            "progressive_base": ChartArtifacts(bundle=progressive_bundle(repo, hs.epsilon)),
            "progressive_frequency": ChartArtifacts(bundle=progressive_bundle(repo, eps_freq)),
            "ci": ChartArtifacts(band=ci95(repo, method=ci_method)),
            "violin": None,  # filled below; violin and density share profiles
            "density": None,
            "mean_only": ChartArtifacts(mean=tuple(mean_trajectory(repo))),
        }
        densities = tuple(
            kde_profile(repo.step_values(t), t, grid_points)
            for t in range(1, repo.horizon_steps + 1)
        )
        shared["violin"] = shared["density"] = ChartArtifacts(densities=densities)

        epsilon_for = {
            "horizon_mfv": hs.epsilon,
            "progressive_base": hs.epsilon,
            "progressive_frequency": eps_freq,
        }
        variants = [False, True] if meta.purpose == "study" else [False]
        for design in DESIGNS:
            for with_truth in variants:
                spec = ChartSpec(
                    design=design,
                    show_truth=with_truth,
                    history_weeks=history_weeks,
                    palette=palette,
                )
                doc = render_chart(repo, shared[design], spec)
                name = f"{meta.id}_{design}{'_truth' if with_truth else ''}.svg"
                (out / name).write_text(doc.text, encoding="utf-8")
                files.append(
                    {
                        "path": name,
                        "time_point": meta.id,
                        "design": design,
                        "truth_variant": with_truth,
                        "epsilon": epsilon_for.get(design),
                        "seed": seed if design == "horizon_mfv" else None,
                    }
                )

    manifest = {
        "config_hash": config_hash,
        "parameters": {
            "seed": seed,
            "target_k": target_k,
            "k_range": list(k_range),
            "n_draws": n_draws,
            "history_weeks": history_weeks,
            "grid_points": grid_points,
            "ci_method": ci_method,
            "frequency_epsilon": frequency_epsilon,
            "n_levels": FREQUENCY_N_LEVELS,
        },
        "files": files,
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    return manifest
