"""SVG output shape, determinism, and the batch manifest."""

import json
import re
import xml.etree.ElementTree as ET
from datetime import date

import numpy as np
import pytest

from helpers import make_repo
from mfvkit import (
    DESIGNS,
    ChartArtifacts,
    ChartSpec,
    ForecastRepository,
    ForecastSeries,
    MissingArtifactError,
    TruthSeries,
    build_layout,
    horizon_sample,
    prepare_artifacts,
    progressive_bundle,
    render_batch,
    render_chart,
)
from mfvkit.render import _gray_hex

SVG_NS = "{http://www.w3.org/2000/svg}"


def artifacts_for(repo, design, seed=42):
    return prepare_artifacts(repo, design, seed=seed)


def render(repo, design, seed=42, **spec_kwargs):
    spec = ChartSpec(design=design, **spec_kwargs)
    return render_chart(repo, artifacts_for(repo, design, seed), spec)


def parse(svg_text):
    return ET.fromstring(svg_text)


def elements(root, tag):
    return root.findall(f".//{SVG_NS}{tag}")


def small_repo(rows, horizon=2, truth=None):
    ref = date(2021, 1, 2)
    return ForecastRepository(
        reference_date=ref,
        horizon_steps=horizon,
        history=TruthSeries((date(2020, 12, 26), ref), (2.0, 3.0)),
        forecasts=tuple(
            ForecastSeries(f"m{i}", tuple(float(v) for v in row))
            for i, row in enumerate(rows)
        ),
        truth_at_horizon=truth,
    )


class TestChartSpec:
    def test_unknown_design(self):
        with pytest.raises(ValueError, match="design"):
            ChartSpec(design="sparkline")

    def test_canvas_must_clear_margins(self):
        with pytest.raises(ValueError, match="canvas"):
            ChartSpec(design="mfv", width_px=100, height_px=600)

    def test_history_weeks_positive(self):
        with pytest.raises(ValueError, match="history_weeks"):
            ChartSpec(design="mfv", history_weeks=0)


class TestRenderChart:
    @pytest.mark.parametrize("design", DESIGNS)
    def test_valid_xml_with_canvas_size(self, repos_by_id, design):
        _, repo = repos_by_id["T3"]
        doc = render(repo, design)
        root = parse(doc.text)
        assert root.tag == f"{SVG_NS}svg"
        assert root.get("width") == "1290"
        assert root.get("height") == "600"

    def test_mfv_draws_every_complete_series(self, repos_by_id):
        _, repo = repos_by_id["T3"]
        doc = render(repo, "mfv")
        lines = elements(parse(doc.text), "polyline")
        history = [e for e in lines if e.get("stroke") == "#000000"]
        forecasts = [e for e in lines if e.get("stroke") == "#808080"]
        assert len(history) == 1
        assert len(forecasts) == len(repo.forecasts) == 39

    def test_horizon_mfv_draws_sampled_series(self, repos_by_id):
        _, repo = repos_by_id["T3"]
        doc = render(repo, "horizon_mfv")
        forecasts = [
            e
            for e in elements(parse(doc.text), "polyline")
            if e.get("stroke") == "#808080"
        ]
        assert len(forecasts) == 8

    def test_polyline_y_round_trips_to_values(self, repos_by_id):
        _, repo = repos_by_id["T2"]
        sample = horizon_sample(repo, 8, seed=42)
        spec = ChartSpec(design="horizon_mfv")
        artifacts = ChartArtifacts(horizon_sample=sample)
        layout = build_layout(repo, artifacts, spec)
        doc = render_chart(repo, artifacts, spec)
        forecasts = [
            e
            for e in elements(parse(doc.text), "polyline")
            if e.get("stroke") == "#808080"
        ]
        for element, series in zip(forecasts, sample.series):
            vertices = [
                tuple(map(float, pair.split(",")))
                for pair in element.get("points").split()
            ]
            assert len(vertices) == repo.horizon_steps + 1  # anchor + steps
            for (_, y_px), value in zip(vertices[1:], series.values):
                assert abs(y_px - layout.y_to_px(value)) <= 0.5

    def test_reference_rule_is_dashed_at_reference_date(self, repos_by_id):
        _, repo = repos_by_id["T1"]
        artifacts = artifacts_for(repo, "mfv")
        spec = ChartSpec(design="mfv")
        layout = build_layout(repo, artifacts, spec)
        doc = render_chart(repo, artifacts, spec)
        dashed = [
            e
            for e in elements(parse(doc.text), "line")
            if e.get("stroke-dasharray") == "6 4"
        ]
        assert len(dashed) == 1
        expected = f"{layout.x_to_px(repo.reference_date):.2f}"
        assert dashed[0].get("x1") == expected
        assert dashed[0].get("x2") == expected

    def test_truth_marker(self, repos_by_id):
        _, repo = repos_by_id["T4"]
        artifacts = artifacts_for(repo, "mfv")
        spec = ChartSpec(design="mfv", show_truth=True)
        layout = build_layout(repo, artifacts, spec)
        doc = render_chart(repo, artifacts, spec)
        circles = elements(parse(doc.text), "circle")
        assert len(circles) == 1
        marker = circles[0]
        assert marker.get("fill") == "#D62728"
        assert marker.get("r") == "4.5"
        assert marker.get("cx") == f"{layout.x_to_px(repo.horizon_date):.2f}"
        assert marker.get("cy") == f"{layout.y_to_px(repo.truth_at_horizon):.2f}"

    def test_no_marker_without_truth_flag(self, repos_by_id):
        _, repo = repos_by_id["T4"]
        doc = render(repo, "mfv")
        assert elements(parse(doc.text), "circle") == []

    def test_show_truth_requires_truth_value(self):
        rng = np.random.default_rng(0)
        repo = make_repo(rng, 5, with_truth=False)
        with pytest.raises(ValueError, match="truth"):
            render(repo, "mfv", show_truth=True)

    def test_byte_identical_rerun(self, repos_by_id):
        _, repo = repos_by_id["T5"]
        for design in DESIGNS:
            assert render(repo, design).text == render(repo, design).text

    def test_horizon_band_present(self, repos_by_id):
        _, repo = repos_by_id["T1"]
        rects = elements(parse(render(repo, "mfv").text), "rect")
        bands = [r for r in rects if r.get("fill") == "#D6EAF8"]
        assert len(bands) == 1
        assert bands[0].get("fill-opacity") == "0.5"

    @pytest.mark.parametrize(
        "design",
        [d for d in DESIGNS if d != "mfv"],
    )
    def test_missing_artifact_is_reported(self, repos_by_id, design):
        _, repo = repos_by_id["T1"]
        with pytest.raises(MissingArtifactError, match=design):
            render_chart(repo, ChartArtifacts(), ChartSpec(design=design))

    def test_empty_repository_renders_every_design(self):
        repo = small_repo([])
        for design in DESIGNS:
            doc = render_chart(repo, ChartArtifacts(), ChartSpec(design=design))
            root = parse(doc.text)
            assert root.get("width") == "1290"
            forecasts = [
                e
                for e in elements(root, "polyline")
                if e.get("stroke") == "#808080"
            ]
            assert forecasts == []

    def test_degenerate_value_domain_still_has_span(self):
        repo = small_repo([[3.0, 3.0], [3.0, 3.0]])
        repo = ForecastRepository(
            repo.reference_date,
            repo.horizon_steps,
            TruthSeries(repo.history.dates, (3.0, 3.0)),
            repo.forecasts,
        )
        layout = build_layout(repo, ChartArtifacts(), ChartSpec(design="mfv"))
        assert layout.v_max > layout.v_min
        doc = render_chart(repo, ChartArtifacts(), ChartSpec(design="mfv"))
        parse(doc.text)


class TestSilhouetteDesigns:
    @pytest.mark.parametrize("design", ["violin", "density"])
    def test_one_polygon_per_step(self, repos_by_id, design):
        _, repo = repos_by_id["T2"]
        doc = render(repo, design)
        assert len(elements(parse(doc.text), "polygon")) == repo.horizon_steps

    def test_violin_is_mirrored(self, repos_by_id):
        _, repo = repos_by_id["T2"]
        violin = elements(parse(render(repo, "violin").text), "polygon")[0]
        xs = [float(p.split(",")[0]) for p in violin.get("points").split()]
        center = (max(xs) + min(xs)) / 2
        spread_left = center - min(xs)
        spread_right = max(xs) - center
        assert spread_left == pytest.approx(spread_right, abs=0.02)

    def test_density_hugs_its_axis(self, repos_by_id):
        _, repo = repos_by_id["T2"]
        density = elements(parse(render(repo, "density").text), "polygon")[0]
        xs = [float(p.split(",")[0]) for p in density.get("points").split()]
        assert min(xs) == xs[0]  # first vertex sits on the step's axis

    def test_ci_band_single_polygon(self, repos_by_id):
        _, repo = repos_by_id["T2"]
        doc = render(repo, "ci")
        polygons = elements(parse(doc.text), "polygon")
        assert len(polygons) == 1
        assert polygons[0].get("fill-opacity") == "0.25"


class TestProgressiveDesigns:
    def hand_repo(self):
        return small_repo([[1.0, 1.0], [1.0, 9.0], [9.0, 9.0]])

    def test_segment_count(self):
        repo = self.hand_repo()
        bundle = progressive_bundle(repo, epsilon=1.0)
        spec = ChartSpec(design="progressive_base")
        doc = render_chart(repo, ChartArtifacts(bundle=bundle), spec)
        segments = [
            e
            for e in elements(parse(doc.text), "line")
            if e.get("stroke") == "#808080"
        ]
        # two anchor joins plus three transitions
        assert len(segments) == 5

    def test_frequency_adds_range_lines(self):
        repo = self.hand_repo()
        bundle = progressive_bundle(repo, epsilon=1.0)
        spec = ChartSpec(design="progressive_frequency")
        doc = render_chart(repo, ChartArtifacts(bundle=bundle), spec)
        range_lines = [
            e
            for e in elements(parse(doc.text), "line")
            if e.get("stroke-width") == "3"
        ]
        assert len(range_lines) == 4  # two clusters at each of two steps

    def test_frequency_strokes_are_grayscale(self):
        repo = self.hand_repo()
        bundle = progressive_bundle(repo, epsilon=1.0)
        doc = render_chart(
            repo,
            ChartArtifacts(bundle=bundle),
            ChartSpec(design="progressive_frequency"),
        )
        strokes = {
            e.get("stroke")
            for e in elements(parse(doc.text), "line")
            if e.get("stroke-width") in ("2", "3")
        }
        assert strokes
        assert all(re.fullmatch(r"#([0-9A-F]{2})\1\1", s) for s in strokes)


class TestGrayRamp:
    def test_endpoints(self):
        assert _gray_hex(0, 5) == "#CCCCCC"
        assert _gray_hex(4, 5) == "#1A1A1A"

    def test_monotone_darkening(self):
        shades = [int(_gray_hex(lv, 5)[1:3], 16) for lv in range(5)]
        assert shades == sorted(shades, reverse=True)


class TestPrepareArtifacts:
    def test_unknown_design(self, repos_by_id):
        _, repo = repos_by_id["T1"]
        with pytest.raises(ValueError, match="design"):
            prepare_artifacts(repo, "sparkline")

    def test_horizon_requires_seed(self, repos_by_id):
        _, repo = repos_by_id["T1"]
        with pytest.raises(ValueError, match="seed"):
            prepare_artifacts(repo, "horizon_mfv")

    def test_progressive_radius_defaults(self, repos_by_id):
        _, repo = repos_by_id["T1"]
        sample = horizon_sample(repo, 8, seed=0)
        base = prepare_artifacts(repo, "progressive_base")
        freq = prepare_artifacts(repo, "progressive_frequency")
        assert base.bundle.epsilon == sample.epsilon
        assert freq.bundle.epsilon == sample.epsilon / 2

    def test_explicit_radius_wins(self, repos_by_id):
        _, repo = repos_by_id["T1"]
        art = prepare_artifacts(repo, "progressive_base", epsilon=10.0)
        assert art.bundle.epsilon == 10.0


class TestRenderBatch:
    def test_produces_full_stimulus_set(self, study_pairs, tmp_path):
        manifest = render_batch(study_pairs, tmp_path, seed=42)
        svgs = sorted(p.name for p in tmp_path.glob("*.svg"))
        assert len(svgs) == 88  # 6 points x 8 designs + 5 study points x 8

        on_disk_manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert on_disk_manifest == manifest
        assert len(manifest["files"]) == 88
        assert sorted(f["path"] for f in manifest["files"]) == svgs

        by_point = {}
        for entry in manifest["files"]:
            by_point.setdefault(entry["time_point"], []).append(entry)
        assert sorted(by_point) == ["T1", "T2", "T3", "T4", "T5", "T6"]
        assert len(by_point["T1"]) == 8  # tutorial point: no truth variants
        assert all(not e["truth_variant"] for e in by_point["T1"])
        for study_id in ("T2", "T3", "T4", "T5", "T6"):
            assert len(by_point[study_id]) == 16
            assert sum(e["truth_variant"] for e in by_point[study_id]) == 8

        for entry in manifest["files"]:
            if entry["design"] == "horizon_mfv":
                assert entry["seed"] == 42
                assert entry["epsilon"] is not None
            else:
                assert entry["seed"] is None
            root = parse((tmp_path / entry["path"]).read_text())
            assert root.get("width") == "1290"
            assert root.get("height") == "600"

        params = manifest["parameters"]
        assert params["seed"] == 42
        assert params["target_k"] == 8
        assert params["n_levels"] == 5

    def test_reruns_are_byte_identical(self, study_pairs, tmp_path):
        first = tmp_path / "a"
        second = tmp_path / "b"
        render_batch(study_pairs, first, seed=42)
        render_batch(study_pairs, second, seed=42)
        names = sorted(p.name for p in first.iterdir())
        assert names == sorted(p.name for p in second.iterdir())
        for name in names:
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_config_hash_lands_in_manifest(self, study_pairs, tmp_path):
        manifest = render_batch(
            study_pairs[:1], tmp_path, seed=7, config_hash="cafe0123"
        )
        assert manifest["config_hash"] == "cafe0123"
