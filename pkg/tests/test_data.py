"""Repository loading, validation, filtering, and JSON round trips."""

from datetime import date

import pytest

from mfvkit import (
    DataError,
    ForecastRepository,
    ForecastSeries,
    TruthSeries,
    filter_models,
    load_repository,
    load_time_points,
    load_truth,
    repository_from_dict,
    repository_from_json,
    repository_to_dict,
    repository_to_json,
    step_date,
)

REF = date(2020, 11, 14)


def write_truth(path, rows=None):
    lines = ["date,value"]
    if rows is None:
        d = date(2020, 10, 3)
        rows = []
        while d <= step_date(REF, 4):
            rows.append((d, 100.0 + (d - date(2020, 10, 3)).days))
            d = step_date(d, 1)
    lines += [f"{d},{v}" for d, v in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_forecasts(path, rows):
    lines = ["model,reference_date,horizon_step,value"]
    lines += [f"{m},{d},{s},{v}" for m, d, s, v in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def truth_csv(tmp_path):
    return write_truth(tmp_path / "truth.csv")


def test_step_date_weekly():
    assert step_date(REF, 1) == date(2020, 11, 21)
    assert step_date(REF, 4) == date(2020, 12, 12)


class TestLoadRepository:
    def test_fixture_counts(self, fixture_dir):
        repo = load_repository(
            fixture_dir / "forecasts.csv", fixture_dir / "truth.csv", REF, 4
        )
        assert len(repo.forecasts) == 46
        assert sum(s.is_complete for s in repo.forecasts) == 45
        assert len(filter_models(repo).forecasts) == 43
        assert repo.truth_at_horizon is not None
        assert repo.history.dates[-1] == REF

    def test_missing_step_is_kept_as_hole(self, tmp_path, truth_csv):
        rows = []
        for m in range(5):
            for s in (1, 2, 3, 4):
                if m == 2 and s == 4:
                    continue
                rows.append((f"m{m}", REF, s, 10.0 * m + s))
        fc = write_forecasts(tmp_path / "f.csv", rows)
        repo = load_repository(fc, truth_csv, REF, 4)
        assert len(repo.forecasts) == 5
        holes = [s for s in repo.forecasts if not s.is_complete]
        assert len(holes) == 1 and holes[0].values[3] is None
        assert len(filter_models(repo).forecasts) == 4

    def test_single_model_single_step(self, tmp_path, truth_csv):
        fc = write_forecasts(tmp_path / "f.csv", [("solo", REF, 1, 7.5)])
        repo = load_repository(fc, truth_csv, REF, horizon_steps=1)
        assert repo.forecasts == (ForecastSeries("solo", (7.5,)),)
        assert repo.horizon_date == step_date(REF, 1)

    def test_other_reference_dates_ignored(self, tmp_path, truth_csv):
        other = date(2020, 11, 7)
        fc = write_forecasts(
            tmp_path / "f.csv",
            [("a", REF, 1, 1.0), ("a", other, 1, 9.0), ("b", other, 1, 9.0)],
        )
        repo = load_repository(fc, truth_csv, REF, 1)
        assert [s.model_id for s in repo.forecasts] == ["a"]
        assert repo.forecasts[0].values == (1.0,)

    def test_steps_beyond_horizon_ignored(self, tmp_path, truth_csv):
        fc = write_forecasts(
            tmp_path / "f.csv",
            [("a", REF, s, float(s)) for s in (1, 2, 3, 4, 5, 6)],
        )
        repo = load_repository(fc, truth_csv, REF, 4)
        assert repo.forecasts[0].values == (1.0, 2.0, 3.0, 4.0)

    def test_model_order_is_first_appearance(self, tmp_path, truth_csv):
        fc = write_forecasts(
            tmp_path / "f.csv",
            [("zeta", REF, 1, 1.0), ("alpha", REF, 1, 2.0), ("zeta", REF, 2, 3.0)],
        )
        repo = load_repository(fc, truth_csv, REF, 2)
        assert [s.model_id for s in repo.forecasts] == ["zeta", "alpha"]

    def test_missing_forecast_file(self, tmp_path, truth_csv):
        with pytest.raises(DataError, match="nope.csv"):
            load_repository(tmp_path / "nope.csv", truth_csv, REF, 4)

    def test_malformed_value_reports_line(self, tmp_path, truth_csv):
        fc = write_forecasts(
            tmp_path / "f.csv", [("a", REF, 1, 1.0), ("a", REF, 2, "oops")]
        )
        with pytest.raises(DataError, match=r"f\.csv:3"):
            load_repository(fc, truth_csv, REF, 4)

    def test_duplicate_model_step_rejected(self, tmp_path, truth_csv):
        fc = write_forecasts(
            tmp_path / "f.csv", [("a", REF, 1, 1.0), ("a", REF, 1, 2.0)]
        )
        with pytest.raises(DataError, match="duplicate"):
            load_repository(fc, truth_csv, REF, 4)

    def test_nonpositive_step_rejected(self, tmp_path, truth_csv):
        fc = write_forecasts(tmp_path / "f.csv", [("a", REF, 0, 1.0)])
        with pytest.raises(DataError, match="horizon_step"):
            load_repository(fc, truth_csv, REF, 4)

    def test_reference_date_must_be_observed(self, tmp_path, truth_csv):
        fc = write_forecasts(tmp_path / "f.csv", [("a", REF, 1, 1.0)])
        with pytest.raises(DataError, match="2020-11-15"):
            load_repository(fc, truth_csv, date(2020, 11, 15), 4)

    def test_negative_value_rejected(self, tmp_path, truth_csv):
        fc = write_forecasts(tmp_path / "f.csv", [("a", REF, 1, -3.0)])
        with pytest.raises(DataError, match=">= 0"):
            load_repository(fc, truth_csv, REF, 4)

    def test_missing_header_column(self, tmp_path, truth_csv):
        bad = tmp_path / "f.csv"
        bad.write_text("model,reference_date,value\na,2020-11-14,1.0\n", encoding="utf-8")
        with pytest.raises(DataError, match="horizon_step"):
            load_repository(bad, truth_csv, REF, 4)


class TestLoadTruth:
    def test_rows_sorted_on_load(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("date,value\n2020-01-11,2\n2020-01-04,1\n", encoding="utf-8")
        truth = load_truth(p)
        assert truth.dates == (date(2020, 1, 4), date(2020, 1, 11))

    def test_duplicate_date_rejected(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("date,value\n2020-01-04,1\n2020-01-04,2\n", encoding="utf-8")
        with pytest.raises(DataError, match="duplicate"):
            load_truth(p)

    def test_empty_file_rejected(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("date,value\n", encoding="utf-8")
        with pytest.raises(DataError, match="no data rows"):
            load_truth(p)


class TestFilterModels:
    def make(self, *series):
        truth = TruthSeries((REF,), (5.0,))
        return ForecastRepository(REF, 2, truth, tuple(series), None)

    def test_prefix_and_completeness(self):
        a = ForecastSeries("a-model", (1.0, 2.0))
        b = ForecastSeries("b-model", (2.0, 3.0))
        c = ForecastSeries("COVIDhub-ensemble", (3.0, 4.0))
        d = ForecastSeries("d-model", (4.0, 5.0))
        e = ForecastSeries("e-model", (5.0, None))
        out = filter_models(self.make(a, b, c, d, e), ("COVIDhub",))
        assert [s.model_id for s in out.forecasts] == ["a-model", "b-model", "d-model"]

    def test_series_pass_through_unchanged(self):
        a = ForecastSeries("a", (1.25, 2.5))
        out = filter_models(self.make(a), ())
        assert out.forecasts[0] is a

    def test_idempotent(self):
        repo = self.make(
            ForecastSeries("a", (1.0, 2.0)), ForecastSeries("b", (2.0, None))
        )
        once = filter_models(repo)
        assert filter_models(once) == once

    def test_empty_prefix_list_keeps_complete(self):
        repo = self.make(ForecastSeries("COVIDhub-x", (1.0, 2.0)))
        assert filter_models(repo, ()).forecasts == repo.forecasts


class TestRepositoryInvariants:
    def test_duplicate_model_ids_rejected(self):
        truth = TruthSeries((REF,), (5.0,))
        with pytest.raises(DataError, match="duplicate"):
            ForecastRepository(
                REF,
                1,
                truth,
                (ForecastSeries("a", (1.0,)), ForecastSeries("a", (2.0,))),
            )

    def test_wrong_series_length_rejected(self):
        truth = TruthSeries((REF,), (5.0,))
        with pytest.raises(DataError, match="expected 2 steps"):
            ForecastRepository(REF, 2, truth, (ForecastSeries("a", (1.0,)),))

    def test_history_may_not_pass_reference_date(self):
        truth = TruthSeries((REF, step_date(REF, 1)), (5.0, 6.0))
        with pytest.raises(DataError, match="past the reference"):
            ForecastRepository(REF, 1, truth, ())

    def test_step_values_requires_complete(self):
        truth = TruthSeries((REF,), (5.0,))
        repo = ForecastRepository(
            REF, 2, truth, (ForecastSeries("a", (1.0, None)),)
        )
        with pytest.raises(ValueError, match="missing step 2"):
            repo.step_values(2)


class TestJsonRoundTrip:
    def test_fixture_repo(self, fixture_dir):
        repo = load_repository(
            fixture_dir / "forecasts.csv", fixture_dir / "truth.csv", REF, 4
        )
        assert repository_from_dict(repository_to_dict(repo)) == repo
        assert repository_from_json(repository_to_json(repo)) == repo

    def test_holes_survive(self):
        truth = TruthSeries((REF,), (5.0,))
        repo = ForecastRepository(
            REF, 2, truth, (ForecastSeries("a", (1.0, None)),), None
        )
        again = repository_from_json(repository_to_json(repo))
        assert again == repo
        assert again.forecasts[0].values[1] is None

    def test_bad_payload(self):
        with pytest.raises(DataError, match="payload"):
            repository_from_dict({"reference_date": "2020-01-01"})


class TestTimePoints:
    def test_fixture_time_points(self, fixture_dir):
        metas = load_time_points(fixture_dir / "time_points.csv")
        assert [m.id for m in metas] == ["T1", "T2", "T3", "T4", "T5", "T6"]
        assert [m.count for m in metas] == [19, 43, 39, 44, 24, 30]
        assert metas[0].purpose == "tutorial"
        assert all(m.purpose == "study" for m in metas[1:])
        assert metas[1].type_label == "outlier"

    def test_bad_purpose(self, tmp_path):
        p = tmp_path / "tp.csv"
        p.write_text(
            "id,purpose,date_of_forecast,count,type_label\n"
            "X,pilot,2020-01-04,3,none\n",
            encoding="utf-8",
        )
        with pytest.raises(DataError, match="purpose"):
            load_time_points(p)

    def test_duplicate_ids(self, tmp_path):
        p = tmp_path / "tp.csv"
        p.write_text(
            "id,purpose,date_of_forecast,count,type_label\n"
            "X,study,2020-01-04,3,none\nX,study,2020-01-11,3,none\n",
            encoding="utf-8",
        )
        with pytest.raises(DataError, match="duplicate"):
            load_time_points(p)
