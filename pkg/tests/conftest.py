from pathlib import Path

import pytest

from mfvkit import load_study_points, load_time_points

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def study_pairs():
    metas = load_time_points(FIXTURES / "time_points.csv")
    return load_study_points(
        FIXTURES / "forecasts.csv", FIXTURES / "truth.csv", metas, 4
    )


@pytest.fixture(scope="session")
def repos_by_id(study_pairs):
    return {meta.id: (meta, repo) for meta, repo in study_pairs}
