"""HTTP service exposing the pure compute operations on inline payloads.

Repositories are posted as JSON (same schema as ``mfvkit repo dump``); file
ingestion and batch rendering stay CLI-side.  Domain validation errors map
to 400 responses.
"""

from __future__ import annotations

from datetime import date

from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel, ConfigDict, Field

from . import __version__
from .clustering import dbscan_1d, find_epsilon
from .data import DataError, ForecastRepository, repository_from_dict
from .metrics import STRATEGIES, evaluate_strategy
from .render import DESIGNS, ChartSpec, prepare_artifacts, render_chart
from .sampling import frequency_levels, horizon_sample, progressive_bundle
from .stats import ci95, kde_profile, mean_trajectory


class HistoryPayload(BaseModel):
    dates: list[date]
    values: list[float]


class ForecastPayload(BaseModel):
    model_config = ConfigDict(protected_namespaces=())

    model_id: str
    values: list[float | None]


class RepositoryPayload(BaseModel):
    reference_date: date
    horizon_steps: int
    history: HistoryPayload
    forecasts: list[ForecastPayload]
    truth_at_horizon: float | None = None

    def to_repository(self) -> ForecastRepository:
        return repository_from_dict(self.model_dump(mode="json"))


class ClusterRequest(BaseModel):
    values: list[float]
    epsilon: float | None = None
    target_k: int = 8
    k_range: tuple[int, int] = (6, 9)


class HorizonSampleRequest(BaseModel):
    repository: RepositoryPayload
    seed: int
    target_k: int = 8
    n_draws: int = 64
    k_range: tuple[int, int] = (6, 9)


class ProgressiveRequest(BaseModel):
    repository: RepositoryPayload
    epsilon: float | None = None
    target_k: int = 8
    k_range: tuple[int, int] = (6, 9)
    n_levels: int = 5


class StatsRequest(BaseModel):
    repository: RepositoryPayload
    grid_points: int = 128
    ci_method: str = "percentile"


class RenderRequest(BaseModel):
    repository: RepositoryPayload
    design: str
    show_truth: bool = False
    seed: int | None = None
    target_k: int = 8
    k_range: tuple[int, int] = (6, 9)
    n_draws: int = 64
    epsilon: float | None = None
    history_weeks: int = 12
    grid_points: int = 128
    ci_method: str = "percentile"


class FidelityRequest(BaseModel):
    repository: RepositoryPayload
    strategy: str = Field(description=f"one of: {', '.join(STRATEGIES)}")
    seed: int = 0
    time_point: str = "adhoc"
    target_k: int = 8
    k_range: tuple[int, int] = (6, 9)
    n_draws: int = 64
    per_step: bool = False


def _domain(fn):
    try:
        return fn()
    except (DataError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


def create_app() -> FastAPI:
    app = FastAPI(title="mfvkit", version=__version__)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__, "designs": list(DESIGNS)}

    @app.post("/cluster")
    def cluster(req: ClusterRequest) -> dict:
        def run():
            if req.epsilon is not None:
                return dbscan_1d(req.values, req.epsilon).to_dict()
            _, clustering = find_epsilon(req.values, req.target_k, req.k_range)
            return clustering.to_dict()

        return _domain(run)

    @app.post("/sample/horizon")
    def sample_horizon(req: HorizonSampleRequest) -> dict:
        def run():
            repo = req.repository.to_repository()
            return horizon_sample(
                repo,
                req.target_k,
                seed=req.seed,
                n_draws=req.n_draws,
                k_range=req.k_range,
            ).to_dict()

        return _domain(run)

    @app.post("/sample/progressive")
    def sample_progressive(req: ProgressiveRequest) -> dict:
        def run():
            repo = req.repository.to_repository()
            epsilon = req.epsilon
            if epsilon is None:
                epsilon, _ = find_epsilon(
                    repo.step_values(repo.horizon_steps), req.target_k, req.k_range
                )
            bundle = progressive_bundle(repo, epsilon)
            payload = bundle.to_dict()
            payload["frequency_levels"] = {
                str(count): level
                for count, level in sorted(frequency_levels(bundle, req.n_levels).items())
            }
            return payload

        return _domain(run)

    @app.post("/stats")
    def stats(req: StatsRequest) -> dict:
        def run():
            repo = req.repository.to_repository()
            return {
                "mean": mean_trajectory(repo),
                "band": ci95(repo, method=req.ci_method).to_dict(),
                "densities": [
                    kde_profile(repo.step_values(t), t, req.grid_points).to_dict()
                    for t in range(1, repo.horizon_steps + 1)
                ],
            }

        return _domain(run)

    @app.post("/render")
    def render(req: RenderRequest) -> Response:
        def run():
            repo = req.repository.to_repository()
            artifacts = prepare_artifacts(
                repo,
                req.design,
                seed=req.seed,
                target_k=req.target_k,
                k_range=req.k_range,
                n_draws=req.n_draws,
                epsilon=req.epsilon,
                grid_points=req.grid_points,
                ci_method=req.ci_method,
            )
            spec = ChartSpec(
                design=req.design,
                show_truth=req.show_truth,
                history_weeks=req.history_weeks,
            )
            return render_chart(repo, artifacts, spec).text

        return Response(content=_domain(run), media_type="image/svg+xml")

    @app.post("/metrics/fidelity")
    def fidelity(req: FidelityRequest) -> dict:
        def run():
            repo = req.repository.to_repository()
            return evaluate_strategy(
                req.strategy,
                repo,
                req.time_point,
                seed=req.seed,
                target_k=req.target_k,
                k_range=req.k_range,
                n_draws=req.n_draws,
                per_step=req.per_step,
            ).to_dict()

        return _domain(run)

    return app


app = create_app()
