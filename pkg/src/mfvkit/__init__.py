"""Representative sampling and stimulus rendering for forecast repositories.

Select small, faithful subsets of a repository of weekly time-series
forecasts (horizon sampling, progressive sampling), summarize the full
set (mean, interval band, per-step densities), render the eight chart
designs as deterministic SVG, and benchmark the strategies' computational
fidelity.
"""

__version__ = "0.1.0"

from .clustering import Cluster, Clustering, dbscan_1d, find_epsilon
from .data import (
    DataError,
    ForecastRepository,
    ForecastSeries,
    TimePointMeta,
    TruthSeries,
    filter_models,
    load_repository,
    load_study_points,
    load_time_points,
    load_truth,
    repository_from_dict,
    repository_from_json,
    repository_to_dict,
    repository_to_json,
    step_date,
)
from .metrics import (
    PROXY_DISCLAIMER,
    STRATEGIES,
    FidelityReport,
    bench,
    evaluate_strategy,
    format_summary_table,
    reports_to_csv,
    truth_coverage,
    wasserstein_1d,
)
from .render import (
    DESIGNS,
    ChartArtifacts,
    ChartSpec,
    MissingArtifactError,
    Palette,
    SvgDocument,
    build_layout,
    prepare_artifacts,
    render_batch,
    render_chart,
)
from .sampling import (
    ClusterSummary,
    HorizonSample,
    ProgressiveBundle,
    SampleScore,
    Transition,
    count_crossings,
    default_frequency_epsilon,
    frequency_levels,
    horizon_sample,
    progressive_bundle,
)
from .stats import (
    BandSeries,
    DensityProfile,
    central95,
    ci95,
    kde_profile,
    mean_trajectory,
    percentile_linear,
)

__all__ = [
    "__version__",
    "BandSeries",
    "ChartArtifacts",
    "ChartSpec",
    "Cluster",
    "Clustering",
    "ClusterSummary",
    "DataError",
    "DensityProfile",
    "DESIGNS",
    "FidelityReport",
    "ForecastRepository",
    "ForecastSeries",
    "HorizonSample",
    "MissingArtifactError",
    "Palette",
    "PROXY_DISCLAIMER",
    "ProgressiveBundle",
    "SampleScore",
    "STRATEGIES",
    "SvgDocument",
    "TimePointMeta",
    "Transition",
    "TruthSeries",
    "bench",
    "build_layout",
    "central95",
    "ci95",
    "count_crossings",
    "dbscan_1d",
    "default_frequency_epsilon",
    "evaluate_strategy",
    "filter_models",
    "find_epsilon",
    "format_summary_table",
    "frequency_levels",
    "horizon_sample",
    "kde_profile",
    "load_repository",
    "load_study_points",
    "load_time_points",
    "load_truth",
    "mean_trajectory",
    "percentile_linear",
    "prepare_artifacts",
    "progressive_bundle",
    "render_batch",
    "render_chart",
    "reports_to_csv",
    "repository_from_dict",
    "repository_from_json",
    "repository_to_dict",
    "repository_to_json",
    "step_date",
    "truth_coverage",
    "wasserstein_1d",
]
