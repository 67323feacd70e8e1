"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data/config error, 3 output I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from datetime import date
from pathlib import Path

from .clustering import dbscan_1d, find_epsilon
from .config import (
    RunConfig,
    build_config,
    config_hash,
    config_to_toml,
    load_config_file,
)
from .data import (
    DataError,
    filter_models,
    load_repository,
    load_study_points,
    load_time_points,
    repository_to_dict,
)
from .metrics import STRATEGIES, bench, format_summary_table, reports_to_csv
from .render import ChartSpec, prepare_artifacts, render_batch, render_chart
from .sampling import horizon_sample, progressive_bundle, frequency_levels
from .stats import ci95, kde_profile, mean_trajectory

DEFAULT_BENCH_STRATEGIES = "full-mfv,horizon,progressive-base,mean-only"


class _UsageError(Exception):
    def __init__(self, parser: argparse.ArgumentParser, message: str):
        super().__init__(message)
        self.parser = parser


class _CliParser(argparse.ArgumentParser):
    def error(self, message: str):
        raise _UsageError(self, message)


def _data_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", metavar="TOML", help="flat TOML config file")
    p.add_argument("--forecast-csv", metavar="CSV")
    p.add_argument("--truth-csv", metavar="CSV")
    p.add_argument("--time-points-csv", metavar="CSV")
    p.add_argument(
        "--reference-date", type=date.fromisoformat, metavar="YYYY-MM-DD"
    )
    p.add_argument("--time-point", metavar="ID", help="pick a reference date by time point id")
    p.add_argument("--horizon", type=int, metavar="H")
    p.add_argument("--target-k", type=int, metavar="K")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-draws", type=int, metavar="N")
    p.add_argument("--out", metavar="PATH")
    p.add_argument(
        "--print-config",
        action="store_true",
        help="print the effective config as TOML and exit",
    )
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _CliParser(prog="mfvkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    parent = _data_parent()

    p = sub.add_parser("ingest", parents=[parent], help="load, validate, and summarize a repository")
    p.set_defaults(handler=_cmd_ingest)

    p = sub.add_parser("cluster", parents=[parent], help="cluster a newline-separated value file")
    p.add_argument("values_file", help="path to one value per line, or - for stdin")
    p.add_argument("--epsilon", type=float, help="fixed radius (otherwise searched for --target-k)")
    p.set_defaults(handler=_cmd_cluster)

    p = sub.add_parser("sample", help="representative-subset sampling")
    sample_sub = p.add_subparsers(dest="mode", required=True)
    ph = sample_sub.add_parser("horizon", parents=[parent], help="one series per horizon cluster")
    ph.set_defaults(handler=_cmd_sample_horizon)
    pp = sample_sub.add_parser("progressive", parents=[parent], help="per-step cluster flow")
    pp.add_argument("--epsilon", type=float, help="cluster radius (default: horizon-sampling radius)")
    pp.add_argument("--n-levels", type=int, help="frequency level count")
    pp.set_defaults(handler=_cmd_sample_progressive)

    p = sub.add_parser("stats", parents=[parent], help="mean / interval band / density summaries")
    p.add_argument("--stat", choices=("mean", "ci", "density", "all"), default="all")
    p.add_argument("--grid-points", type=int)
    p.add_argument("--ci-method", choices=("percentile", "normal"))
    p.set_defaults(handler=_cmd_stats)

    p = sub.add_parser("render", parents=[parent], help="render one chart to SVG")
    p.add_argument("--design", required=True)
    p.add_argument("--truth", action="store_true", help="mark the observed value at the horizon")
    p.add_argument("--epsilon", type=float, help="cluster radius for progressive designs")
    p.add_argument("--history-weeks", type=int)
    p.set_defaults(handler=_cmd_render)

    p = sub.add_parser(
        "render-batch", parents=[parent], help="render the full stimulus set + manifest"
    )
    p.add_argument("--epsilon", type=float, help="radius override for the frequency-mapped design")
    p.add_argument("--history-weeks", type=int)
    p.set_defaults(handler=_cmd_render_batch)

    p = sub.add_parser("bench", parents=[parent], help="strategy fidelity benchmark")
    p.add_argument(
        "--strategies",
        default=DEFAULT_BENCH_STRATEGIES,
        help=f"comma-separated subset of: {', '.join(STRATEGIES)}",
    )
    p.add_argument("--n-seeds", type=int, default=20)
    p.add_argument("--per-step", action="store_true", help="average distances over all steps")
    p.set_defaults(handler=_cmd_bench)

    p = sub.add_parser("repo", help="repository inspection")
    repo_sub = p.add_subparsers(dest="mode", required=True)
    pd = repo_sub.add_parser("dump", parents=[parent], help="dump the loaded repository as JSON")
    pd.add_argument("--filtered", action="store_true", help="apply model filtering before dumping")
    pd.set_defaults(handler=_cmd_repo_dump)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=_cmd_serve)

    return parser


_FLAG_KEYS = (
    "forecast_csv",
    "truth_csv",
    "time_points_csv",
    "reference_date",
    "horizon",
    "target_k",
    "seed",
    "n_draws",
    "grid_points",
    "ci_method",
    "history_weeks",
    "n_levels",
)
_FLAG_PATHS = ("forecast_csv", "truth_csv", "time_points_csv")


def _effective_config(args: argparse.Namespace) -> RunConfig:
    file_values = load_config_file(args.config) if getattr(args, "config", None) else None
    flag_values = {k: getattr(args, k, None) for k in _FLAG_KEYS}
    for key in _FLAG_PATHS:
        if flag_values[key] is not None:
            flag_values[key] = Path(flag_values[key])
    return build_config(file_values, flag_values, os.environ.get("MFV_SEED"))


def _printed_config(args: argparse.Namespace, cfg: RunConfig) -> bool:
    if getattr(args, "print_config", False):
        sys.stdout.write(config_to_toml(cfg))
        return True
    return False


def _require(cfg: RunConfig, *names: str) -> None:
    for name in names:
        if getattr(cfg, name) is None:
            flag = "--" + name.replace("_", "-")
            raise DataError(f"{name} is required (pass {flag} or set it in the config)")


def _resolve_reference_date(cfg: RunConfig, args: argparse.Namespace) -> date:
    tp = getattr(args, "time_point", None)
    if tp:
        _require(cfg, "time_points_csv")
        metas = {m.id: m for m in load_time_points(cfg.time_points_csv)}
        if tp not in metas:
            raise DataError(
                f"unknown time point {tp!r}; known: {', '.join(sorted(metas))}"
            )
        return metas[tp].date_of_forecast
    if cfg.reference_date is None:
        raise DataError("a reference date is required (--reference-date or --time-point)")
    return cfg.reference_date


def _load_filtered(cfg: RunConfig, args: argparse.Namespace):
    _require(cfg, "forecast_csv", "truth_csv")
    ref = _resolve_reference_date(cfg, args)
    repo = load_repository(cfg.forecast_csv, cfg.truth_csv, ref, cfg.horizon)
    return filter_models(repo, cfg.excluded_prefixes)


def _require_seed(cfg: RunConfig) -> int:
    if cfg.seed is None:
        raise DataError("a seed is required (--seed, MFV_SEED, or config key seed)")
    return cfg.seed


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_json(payload: dict, out: str | None) -> None:
    _emit(json.dumps(payload, indent=2) + "\n", out)


def _read_values(source: str) -> list[float]:
    if source == "-":
        name, lines = "<stdin>", sys.stdin.read().splitlines()
    else:
        try:
            lines = Path(source).read_text(encoding="utf-8").splitlines()
        except FileNotFoundError as exc:
            raise DataError(f"missing file: {source}") from exc
        name = source
    values: list[float] = []
    for i, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError as exc:
            raise DataError(f"{name}:{i}: bad value {line!r}") from exc
    if not values:
        raise DataError(f"{name}: no values supplied")
    return values


def _cmd_ingest(args) -> int:
    cfg = _effective_config(args)
    if _printed_config(args, cfg):
        return 0
    _require(cfg, "forecast_csv", "truth_csv")
    ref = _resolve_reference_date(cfg, args)
    repo = load_repository(cfg.forecast_csv, cfg.truth_csv, ref, cfg.horizon)
    filtered = filter_models(repo, cfg.excluded_prefixes)
    complete = sum(s.is_complete for s in repo.forecasts)
    print(f"reference date {ref}, horizon {cfg.horizon} weeks")
    print(f"loaded {len(repo.forecasts)} models ({complete} complete)")
    print(
        f"after filtering (prefixes: {', '.join(cfg.excluded_prefixes) or 'none'}): "
        f"{len(filtered.forecasts)} models"
    )
    print(f"history: {len(repo.history.dates)} weekly points through {ref}")
    truth = repo.truth_at_horizon
    print(
        f"truth at horizon ({repo.horizon_date}): "
        + ("not yet observed" if truth is None else f"{truth}")
    )
    return 0


def _cmd_cluster(args) -> int:
    cfg = _effective_config(args)
    if _printed_config(args, cfg):
        return 0
    values = _read_values(args.values_file)
    if args.epsilon is not None:
        clustering = dbscan_1d(values, args.epsilon)
    else:
        _, clustering = find_epsilon(values, cfg.target_k, cfg.k_range)
    _emit_json(clustering.to_dict(), args.out)
    return 0


def _cmd_sample_horizon(args) -> int:
    cfg = _effective_config(args)
    if _printed_config(args, cfg):
        return 0
    repo = _load_filtered(cfg, args)
    sample = horizon_sample(
        repo,
        cfg.target_k,
        seed=_require_seed(cfg),
        n_draws=cfg.n_draws,
        k_range=cfg.k_range,
    )
    _emit_json(sample.to_dict(), args.out)
    return 0


def _cmd_sample_progressive(args) -> int:
    cfg = _effective_config(args)
    if _printed_config(args, cfg):
        return 0
    repo = _load_filtered(cfg, args)
    epsilon = args.epsilon
    if epsilon is None:
        epsilon, _ = find_epsilon(
            repo.step_values(repo.horizon_steps), cfg.target_k, cfg.k_range
        )
    bundle = progressive_bundle(repo, epsilon)
    payload = bundle.to_dict()
    payload["frequency_levels"] = {
        str(count): level
        for count, level in sorted(frequency_levels(bundle, cfg.n_levels).items())
    }
    _emit_json(payload, args.out)
    return 0


def _cmd_stats(args) -> int:
    cfg = _effective_config(args)
    if _printed_config(args, cfg):
        return 0
    repo = _load_filtered(cfg, args)
    payload: dict = {}
    if args.stat in ("mean", "all"):
        payload["mean"] = mean_trajectory(repo)
    if args.stat in ("ci", "all"):
        payload["band"] = ci95(repo, method=cfg.ci_method).to_dict()
    if args.stat in ("density", "all"):
        payload["densities"] = [
            kde_profile(repo.step_values(t), t, cfg.grid_points).to_dict()
            for t in range(1, repo.horizon_steps + 1)
        ]
    _emit_json(payload, args.out)
    return 0


def _cmd_render(args) -> int:
    cfg = _effective_config(args)
    if _printed_config(args, cfg):
        return 0
    repo = _load_filtered(cfg, args)
    artifacts = prepare_artifacts(
        repo,
        args.design,
        seed=cfg.seed,
        target_k=cfg.target_k,
        k_range=cfg.k_range,
        n_draws=cfg.n_draws,
        epsilon=args.epsilon,
        grid_points=cfg.grid_points,
        ci_method=cfg.ci_method,
    )
    spec = ChartSpec(
        design=args.design, show_truth=args.truth, history_weeks=cfg.history_weeks
    )
    doc = render_chart(repo, artifacts, spec)
    _emit(doc.text, args.out)
    return 0


def _cmd_render_batch(args) -> int:
    cfg = _effective_config(args)
    if _printed_config(args, cfg):
        return 0
    _require(cfg, "forecast_csv", "truth_csv", "time_points_csv")
    seed = _require_seed(cfg)
    out_dir = Path(args.out) if args.out else cfg.out_dir
    if out_dir is None:
        raise DataError("an output directory is required (--out or config key out_dir)")
    metas = load_time_points(cfg.time_points_csv)
    pairs = load_study_points(
        cfg.forecast_csv, cfg.truth_csv, metas, cfg.horizon, cfg.excluded_prefixes
    )
    frequency_epsilon = args.epsilon if args.epsilon is not None else cfg.frequency_epsilon
    manifest = render_batch(
        pairs,
        out_dir,
        seed=seed,
        target_k=cfg.target_k,
        k_range=cfg.k_range,
        n_draws=cfg.n_draws,
        history_weeks=cfg.history_weeks,
        grid_points=cfg.grid_points,
        ci_method=cfg.ci_method,
        frequency_epsilon=frequency_epsilon,
        config_hash=config_hash(cfg),
    )
    print(f"wrote {len(manifest['files'])} SVG files + manifest.json to {out_dir}")
    return 0


def _cmd_bench(args) -> int:
    cfg = _effective_config(args)
    if _printed_config(args, cfg):
        return 0
    _require(cfg, "forecast_csv", "truth_csv", "time_points_csv")
    seed = _require_seed(cfg)
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    unknown = [s for s in strategies if s not in STRATEGIES]
    if unknown:
        raise DataError(
            f"unknown strategies: {', '.join(unknown)}; choose from {', '.join(STRATEGIES)}"
        )
    if args.n_seeds < 1:
        raise DataError("--n-seeds must be >= 1")
    metas = load_time_points(cfg.time_points_csv)
    pairs = load_study_points(
        cfg.forecast_csv, cfg.truth_csv, metas, cfg.horizon, cfg.excluded_prefixes
    )
    study_pairs = [(m, r) for m, r in pairs if m.purpose == "study"]
    if not study_pairs:
        raise DataError("no study time points to benchmark")
    seeds = list(range(seed, seed + args.n_seeds))
    reports = bench(
        strategies,
        study_pairs,
        seeds,
        target_k=cfg.target_k,
        k_range=cfg.k_range,
        n_draws=cfg.n_draws,
        per_step=args.per_step,
    )
    out = args.out or "bench.csv"
    Path(out).write_text(reports_to_csv(reports), encoding="utf-8")
    sys.stdout.write(format_summary_table(reports))
    print(f"wrote {len(reports)} rows to {out}")
    return 0


def _cmd_repo_dump(args) -> int:
    cfg = _effective_config(args)
    if _printed_config(args, cfg):
        return 0
    _require(cfg, "forecast_csv", "truth_csv")
    ref = _resolve_reference_date(cfg, args)
    repo = load_repository(cfg.forecast_csv, cfg.truth_csv, ref, cfg.horizon)
    if args.filtered:
        repo = filter_models(repo, cfg.excluded_prefixes)
    _emit_json(repository_to_dict(repo), args.out)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        exc.parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return int(args.handler(args))
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
