"""Run configuration: flat TOML files merged with CLI flags.

Precedence is defaults < config file < flags; relative paths inside a config
file resolve against the file's directory.  ``config_to_toml`` emits the
effective configuration with absolute paths so a printed config reproduces
the same run from anywhere.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace
from datetime import date
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .data import DEFAULT_EXCLUDED_PREFIXES, DataError

_PATH_KEYS = ("forecast_csv", "truth_csv", "time_points_csv", "out_dir")


@dataclass(frozen=True)
class RunConfig:
    forecast_csv: Path | None = None
    truth_csv: Path | None = None
    time_points_csv: Path | None = None
    reference_date: date | None = None
    horizon: int = 4
    target_k: int = 8
    k_range: tuple[int, int] = (6, 9)
    seed: int | None = None
    n_draws: int = 64
    excluded_prefixes: tuple[str, ...] = DEFAULT_EXCLUDED_PREFIXES
    out_dir: Path | None = None
    history_weeks: int = 12
    n_levels: int = 5
    grid_points: int = 128
    ci_method: str = "percentile"
    frequency_epsilon: float | None = None

    def __post_init__(self) -> None:
        lo, hi = self.k_range
        if not lo <= self.target_k <= hi:
            raise DataError(f"target_k={self.target_k} outside k_range={list(self.k_range)}")
        if self.horizon < 1:
            raise DataError("horizon must be >= 1")
        if self.n_draws < 1:
            raise DataError("n_draws must be >= 1")


_FIELD_NAMES = tuple(f.name for f in fields(RunConfig))


def load_config_file(path: str | Path) -> dict:
    """Parse a flat TOML config; path values resolve against the file's dir."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise DataError(f"missing config file: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise DataError(f"{path}: bad TOML: {exc}") from exc

    unknown = sorted(set(raw) - set(_FIELD_NAMES))
    if unknown:
        raise DataError(f"{path}: unknown config key(s): {', '.join(unknown)}")

    base = path.parent
    out: dict = {}
    for key, value in raw.items():
        if key in _PATH_KEYS:
            p = Path(value)
            out[key] = p if p.is_absolute() else (base / p)
        elif key == "k_range":
            if not (isinstance(value, list) and len(value) == 2):
                raise DataError(f"{path}: k_range must be a two-element array")
            out[key] = (int(value[0]), int(value[1]))
        elif key == "excluded_prefixes":
            out[key] = tuple(str(v) for v in value)
        else:
            out[key] = value
    return out


def build_config(
    file_values: dict | None = None,
    flag_values: dict | None = None,
    env_seed: str | None = None,
) -> RunConfig:
    """Merge defaults, a parsed config file, and CLI flag values.

    Flag entries that are ``None`` are treated as "not given".  ``env_seed``
    (the MFV_SEED environment variable) fills the seed only when neither the
    file nor a flag set one.
    """
    merged: dict = dict(file_values or {})
    for key, value in (flag_values or {}).items():
        if value is None:
            continue
        if key not in _FIELD_NAMES:
            raise ValueError(f"unknown config field {key!r}")
        merged[key] = value
    if merged.get("seed") is None and env_seed is not None:
        try:
            merged["seed"] = int(env_seed)
        except ValueError as exc:
            raise DataError(f"MFV_SEED must be an integer, got {env_seed!r}") from exc
    try:
        return RunConfig(**merged)
    except TypeError as exc:
        raise DataError(f"bad configuration: {exc}") from exc


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, date):
        return value.isoformat()
    if isinstance(value, Path):
        return _toml_value(str(value.resolve()))
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {value!r} to TOML")


def config_to_toml(cfg: RunConfig) -> str:
    """Emit the effective config as flat TOML, omitting unset keys."""
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if value is None:
            continue
        lines.append(f"{f.name} = {_toml_value(value)}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: RunConfig) -> str:
    """Stable short hash of the effective configuration."""
    return hashlib.sha256(config_to_toml(cfg).encode("utf-8")).hexdigest()[:16]


def with_updates(cfg: RunConfig, **updates) -> RunConfig:
    return replace(cfg, **updates)
