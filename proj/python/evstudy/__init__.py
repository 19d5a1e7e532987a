"""Sector event studies: CAPM abnormal returns, rank and conditional-probability
tests, dummy-interaction risk shifts and a synthetic size/power lab."""

from __future__ import annotations

import json
import os
from typing import Any, Iterable, Mapping

from . import _core
from ._core import (
    ConfigError,
    DataError,
    EvstudyError,
    InsufficientDataError,
    RankDeficientError,
    SCHEMA_VERSION,
    __version__,
    car,
    conditional_probability,
    corrado_statistic,
    ols,
    significance_stars,
)

__all__ = [
    "ConfigError",
    "DataError",
    "EvstudyError",
    "InsufficientDataError",
    "RankDeficientError",
    "SCHEMA_VERSION",
    "__version__",
    "car",
    "conditional_probability",
    "config_hash",
    "corrado_statistic",
    "ols",
    "run_study",
    "significance_stars",
    "simulate_panel",
    "size_power_study",
]


def simulate_panel(spec: Mapping[str, Any] | None = None, **fields: Any) -> dict:
    """Simulate one panel. Keys follow the `synthetic` section of a study config."""
    merged = dict(spec or {})
    merged.update(fields)
    return _core.simulate_panel_json(json.dumps(merged))


def run_study(
    config: str | os.PathLike | Mapping[str, Any],
    out_dir: str | os.PathLike | None = None,
    formats: Iterable[str] | None = None,
    seed: int | None = None,
    threads: int = 0,
    base_dir: str | os.PathLike | None = None,
) -> dict:
    """Run a study from a config file path or an in-memory config mapping.

    Tables are written only when `out_dir` is given.
    """
    fmts = list(formats) if formats is not None else None
    out = os.fspath(out_dir) if out_dir is not None else None
    if isinstance(config, Mapping):
        cfg = dict(config)
        if seed is not None:
            if "synthetic" not in cfg:
                raise ConfigError("seed applies only to synthetic configurations")
            cfg["synthetic"] = {**cfg["synthetic"], "seed": seed}
        return _core.run_study_json(json.dumps(cfg), os.fspath(base_dir or os.getcwd()), out, fmts, threads)
    return _core.run_study_path(os.fspath(config), out, fmts, seed, threads)


def config_hash(config: Mapping[str, Any], base_dir: str | os.PathLike | None = None) -> str:
    return _core.config_hash_json(json.dumps(dict(config)), os.fspath(base_dir or os.getcwd()))


def size_power_study(plan: Mapping[str, Any], threads: int | None = None) -> list[dict]:
    """Rejection rates for a simulation plan (same keys as the `simulate` command input)."""
    return _core.size_power_study_json(json.dumps(dict(plan)), threads)
