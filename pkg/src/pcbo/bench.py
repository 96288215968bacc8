"""Benchmark suites: config parsing, strategy x objective x seed runs, and
CSV report emission.

Execution is sequential and fully seeded, so rerunning a config reproduces
the report files byte for byte apart from the timestamp header line.
"""

from __future__ import annotations

import datetime
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .acquisition import AcquisitionSpec
from .errors import ConfigError, InputError
from .metrics import RegretSeries, best_so_far_series, kde, median_series
from .objectives import Objective, make_objective
from .strategies import (
    STRATEGY_NAMES,
    DesignSpace,
    HierarchyLevel,
    HierarchySpec,
    StrategyConfig,
    default_acquisition,
    run_campaign,
)

KDE_GRID = np.linspace(-12.0, 0.0, 121)
FLOAT_FORMAT = "%.17g"


@dataclass(frozen=True)
class ObjectiveEntry:
    label: str
    spec: dict[str, Any]


@dataclass(frozen=True)
class SuiteConfig:
    objectives: tuple[ObjectiveEntry, ...]
    strategies: tuple[StrategyConfig, ...]
    T: int
    batch_size: int
    seeds: tuple[int, ...]
    constrained_dims: tuple[int, ...] | None
    hierarchy: tuple[HierarchyLevel, ...] | None
    ts_grid_per_dim: int
    out_dir: str | None

    def __post_init__(self) -> None:
        if not self.objectives:
            raise ConfigError("objectives: must be non-empty")
        if not self.strategies:
            raise ConfigError("strategies: must be non-empty")
        if not self.seeds:
            raise ConfigError("seeds: must be non-empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds: must be distinct")
        if self.batch_size < 1:
            raise ConfigError("batch_size: must be >= 1")
        if self.T < 1:
            raise ConfigError("T: must be >= 1")


def _is_gmm(entry: dict[str, Any] | str) -> bool:
    name = entry if isinstance(entry, str) else entry.get("name", "")
    return str(name).startswith("gmm")


def _objective_entry(raw: dict[str, Any] | str, path: str) -> ObjectiveEntry:
    if isinstance(raw, str):
        raw = {"name": raw}
    if not isinstance(raw, dict) or "name" not in raw:
        raise ConfigError(f"{path}: expected a name or an object with a name")
    label = str(raw.get("label", raw["name"]))
    return ObjectiveEntry(label=label, spec=dict(raw))


def _strategy_config(raw: dict[str, Any] | str, path: str, defaults: dict[str, float],
                     batch_size: int) -> StrategyConfig:
    if isinstance(raw, str):
        raw = {"name": raw}
    if not isinstance(raw, dict) or "name" not in raw:
        raise ConfigError(f"{path}: expected a name or an object with a name")
    name = raw["name"]
    if name not in STRATEGY_NAMES:
        raise ConfigError(f"{path}.name: unknown strategy {name!r}")
    acq = default_acquisition(name)
    acq = AcquisitionSpec(
        kind=raw.get("acquisition", acq.kind),
        delta=float(raw.get("delta", defaults["delta"])),
        beta=float(raw.get("beta", defaults["beta"])),
        xi=float(raw.get("xi", defaults["xi"])),
    )
    try:
        return StrategyConfig(
            name=name,
            acquisition=acq,
            batch_size=int(raw.get("batch_size", batch_size)),
            acq_budget=int(raw.get("acq_budget", 500)),
            restarts=int(raw.get("restarts", 5)),
            learn_noise=bool(raw.get("learn_noise", False)),
        )
    except InputError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def parse_config(document: dict[str, Any] | str) -> SuiteConfig:
    """Validate a suite config document and apply defaults."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"document: invalid JSON ({exc})") from exc
    if not isinstance(document, dict):
        raise ConfigError("document: expected a JSON object")
    known = {
        "objectives", "strategies", "T", "batch_size", "seeds",
        "constrained_dims", "hierarchy", "ts_grid_per_dim", "out_dir",
        "delta", "beta", "xi",
    }
    unknown = set(document) - known
    if unknown:
        raise ConfigError(f"document: unknown field(s) {sorted(unknown)}")
    raw_objectives = document.get("objectives")
    if not isinstance(raw_objectives, list) or not raw_objectives:
        raise ConfigError("objectives: must be a non-empty list")
    objectives = tuple(
        _objective_entry(raw, f"objectives[{i}]")
        for i, raw in enumerate(raw_objectives)
    )
    raw_strategies = document.get("strategies")
    if not isinstance(raw_strategies, list) or not raw_strategies:
        raise ConfigError("strategies: must be a non-empty list")

    defaults = {
        "delta": float(document.get("delta", 0.1)),
        "beta": float(document.get("beta", 2.0)),
        "xi": float(document.get("xi", 0.01)),
    }
    batch_size = int(document.get("batch_size", 4))
    strategies = tuple(
        _strategy_config(raw, f"strategies[{i}]", defaults, batch_size)
        for i, raw in enumerate(raw_strategies)
    )
    all_gmm = all(_is_gmm(raw) for raw in raw_objectives)
    T = int(document.get("T", 25 if all_gmm else 75))
    seeds = tuple(int(s) for s in document.get("seeds", range(10)))
    constrained_dims = document.get("constrained_dims")
    if constrained_dims is not None:
        constrained_dims = tuple(int(i) for i in constrained_dims)
    hierarchy = None
    if document.get("hierarchy") is not None:
        raw_h = document["hierarchy"]
        if not isinstance(raw_h, list) or not raw_h:
            raise ConfigError("hierarchy: must be a non-empty list of levels")
        levels = []
        for i, raw_lvl in enumerate(raw_h):
            if not isinstance(raw_lvl, dict) or set(raw_lvl) != {"dims", "batch_size"}:
                raise ConfigError(
                    f"hierarchy[{i}]: expected fields dims and batch_size"
                )
            levels.append(HierarchyLevel(
                tuple(int(j) for j in raw_lvl["dims"]), int(raw_lvl["batch_size"]),
            ))
        hierarchy = tuple(levels)
    if any(s.name == "hpc_ts_ucb" for s in strategies) and hierarchy is None:
        raise ConfigError("hierarchy: required when hpc_ts_ucb is configured")
    try:
        return SuiteConfig(
            objectives=objectives,
            strategies=strategies,
            T=T,
            batch_size=batch_size,
            seeds=seeds,
            constrained_dims=constrained_dims,
            hierarchy=hierarchy,
            ts_grid_per_dim=int(document.get("ts_grid_per_dim", 10)),
            out_dir=document.get("out_dir"),
        )
    except InputError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class RunResult:
    strategy: str
    objective: str
    seed: int
    series: RegretSeries | None
    error: str | None = None


@dataclass
class SuiteResults:
    config: SuiteConfig
    runs: list[RunResult] = field(default_factory=list)

    @property
    def failed(self) -> int:
        return sum(1 for r in self.runs if r.error is not None)


def _design_space(config: SuiteConfig, objective: Objective) -> DesignSpace:
    d = objective.dimension
    if config.constrained_dims is not None:
        dims = config.constrained_dims
    else:
        dims = tuple(range(d // 2))  # default: first half of the coordinates
    return DesignSpace(objective.bounds, dims, config.ts_grid_per_dim)


def run_suite(config: SuiteConfig) -> SuiteResults:
    """Run every strategy x objective x seed campaign sequentially.

    Objectives are all built up front so a bad registration aborts before
    any campaign runs; individual campaign failures are recorded and the
    suite continues.
    """
    built: list[tuple[ObjectiveEntry, Objective]] = [
        (entry, make_objective(entry.spec)) for entry in config.objectives
    ]
    results = SuiteResults(config)
    for entry, objective in built:
        space = _design_space(config, objective)
        hierarchy = HierarchySpec(config.hierarchy) if config.hierarchy else None
        for strategy in config.strategies:
            for seed in config.seeds:
                kwargs: dict[str, Any]
                if strategy.name == "hpc_ts_ucb":
                    kwargs = {"hierarchy": hierarchy, "bounds": objective.bounds}
                else:
                    kwargs = {"space": space}
                try:
                    history = run_campaign(
                        strategy, objective, config.T, seed, **kwargs
                    )
                    if history.error is not None:
                        raise InputError(history.error)
                    series = best_so_far_series(
                        [rec.values for rec in history.iterations],
                        objective.f_star,
                    )
                    results.runs.append(RunResult(
                        strategy.name, entry.label, seed, series,
                    ))
                except Exception as exc:  # noqa: BLE001 - record, keep going
                    results.runs.append(RunResult(
                        strategy.name, entry.label, seed, None, str(exc),
                    ))
    return results


def _fmt(value: float) -> str:
    return FLOAT_FORMAT % value


def emit_report(results: SuiteResults, out_dir: str | Path) -> list[Path]:
    """Write runs.csv, median.csv, and kde.csv under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    timestamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    header = f"# generated {timestamp} failed={results.failed}\n"
    ok_runs = sorted(
        (r for r in results.runs if r.series is not None),
        key=lambda r: (r.strategy, r.objective, r.seed),
    )

    runs_path = out / "runs.csv"
    with open(runs_path, "w") as handle:
        handle.write(header)
        handle.write("strategy,objective,seed,iteration,best_value,norm_regret,log10_norm_regret\n")
        for run in ok_runs:
            series = run.series
            for i in range(len(series)):
                handle.write(",".join([
                    run.strategy, run.objective, str(run.seed), str(i),
                    _fmt(series.best_values[i]),
                    _fmt(series.norm_regret[i]),
                    _fmt(series.log10_norm_regret[i]),
                ]) + "\n")

    grouped: dict[tuple[str, str], list[RunResult]] = {}
    for run in ok_runs:
        grouped.setdefault((run.strategy, run.objective), []).append(run)

    median_path = out / "median.csv"
    with open(median_path, "w") as handle:
        handle.write(header)
        handle.write("strategy,objective,iteration,median_log10_norm_regret\n")
        for (strategy, objective), runs in sorted(grouped.items()):
            med = median_series([r.series.log10_norm_regret for r in runs])
            for i, value in enumerate(med):
                handle.write(f"{strategy},{objective},{i},{_fmt(value)}\n")

    kde_path = out / "kde.csv"
    with open(kde_path, "w") as handle:
        handle.write(header)
        handle.write("strategy,objective,eval_point,density\n")
        for (strategy, objective), runs in sorted(grouped.items()):
            finals = np.array([r.series.log10_norm_regret[-1] for r in runs])
            density = kde(finals, KDE_GRID)
            for x, y in zip(KDE_GRID, density):
                handle.write(f"{strategy},{objective},{_fmt(x)},{_fmt(y)}\n")

    return [runs_path, median_path, kde_path]


def read_report_medians(in_dir: str | Path) -> dict[tuple[str, str], np.ndarray]:
    """Load median.csv back into per-(strategy, objective) arrays."""
    path = Path(in_dir) / "median.csv"
    if not path.exists():
        raise InputError(f"no median.csv under {in_dir}")
    grouped: dict[tuple[str, str], list[float]] = {}
    with open(path) as handle:
        for line in handle:
            if line.startswith("#") or line.startswith("strategy,"):
                continue
            strategy, objective, _, value = line.rstrip("\n").split(",")
            grouped.setdefault((strategy, objective), []).append(float(value))
    return {key: np.array(vals) for key, vals in grouped.items()}
