"""Command-line entry points.

`run`/`report` drive benchmark suites; `init`/`suggest`/`observe` drive a
single ask-tell campaign through a JSON state file, for callers that
evaluate the objective themselves.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Any

import click
import numpy as np

from .acquisition import AcquisitionSpec
from .bench import emit_report, parse_config, read_report_medians, run_suite
from .boxopt import Bounds
from .campaign import (
    CampaignConfig,
    campaign_init,
    load_state,
    observe as campaign_observe,
    save_state,
    suggest as campaign_suggest,
)
from .errors import ConfigError, InputError, SequencingError
from .gp import KernelSpec
from .strategies import (
    DesignSpace,
    HierarchyLevel,
    HierarchySpec,
    StrategyConfig,
    default_acquisition,
)

EXIT_CONFIG_ERROR = 1
EXIT_RUNTIME_ERROR = 2


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_json(path: str) -> Any:
    try:
        with open(path) as handle:
            return json.load(handle)
    except FileNotFoundError:
        _fail(EXIT_CONFIG_ERROR, f"no such file: {path}")
    except json.JSONDecodeError as exc:
        _fail(EXIT_CONFIG_ERROR, f"invalid JSON in {path}: {exc}")


def _campaign_config(doc: dict[str, Any]) -> CampaignConfig:
    """Build a single-campaign config from a JSON document."""
    if not isinstance(doc, dict):
        raise ConfigError("document: expected a JSON object")
    known = {
        "strategy", "seed", "bounds", "constrained_dims", "ts_grid_per_dim",
        "hierarchy", "kernel", "batch_size",
    }
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"document: unknown field(s) {sorted(unknown)}")
    raw_strategy = doc.get("strategy")
    if isinstance(raw_strategy, str):
        raw_strategy = {"name": raw_strategy}
    if not isinstance(raw_strategy, dict) or "name" not in raw_strategy:
        raise ConfigError("strategy: expected a name or an object with a name")
    name = raw_strategy["name"]
    acq_defaults = default_acquisition(name) if name else None
    try:
        acq = AcquisitionSpec(
            kind=raw_strategy.get("acquisition", acq_defaults.kind),
            delta=float(raw_strategy.get("delta", 0.1)),
            beta=float(raw_strategy.get("beta", 2.0)),
            xi=float(raw_strategy.get("xi", 0.01)),
        )
        strategy = StrategyConfig(
            name=name,
            acquisition=acq,
            batch_size=int(raw_strategy.get(
                "batch_size", doc.get("batch_size", 4))),
            acq_budget=int(raw_strategy.get("acq_budget", 500)),
            restarts=int(raw_strategy.get("restarts", 5)),
            learn_noise=bool(raw_strategy.get("learn_noise", False)),
        )
        raw_bounds = doc.get("bounds")
        if not isinstance(raw_bounds, dict) or set(raw_bounds) != {"lower", "upper"}:
            raise ConfigError("bounds: expected an object with lower and upper")
        bounds = Bounds(np.array(raw_bounds["lower"]), np.array(raw_bounds["upper"]))
        hierarchy = None
        if doc.get("hierarchy") is not None:
            hierarchy = HierarchySpec(tuple(
                HierarchyLevel(tuple(int(i) for i in lvl["dims"]), int(lvl["batch_size"]))
                for lvl in doc["hierarchy"]
            ))
        space = None
        if name != "hpc_ts_ucb":
            dims = doc.get("constrained_dims")
            if dims is None:
                dims = tuple(range(bounds.dimension // 2))
            space = DesignSpace(
                bounds, tuple(int(i) for i in dims),
                int(doc.get("ts_grid_per_dim", 10)),
            )
        kernel = KernelSpec(**doc["kernel"]) if doc.get("kernel") else KernelSpec()
        return CampaignConfig(
            strategy=strategy, seed=int(doc.get("seed", 0)),
            space=space, hierarchy=hierarchy,
            bounds=bounds if name == "hpc_ts_ucb" else None,
            kernel=kernel,
        )
    except (InputError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


@click.group()
def main() -> None:
    """Batch Bayesian optimization under process constraints."""


@main.command("run")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path())
def run_cmd(config_path: str, out_dir: str) -> None:
    """Run a benchmark suite and write report CSVs."""
    doc = _load_json(config_path)
    try:
        config = parse_config(doc)
    except ConfigError as exc:
        _fail(EXIT_CONFIG_ERROR, str(exc))
    try:
        results = run_suite(config)
        paths = emit_report(results, out_dir)
    except Exception as exc:  # noqa: BLE001
        _fail(EXIT_RUNTIME_ERROR, str(exc))
    for path in paths:
        click.echo(str(path))
    if results.failed:
        click.echo(f"{results.failed} campaign(s) failed", err=True)


@main.command("report")
@click.option("--in", "in_dir", required=True, type=click.Path())
def report_cmd(in_dir: str) -> None:
    """Summarize an existing report directory."""
    try:
        medians = read_report_medians(in_dir)
    except InputError as exc:
        _fail(EXIT_CONFIG_ERROR, str(exc))
    except Exception as exc:  # noqa: BLE001
        _fail(EXIT_RUNTIME_ERROR, str(exc))
    for (strategy, objective), values in sorted(medians.items()):
        click.echo(
            f"{strategy} on {objective}: final median log10 regret "
            f"{values[-1]:.4f} over {len(values)} iterations"
        )


@main.command("init")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--state", "state_path", required=True, type=click.Path())
def init_cmd(config_path: str, state_path: str) -> None:
    """Create a fresh campaign state file from a config."""
    doc = _load_json(config_path)
    try:
        config = _campaign_config(doc)
    except ConfigError as exc:
        _fail(EXIT_CONFIG_ERROR, str(exc))
    try:
        save_state(campaign_init(config), state_path)
    except Exception as exc:  # noqa: BLE001
        _fail(EXIT_RUNTIME_ERROR, str(exc))
    click.echo(state_path)


@main.command("suggest")
@click.option("--state", "state_path", required=True, type=click.Path())
def suggest_cmd(state_path: str) -> None:
    """Propose the next batch and update the state file in place."""
    try:
        state = load_state(state_path)
    except FileNotFoundError:
        _fail(EXIT_CONFIG_ERROR, f"no such file: {state_path}")
    except InputError as exc:
        _fail(EXIT_CONFIG_ERROR, str(exc))
    try:
        proposal, state = campaign_suggest(state)
        save_state(state, state_path)
    except SequencingError as exc:
        _fail(EXIT_RUNTIME_ERROR, str(exc))
    except Exception as exc:  # noqa: BLE001
        _fail(EXIT_RUNTIME_ERROR, str(exc))
    for point in proposal.points:
        click.echo(",".join(repr(float(v)) for v in point))


@main.command("observe")
@click.option("--state", "state_path", required=True, type=click.Path())
@click.option("--values", "values_text", required=True)
def observe_cmd(state_path: str, values_text: str) -> None:
    """Record observed values for the pending batch."""
    try:
        state = load_state(state_path)
    except FileNotFoundError:
        _fail(EXIT_CONFIG_ERROR, f"no such file: {state_path}")
    except InputError as exc:
        _fail(EXIT_CONFIG_ERROR, str(exc))
    try:
        values = np.array([float(v) for v in values_text.split(",")])
    except ValueError:
        _fail(EXIT_CONFIG_ERROR, f"invalid values list: {values_text!r}")
    try:
        state = campaign_observe(state, values)
        save_state(state, state_path)
    except (InputError, SequencingError) as exc:
        _fail(EXIT_RUNTIME_ERROR, str(exc))
    except Exception as exc:  # noqa: BLE001
        _fail(EXIT_RUNTIME_ERROR, str(exc))
    best = state.best
    if best is not None:
        click.echo(f"iteration {state.t} recorded, best value {best[1]!r}")


if __name__ == "__main__":
    main()
