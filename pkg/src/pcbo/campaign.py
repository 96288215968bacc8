"""Ask-tell campaign state: suggest/observe stepping and JSON persistence.

A campaign alternates suggest (propose a batch) and observe (ingest its
values).  The full state round-trips through JSON so campaigns can be driven
across process boundaries; the serialized form carries a schema version and
unknown fields are rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from .acquisition import AcquisitionSpec
from .boxopt import Bounds
from .errors import InputError, SequencingError
from .gp import KernelSpec
from .strategies import (
    BatchProposal,
    DesignSpace,
    HierarchyLevel,
    HierarchySpec,
    KernelState,
    StrategyConfig,
    initial_batch,
    propose_step,
)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class CampaignConfig:
    strategy: StrategyConfig
    seed: int
    space: DesignSpace | None = None
    hierarchy: HierarchySpec | None = None
    bounds: Bounds | None = None
    kernel: KernelSpec = KernelSpec()

    def __post_init__(self) -> None:
        if self.strategy.name == "hpc_ts_ucb":
            if self.hierarchy is None or self.bounds is None:
                raise InputError("hpc campaigns require a hierarchy and bounds")
        elif self.space is None:
            raise InputError("flat campaigns require a design space")

    @property
    def box(self) -> Bounds:
        return self.bounds if self.space is None else self.space.bounds


@dataclass(frozen=True)
class CampaignState:
    """Immutable snapshot between suggest/observe calls."""

    config: CampaignConfig
    t: int
    batches: tuple[tuple[np.ndarray, np.ndarray], ...]
    pending: BatchProposal | None
    kernel_state: KernelState

    @property
    def awaiting_observation(self) -> bool:
        return self.pending is not None

    @property
    def best(self) -> tuple[np.ndarray, float] | None:
        if not self.batches:
            return None
        best_point, best_value = None, -np.inf
        for points, values in self.batches:
            idx = int(np.argmax(values))
            if values[idx] > best_value:
                best_value = float(values[idx])
                best_point = points[idx]
        return best_point, best_value


def campaign_init(config: CampaignConfig) -> CampaignState:
    return CampaignState(
        config=config,
        t=0,
        batches=(),
        pending=None,
        kernel_state=KernelState(inner=config.kernel),
    )


def suggest(state: CampaignState) -> tuple[BatchProposal, CampaignState]:
    """Propose the next batch; errors if the previous one is unobserved."""
    if state.pending is not None:
        raise SequencingError("previous batch has not been observed yet")
    config = state.config
    if state.t == 0:
        proposal = initial_batch(
            config.strategy, config.seed, space=config.space,
            hierarchy=config.hierarchy, bounds=config.bounds,
            kernel=config.kernel,
        )
        kernel_state = state.kernel_state
    else:
        proposal, kernel_state = propose_step(
            config.strategy, config.seed, state.t, state.batches,
            state.kernel_state, space=config.space,
            hierarchy=config.hierarchy, bounds=config.bounds,
        )
    return proposal, replace(state, pending=proposal, kernel_state=kernel_state)


def observe(state: CampaignState, values: np.ndarray) -> CampaignState:
    """Ingest the values for the pending batch, one per proposed point."""
    if state.pending is None:
        raise SequencingError("no batch is awaiting observation")
    values = np.asarray(values, dtype=float).ravel()
    if values.shape[0] != state.pending.size:
        raise InputError(
            f"expected {state.pending.size} values, got {values.shape[0]}"
        )
    for slot, value in enumerate(values):
        if not np.isfinite(value):
            raise InputError(f"non-finite observation in slot {slot}")
    batch = (state.pending.points.copy(), values)
    return replace(state, t=state.t + 1, batches=state.batches + (batch,), pending=None)


# ---------------------------------------------------------------------------
# JSON serialization


def _kernel_to_dict(spec: KernelSpec) -> dict[str, Any]:
    return {
        "kind": spec.kind,
        "output_scale": spec.output_scale,
        "length_scale": spec.length_scale,
        "noise_variance": spec.noise_variance,
    }


def _kernel_from_dict(raw: dict[str, Any]) -> KernelSpec:
    _check_fields(raw, {"kind", "output_scale", "length_scale", "noise_variance"}, "kernel")
    return KernelSpec(**raw)


def _check_fields(raw: dict[str, Any], allowed: set[str], where: str) -> None:
    unknown = set(raw) - allowed
    if unknown:
        raise InputError(f"unknown field(s) in {where}: {sorted(unknown)}")


def state_to_dict(state: CampaignState) -> dict[str, Any]:
    config = state.config
    strategy = config.strategy
    acq = strategy.acquisition
    doc: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "strategy": {
            "name": strategy.name,
            "acquisition": {
                "kind": acq.kind,
                "delta": acq.delta,
                "beta": acq.beta,
                "xi": acq.xi,
            },
            "batch_size": strategy.batch_size,
            "acq_budget": strategy.acq_budget,
            "restarts": strategy.restarts,
            "learn_noise": strategy.learn_noise,
        },
        "seed": config.seed,
        "kernel": _kernel_to_dict(config.kernel),
        "space": None,
        "hierarchy": None,
        "bounds": None,
        "t": state.t,
        "batches": [
            {"points": points.tolist(), "values": values.tolist()}
            for points, values in state.batches
        ],
        "pending": None,
        "kernel_state": {
            "inner": _kernel_to_dict(state.kernel_state.inner),
            "outer": (
                _kernel_to_dict(state.kernel_state.outer)
                if state.kernel_state.outer is not None else None
            ),
        },
    }
    if config.space is not None:
        doc["space"] = {
            "lower": config.space.bounds.lower.tolist(),
            "upper": config.space.bounds.upper.tolist(),
            "constrained_dims": list(config.space.constrained_dims),
            "ts_grid_per_dim": config.space.ts_grid_per_dim,
        }
    if config.hierarchy is not None:
        doc["hierarchy"] = [
            {"dims": list(lvl.dims), "batch_size": lvl.batch_size}
            for lvl in config.hierarchy.levels
        ]
    if config.bounds is not None:
        doc["bounds"] = {
            "lower": config.bounds.lower.tolist(),
            "upper": config.bounds.upper.tolist(),
        }
    if state.pending is not None:
        doc["pending"] = {
            "points": state.pending.points.tolist(),
            "provenance": list(state.pending.provenance),
        }
    return doc


def state_from_dict(doc: dict[str, Any]) -> CampaignState:
    if not isinstance(doc, dict):
        raise InputError("state document must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise InputError(f"unsupported schema_version {version!r}")
    _check_fields(doc, {
        "schema_version", "strategy", "seed", "kernel", "space", "hierarchy",
        "bounds", "t", "batches", "pending", "kernel_state",
    }, "state")
    raw_strategy = doc["strategy"]
    _check_fields(raw_strategy, {
        "name", "acquisition", "batch_size", "acq_budget", "restarts", "learn_noise",
    }, "strategy")
    raw_acq = raw_strategy["acquisition"]
    _check_fields(raw_acq, {"kind", "delta", "beta", "xi"}, "acquisition")
    strategy = StrategyConfig(
        name=raw_strategy["name"],
        acquisition=AcquisitionSpec(**raw_acq),
        batch_size=raw_strategy["batch_size"],
        acq_budget=raw_strategy["acq_budget"],
        restarts=raw_strategy["restarts"],
        learn_noise=raw_strategy["learn_noise"],
    )
    space = None
    if doc.get("space") is not None:
        raw_space = doc["space"]
        _check_fields(raw_space, {"lower", "upper", "constrained_dims", "ts_grid_per_dim"}, "space")
        space = DesignSpace(
            bounds=Bounds(np.array(raw_space["lower"]), np.array(raw_space["upper"])),
            constrained_dims=tuple(raw_space["constrained_dims"]),
            ts_grid_per_dim=raw_space["ts_grid_per_dim"],
        )
    hierarchy = None
    if doc.get("hierarchy") is not None:
        levels = []
        for raw_lvl in doc["hierarchy"]:
            _check_fields(raw_lvl, {"dims", "batch_size"}, "hierarchy level")
            levels.append(HierarchyLevel(tuple(raw_lvl["dims"]), raw_lvl["batch_size"]))
        hierarchy = HierarchySpec(tuple(levels))
    bounds = None
    if doc.get("bounds") is not None:
        raw_bounds = doc["bounds"]
        _check_fields(raw_bounds, {"lower", "upper"}, "bounds")
        bounds = Bounds(np.array(raw_bounds["lower"]), np.array(raw_bounds["upper"]))
    config = CampaignConfig(
        strategy=strategy, seed=doc["seed"], space=space,
        hierarchy=hierarchy, bounds=bounds,
        kernel=_kernel_from_dict(doc["kernel"]),
    )
    batches = tuple(
        (np.array(raw["points"], dtype=float), np.array(raw["values"], dtype=float))
        for raw in doc["batches"]
    )
    for raw in doc["batches"]:
        _check_fields(raw, {"points", "values"}, "batch")
    pending = None
    if doc.get("pending") is not None:
        raw_pending = doc["pending"]
        _check_fields(raw_pending, {"points", "provenance"}, "pending")
        pending = BatchProposal(
            np.array(raw_pending["points"], dtype=float),
            tuple(raw_pending["provenance"]),
        )
    raw_ks = doc["kernel_state"]
    _check_fields(raw_ks, {"inner", "outer"}, "kernel_state")
    kernel_state = KernelState(
        inner=_kernel_from_dict(raw_ks["inner"]),
        outer=(
            _kernel_from_dict(raw_ks["outer"])
            if raw_ks.get("outer") is not None else None
        ),
    )
    return CampaignState(
        config=config, t=doc["t"], batches=batches,
        pending=pending, kernel_state=kernel_state,
    )


def save_state(state: CampaignState, path: str) -> None:
    with open(path, "w") as handle:
        json.dump(state_to_dict(state), handle, indent=2)
        handle.write("\n")


def load_state(path: str) -> CampaignState:
    with open(path) as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid state file: {exc}") from exc
    return state_from_dict(doc)
