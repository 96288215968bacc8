"""Batch proposal strategies and the campaign stepping engine.

Seven single-step proposers (random, sequential, GP-UCB-PE, pc-basic,
pc-nested, pc-TS, hierarchical pc-TS) plus the bookkeeping that turns them
into reproducible propose -> evaluate -> update campaigns.

Convention: GP models passed to the proposers are fit on inputs rescaled to
the unit cube; proposers search the unit cube internally and return proposals
in the design space's original coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import gp
from .acquisition import AcquisitionSpec, score
from .boxopt import Bounds, direct_maximize, grid_argmax, unit_grid
from .errors import InputError, NumericalError
from .gp import Dataset, GpPosterior, KernelSpec, fit, optimize_hyperparams

STRATEGY_NAMES = (
    "random",
    "seq_bo",
    "gp_ucb_pe",
    "pc_basic_gpucb",
    "pc_basic_ucb",
    "pc_nested_gpucb",
    "pc_nested_ucb",
    "pc_ts_ucb",
    "pc_ts_ei",
    "hpc_ts_ucb",
)

PC_STRATEGIES = (
    "pc_basic_gpucb",
    "pc_basic_ucb",
    "pc_nested_gpucb",
    "pc_nested_ucb",
    "pc_ts_ucb",
    "pc_ts_ei",
)

FALLBACK_PROBES = 1000


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for a (seed, key) pair; replayable in isolation."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


# ---------------------------------------------------------------------------
# Domain types


@dataclass(frozen=True)
class DesignSpace:
    """Box bounds plus the constrained/unconstrained dimension split."""

    bounds: Bounds
    constrained_dims: tuple[int, ...] = ()
    ts_grid_per_dim: int = 10

    def __post_init__(self) -> None:
        dims = tuple(int(i) for i in self.constrained_dims)
        if any(i < 0 or i >= self.dimension for i in dims):
            raise InputError("constrained dimension index out of range")
        if len(set(dims)) != len(dims):
            raise InputError("duplicate constrained dimension")
        object.__setattr__(self, "constrained_dims", dims)

    @property
    def dimension(self) -> int:
        return self.bounds.dimension

    @property
    def unconstrained_dims(self) -> tuple[int, ...]:
        constrained = set(self.constrained_dims)
        return tuple(i for i in range(self.dimension) if i not in constrained)

    def to_unit(self, points: np.ndarray) -> np.ndarray:
        span = self.bounds.upper - self.bounds.lower
        return (np.asarray(points, dtype=float) - self.bounds.lower) / span

    def from_unit(self, points: np.ndarray) -> np.ndarray:
        span = self.bounds.upper - self.bounds.lower
        return self.bounds.lower + np.asarray(points, dtype=float) * span


@dataclass(frozen=True)
class HierarchyLevel:
    dims: tuple[int, ...]
    batch_size: int


@dataclass(frozen=True)
class HierarchySpec:
    """Per-level dimension sets and branching factors for the hpc tree."""

    levels: tuple[HierarchyLevel, ...]

    def __post_init__(self) -> None:
        levels = tuple(
            HierarchyLevel(tuple(int(i) for i in lvl.dims), int(lvl.batch_size))
            for lvl in self.levels
        )
        if not levels:
            raise InputError("hierarchy requires at least one level")
        if levels[0].batch_size != 1:
            raise InputError("the root level must have batch size 1")
        all_dims = [i for lvl in levels for i in lvl.dims]
        if sorted(all_dims) != list(range(len(all_dims))):
            raise InputError("level dimension sets must partition 0..d-1")
        if any(lvl.batch_size < 1 for lvl in levels):
            raise InputError("batch sizes must be >= 1")
        object.__setattr__(self, "levels", levels)

    @property
    def dimension(self) -> int:
        return sum(len(lvl.dims) for lvl in self.levels)

    @property
    def leaf_count(self) -> int:
        return math.prod(lvl.batch_size for lvl in self.levels)


@dataclass(frozen=True)
class BatchProposal:
    """Points of one batch with a per-point provenance tag."""

    points: np.ndarray  # (B, d)
    provenance: tuple[str, ...]

    def __post_init__(self) -> None:
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if points.shape[0] != len(self.provenance):
            raise InputError("provenance length must match the batch size")
        object.__setattr__(self, "points", points)

    @property
    def size(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class IterationRecord:
    t: int
    proposal: BatchProposal
    values: np.ndarray


@dataclass
class CampaignHistory:
    iterations: list[IterationRecord] = field(default_factory=list)
    best_point: np.ndarray | None = None
    best_value: float = -math.inf
    error: str | None = None

    def record(self, t: int, proposal: BatchProposal, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=float)
        self.iterations.append(IterationRecord(t, proposal, values))
        idx = int(np.argmax(values))
        if values[idx] > self.best_value:
            self.best_value = float(values[idx])
            self.best_point = proposal.points[idx].copy()


# ---------------------------------------------------------------------------
# Shared machinery


def _unit_box(d: int) -> Bounds:
    return Bounds(np.zeros(d), np.ones(d))


def _inject(free_values: np.ndarray, free_dims: Sequence[int],
            fixed_values: np.ndarray, fixed_dims: Sequence[int], d: int) -> np.ndarray:
    point = np.empty(d)
    point[list(free_dims)] = free_values
    point[list(fixed_dims)] = fixed_values
    return point


def _maximize_unit(score_fn, d: int, budget: int,
                   probe_rng: np.random.Generator | None) -> np.ndarray:
    """DIRECT over the unit box with a random-probe fallback.

    If DIRECT errors out or never improves on the center (the silent-default
    failure mode), the best of 1000 uniform probes is used instead.
    """
    box = _unit_box(d)
    center = box.center
    try:
        point, value = direct_maximize(score_fn, box, budget)
        failed = bool(np.array_equal(point, center))
    except NumericalError:
        point, value, failed = center, -math.inf, True
    if failed and probe_rng is not None:
        probes = probe_rng.uniform(size=(FALLBACK_PROBES, d))
        probe_values = np.array([score_fn(p) for p in probes])
        idx = int(np.argmax(probe_values))
        if probe_values[idx] > value:
            return probes[idx]
    return point


def _hallucinate(model: GpPosterior, new_points: np.ndarray) -> GpPosterior:
    """Condition on pending points using their posterior means as stand-in
    observations; only the variance matters downstream."""
    new_points = np.atleast_2d(new_points)
    means, _ = gp.predict_many(model, new_points)
    inputs = np.vstack([model.data.inputs, new_points])
    outputs = np.concatenate([model.data.outputs, means])
    return fit(Dataset(inputs, outputs), model.kernel)


def _variance_maximizer(model: GpPosterior, free_dims: Sequence[int],
                        fixed_values: np.ndarray, fixed_dims: Sequence[int],
                        d: int, budget: int,
                        probe_rng: np.random.Generator | None) -> np.ndarray:
    def var_at(free: np.ndarray) -> float:
        point = _inject(free, free_dims, fixed_values, fixed_dims, d)
        _, var = gp.predict(model, point)
        return var

    free = _maximize_unit(var_at, len(free_dims), budget, probe_rng)
    return _inject(free, free_dims, fixed_values, fixed_dims, d)


def _acq_maximizer(model: GpPosterior, acq: AcquisitionSpec, t: int, f_best: float,
                   free_dims: Sequence[int], fixed_values: np.ndarray,
                   fixed_dims: Sequence[int], d: int, budget: int,
                   probe_rng: np.random.Generator | None) -> np.ndarray:
    def score_at(free: np.ndarray) -> float:
        point = _inject(free, free_dims, fixed_values, fixed_dims, d)
        return score(model, acq, point, t, f_best)

    free = _maximize_unit(score_at, len(free_dims), budget, probe_rng)
    return _inject(free, free_dims, fixed_values, fixed_dims, d)


# ---------------------------------------------------------------------------
# Single-step proposers


def propose_random(space: DesignSpace, batch_size: int,
                   rng: np.random.Generator) -> BatchProposal:
    """Independent uniform points; the random baseline ignores the constraint."""
    if batch_size < 1:
        raise InputError("batch size must be >= 1")
    unit = rng.uniform(size=(batch_size, space.dimension))
    return BatchProposal(space.from_unit(unit), ("random",) * batch_size)


def propose_sequential(model: GpPosterior, space: DesignSpace, acq: AcquisitionSpec,
                       t: int, f_best: float, budget: int = 500,
                       probe_rng: np.random.Generator | None = None) -> BatchProposal:
    d = space.dimension
    unit = _acq_maximizer(model, acq, t, f_best, range(d), np.empty(0), (), d,
                          budget, probe_rng)
    return BatchProposal(space.from_unit(unit.reshape(1, -1)), ("ucb",))


def propose_gp_ucb_pe(model: GpPosterior, space: DesignSpace, batch_size: int,
                      t: int, delta: float, budget: int = 500,
                      probe_rng: np.random.Generator | None = None) -> BatchProposal:
    """One GP-UCB point, then pure exploration by hallucinated variance."""
    if batch_size < 1:
        raise InputError("batch size must be >= 1")
    d = space.dimension
    acq = AcquisitionSpec("gp_ucb", delta=delta)
    first = _acq_maximizer(model, acq, t, 0.0, range(d), np.empty(0), (), d,
                           budget, probe_rng)
    selected = [first]
    current = model
    for _ in range(batch_size - 1):
        current = _hallucinate(current, selected[-1].reshape(1, -1))
        point = _variance_maximizer(current, range(d), np.empty(0), (), d,
                                    budget, probe_rng)
        selected.append(point)
    provenance = ("ucb",) + ("pure_exploration",) * (batch_size - 1)
    return BatchProposal(space.from_unit(np.array(selected)), provenance)


def propose_pc_basic(model: GpPosterior, space: DesignSpace, batch_size: int,
                     t: int, acq: AcquisitionSpec, f_best: float = 0.0,
                     budget: int = 500,
                     probe_rng: np.random.Generator | None = None) -> BatchProposal:
    """Acquisition argmax over the full box, then constrained pure exploration."""
    if batch_size < 1:
        raise InputError("batch size must be >= 1")
    if not space.constrained_dims:
        raise InputError("pc strategies require a non-empty constrained set")
    d = space.dimension
    c_dims, uc_dims = space.constrained_dims, space.unconstrained_dims
    first = _acq_maximizer(model, acq, t, f_best, range(d), np.empty(0), (), d,
                           budget, probe_rng)
    xc = first[list(c_dims)]
    selected = [first]
    current = model
    for _ in range(batch_size - 1):
        current = _hallucinate(current, selected[-1].reshape(1, -1))
        point = _variance_maximizer(current, uc_dims, xc, c_dims, d, budget, probe_rng)
        selected.append(point)
    provenance = ("ucb",) + ("pure_exploration",) * (batch_size - 1)
    return BatchProposal(space.from_unit(np.array(selected)), provenance)


def propose_pc_nested(outer_model: GpPosterior, inner_model: GpPosterior,
                      space: DesignSpace, batch_size: int, t: int,
                      acq: AcquisitionSpec, f_best_outer: float = 0.0,
                      f_best_inner: float = 0.0, budget: int = 500,
                      probe_rng: np.random.Generator | None = None) -> BatchProposal:
    """Outer model picks x^c on the constrained subspace; inner model fills
    the unconstrained coordinates."""
    if batch_size < 1:
        raise InputError("batch size must be >= 1")
    if not space.constrained_dims:
        raise InputError("pc strategies require a non-empty constrained set")
    d = space.dimension
    c_dims, uc_dims = space.constrained_dims, space.unconstrained_dims

    def outer_score(xc: np.ndarray) -> float:
        return score(outer_model, acq, xc, t, f_best_outer)

    xc = _maximize_unit(outer_score, len(c_dims), budget, probe_rng)
    first = _acq_maximizer(inner_model, acq, t, f_best_inner, uc_dims, xc, c_dims,
                           d, budget, probe_rng)
    selected = [first]
    current = inner_model
    for _ in range(batch_size - 1):
        current = _hallucinate(current, selected[-1].reshape(1, -1))
        point = _variance_maximizer(current, uc_dims, xc, c_dims, d, budget, probe_rng)
        selected.append(point)
    provenance = ("ucb",) + ("pure_exploration",) * (batch_size - 1)
    return BatchProposal(space.from_unit(np.array(selected)), provenance)


def propose_pc_bo_ts(model: GpPosterior, space: DesignSpace, batch_size: int,
                     t: int, f_best: float, acq: AcquisitionSpec,
                     rng: np.random.Generator, budget: int = 500,
                     probe_rng: np.random.Generator | None = None) -> BatchProposal:
    """Acquisition argmax for the first point, Thompson-sampled grid argmaxes
    (sharing its constrained coordinates) for the rest."""
    if batch_size < 1:
        raise InputError("batch size must be >= 1")
    if not space.constrained_dims:
        raise InputError("pc strategies require a non-empty constrained set")
    d = space.dimension
    c_dims, uc_dims = space.constrained_dims, space.unconstrained_dims
    first = _acq_maximizer(model, acq, t, f_best, range(d), np.empty(0), (), d,
                           budget, probe_rng)
    xc = first[list(c_dims)]
    selected = [first]
    provenance = ["ucb"]
    if batch_size > 1:
        free_grid = unit_grid(_unit_box(len(uc_dims)), space.ts_grid_per_dim)
        slice_points = np.array(
            [_inject(row, uc_dims, xc, c_dims, d) for row in free_grid]
        )
        mean, factor = gp.grid_posterior(model, slice_points)
        for slot_rng in rng.spawn(batch_size - 1):
            draw = mean + factor @ slot_rng.standard_normal(mean.shape[0])
            _, point, _ = grid_argmax(draw, slice_points)
            selected.append(point)
            provenance.append("ts")
    return BatchProposal(space.from_unit(np.array(selected)), tuple(provenance))


def propose_hpc_bo_ts(model: GpPosterior, hierarchy: HierarchySpec, bounds: Bounds,
                      t: int, x_ucb: np.ndarray, rng: np.random.Generator,
                      ts_grid_per_dim: int = 10) -> BatchProposal:
    """Build the hierarchical level sets and return the leaf batch.

    ``x_ucb`` is given in the original coordinates (uniform at t=0, UCB argmax
    afterwards); it is preserved as the first leaf.
    """
    d = bounds.dimension
    if hierarchy.dimension != d:
        raise InputError("hierarchy dimensions do not match bounds")
    x_ucb = np.asarray(x_ucb, dtype=float).ravel()
    if x_ucb.shape[0] != d:
        raise InputError("x_ucb dimension mismatch")
    span = bounds.upper - bounds.lower
    ucb_unit = (x_ucb - bounds.lower) / span

    levels = hierarchy.levels
    nodes = [ucb_unit]  # the UCB lineage node is always kept first
    for level_index in range(1, len(levels)):
        fixed_dims = tuple(
            i for lvl in levels[:level_index] for i in lvl.dims
        )
        free_dims = tuple(
            i for lvl in levels[level_index:] for i in lvl.dims
        )
        free_grid = unit_grid(_unit_box(len(free_dims)), ts_grid_per_dim)
        k_level = levels[level_index].batch_size
        next_nodes: list[np.ndarray] = []
        for parent_index, parent in enumerate(nodes):
            ts_children = k_level
            if parent_index == 0:
                next_nodes.append(ucb_unit)
                ts_children -= 1
            fixed_values = parent[list(fixed_dims)]
            for _ in range(ts_children):
                child_rng = rng.spawn(1)[0]
                slice_points = np.array(
                    [_inject(row, free_dims, fixed_values, fixed_dims, d)
                     for row in free_grid]
                )
                draw = gp.sample_on_grid(model, slice_points, child_rng)
                _, point, _ = grid_argmax(draw, slice_points)
                next_nodes.append(point)
        nodes = next_nodes
    provenance = ("ucb",) + ("ts",) * (len(nodes) - 1)
    points = bounds.lower + np.array(nodes) * span
    return BatchProposal(points, provenance)


# ---------------------------------------------------------------------------
# Campaign engine


@dataclass(frozen=True)
class StrategyConfig:
    """Everything a campaign needs to know about its proposal strategy."""

    name: str
    acquisition: AcquisitionSpec | None = None
    batch_size: int = 4
    acq_budget: int = 500
    restarts: int = 5
    learn_noise: bool = False

    def __post_init__(self) -> None:
        if self.name not in STRATEGY_NAMES:
            raise InputError(f"unknown strategy {self.name!r}")
        if self.batch_size < 1:
            raise InputError("batch size must be >= 1")
        acq = self.acquisition or default_acquisition(self.name)
        object.__setattr__(self, "acquisition", acq)

    @property
    def effective_batch_size(self) -> int:
        return 1 if self.name == "seq_bo" else self.batch_size


def default_acquisition(name: str) -> AcquisitionSpec:
    if name in ("seq_bo", "gp_ucb_pe", "pc_basic_gpucb", "pc_nested_gpucb"):
        return AcquisitionSpec("gp_ucb", delta=0.1)
    if name == "pc_ts_ei":
        return AcquisitionSpec("ei", xi=0.01)
    return AcquisitionSpec("ucb", beta=2.0)


@dataclass
class KernelState:
    """Current hyperparameters, carried across refits."""

    inner: KernelSpec
    outer: KernelSpec | None = None


def initial_batch(strategy: StrategyConfig, seed: int,
                  space: DesignSpace | None = None,
                  hierarchy: HierarchySpec | None = None,
                  bounds: Bounds | None = None,
                  kernel: KernelSpec | None = None) -> BatchProposal:
    """Iteration-0 batch.

    The first point is uniform over the whole box and drawn from a substream
    shared by every strategy at the same seed; pc strategies complete the
    batch in the constrained slice, GP-UCB-PE and random with uniform points,
    hpc with prior-model Thompson sampling.
    """
    rng = substream(seed, 0, 1)
    if strategy.name == "hpc_ts_ucb":
        if hierarchy is None or bounds is None:
            raise InputError("hpc strategies require a hierarchy and bounds")
        d = bounds.dimension
        first_unit = rng.uniform(size=d)
        first = bounds.lower + first_unit * (bounds.upper - bounds.lower)
        prior = fit(Dataset.empty(d), kernel or KernelSpec())
        return propose_hpc_bo_ts(prior, hierarchy, bounds, 0, first, rng)
    if space is None:
        raise InputError("flat strategies require a design space")
    d = space.dimension
    batch = strategy.effective_batch_size
    first = rng.uniform(size=d)
    points = [first]
    if strategy.name in PC_STRATEGIES:
        uc = list(space.unconstrained_dims)
        for _ in range(batch - 1):
            point = first.copy()
            point[uc] = rng.uniform(size=len(uc))
            points.append(point)
    else:
        for _ in range(batch - 1):
            points.append(rng.uniform(size=d))
    return BatchProposal(space.from_unit(np.array(points)), ("random",) * len(points))


def _outer_dataset(space: DesignSpace, batches: Sequence[tuple[np.ndarray, np.ndarray]]) -> Dataset:
    c_dims = list(space.constrained_dims)
    inputs, outputs = [], []
    for points, values in batches:
        unit = space.to_unit(points)
        inputs.append(unit[0, c_dims])
        outputs.append(float(np.max(values)))
    return Dataset(np.array(inputs), np.array(outputs))


def propose_step(strategy: StrategyConfig, seed: int, t: int,
                 batches: Sequence[tuple[np.ndarray, np.ndarray]],
                 kernel_state: KernelState,
                 space: DesignSpace | None = None,
                 hierarchy: HierarchySpec | None = None,
                 bounds: Bounds | None = None) -> tuple[BatchProposal, KernelState]:
    """One propose step at iteration t >= 1: refit hyperparameters, then
    dispatch to the strategy's proposer.  Returns the proposal and the updated
    kernel state."""
    if t < 1:
        raise InputError("propose_step applies from iteration 1 on")
    batch = strategy.effective_batch_size
    probe_rng = substream(seed, t, 2)
    box = bounds if space is None else space.bounds
    if box is None:
        raise InputError("a design space or bounds are required")
    d = box.dimension

    if strategy.name == "random":
        return (
            propose_random(space, batch, substream(seed, t, 1)),
            kernel_state,
        )

    all_points = np.vstack([points for points, _ in batches])
    all_values = np.concatenate([values for _, values in batches])
    span = box.upper - box.lower
    unit_inputs = (all_points - box.lower) / span
    data = Dataset(unit_inputs, all_values)
    fit_rng = substream(seed, t, 0)

    if strategy.name in ("pc_nested_gpucb", "pc_nested_ucb"):
        inner_rng, outer_rng = fit_rng.spawn(2)
    else:
        inner_rng, outer_rng = fit_rng, None

    inner_spec = optimize_hyperparams(
        data, kernel_state.inner, restarts=strategy.restarts, rng=inner_rng,
        learn_noise=strategy.learn_noise,
    )
    model = fit(data, inner_spec)
    f_best = float(np.max(all_values))
    new_state = KernelState(inner=inner_spec, outer=kernel_state.outer)
    acq = strategy.acquisition
    budget = strategy.acq_budget

    if strategy.name == "seq_bo":
        proposal = propose_sequential(model, space, acq, t, f_best, budget, probe_rng)
    elif strategy.name == "gp_ucb_pe":
        proposal = propose_gp_ucb_pe(model, space, batch, t, acq.delta, budget, probe_rng)
    elif strategy.name in ("pc_basic_gpucb", "pc_basic_ucb"):
        proposal = propose_pc_basic(model, space, batch, t, acq, f_best, budget, probe_rng)
    elif strategy.name in ("pc_nested_gpucb", "pc_nested_ucb"):
        outer_data = _outer_dataset(space, batches)
        outer_default = kernel_state.outer or kernel_state.inner
        outer_spec = optimize_hyperparams(
            outer_data, outer_default, restarts=strategy.restarts, rng=outer_rng,
            learn_noise=strategy.learn_noise,
        )
        outer_model = fit(outer_data, outer_spec)
        new_state = KernelState(inner=inner_spec, outer=outer_spec)
        proposal = propose_pc_nested(
            outer_model, model, space, batch, t, acq,
            f_best_outer=float(np.max(outer_data.outputs)),
            f_best_inner=f_best, budget=budget, probe_rng=probe_rng,
        )
    elif strategy.name in ("pc_ts_ucb", "pc_ts_ei"):
        proposal = propose_pc_bo_ts(
            model, space, batch, t, f_best, acq, substream(seed, t, 1),
            budget, probe_rng,
        )
    elif strategy.name == "hpc_ts_ucb":
        if hierarchy is None:
            raise InputError("hpc strategies require a hierarchy")
        ucb_unit = _acq_maximizer(model, acq, t, f_best, range(d), np.empty(0), (),
                                  d, budget, probe_rng)
        x_ucb = box.lower + ucb_unit * span
        proposal = propose_hpc_bo_ts(model, hierarchy, box, t, x_ucb,
                                     substream(seed, t, 1),
                                     space.ts_grid_per_dim if space else 10)
    else:  # pragma: no cover
        raise InputError(f"unknown strategy {strategy.name!r}")
    return proposal, new_state


def run_campaign(strategy: StrategyConfig, objective, T: int, seed: int,
                 space: DesignSpace | None = None,
                 hierarchy: HierarchySpec | None = None,
                 bounds: Bounds | None = None,
                 kernel: KernelSpec | None = None) -> CampaignHistory:
    """Full campaign: init batch plus T propose/evaluate/update iterations."""
    from .campaign import CampaignConfig, campaign_init, observe, suggest

    if T < 1:
        raise InputError("T must be >= 1")
    config = CampaignConfig(
        strategy=strategy, space=space, hierarchy=hierarchy, bounds=bounds,
        kernel=kernel or KernelSpec(), seed=seed,
    )
    state = campaign_init(config)
    history = CampaignHistory()
    for t in range(T + 1):
        proposal, state = suggest(state)
        values = np.array([objective.eval(p) for p in proposal.points])
        if not np.all(np.isfinite(values)):
            history.error = f"non-finite objective value at iteration {t}"
            return history
        history.record(t, proposal, values)
        state = observe(state, values)
    return history
