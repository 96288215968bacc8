"""HTTP front end for ask-tell campaigns.

Wraps the campaign module in a small FastAPI app with an in-memory campaign
store, so multiple clients can drive suggest/observe loops over HTTP while
evaluating the objective on their side.
"""

from __future__ import annotations

import uuid
from typing import Literal

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .acquisition import AcquisitionSpec
from .boxopt import Bounds
from .campaign import (
    CampaignConfig,
    CampaignState,
    campaign_init,
    observe as campaign_observe,
    suggest as campaign_suggest,
)
from .errors import InputError, SequencingError
from .gp import KernelSpec
from .strategies import (
    STRATEGY_NAMES,
    DesignSpace,
    HierarchyLevel,
    HierarchySpec,
    StrategyConfig,
    default_acquisition,
)


class StrategyModel(BaseModel):
    model_config = {"extra": "forbid"}

    name: str
    acquisition: Literal["gp_ucb", "ucb", "ei"] | None = None
    delta: float = 0.1
    beta: float = 2.0
    xi: float = 0.01
    batch_size: int = 4
    acq_budget: int = 500
    restarts: int = 5
    learn_noise: bool = False


class BoundsModel(BaseModel):
    model_config = {"extra": "forbid"}

    lower: list[float]
    upper: list[float]


class HierarchyLevelModel(BaseModel):
    model_config = {"extra": "forbid"}

    dims: list[int]
    batch_size: int


class KernelModel(BaseModel):
    model_config = {"extra": "forbid"}

    kind: Literal["matern25", "rbf"] = "matern25"
    output_scale: float = 1.0
    length_scale: float = 0.2
    noise_variance: float = 1e-6


class CreateCampaignRequest(BaseModel):
    model_config = {"extra": "forbid"}

    strategy: StrategyModel
    bounds: BoundsModel
    seed: int = 0
    constrained_dims: list[int] | None = None
    ts_grid_per_dim: int = 10
    hierarchy: list[HierarchyLevelModel] | None = None
    kernel: KernelModel = Field(default_factory=KernelModel)


class CampaignInfo(BaseModel):
    id: str
    strategy: str
    t: int
    awaiting_observation: bool
    best_point: list[float] | None
    best_value: float | None


class SuggestResponse(BaseModel):
    id: str
    t: int
    points: list[list[float]]
    provenance: list[str]


class ObserveRequest(BaseModel):
    model_config = {"extra": "forbid"}

    values: list[float]


def _build_config(req: CreateCampaignRequest) -> CampaignConfig:
    if req.strategy.name not in STRATEGY_NAMES:
        raise InputError(f"unknown strategy {req.strategy.name!r}")
    acq_kind = req.strategy.acquisition or default_acquisition(req.strategy.name).kind
    strategy = StrategyConfig(
        name=req.strategy.name,
        acquisition=AcquisitionSpec(
            kind=acq_kind, delta=req.strategy.delta,
            beta=req.strategy.beta, xi=req.strategy.xi,
        ),
        batch_size=req.strategy.batch_size,
        acq_budget=req.strategy.acq_budget,
        restarts=req.strategy.restarts,
        learn_noise=req.strategy.learn_noise,
    )
    bounds = Bounds(req.bounds.lower, req.bounds.upper)
    kernel = KernelSpec(**req.kernel.model_dump())
    if strategy.name == "hpc_ts_ucb":
        if req.hierarchy is None:
            raise InputError("hpc campaigns require a hierarchy")
        hierarchy = HierarchySpec(tuple(
            HierarchyLevel(tuple(lvl.dims), lvl.batch_size)
            for lvl in req.hierarchy
        ))
        return CampaignConfig(
            strategy=strategy, seed=req.seed, hierarchy=hierarchy,
            bounds=bounds, kernel=kernel,
        )
    dims = req.constrained_dims
    if dims is None:
        dims = list(range(bounds.dimension // 2))
    space = DesignSpace(bounds, tuple(dims), req.ts_grid_per_dim)
    return CampaignConfig(strategy=strategy, seed=req.seed, space=space, kernel=kernel)


def _info(campaign_id: str, state: CampaignState) -> CampaignInfo:
    best = state.best
    return CampaignInfo(
        id=campaign_id,
        strategy=state.config.strategy.name,
        t=state.t,
        awaiting_observation=state.awaiting_observation,
        best_point=None if best is None else [float(v) for v in best[0]],
        best_value=None if best is None else best[1],
    )


def create_app() -> FastAPI:
    app = FastAPI(title="pcbo", version="0.1.0")
    store: dict[str, CampaignState] = {}

    @app.get("/health")
    def health() -> dict[str, str]:
        return {"status": "ok"}

    @app.post("/campaigns", response_model=CampaignInfo, status_code=201)
    def create_campaign(req: CreateCampaignRequest) -> CampaignInfo:
        try:
            state = campaign_init(_build_config(req))
        except InputError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        campaign_id = uuid.uuid4().hex
        store[campaign_id] = state
        return _info(campaign_id, state)

    @app.get("/campaigns/{campaign_id}", response_model=CampaignInfo)
    def get_campaign(campaign_id: str) -> CampaignInfo:
        state = store.get(campaign_id)
        if state is None:
            raise HTTPException(status_code=404, detail="unknown campaign")
        return _info(campaign_id, state)

    @app.post("/campaigns/{campaign_id}/suggest", response_model=SuggestResponse)
    def suggest_batch(campaign_id: str) -> SuggestResponse:
        state = store.get(campaign_id)
        if state is None:
            raise HTTPException(status_code=404, detail="unknown campaign")
        try:
            proposal, state = campaign_suggest(state)
        except SequencingError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        store[campaign_id] = state
        return SuggestResponse(
            id=campaign_id,
            t=state.t,
            points=[[float(v) for v in row] for row in proposal.points],
            provenance=list(proposal.provenance),
        )

    @app.post("/campaigns/{campaign_id}/observe", response_model=CampaignInfo)
    def observe_batch(campaign_id: str, req: ObserveRequest) -> CampaignInfo:
        state = store.get(campaign_id)
        if state is None:
            raise HTTPException(status_code=404, detail="unknown campaign")
        try:
            state = campaign_observe(state, req.values)
        except SequencingError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except InputError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        store[campaign_id] = state
        return _info(campaign_id, state)

    return app


app = create_app()
