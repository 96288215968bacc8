"""Batch Bayesian optimization under process constraints.

Core pieces: a small GP regression engine (gp), acquisition scores
(acquisition), box-domain global search (boxopt), batch proposal strategies
(strategies), ask-tell campaigns (campaign), benchmark objectives
(objectives), regret metrics (metrics), and a benchmark harness (bench)
with CLI (cli) and HTTP (service) front ends.
"""

from .acquisition import AcquisitionSpec, alpha_ei, alpha_ucb, beta_t
from .boxopt import Bounds, direct_maximize, grid_argmax, unit_grid
from .campaign import (
    CampaignConfig,
    CampaignState,
    campaign_init,
    load_state,
    observe,
    save_state,
    suggest,
)
from .errors import (
    CapacityError,
    ConfigError,
    DimensionMismatchError,
    GenerationError,
    IngestError,
    InputError,
    NumericalError,
    PcboError,
    SequencingError,
)
from .gp import Dataset, GpPosterior, KernelSpec, fit, optimize_hyperparams, predict
from .metrics import (
    best_so_far_series,
    cumulative_regret,
    kde,
    log_normalized_regret,
    median_series,
    normalized_regret,
)
from .objectives import make_objective, synthetic_objective
from .strategies import (
    BatchProposal,
    DesignSpace,
    HierarchyLevel,
    HierarchySpec,
    StrategyConfig,
    run_campaign,
)

__version__ = "0.1.0"
