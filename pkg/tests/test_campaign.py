import json

import numpy as np
import pytest

from pcbo.boxopt import Bounds
from pcbo.campaign import (
    CampaignConfig,
    campaign_init,
    load_state,
    observe,
    save_state,
    state_from_dict,
    state_to_dict,
    suggest,
)
from pcbo.errors import InputError, SequencingError
from pcbo.gp import KernelSpec
from pcbo.strategies import (
    DesignSpace,
    HierarchyLevel,
    HierarchySpec,
    StrategyConfig,
)

SPACE = DesignSpace(Bounds(np.zeros(2), np.ones(2)), (0,))


def make_config(name="pc_ts_ucb", seed=0, **kwargs):
    return CampaignConfig(
        strategy=StrategyConfig(name, acq_budget=kwargs.pop("acq_budget", 120)),
        seed=seed, space=kwargs.pop("space", SPACE), **kwargs,
    )


class TestInit:
    def test_fresh_state(self):
        state = campaign_init(make_config())
        assert state.t == 0
        assert not state.awaiting_observation
        assert state.best is None

    def test_same_seed_equal_states(self):
        a = state_to_dict(campaign_init(make_config(seed=4)))
        b = state_to_dict(campaign_init(make_config(seed=4)))
        assert a == b

    def test_bad_constrained_index_rejected(self):
        with pytest.raises(InputError):
            DesignSpace(Bounds(np.zeros(2), np.ones(2)), (5,))

    def test_flat_strategy_needs_space(self):
        with pytest.raises(InputError):
            CampaignConfig(strategy=StrategyConfig("pc_ts_ucb"), seed=0)

    def test_hpc_needs_hierarchy(self):
        with pytest.raises(InputError):
            CampaignConfig(strategy=StrategyConfig("hpc_ts_ucb"), seed=0,
                           bounds=Bounds(np.zeros(2), np.ones(2)))


class TestSuggestObserve:
    def test_pc_batch_shares_constrained_coordinate(self):
        proposal, state = suggest(campaign_init(make_config()))
        assert proposal.size == 4
        assert np.ptp(proposal.points[:, 0]) == 0.0
        assert state.awaiting_observation

    def test_double_suggest_rejected(self):
        _, state = suggest(campaign_init(make_config()))
        with pytest.raises(SequencingError):
            suggest(state)

    def test_observe_without_suggest_rejected(self):
        with pytest.raises(SequencingError):
            observe(campaign_init(make_config()), np.ones(4))

    def test_observe_advances_t(self):
        _, state = suggest(campaign_init(make_config()))
        state = observe(state, np.array([0.1, 0.2, 0.3, 0.4]))
        assert state.t == 1
        assert not state.awaiting_observation
        assert state.best[1] == 0.4

    def test_wrong_count_rejected(self):
        _, state = suggest(campaign_init(make_config()))
        with pytest.raises(InputError):
            observe(state, np.array([0.1, 0.2, 0.3]))

    def test_nan_names_slot(self):
        _, state = suggest(campaign_init(make_config()))
        with pytest.raises(InputError, match="slot 2"):
            observe(state, np.array([0.1, 0.2, np.nan, 0.4]))

    def test_several_rounds(self):
        state = campaign_init(make_config())
        for t in range(3):
            proposal, state = suggest(state)
            state = observe(state, np.linspace(0.1, 0.4, proposal.size) + t)
        assert state.t == 3
        assert len(state.batches) == 3


class TestSerialization:
    def test_roundtrip_preserves_behavior(self, tmp_path):
        state = campaign_init(make_config(seed=6))
        proposal, state = suggest(state)
        state = observe(state, np.array([0.2, 0.5, 0.1, 0.3]))
        path = tmp_path / "state.json"
        save_state(state, path)
        restored = load_state(path)
        a, _ = suggest(state)
        b, _ = suggest(restored)
        np.testing.assert_array_equal(a.points, b.points)
        assert a.provenance == b.provenance

    def test_pending_batch_survives_roundtrip(self, tmp_path):
        proposal, state = suggest(campaign_init(make_config(seed=1)))
        path = tmp_path / "state.json"
        save_state(state, path)
        restored = load_state(path)
        np.testing.assert_array_equal(restored.pending.points, proposal.points)
        state_a = observe(state, np.array([1.0, 2.0, 3.0, 4.0]))
        state_b = observe(restored, np.array([1.0, 2.0, 3.0, 4.0]))
        assert state_to_dict(state_a) == state_to_dict(state_b)

    def test_unknown_field_rejected(self):
        doc = state_to_dict(campaign_init(make_config()))
        doc["surprise"] = 1
        with pytest.raises(InputError, match="surprise"):
            state_from_dict(doc)

    def test_unknown_nested_field_rejected(self):
        doc = state_to_dict(campaign_init(make_config()))
        doc["strategy"]["extra"] = True
        with pytest.raises(InputError, match="extra"):
            state_from_dict(doc)

    def test_schema_version_checked(self):
        doc = state_to_dict(campaign_init(make_config()))
        doc["schema_version"] = 99
        with pytest.raises(InputError, match="schema_version"):
            state_from_dict(doc)

    def test_invalid_json_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(InputError):
            load_state(path)

    def test_hpc_config_roundtrip(self, tmp_path):
        hier = HierarchySpec((
            HierarchyLevel((0,), 1), HierarchyLevel((1,), 2), HierarchyLevel((2,), 4),
        ))
        config = CampaignConfig(
            strategy=StrategyConfig("hpc_ts_ucb", acq_budget=100),
            seed=2, hierarchy=hier, bounds=Bounds(np.zeros(3), np.ones(3)),
            kernel=KernelSpec("rbf", 1.0, 0.3, 1e-6),
        )
        proposal, state = suggest(campaign_init(config))
        assert proposal.size == 8
        path = tmp_path / "state.json"
        save_state(state, path)
        restored = load_state(path)
        assert restored.config.hierarchy.leaf_count == 8
        np.testing.assert_array_equal(restored.pending.points, proposal.points)

    def test_file_is_valid_json_document(self, tmp_path):
        state = campaign_init(make_config())
        path = tmp_path / "state.json"
        save_state(state, path)
        doc = json.loads(path.read_text())
        assert doc["schema_version"] == 1
