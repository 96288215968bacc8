import math

import numpy as np
import pytest
from scipy.optimize import minimize

from pcbo.boxopt import unit_grid
from pcbo.errors import ConfigError, IngestError, InputError
from pcbo.objectives import (
    GMM_BOUNDS,
    GmmObjective,
    eval_synthetic,
    gmm_eval,
    gmm_generate,
    gmm_objective,
    fit_surrogate_from_table,
    make_objective,
    read_yield_table,
    synthetic_objective,
    true_optimum,
)


class TestGmmGeneration:
    def test_component_count_matches_case(self):
        for case in (1, 2, 3, 4):
            model = gmm_generate(case, np.random.default_rng(0))
            assert len(model.weights) == case

    def test_case3_mean_spacing(self):
        for seed in range(5):
            model = gmm_generate(3, np.random.default_rng(seed))
            means = model.means
            for i in range(3):
                for j in range(i + 1, 3):
                    assert np.linalg.norm(means[i] - means[j]) >= 2.0

    def test_case4_wider_covariances(self):
        model = gmm_generate(4, np.random.default_rng(1))
        for cov in model.covariances:
            diag = np.diag(cov)
            assert np.all(diag >= 1.5) and np.all(diag <= 2.0)

    def test_means_inside_domain(self):
        for case in (1, 2, 3, 4):
            model = gmm_generate(case, np.random.default_rng(7))
            for mean in model.means:
                assert GMM_BOUNDS.contains(mean)

    def test_weights_normalized(self):
        model = gmm_generate(4, np.random.default_rng(2))
        assert math.fsum(model.weights) == pytest.approx(1.0, abs=1e-12)


class TestGmmEval:
    def _single(self, mean):
        return GmmObjective(
            weights=np.array([1.0]),
            means=np.array([mean]),
            covariances=np.array([np.eye(2)]),
        )

    def test_normalizer_at_mean(self):
        model = self._single([0.5, -0.5])
        assert gmm_eval(model, np.array([0.5, -0.5])) == pytest.approx(
            1 / (2 * math.pi), abs=1e-12)

    def test_far_tail_vanishes(self):
        model = self._single([0.0, 0.0])
        assert gmm_eval(model, np.array([20.0, 0.0])) < 1e-80

    def test_mirrored_components_symmetric(self):
        model = GmmObjective(
            weights=np.array([0.5, 0.5]),
            means=np.array([[1.0, 0.5], [-1.0, -0.5]]),
            covariances=np.array([np.eye(2), np.eye(2)]),
        )
        for x in (np.array([0.3, 1.2]), np.array([2.0, -0.7])):
            assert gmm_eval(model, x) == pytest.approx(gmm_eval(model, -x), abs=1e-15)

    def test_nonnegative_everywhere(self):
        model = gmm_generate(4, np.random.default_rng(3))
        rng = np.random.default_rng(4)
        for x in rng.uniform(-3, 3, size=(200, 2)):
            assert gmm_eval(model, x) >= 0.0


class TestGmmOptimum:
    def test_single_component_peak_at_mean(self):
        obj = gmm_objective(1, 5)
        model = gmm_generate(1, np.random.default_rng(5))
        np.testing.assert_allclose(obj.x_star, model.means[0], atol=1e-4)
        assert obj.f_star == pytest.approx(
            gmm_eval(model, model.means[0]), rel=1e-9)

    def test_case2_matches_fine_grid_oracle(self):
        obj = gmm_objective(2, 8)
        model = gmm_generate(2, np.random.default_rng(8))
        grid = unit_grid(GMM_BOUNDS, 401)
        coarse = max(gmm_eval(model, x) for x in grid)
        start = grid[int(np.argmax([gmm_eval(model, x) for x in grid]))]
        res = minimize(lambda x: -gmm_eval(model, np.clip(x, -3, 3)), start,
                       method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14})
        oracle = max(coarse, -res.fun)
        assert obj.f_star == pytest.approx(oracle, rel=1e-6)

    def test_same_seed_same_objective(self):
        a, b = gmm_objective(3, 11), gmm_objective(3, 11)
        x = np.array([0.4, -1.1])
        assert a.eval(x) == b.eval(x)
        assert a.f_star == b.f_star


class TestSyntheticFunctions:
    def test_rosenbrock3_extremes(self):
        assert eval_synthetic("rosenbrock3", np.ones(3)) == 7218.0
        assert eval_synthetic("rosenbrock3", np.full(3, -2.0)) == 0.0

    def test_rosenbrock4_center(self):
        assert eval_synthetic("rosenbrock4", np.zeros(4)) == 10824.0

    def test_rosenbrock4_registered_optimum(self):
        obj = synthetic_objective("rosenbrock4")
        np.testing.assert_allclose(obj.x_star, np.ones(4))
        assert obj.f_star == 10827.0

    def test_levy6_at_ones(self):
        assert eval_synthetic("levy6", np.ones(6)) == pytest.approx(47.341, abs=1e-9)

    def test_levy6_ones_is_argmax(self):
        obj = synthetic_objective("levy6")
        rng = np.random.default_rng(6)
        for x in rng.uniform(-5, 5, size=(2000, 6)):
            assert obj.eval(x) <= obj.f_star + 1e-9

    def test_hartmann6_maximum_location_and_value(self):
        obj = synthetic_objective("hartmann6")
        res = minimize(
            lambda x: -eval_synthetic("hartmann6", np.clip(x, 0, 1)),
            np.array([0.20169, 0.15001, 0.47687, 0.27533, 0.31165, 0.65730]),
            method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14},
        )
        assert obj.f_star == pytest.approx(-res.fun, abs=1e-3)
        assert obj.f_star == pytest.approx(3.32237, abs=1e-3)

    def test_out_of_bounds_rejected(self):
        with pytest.raises(InputError):
            eval_synthetic("levy6", np.full(6, 5.1))

    def test_unknown_name_rejected(self):
        with pytest.raises(InputError):
            synthetic_objective("branin")

    def test_true_optimum_accessor(self):
        obj = synthetic_objective("rosenbrock3")
        x_star, f_star = true_optimum(obj)
        assert f_star == 7218.0
        np.testing.assert_allclose(x_star, np.ones(3))


class TestYieldTable:
    def _write(self, tmp_path, rows, header="flow_ml_min,temp_c,yield_pct"):
        path = tmp_path / "table.csv"
        path.write_text(header + "\n" + "\n".join(rows) + "\n")
        return path

    def test_roundtrip(self, tmp_path):
        path = self._write(tmp_path, ["16,542,20.5", "46,590,35.0"])
        records = read_yield_table(path)
        assert len(records) == 2
        np.testing.assert_allclose(records[0][0], [16.0, 542.0])
        assert records[1][1] == 35.0

    def test_mass_filter(self, tmp_path):
        path = self._write(
            tmp_path,
            ["16,542,20.5,150.0", "20,550,25.0,200.0"],
            header="flow_ml_min,temp_c,yield_pct,mass_mg",
        )
        records = read_yield_table(path)
        assert len(records) == 1

    def test_bad_row_named(self, tmp_path):
        path = self._write(tmp_path, ["16,542,20.5", "oops,550,25.0"])
        with pytest.raises(IngestError, match="row 3"):
            read_yield_table(path)

    def test_missing_column(self, tmp_path):
        path = self._write(tmp_path, ["16,20.5"], header="flow_ml_min,yield_pct")
        with pytest.raises(IngestError):
            read_yield_table(path)


class TestSurrogate:
    def _smooth_records(self):
        flows = np.linspace(16, 46, 6)
        temps = np.linspace(542, 590, 5)
        records = []
        for f in flows:
            for t in temps:
                y = 30 + 10 * math.exp(
                    -((f - 30) / 10) ** 2 - ((t - 566) / 20) ** 2)
                records.append((np.array([f, t]), y))
        return records

    def test_interpolates_training_yields(self):
        obj = fit_surrogate_from_table(self._smooth_records())
        for x, y in self._smooth_records():
            tol = 3 * math.sqrt(1e-6 * 10.0) + 1e-3
            assert obj.eval(x) == pytest.approx(y, abs=max(tol, 0.5))

    def test_constant_table(self):
        records = [
            (np.array([f, t]), 42.0)
            for f in (16.0, 30.0, 46.0) for t in (542.0, 566.0, 590.0)
        ]
        obj = fit_surrogate_from_table(records)
        for x, _ in records:
            assert obj.eval(x) == pytest.approx(42.0, abs=1e-6)

    def test_maximum_tracks_generator(self):
        obj = fit_surrogate_from_table(self._smooth_records())
        assert obj.f_star == pytest.approx(40.0, rel=0.05)

    def test_too_few_records_rejected(self):
        with pytest.raises(InputError):
            fit_surrogate_from_table([(np.array([16.0, 542.0]), 20.0)] * 3)


class TestRegistry:
    def test_gmm_case_shorthand(self):
        obj = make_objective({"name": "gmm_case2", "seed": 4})
        assert obj.dimension == 2

    def test_synthetic_dispatch(self):
        obj = make_objective({"name": "levy6"})
        assert obj.dimension == 6

    def test_unknown_rejected(self):
        with pytest.raises((InputError, ConfigError)):
            make_objective({"name": "nonsense"})


class TestObjectiveInvariants:
    def test_nonnegative_on_bounds_by_probing(self):
        rng = np.random.default_rng(0)
        objectives = [synthetic_objective(n)
                      for n in ("levy6", "hartmann6", "rosenbrock3", "rosenbrock4")]
        objectives.append(gmm_objective(3, 0))
        for obj in objectives:
            lo, hi = obj.bounds.lower, obj.bounds.upper
            probes = rng.uniform(lo, hi, size=(10_000, obj.dimension))
            values = np.array([obj.eval(x) for x in probes])
            assert np.all(values >= 0.0), obj.name
            assert obj.f_star > 0.0

    def test_gmm_density_integrates_to_one(self):
        model = gmm_generate(4, np.random.default_rng(12))
        axis = np.linspace(-12, 12, 241)
        xx, yy = np.meshgrid(axis, axis, indexing="ij")
        points = np.column_stack([xx.ravel(), yy.ravel()])
        values = np.array([gmm_eval(model, p) for p in points]).reshape(241, 241)
        integral = np.trapezoid(np.trapezoid(values, axis, axis=1), axis)
        assert integral == pytest.approx(1.0, rel=0.01)

    def test_evaluation_is_pure(self):
        obj = gmm_objective(2, 3)
        x = np.array([0.7, -2.1])
        assert obj.eval(x) == obj.eval(x)
        assert (eval_synthetic("levy6", np.full(6, 0.3))
                == eval_synthetic("levy6", np.full(6, 0.3)))
