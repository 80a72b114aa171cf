"""Synthetic-suite tests: closed forms, standardization consistency, truth
tables, and the replication harness."""

import numpy as np
import pytest

from riskpareto.benchmarks import (SYNTHETIC_DIMS, build_truth, discretized_normal,
                                   discretized_normal_weights, eval_synthetic,
                                   experiment_setup, grid_points, neg_std_risk,
                                   replicate_experiment)
from riskpareto.env import EnvModel, uniform_env
from riskpareto.optimizer import Objective, ProblemSpec
from riskpareto.pareto import pareto_front_indices
from riskpareto.risk import RiskSpec

from oracles import oracle_risk


class TestSyntheticForms:
    def test_booth_optimum(self):
        # unstandardized Booth vanishes at (1, 3)
        assert abs(eval_synthetic("booth", [1, 3]) - 157.35 / np.sqrt(28896.11)) < 1e-9

    def test_matyas_optimum(self):
        assert abs(eval_synthetic("matyas", [0, 0]) - 4.3342 / np.sqrt(23.52052)) < 1e-9

    def test_rosenbrock_at_ones(self):
        # the Rosenbrock sum vanishes at the all-ones point
        got = eval_synthetic("rosenbrock6", np.ones(6))
        assert abs(got - 273.45 / np.sqrt(28153.22)) < 1e-9

    def test_himmelblau_root(self):
        # a root of the unstandardized Himmelblau function
        got = eval_synthetic("himmelblau", [3.0, 2.0])
        assert abs(got - 136.71 / np.sqrt(12503.63)) < 1e-9

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            eval_synthetic("booth", [1, 2, 3])
        with pytest.raises(ValueError):
            eval_synthetic("rosenbrock6", [0, 0])
        with pytest.raises(ValueError):
            eval_synthetic("rastrigin", [0, 0])

    def test_deterministic_and_total(self):
        rng = np.random.default_rng(0)
        for kind, dim in SYNTHETIC_DIMS.items():
            v = rng.uniform(-1, 1, size=dim)
            a = eval_synthetic(kind, v)
            assert np.isfinite(a)
            assert eval_synthetic(kind, v) == a

    def test_standardization_consistency(self):
        """Each function is near zero-mean unit-variance under the measure its
        constants were computed for."""
        g = np.linspace(-5, 5, 50)
        X1, X2 = np.meshgrid(g, g, indexing="ij")
        grid2 = np.column_stack([X1.ravel(), X2.ravel()])
        for kind in ("booth", "matyas", "himmelblau", "mccormick"):
            vals = np.array([eval_synthetic(kind, v) for v in grid2])
            assert abs(vals.mean()) < 0.1, kind
            assert 0.8 <= vals.var() <= 1.2, kind
        # ZDT1: inputs are x + w with x ~ U[0.25, 0.75]^2, w ~ U[-0.25, 0.25]^2
        rng = np.random.default_rng(1)
        a = rng.uniform(0.25, 0.75, (40_000, 2)) + rng.uniform(-0.25, 0.25, (40_000, 2))
        for kind in ("zdt1_f1", "zdt1_f2"):
            vals = np.array([eval_synthetic(kind, v) for v in a[:8000]])
            assert abs(vals.mean()) < 0.1, kind
            assert 0.8 <= vals.var() <= 1.2, kind
        # six-dimensional Rosenbrock: continuous uniform on [-1, 1]^6
        b = rng.uniform(-1, 1, (8000, 6))
        vals = np.array([eval_synthetic("rosenbrock6", v) for v in b])
        assert abs(vals.mean()) < 0.1
        assert 0.8 <= vals.var() <= 1.2


class TestDiscretizedNormal:
    def test_symmetric_support(self):
        env = discretized_normal([[-1.0], [0.0], [1.0]])
        w = np.asarray(env.weights)
        assert abs(w[0] - w[2]) < 1e-15
        assert w[1] > w[0]

    def test_single_point(self):
        env = discretized_normal([[0.7]])
        assert env.weights == (1.0,)

    def test_matches_density_ratios(self):
        support = np.linspace(-1, 1, 7)[:, None]
        w = discretized_normal_weights(support)
        dens = np.exp(-0.5 * support.ravel() ** 2)
        np.testing.assert_allclose(w, dens / dens.sum(), atol=1e-12)


def micro_problem(objective_fn, risks, n_x=4, n_w=3, env=None):
    xs = np.linspace(-1, 1, n_x)[:, None]
    ws = np.linspace(-1, 1, n_w)[:, None]
    return ProblemSpec(design_grid=xs, env_grid=ws,
                       env_model=env or uniform_env(n_w),
                       objectives=(Objective(fn=objective_fn),), risks=risks,
                       epsilon=None, budget=1, init_points=0)


class TestBuildTruth:
    def test_constant_function(self):
        problem = micro_problem(lambda x, w: 4.2,
                                (RiskSpec(kind="bayes"), RiskSpec(kind="worst_case")))
        truth = build_truth(problem)
        np.testing.assert_allclose(truth.values, 4.2)
        assert truth.z_star == (0, 1, 2, 3)  # ties all retained

    def test_worst_case_of_x_minus_abs_w(self):
        problem = micro_problem(lambda x, w: float(x[0] - abs(w[0])),
                                (RiskSpec(kind="worst_case"), RiskSpec(kind="bayes")))
        truth = build_truth(problem)
        np.testing.assert_allclose(truth.values[:, 0], problem.design_grid[:, 0] - 1.0,
                                   atol=1e-12)

    def test_z_star_matches_front_reference(self):
        problem = micro_problem(lambda x, w: float(np.sin(x[0] * 2) + 0.2 * w[0]),
                                (RiskSpec(kind="bayes"), neg_std_risk(0)))
        truth = build_truth(problem)
        assert truth.z_star == tuple(int(i) for i in pareto_front_indices(truth.values))

    def test_rosenbrock_micro_instance_matches_oracle(self):
        # mean / negative-std truth on a 3^3 x 3^3 micro grid
        from riskpareto.benchmarks import _SYNTHETIC
        fn = _SYNTHETIC["rosenbrock6"]
        xs = grid_points([-1] * 3, [1] * 3, [3, 3, 3])
        ws = grid_points([-1] * 3, [1] * 3, [3, 3, 3])
        env = EnvModel(support=tuple(range(ws.shape[0])),
                       weights=tuple(discretized_normal_weights(ws)),
                       distribution_kind="discretized_normal")
        problem = ProblemSpec(
            design_grid=xs, env_grid=ws, env_model=env,
            objectives=(Objective(fn=lambda x, w: float(
                fn(np.array([w[0], w[1], x[0], x[1], x[2], w[2]])))),),
            risks=(RiskSpec(kind="bayes"), neg_std_risk(0)),
            epsilon=None, budget=1, init_points=0)
        truth = build_truth(problem)
        w = np.asarray(env.weights)
        for x in range(0, xs.shape[0], 7):
            g = np.array([problem.objectives[0].fn(xs[x], ws[j])
                          for j in range(ws.shape[0])])[None, :]
            mean = float(oracle_risk(RiskSpec(kind="bayes"), {0: g}, w)[0])
            neg_sd = -float(oracle_risk(RiskSpec(kind="std"), {0: g}, w)[0])
            assert abs(truth.values[x, 0] - mean) < 1e-12
            assert abs(truth.values[x, 1] - neg_sd) < 1e-12


class TestReplication:
    def test_single_trial_single_iteration(self):
        res = replicate_experiment("zdt1_iu", trials=1, budget=1, seed=0,
                                   methods=("proposed", "random"))
        for method in ("proposed", "random"):
            curve = res.curves[method]["inference_discrepancy"]["mean"]
            assert curve.shape == (1,)
            assert np.isfinite(curve[0])

    def test_identical_seeds_identical_aggregates(self):
        a = replicate_experiment("zdt1_iu", trials=2, budget=2, seed=5,
                                 methods=("proposed",))
        b = replicate_experiment("zdt1_iu", trials=2, budget=2, seed=5,
                                 methods=("proposed",))
        np.testing.assert_array_equal(a.curves["proposed"]["inference_discrepancy"]["rows"],
                                      b.curves["proposed"]["inference_discrepancy"]["rows"])

    def test_workers_do_not_change_results(self):
        a = replicate_experiment("zdt1_iu", trials=3, budget=2, seed=7,
                                 methods=("proposed",), workers=1)
        b = replicate_experiment("zdt1_iu", trials=3, budget=2, seed=7,
                                 methods=("proposed",), workers=3)
        np.testing.assert_array_equal(a.curves["proposed"]["inference_discrepancy"]["rows"],
                                      b.curves["proposed"]["inference_discrepancy"]["rows"])

    def test_unknown_experiment_rejected(self):
        with pytest.raises(ValueError):
            replicate_experiment("zdt9", trials=1, budget=1, seed=0)

    def test_setup_shapes(self):
        problem, gp, schedule = experiment_setup("zdt1_iu")
        assert problem.design_grid.shape == (144, 2)
        assert problem.env_grid.shape == (25, 2)
        assert len(gp) == 2 and schedule.value == 3.0
        problem, gp, _ = experiment_setup("rosenbrock_iu")
        assert problem.design_grid.shape == (125, 3)
        assert len(problem.objectives) == 1 and len(problem.risks) == 2
        problem, _, _ = experiment_setup("two_objective_no_iu")
        assert problem.env_grid.shape == (1, 1)

    def test_rosenbrock_experiment_steps(self):
        res = replicate_experiment("rosenbrock_iu", trials=1, budget=2, seed=3,
                                   methods=("proposed",))
        assert np.isfinite(res.curves["proposed"]["inference_discrepancy"]["mean"]).all()

    def test_no_iu_experiment_steps(self):
        res = replicate_experiment("two_objective_no_iu", trials=1, budget=2, seed=4,
                                   methods=("proposed", "us"))
        assert np.isfinite(res.curves["us"]["inference_discrepancy"]["mean"]).all()
        assert np.isfinite(res.curves["proposed"]["phv_regret"]["mean"]).all()

    def test_uncontrollable_mode_passthrough(self):
        res = replicate_experiment("zdt1_iu", trials=1, budget=2, seed=11,
                                   methods=("proposed",), mode="uncontrollable")
        hist = res.histories["proposed"][0]
        assert all(np.isnan(r.env_af_value) for r in hist.records)
