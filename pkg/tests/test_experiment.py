import math

import numpy as np
import pytest

from anglebound.experiment import (DEFAULT_TRAIN_SIZES, ExperimentConfig, aggregate_cells,
                                   calibration_verdict, cell_seeds, figure_configs,
                                   population_minimizer, run_cell, run_sweep,
                                   sweep_agg_rows, sweep_cells_rows, tight_radius,
                                   worker_count, VERDICT_FLOOR)
from anglebound.synth import FeatureLaw, LinkFunction, split_seed

SMALL = dict(train_sizes=(100, 316), replicates=3, eval_size=2000, base_seed=99)


def small_config(**kw):
    base = dict(law=FeatureLaw("uniform_iid", 2, scale=0.125),
                link=LinkFunction("linear"), beta_star=(1.0, -3.0),
                loss="square", radius=math.inf, **SMALL)
    base.update(kw)
    return ExperimentConfig(**base)


class TestConfig:
    def test_rejects_descending_sizes(self):
        with pytest.raises(ValueError):
            small_config(train_sizes=(316, 100))

    def test_rejects_tiny_eval(self):
        with pytest.raises(ValueError):
            small_config(eval_size=10)

    def test_rejects_nonpositive_radius(self):
        with pytest.raises(ValueError):
            small_config(radius=0.0)


class TestSeeds:
    def test_seed_derivation_rule(self):
        cfg = small_config()
        # cell (size index 1, replicate 2) -> k = 1*3 + 2 = 5.
        train, ev = cell_seeds(cfg, 316, 2)
        assert train == split_seed(99, 10)
        assert ev == split_seed(99, 11)

    def test_all_cell_seeds_distinct(self):
        cfg = small_config()
        seeds = []
        for size in cfg.train_sizes:
            for rep in range(cfg.replicates):
                seeds.extend(cell_seeds(cfg, size, rep))
        assert len(set(seeds)) == len(seeds)


class TestRunCell:
    def test_deterministic(self):
        cfg = small_config()
        a = run_cell(cfg, 100, 0)
        b = run_cell(cfg, 100, 0)
        np.testing.assert_array_equal(a.fit.beta_tilde, b.fit.beta_tilde)
        assert a.report.excess_01 == b.report.excess_01

    def test_bounds_dominate_per_cell(self):
        cfg = small_config()
        for rep in range(3):
            c = run_cell(cfg, 316, rep)
            assert not c.error_code
            assert c.report.excess_01 <= c.report.bound_sin + 1e-12
            assert c.report.bound_sin <= c.report.bound_bartlett + 1e-12

    def test_solver_failure_recorded_not_raised(self):
        # A gaussian law with the linear link makes generate raise
        # InvalidBetaStar; run_cell must catch it into error_code.
        cfg = small_config(law=FeatureLaw("gaussian_iid", 2, scale=1.0))
        c = run_cell(cfg, 100, 0)
        assert c.error_code == "InvalidBetaStar"
        assert c.fit is None and c.report is None


class TestAggregation:
    def test_means_and_ses_match_numpy(self):
        cfg = small_config()
        sweep = run_sweep(cfg, workers=1)
        by_size = {}
        for c in sweep.cells:
            by_size.setdefault(c.train_size, []).append(c.report.excess_01)
        for row in sweep.aggregates:
            vals = np.array(by_size[row["train_size"]])
            assert row["n_ok"] == 3 and row["n_err"] == 0
            assert row["mean_excess_01"] == pytest.approx(float(vals.mean()), abs=1e-15)
            assert row["se_excess_01"] == pytest.approx(
                float(vals.std(ddof=1) / math.sqrt(len(vals))), abs=1e-15)

    def test_error_cells_counted(self):
        cfg = small_config(law=FeatureLaw("gaussian_iid", 2, scale=1.0))
        cells = [run_cell(cfg, s, r) for s in cfg.train_sizes for r in range(3)]
        agg = aggregate_cells(cfg, cells)
        assert all(row["n_ok"] == 0 and row["n_err"] == 3 for row in agg)
        assert calibration_verdict(agg) == "inconclusive"


class TestVerdict:
    def _agg(self, mean, se):
        return [{"train_size": 100, "n_ok": 5, "n_err": 0,
                 "mean_excess_01": mean, "se_excess_01": se}]

    def test_calibrated_below_floor(self):
        assert calibration_verdict(self._agg(VERDICT_FLOOR / 2, 1e-9)) == "calibrated"

    def test_not_calibrated_above_three_thresholds(self):
        assert calibration_verdict(self._agg(10 * VERDICT_FLOOR, 1e-9)) == "not_calibrated"

    def test_inconclusive_in_between(self):
        assert calibration_verdict(self._agg(2 * VERDICT_FLOOR, 1e-9)) == "inconclusive"

    def test_se_lifts_threshold(self):
        # mean below 3*SE counts as calibrated even above the floor.
        assert calibration_verdict(self._agg(2 * VERDICT_FLOOR,
                                             VERDICT_FLOOR)) == "calibrated"

    def test_uses_largest_size_with_successes(self):
        agg = [{"train_size": 100, "n_ok": 5, "n_err": 0,
                "mean_excess_01": 1.0, "se_excess_01": 1e-9},
               {"train_size": 316, "n_ok": 5, "n_err": 0,
                "mean_excess_01": VERDICT_FLOOR / 10, "se_excess_01": 1e-9},
               {"train_size": 1000, "n_ok": 0, "n_err": 5}]
        assert calibration_verdict(agg) == "calibrated"


class TestSweep:
    def test_parallel_matches_sequential(self):
        cfg = small_config()
        seq = run_sweep(cfg, workers=1)
        par = run_sweep(cfg, workers=2)
        assert sweep_cells_rows(seq) == sweep_cells_rows(par)
        assert sweep_agg_rows(seq) == sweep_agg_rows(par)

    def test_csv_rows_deterministic_and_schema(self):
        cfg = small_config(cell_id="uncorr_rinf", figure="fig4")
        sweep = run_sweep(cfg, workers=1)
        rows = sweep_cells_rows(sweep)
        assert len(rows) == 6
        first = rows[0].split(",")
        assert first[:5] == ["fig4", "uncorr_rinf", "uniform_iid", "linear", "square"]
        assert first[5] == "inf"
        assert first[7] == "1.0;-3.0"
        assert rows == sweep_cells_rows(run_sweep(cfg, workers=1))

    def test_worker_count_env(self, monkeypatch):
        monkeypatch.setenv("DR_THREADS", "4")
        assert worker_count() == 4
        monkeypatch.setenv("DR_THREADS", "junk")
        assert worker_count() == 1
        monkeypatch.delenv("DR_THREADS")
        assert worker_count() == 1


class TestPopulationBaseline:
    def test_square_linear_link_recovers_direction(self):
        # With the linear link, the population square-loss minimizer is
        # 2 * Sigma^{-1} Cov(X, <beta*, X>) = 2 beta* direction for iid laws.
        law = FeatureLaw("uniform_iid", 2, scale=0.125)
        beta = population_minimizer(law, LinkFunction("linear"), (1.0, -3.0), "square")
        direction = beta / np.linalg.norm(beta)
        target = np.array([1.0, -3.0]) / math.sqrt(10)
        np.testing.assert_allclose(direction, target, atol=5e-3)

    def test_logistic_recovers_beta_star(self):
        # Well-specified logistic model: the population minimizer is beta*.
        law = FeatureLaw("gaussian_iid", 2, scale=1.0)
        beta = population_minimizer(law, LinkFunction("logistic"), (1.0, -3.0), "logistic")
        np.testing.assert_allclose(beta, [1.0, -3.0], atol=2e-2)

    def test_tight_radius_is_half_norm(self):
        law = FeatureLaw("gaussian_iid", 2, scale=1.0)
        beta = population_minimizer(law, LinkFunction("logistic"), (1.0, -3.0), "logistic")
        r = tight_radius(law, LinkFunction("logistic"), (1.0, -3.0), "logistic")
        assert r == pytest.approx(0.5 * float(np.linalg.norm(beta)))


class TestFigureGrids:
    def test_fig4_grid_shape(self):
        cfgs = figure_configs("fig4", train_sizes=(100,), replicates=1)
        assert len(cfgs) == 6
        ids = [c.cell_id for c in cfgs]
        assert ids == ["uncorr_rinf", "uncorr_rtight", "uncorr_rtighter",
                       "corr_rinf", "corr_rtight", "corr_rtighter"]
        assert all(c.loss == "square" and c.link.kind == "linear" for c in cfgs)
        assert math.isinf(cfgs[0].radius) and cfgs[1].radius > cfgs[2].radius > 0

    def test_fig5_uses_logistic_loss(self):
        cfgs = figure_configs("fig5", train_sizes=(100,), replicates=1)
        assert all(c.loss == "logistic" for c in cfgs)

    def test_fig6_grid_shape(self):
        cfgs = figure_configs("fig6", train_sizes=(100,), replicates=1)
        assert len(cfgs) == 6
        assert all(c.link.kind == "logistic" for c in cfgs)
        assert {c.cell_id for c in cfgs} == {
            "square_gauss_symm", "square_gauss_nonsymm", "square_unif_nonsymm",
            "logistic_gauss_symm", "logistic_gauss_nonsymm", "logistic_unif_nonsymm"}

    def test_unknown_figure(self):
        with pytest.raises(ValueError):
            figure_configs("fig9")
