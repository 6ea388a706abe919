import numpy as np
import pytest

from gst_lab.errors import ConfigurationError
from gst_lab.gst import BumpFunction
from gst_lab.sim import (
    SimConfig,
    accept_proposals,
    acceptance_reproducible,
    ensemble_summary,
    lag_autocorrelation,
    martingale_check,
    sample_stationary_init,
    simulate_ensemble,
    simulate_path,
    stationarity_check,
    terminal_quantiles,
    thinning_law_check,
)
from gst_lab.spectral.grid import Grid1D
from gst_lab.utils import ensemble_moments


def _short_config(**changes):
    base = SimConfig(horizon=0.5, dt=0.01, eps_s=0.05, window=6.0, seed=11, n_paths=6, batch_size=2)
    return base.with_(**changes)


def _assert_same_paths(left, right, exact=True):
    assert len(left) == len(right)
    for a, b in zip(left, right):
        if exact:
            np.testing.assert_array_equal(a.states, b.states)
        else:
            np.testing.assert_allclose(a.states, b.states, rtol=1e-12, atol=1e-12)
        np.testing.assert_array_equal(a.jumps.s, b.jumps.s)
        np.testing.assert_array_equal(a.jumps.z, b.jumps.z)
        assert a.exited == b.exited


class TestSimConfig:
    @pytest.mark.parametrize(
        "changes",
        [
            pytest.param({"dt": 2.0}, id="step-above-horizon"),
            pytest.param({"eps_s": 0.0}, id="cutoff-zero"),
            pytest.param({"eps_s": 1.5}, id="cutoff-above-one"),
            pytest.param({"window": 0.0}, id="empty-window"),
            pytest.param({"initial_law": "uniform"}, id="unknown-law"),
            pytest.param({"x0": 9.0}, id="start-outside-window"),
        ],
    )
    def test_invalid_settings(self, changes):
        with pytest.raises(ConfigurationError):
            _short_config(**changes).validate()

    def test_grid_compatibility(self):
        grid = Grid1D(8.0, 256)
        with pytest.raises(ConfigurationError, match="grid spacing"):
            _short_config(eps_s=0.01).validate(grid)
        with pytest.raises(ConfigurationError, match="window_bound"):
            _short_config(window=7.5).validate(grid)
        assert _short_config(eps_s=0.1).validate(grid).eps_s == 0.1


class TestThinning:
    def test_accept_rule(self):
        np.testing.assert_array_equal(accept_proposals([0.1, 0.5, 0.9], [0.5, 0.5, 0.5]), [True, True, False])

    def test_paths_do_not_depend_on_threads(self, stable_gst):
        cfg = _short_config()
        serial = simulate_ensemble(stable_gst, cfg, threads=1)
        parallel = simulate_ensemble(stable_gst, cfg, threads=3)
        _assert_same_paths(serial, parallel)

    def test_single_path_matches_the_ensemble(self, stable_gst):
        cfg = _short_config()
        ensemble = simulate_ensemble(stable_gst, cfg)
        _assert_same_paths([simulate_path(stable_gst, cfg, 3)], [ensemble[3]], exact=False)

    def test_batching_does_not_change_paths(self, stable_gst):
        _assert_same_paths(
            simulate_ensemble(stable_gst, _short_config(batch_size=1)),
            simulate_ensemble(stable_gst, _short_config(batch_size=6)),
            exact=False,
        )

    def test_recorded_decisions_are_reproducible(self, stable_gst):
        paths = simulate_ensemble(stable_gst, _short_config(record_rejected=True))
        assert any(len(path.jumps) for path in paths)
        for path in paths:
            assert acceptance_reproducible(path, stable_gst)
            assert np.all(path.jumps.v >= 0.0)

    def test_paths_start_at_the_point(self, stable_gst):
        paths = simulate_ensemble(stable_gst, _short_config(x0=0.5))
        assert all(path.states[0] == 0.5 for path in paths)
        assert all(len(path.times) == 51 for path in paths if not path.exited)

    def test_stationary_start_needs_a_ground_state(self, stable_model):
        with pytest.raises(ConfigurationError):
            simulate_ensemble(None, _short_config(initial_law="stationary"), levy=stable_model)

    def test_unit_ratio_simulation_accepts_everything(self, stable_model):
        paths = simulate_ensemble(None, _short_config(window=50.0, record_rejected=True), levy=stable_model)
        for path in paths:
            assert np.all(path.jumps.accepted)

    @pytest.mark.slow
    def test_thinned_law_at_a_frozen_state(self, stable_gst):
        result = thinning_law_check(stable_gst, x_bar=0.5, band=0, window=6.0, n_proposals=50_000, seed=4)
        assert result.p_value > 0.001
        assert 0.0 < result.acceptance_rate <= 1.0

    def test_thinning_check_arguments(self, stable_gst):
        with pytest.raises(ValueError):
            thinning_law_check(stable_gst, band=99)
        with pytest.raises(ValueError):
            thinning_law_check(stable_gst, bins=7)


class TestStationaryLaw:
    def test_stationary_draws(self, harmonic_state):
        draws = sample_stationary_init(harmonic_state, seed=2, size=20_000)
        assert np.mean(draws) == pytest.approx(0.0, abs=0.02)
        assert np.var(draws) == pytest.approx(0.5, abs=0.02)
        assert isinstance(sample_stationary_init(harmonic_state, seed=2), float)

    @pytest.mark.slow
    def test_ornstein_uhlenbeck_statistics(self, harmonic_gst):
        cfg = SimConfig(horizon=2.0, dt=0.01, n_paths=2000, initial_law="stationary", seed=3, record_jumps=False)
        paths = simulate_ensemble(harmonic_gst, cfg)
        summary = ensemble_summary(paths)
        assert summary["exit_fraction"] == 0.0
        assert summary["terminal_stdev"] ** 2 == pytest.approx(0.5, abs=0.05)
        assert lag_autocorrelation(paths, lag_steps=10) == pytest.approx(np.exp(-0.1), abs=0.02)
        quantiles = terminal_quantiles(paths)
        assert quantiles[2] == pytest.approx(0.0, abs=0.06)
        assert np.all(np.diff(quantiles) > 0)

    @pytest.mark.slow
    def test_stationarity_check(self, harmonic_gst):
        cfg = SimConfig(horizon=1.0, dt=0.01, n_paths=2000, initial_law="stationary", seed=5, record_jumps=False)
        result = stationarity_check(harmonic_gst, cfg, t=1.0)
        assert result.ks_statistic < 0.05
        assert result.reliable

    def test_stationarity_needs_a_stationary_start(self, harmonic_gst):
        with pytest.raises(ConfigurationError):
            stationarity_check(harmonic_gst, SimConfig(horizon=1.0, dt=0.01), t=1.0)


class TestMartingaleProblem:
    def test_zero_time(self, harmonic_gst):
        result = martingale_check(harmonic_gst, SimConfig(), BumpFunction(0.0, 1.5), t=0.0)
        assert result.z_score == 0.0
        assert result.n_paths == 0

    def test_negative_time(self, harmonic_gst):
        with pytest.raises(ValueError):
            martingale_check(harmonic_gst, SimConfig(), BumpFunction(0.0, 1.5), t=-1.0)

    @pytest.mark.slow
    def test_bump_functional_is_centred(self, harmonic_gst):
        cfg = SimConfig(horizon=0.5, dt=0.005, n_paths=2000, initial_law="stationary", seed=7, record_jumps=False)
        result = martingale_check(harmonic_gst, cfg, BumpFunction(0.0, 1.5), t=0.5)
        assert result.function == "bump(0,1.5)"
        assert abs(result.z_score) < 3.0
        assert result.reliable
        assert set(result.to_dict()) >= {"z_score", "standard_error", "reliable"}

    @pytest.mark.slow
    def test_stable_jump_process_is_centred_and_stationary(self, stable_gst):
        cfg = SimConfig(
            horizon=0.5, dt=5e-3, eps_s=0.05, window=6.0, n_paths=3000, seed=9,
            initial_law="stationary", record_jumps=False,
        )
        paths = simulate_ensemble(stable_gst, cfg, threads=2)
        result = martingale_check(stable_gst, cfg, BumpFunction(0.0, 1.0), t=0.5, paths=paths)
        assert abs(result.z_score) < 3.0
        assert result.reliable
        stationarity = stationarity_check(stable_gst, cfg, t=0.5, paths=paths)
        assert stationarity.ks_statistic < 0.05


class TestEnsembleMoments:
    def test_exited_paths_are_skipped(self):
        moments = ensemble_moments([1.0, np.nan, 3.0, np.nan])
        assert moments.count == 2
        assert moments.mean == 2.0
        assert moments.stdev == pytest.approx(np.sqrt(2.0))
        assert moments.standard_error == pytest.approx(1.0)

    def test_degenerate_ensembles(self):
        assert ensemble_moments([]).mean == 0.0
        single = ensemble_moments([np.nan, 4.0])
        assert (single.count, single.mean, single.stdev, single.standard_error) == (1, 4.0, 0.0, 0.0)

    def test_summary_ignores_exited_paths(self, stable_gst):
        paths = simulate_ensemble(stable_gst, _short_config(window=0.3))
        summary = ensemble_summary(paths)
        survivors = [path.states[-1] for path in paths if not path.exited]
        assert summary["exit_fraction"] == pytest.approx(1.0 - len(survivors) / len(paths))
        if survivors:
            assert summary["terminal_mean"] == pytest.approx(np.mean(survivors))
