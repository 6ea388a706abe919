import numpy as np
import pytest

from gst_lab.fractal import (
    PointSystem,
    SpectrumEstimate,
    approximation_rate,
    approximation_rates,
    box_dimension,
    collision_mask,
    covering_measure,
    dyadic_jump_counts,
    holder_empirical,
    holder_theoretical,
    holder_upper_bound,
    interval_union_measure,
    monotone_residual,
    pointwise_exponents,
    reference_spectrum,
    resolved_band_limit,
    scale_window,
    spectrum_estimate,
    stratified_times,
)
from gst_lab.core.scenarios import FractalSpec
from gst_lab.levy import BandSampler, IsotropicStable, LevyModel, sample_levy_path
from gst_lab.paths import JumpTable, PathRecord
from gst_lab.utils import derive_rng, dyadic_scales


def _cantor_points(depth: int) -> np.ndarray:
    lefts = np.zeros(1)
    for k in range(1, depth + 1):
        lefts = np.concatenate([lefts, lefts + 2.0 * 3.0**-k])
    # centres of the depth-level intervals keep floor() away from box edges
    return np.sort(lefts) + 0.5 * 3.0**-depth


def _linear_path(n: int = 1024) -> PathRecord:
    times = np.linspace(0.0, 1.0, n + 1)
    return PathRecord(times=times, states=times.copy())


def _band_sample(rng, model: LevyModel, horizon: float, j_max: int) -> PointSystem:
    times, sizes = [], []
    for j, mass in enumerate(model.band_mass_table(j_max).masses):
        count = int(round(mass * horizon))
        times.append(rng.uniform(0.0, horizon, size=count))
        sizes.append(np.full(count, 0.75 * 2.0**-j))
    return PointSystem.from_arrays(np.concatenate(times), np.concatenate(sizes), horizon)


class TestPointSystem:
    def test_from_arrays_sorts_and_filters(self):
        ps = PointSystem.from_arrays([0.7, 0.2, 0.2, 1.5, 0.4], [0.5, 0.1, 0.3, 0.2, 2.0], horizon=1.0)
        np.testing.assert_array_equal(ps.times, [0.2, 0.7])
        np.testing.assert_array_equal(ps.sizes, [0.1, 0.5])
        np.testing.assert_array_equal(ps.bands, [3, 0])

    def test_band_edges_are_half_open(self):
        ps = PointSystem.from_arrays([0.1, 0.2, 0.3, 0.4], [1.0, 0.5, 0.25, 0.3], horizon=1.0)
        # 2^-j-1 <= r < 2^-j: size 2^-j-1 is the lower edge of band j, size 1 is in no band
        np.testing.assert_array_equal(ps.bands, [-1, 0, 1, 1])
        np.testing.assert_array_equal(ps.band_times(1), [0.3, 0.4])

    def test_invariants(self):
        with pytest.raises(ValueError):
            PointSystem(times=np.array([0.1, 0.1]), sizes=np.array([0.5, 0.5]), horizon=1.0)
        with pytest.raises(ValueError):
            PointSystem(times=np.array([0.1]), sizes=np.array([1.5]), horizon=1.0)

    def test_from_path_keeps_accepted_small_jumps(self):
        jumps = JumpTable(
            s=np.array([0.1, 0.2, 0.3, 0.9]),
            z=np.array([-0.5, 0.25, 3.0, 0.1]),
            v=np.zeros(4),
            accepted=np.array([True, False, True, True]),
            pre_state=np.zeros(4),
            x_mark=np.zeros(4),
            band=np.array([1, 2, -1, 3]),
        )
        path = PathRecord(
            times=np.linspace(0.0, 0.5, 6), states=np.zeros(6), jumps=jumps, exited=True, exit_time=0.5
        )
        ps = PointSystem.from_path(path)
        np.testing.assert_array_equal(ps.times, [0.1])
        assert ps.horizon == 0.5

    def test_resolved_band_limit(self):
        assert resolved_band_limit(2.0**-10) == 9
        assert resolved_band_limit(0.05) == 3
        assert resolved_band_limit(1.0) == 0


class TestApproximationRates:
    def test_rate_from_the_nearest_deep_jump(self):
        ps = PointSystem.from_arrays([0.5], [2.0**-4], horizon=3.0)
        rates = approximation_rates(ps, [0.5 + 2.0**-8, 2.9], beta=1.0, j_max=4)
        assert rates[0] == pytest.approx(8.0 / 3.0)
        assert np.isnan(rates[1])

    def test_rate_is_clipped(self):
        ps = PointSystem.from_arrays([0.5], [2.0**-4], horizon=1.0)
        assert approximation_rate(ps, 0.5, beta=1.0, j_max=4) == 4.0
        assert approximation_rate(ps, 0.5 + 0.4, beta=1.0, j_max=4) == 1.0
        assert approximation_rate(ps, 0.5, beta=1.0, j_max=4, delta_max=3.0) == 3.0

    def test_no_resolved_bands(self):
        ps = PointSystem.from_arrays([0.5], [0.5], horizon=1.0)
        assert approximation_rate(ps, 0.5, beta=1.5, j_max=0) is None


class TestCovering:
    def test_interval_union(self):
        starts, ends = np.array([0.0, 0.5, 0.6]), np.array([0.3, 0.8, 0.7])
        assert interval_union_measure(starts, ends, 0.0, 1.0) == pytest.approx(0.6)
        assert interval_union_measure(starts, ends, 0.1, 0.55) == pytest.approx(0.25)
        assert interval_union_measure(np.empty(0), np.empty(0), 0.0, 1.0) == 0.0

    def test_single_jump(self):
        ps = PointSystem.from_arrays([0.5], [0.25], horizon=1.0)
        table = covering_measure(ps, delta=1.0, beta=1.0, epsilons=[0.5, 0.1, 0.25])
        np.testing.assert_allclose(table.epsilons, [0.1, 0.25, 0.5])
        np.testing.assert_allclose(table.fractions, [0.0, 0.5, 0.5])

    def test_fractions_are_monotone(self):
        rng = derive_rng(0, 1)
        ps = PointSystem.from_arrays(rng.uniform(0, 1, 400), rng.uniform(0.001, 1.0, 400), horizon=1.0)
        epsilons = 2.0 ** -np.arange(8)
        narrow = covering_measure(ps, delta=1.5, beta=1.5, epsilons=epsilons)
        wide = covering_measure(ps, delta=0.8, beta=1.5, epsilons=epsilons)
        assert np.all(np.diff(narrow.fractions) >= 0)
        assert np.all(wide.fractions >= narrow.fractions)
        assert narrow.rows().shape == (8, 3)


class TestDyadicCounts:
    def test_counts_follow_band_masses(self):
        model = LevyModel(density=IsotropicStable(1.5))
        systems = [_band_sample(derive_rng(3, k), model, 50.0, 5) for k in range(2)]
        counts = dyadic_jump_counts(systems, model, envelope=0.5, j_max=5)
        assert np.all(counts.inside)
        assert counts.growth == pytest.approx(1.5, abs=0.02)
        assert counts.growth_ok
        assert counts.to_dict()["all_inside"] is True

    def test_no_jumps(self):
        model = LevyModel(sigma=1.0)
        ps = PointSystem.from_arrays([], [], horizon=1.0)
        counts = dyadic_jump_counts([ps], model, envelope=1.0, j_max=3)
        np.testing.assert_array_equal(counts.counts, 0.0)
        assert counts.growth == 0.0


class TestHolder:
    def test_scale_window(self):
        lower, upper = scale_window(0.01, 1.5, 1e-4, 1.0)
        assert lower == pytest.approx(1e-3)
        assert upper == pytest.approx(0.01)
        assert scale_window(0.5, 0.0, 1e-3, 1.0)[0] == pytest.approx(4e-3)

    def test_linear_path_is_lipschitz(self):
        estimate = holder_empirical(_linear_path(), 0.5, (4.0 / 1024, 0.25))
        assert estimate.defined
        assert estimate.exponent == pytest.approx(1.0, abs=1e-9)
        assert len(estimate.scales) == 7

    def test_too_few_scales(self):
        estimate = holder_empirical(_linear_path(), 0.5, (4.0 / 1024, 0.01))
        assert not estimate.defined

    def test_theoretical_exponent(self):
        assert holder_theoretical(2.0, 1.5, 0.0) == pytest.approx(1.0 / 3.0)
        assert holder_theoretical(1.0, 1.5, 1.0) == 0.5
        assert holder_theoretical(3.0, 1.5, 1.0) == pytest.approx(2.0 / 9.0)

    def test_upper_bound_from_a_nearby_jump(self):
        ps = PointSystem.from_arrays([0.5], [2.0**-6], horizon=1.0)
        # r = 2^-6 sits in band 5; log r / log |t - t_n| = log 2^-6 / log 2^-3
        assert holder_upper_bound(ps, 0.5 + 2.0**-3, (5, 5)) == pytest.approx(2.0)
        assert holder_upper_bound(ps, 0.5 + 2.0**-3, (1, 4)) == np.inf

    @pytest.mark.slow
    @pytest.mark.parametrize(
        "sigma, expected",
        [pytest.param(0.0, 2.0 / 3.0, id="pure-jump"), pytest.param(1.0, 0.5, id="diffusive")],
    )
    def test_median_exponent_on_the_fractal_window(self, sigma, expected):
        # ratio = 1 paths at the fractal-stage cutoff, step and window
        settings = FractalSpec()
        model = LevyModel(sigma=sigma, density=IsotropicStable(1.5))
        beta = model.bg_index()
        window = scale_window(settings.eps_s, beta, settings.dt, settings.horizon)
        sampler = BandSampler.build(model, settings.eps_s)
        exponents = []
        for index in range(40):
            path = sample_levy_path(model, settings.horizon, settings.dt, settings.eps_s, 21, index, sampler=sampler)
            sample_times = derive_rng(21, 99, index).uniform(0.05, 0.95, size=25)
            estimates = [holder_empirical(path, t, window) for t in sample_times]
            exponents.extend(e.exponent for e in estimates if e.defined)
        assert len(exponents) > 900
        assert np.median(exponents) == pytest.approx(expected, abs=0.1)

    def test_collision_mask(self):
        ps = PointSystem.from_arrays([0.5], [0.1], horizon=1.0)
        np.testing.assert_array_equal(collision_mask(ps, np.array([0.5004, 0.51]), dt=1e-3), [True, False])


class TestSpectrum:
    def test_box_dimension_of_an_interval(self):
        scales = 2.0 ** -np.arange(1, 9)
        result = box_dimension(np.arange(4096) / 4096.0, 1.0, scales)
        assert result.dimension == pytest.approx(1.0)

    def test_box_dimension_of_the_cantor_set(self):
        scales = 3.0 ** -np.arange(1, 9)
        result = box_dimension(_cantor_points(10), 1.0, scales)
        assert result.dimension == pytest.approx(np.log(2.0) / np.log(3.0), rel=1e-9)
        assert result.r_squared == pytest.approx(1.0)

    @pytest.mark.parametrize(
        "sigma, expected",
        [
            pytest.param(0.0, [0.3, 0.75, -np.inf, -np.inf], id="pure-jump"),
            pytest.param(1.0, [0.3, 1.0, -np.inf, -np.inf], id="with-brownian-part"),
        ],
    )
    def test_reference_spectrum(self, sigma, expected):
        np.testing.assert_allclose(reference_spectrum([0.2, 0.5, 0.7, 0.8], 1.5, sigma), expected)

    def test_pointwise_exponents(self):
        deltas = np.array([1.0, 2.0, np.nan])
        np.testing.assert_allclose(pointwise_exponents(deltas, 1.5, 0.0), [2.0 / 3.0, 1.0 / 3.0, np.nan])
        np.testing.assert_allclose(pointwise_exponents(deltas, 1.5, 1.0), [0.5, 1.0 / 3.0, 0.5])

    def test_stratified_times(self):
        sample_times = stratified_times(derive_rng(1, 2), 1.0, 0.125)
        assert len(sample_times) == 8
        np.testing.assert_array_equal(np.floor(sample_times / 0.125), np.arange(8))

    def test_empty_ensemble(self):
        estimate = spectrum_estimate([], 1.5, 0.0, [0.2, 0.4], eps_s=0.01)
        assert np.all(np.isnan(estimate.d_hat))
        assert estimate.to_dict()["D_hat"] == [None, None]

    def test_monotone_residual(self):
        h = np.array([0.1, 0.2, 0.3, 0.4])
        estimate = SpectrumEstimate(
            label="test",
            h_grid=h,
            d_hat=np.array([0.1, 0.3, 0.2, 0.5]),
            counts=np.full(4, 100.0),
            reference=reference_spectrum(h, 1.5, 0.0),
            scales=dyadic_scales(1e-3, 1e-2),
        )
        assert monotone_residual(estimate, 1.5) == pytest.approx(0.05)
        assert estimate.value_at(0.21) == 0.3
