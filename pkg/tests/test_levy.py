import math

import numpy as np
import pytest
from scipy import integrate

from gst_lab.errors import ConfigurationError, DensityDomainError, PrecisionError
from gst_lab.levy import (
    BandSampler,
    IsotropicStable,
    LevyModel,
    LogPerturbedStable,
    NoJumps,
    RelativisticStable,
    Tabulated,
    TemperedStable,
    build_density,
    sample_levy_path,
)
from gst_lab.levy.sampler import BIG_BAND, step_grid
from gst_lab.utils import derive_rng


def _stable_band_mass(alpha: float, scale: float, j: int) -> float:
    return 2.0 * scale / alpha * (2.0 ** ((j + 1) * alpha) - 2.0 ** (j * alpha))


class TestDensities:
    @pytest.mark.parametrize(
        "density",
        [
            pytest.param(IsotropicStable(1.5), id="stable"),
            pytest.param(TemperedStable(1.2, 1.0, 2.0), id="tempered"),
            pytest.param(LogPerturbedStable(2.0), id="logpert"),
            pytest.param(RelativisticStable(1.0), id="relativistic"),
        ],
    )
    def test_origin_is_outside_the_domain(self, density):
        with pytest.raises(DensityDomainError):
            density(np.array([0.3, 0.0]))
        with pytest.raises(DensityDomainError):
            LevyModel(density=density).nu(0.0)

    def test_density_is_even(self):
        density = TemperedStable(0.7, 2.0, 0.5)
        z = np.array([0.01, 0.3, 2.5])
        np.testing.assert_allclose(density(z), density(-z))

    def test_stable_closed_forms(self):
        density = IsotropicStable(1.5, 2.0)
        assert density.tail_mass(1.0) == pytest.approx(2.0 * 2.0 / 1.5)
        assert density.tail_mass(4.0) == pytest.approx(2.0 * 2.0 * 4.0**-1.5 / 1.5)
        assert density.second_moment_below(0.1) == pytest.approx(2.0 * 2.0 * 0.1**0.5 / 0.5)

    def test_tempered_second_moment_matches_quadrature(self):
        density = TemperedStable(1.2, 1.5, 2.0)
        expected, _ = integrate.quad(lambda r: 2.0 * r * r * density._radial(np.array(r)), 0.0, 0.3)
        assert density.second_moment_below(0.3) == pytest.approx(expected, rel=1e-6)

    def test_logpert_has_compact_support(self):
        density = LogPerturbedStable(2.0)
        assert density.tail_mass(0.5) == 0.0
        assert density.tail_mass(1.0) == 0.0
        assert float(density(np.array([0.6]))[0]) == 0.0
        assert float(density(np.array([0.1]))[0]) > 0.0

    @pytest.mark.parametrize(
        "alpha, scale",
        [pytest.param(0.0, 1.0, id="alpha-zero"), pytest.param(2.0, 1.0, id="alpha-two"), pytest.param(1.0, -1.0, id="bad-scale")],
    )
    def test_stable_parameter_ranges(self, alpha, scale):
        with pytest.raises(ConfigurationError):
            IsotropicStable(alpha, scale)

    def test_logpert_exponent_must_exceed_one(self):
        with pytest.raises(ConfigurationError):
            LogPerturbedStable(1.0)

    def test_tabulated_rejects_bad_tables(self):
        with pytest.raises(ConfigurationError):
            Tabulated([-0.5, 0.5], [1.0, 2.0])
        with pytest.raises(ConfigurationError):
            Tabulated([0.1, 0.5], [1.0, 0.0])
        with pytest.raises(ConfigurationError):
            Tabulated([0.0, 0.5], [1.0, 1.0])

    def test_tabulated_power_law_index(self):
        r = np.geomspace(1e-6, 1.0, 60)
        density = Tabulated(r, r**-2.5)
        assert density.resolution_ok()
        assert density.analytic_bg_index() == pytest.approx(1.5)
        np.testing.assert_allclose(density(np.array([1e-7, 0.05])), np.array([1e-7, 0.05]) ** -2.5, rtol=1e-9)


class TestBuildDensity:
    def test_known_names(self):
        assert isinstance(build_density("stable", alpha=1.2), IsotropicStable)
        assert isinstance(build_density("Relativistic", mass=2.0), RelativisticStable)
        assert isinstance(build_density("none"), NoJumps)

    def test_unknown_name(self):
        with pytest.raises(ConfigurationError, match="Unsupported Levy density"):
            build_density("gamma")

    def test_bad_parameters(self):
        with pytest.raises(ConfigurationError):
            build_density("stable", beta=1.0)


class TestCharacteristicExponent:
    def test_cauchy_exponent_is_absolute_value(self):
        model = LevyModel(density=IsotropicStable(1.0, 1.0 / math.pi))
        for y in (0.5, 2.0, 7.0):
            assert model.char_exponent(y) == pytest.approx(abs(y), rel=1e-5)

    def test_relativistic_closed_form(self):
        density = RelativisticStable(1.0)
        model = LevyModel(density=density)
        assert model.char_exponent(3.0) == pytest.approx(density.closed_form_exponent(3.0), rel=1e-4)

    def test_brownian_part(self):
        model = LevyModel(sigma=2.0)
        assert model.char_exponent(1.5) == pytest.approx(0.5 * 4.0 * 1.5**2)
        assert model.char_exponent(0.0) == 0.0

    def test_exponent_is_even(self):
        model = LevyModel(sigma=0.5, density=TemperedStable(1.2, 1.0, 1.0))
        assert model.char_exponent(-2.0) == pytest.approx(model.char_exponent(2.0))

    def test_negative_sigma(self):
        with pytest.raises(ValueError):
            LevyModel(sigma=-1.0)


class TestMoments:
    def test_convergent_moment(self):
        model = LevyModel(density=IsotropicStable(0.8))
        expected = 2.0 * 0.5**0.2 / 0.2
        assert model.small_jump_moment(1.0, 0.5) == pytest.approx(expected, rel=1e-6)

    def test_divergent_moment(self):
        model = LevyModel(density=IsotropicStable(1.5))
        assert math.isinf(model.small_jump_moment(0.5, 1.0))

    def test_second_moment_uses_closed_form(self):
        model = LevyModel(density=IsotropicStable(1.5))
        assert model.small_jump_moment(2.0, 0.25) == pytest.approx(model.density.second_moment_below(0.25))

    @pytest.mark.parametrize("eps", [pytest.param(0.0, id="zero"), pytest.param(1.5, id="above-one")])
    def test_moment_cutoff_range(self, eps):
        with pytest.raises(ValueError):
            LevyModel(density=IsotropicStable(1.5)).small_jump_moment(1.0, eps)

    def test_no_jumps(self):
        model = LevyModel(sigma=1.0)
        assert model.small_jump_moment(0.5) == 0.0
        assert model.small_jump_variance(0.1) == 0.0
        assert model.bg_index("numeric") == 0.0


class TestBlumenthalGetoor:
    @pytest.mark.parametrize(
        "alpha", [pytest.param(0.8, id="a08"), pytest.param(1.2, id="a12"), pytest.param(1.5, id="a15")]
    )
    def test_numeric_index_of_stable(self, alpha):
        model = LevyModel(density=IsotropicStable(alpha))
        assert model.bg_index("analytic") == alpha
        assert model.bg_index("numeric") == pytest.approx(alpha, abs=0.05)

    def test_log_perturbed_index(self):
        model = LevyModel(density=LogPerturbedStable(2.0))
        assert model.bg_index() == 2.0
        assert model.bg_index("numeric") == pytest.approx(2.0, abs=0.1)

    def test_relativistic_index(self):
        assert LevyModel(density=RelativisticStable(1.0)).bg_index() == 1.0

    def test_coarse_table_refuses_numeric_index(self):
        model = LevyModel(density=Tabulated([0.01, 0.1, 1.0], [1e5, 316.0, 1.0]))
        with pytest.raises(PrecisionError):
            model.bg_index("numeric")

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            LevyModel(density=IsotropicStable(1.5)).bg_index("fitted")


class TestBandMasses:
    @pytest.mark.parametrize("j", [0, 1, 4, 9])
    def test_stable_band_mass(self, j):
        model = LevyModel(density=IsotropicStable(1.5, 0.5))
        assert model.dyadic_band_mass(j) == pytest.approx(_stable_band_mass(1.5, 0.5, j), rel=1e-9)

    def test_negative_band(self):
        with pytest.raises(ValueError):
            LevyModel(density=IsotropicStable(1.5)).dyadic_band_mass(-1)

    def test_table_accumulates_omega(self):
        model = LevyModel(density=TemperedStable(1.2, 1.0, 1.0))
        table = model.band_mass_table(6)
        assert table.j_max == 6
        np.testing.assert_allclose(table.omegas, np.cumsum(table.masses))
        for j in range(7):
            assert model.omega(2.0 ** (-j - 1)) == pytest.approx(table.omegas[j], rel=1e-9)

    def test_table_csv(self, tmp_path):
        path = tmp_path / "band_masses.csv"
        LevyModel(density=IsotropicStable(1.5)).band_mass_table(3).to_csv(str(path), ["seed=0"])
        lines = path.read_text().splitlines()
        assert lines[-5] == "# j,C_j,omega_j"
        assert len(lines) == 6


class TestBandSampler:
    def test_masses_cover_nu_above_cutoff(self):
        model = LevyModel(density=IsotropicStable(1.5))
        sampler = BandSampler.build(model, 0.05)
        assert sampler.cutoff == pytest.approx(0.05)
        assert sampler.edges[0] == 1.0
        assert np.sum(sampler.masses) == pytest.approx(2.0 / 1.5 * (0.05**-1.5 - 1.0), rel=1e-8)
        assert sampler.big_mass == pytest.approx(2.0 / 1.5)

    def test_samples_stay_in_their_band(self):
        sampler = BandSampler.build(LevyModel(density=IsotropicStable(1.2)), 0.01)
        rng = derive_rng(0, 99)
        for band in range(sampler.band_count):
            z = sampler.sample_band(rng, band, 500)
            lo, hi = sampler.edges[band + 1], sampler.edges[band]
            assert np.all(np.abs(z) >= lo - 1e-12)
            assert np.all(np.abs(z) <= hi + 1e-12)
            assert np.any(z > 0) and np.any(z < 0)
        assert np.all(np.abs(sampler.sample_band(rng, BIG_BAND, 500)) >= 1.0)

    def test_no_jumps_gives_empty_sampler(self):
        sampler = BandSampler.build(LevyModel(sigma=1.0), 0.05)
        assert sampler.band_count == 0
        assert sampler.total_mass == 0.0

    def test_cutoff_range(self):
        with pytest.raises(ConfigurationError):
            BandSampler.build(LevyModel(density=IsotropicStable(1.5)), 0.0)


class TestLevyPaths:
    def test_step_grid(self):
        n_steps, step = step_grid(1.0, 0.3)
        assert n_steps == 3
        assert step == pytest.approx(1.0 / 3.0)
        assert step_grid(0.0, 0.1) == (0, 0.1)
        with pytest.raises(ConfigurationError):
            step_grid(1.0, 0.0)

    def test_paths_depend_only_on_seed_and_index(self):
        model = LevyModel(density=IsotropicStable(1.5))
        first = sample_levy_path(model, 1.0, 1e-3, eps_s=0.01, seed=5, path_index=2)
        again = sample_levy_path(model, 1.0, 1e-3, eps_s=0.01, seed=5, path_index=2)
        other = sample_levy_path(model, 1.0, 1e-3, eps_s=0.01, seed=5, path_index=3)
        np.testing.assert_array_equal(first.states, again.states)
        assert not np.array_equal(first.states, other.states)

    def test_jump_marks(self):
        model = LevyModel(density=IsotropicStable(1.5))
        path = sample_levy_path(model, 2.0, 1e-3, eps_s=0.05, seed=1, x0=0.5)
        jumps = path.jumps
        assert path.states[0] == 0.5
        assert len(path.times) == 2001
        assert len(jumps) > 0
        assert np.all(jumps.accepted)
        assert np.all(jumps.v == 0.0)
        assert np.all((jumps.s >= 0.0) & (jumps.s <= 2.0))
        assert np.all(np.abs(jumps.z) > 0.05 - 1e-12)
        assert np.all(np.diff(jumps.s) >= 0.0)

    def test_empty_horizon(self):
        path = sample_levy_path(LevyModel(sigma=1.0), 0.0, 0.1, x0=2.0)
        np.testing.assert_array_equal(path.states, [2.0])

    def test_brownian_increments(self):
        model = LevyModel(sigma=1.0)
        finals = [sample_levy_path(model, 1.0, 0.01, seed=3, path_index=i).states[-1] for i in range(2000)]
        assert np.mean(finals) == pytest.approx(0.0, abs=0.08)
        assert np.var(finals) == pytest.approx(1.0, abs=0.1)

    def test_cutoff_range(self):
        with pytest.raises(ConfigurationError):
            sample_levy_path(LevyModel(sigma=1.0), 1.0, 0.01, eps_s=2.0)
