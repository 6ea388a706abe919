import numpy as np
import pytest
from scipy import integrate

from gst_lab.errors import EvaluationRefusedError
from gst_lab.gst import JUMP_REACH, SHIPPED_BUMPS, BumpFunction, check_unitary_equivalence, martingale_bumps
from gst_lab.gst.generator import SAFETY_MARGIN


class TestBumps:
    def test_bump_shape(self):
        bump = BumpFunction(0.5, 1.0)
        assert bump.name == "bump(0.5,1)"
        assert bump.support == (-0.5, 1.5)
        values = bump(np.array([-0.5, 0.5, 1.0, 2.0]))
        assert values[1] == pytest.approx(1.0)
        assert values[0] == 0.0 and values[3] == 0.0
        assert 0.0 < values[2] < 1.0

    def test_shipped_functions(self):
        assert len(SHIPPED_BUMPS) == 5
        assert list(martingale_bumps(3)) == list(SHIPPED_BUMPS)[:3]


class TestRatios:
    def test_ratio_is_one_without_a_jump(self, stable_gst):
        x = np.linspace(-3.0, 3.0, 7)
        np.testing.assert_allclose(stable_gst.ratio(x, np.zeros_like(x)), 1.0)

    def test_ratio_is_phi_quotient(self, harmonic_gst):
        # phi0(x + z) / phi0(x) = exp(-(2 x z + z^2) / 2) for the harmonic ground state
        x, z = np.array([0.3, -1.2]), np.array([0.5, -0.7])
        np.testing.assert_allclose(harmonic_gst.ratio(x, z), np.exp(-(2 * x * z + z * z) / 2), rtol=1e-4)

    def test_big_jump_bound_dominates_ratio(self, stable_gst):
        x = np.full(5, 1.5)
        z = np.array([-1.5, -3.0, 2.0, 4.0, -6.0])
        bound = stable_gst.big_jump_bound(x)
        assert np.all(stable_gst.ratio(x, z) <= bound * (1 + 1e-12))
        assert stable_gst.big_jump_bound(np.array([0.0]))[0] == pytest.approx(1.0, abs=1e-4)

    def test_local_ratio_bound_for_the_harmonic_state(self, harmonic_gst):
        # max |log ratio| over |x| <= 2, |z| <= 1 is (2 * 2 * 1 + 1) / 2
        assert harmonic_gst.local_ratio_bound(2.0) == pytest.approx(SAFETY_MARGIN * np.exp(-2.5), rel=1e-3)

    def test_local_ratio_bound_shrinks_with_the_window(self, stable_gst):
        assert stable_gst.local_ratio_bound(4.0) <= stable_gst.local_ratio_bound(1.0) <= SAFETY_MARGIN
        report = stable_gst.envelope_report([1, 2])
        assert set(report) == {"1", "2"}

    def test_window_must_be_positive(self, stable_gst):
        with pytest.raises(ValueError):
            stable_gst.local_ratio_bound(0.0)

    def test_big_jump_envelope(self, stable_gst):
        envelope = stable_gst.big_jump_envelope(3.0)
        assert 0.0 < envelope < 1.0
        assert envelope == pytest.approx(1.0 / stable_gst.big_jump_bound(np.array([3.0]))[0], rel=1e-2)


class TestDrift:
    def test_harmonic_drift_is_ornstein_uhlenbeck(self, harmonic_gst):
        for x in (-2.0, 0.5, 1.0, 3.0):
            assert harmonic_gst.drift(x) == pytest.approx(-x, abs=1e-3)

    def test_harmonic_drift_has_no_jump_part(self, harmonic_gst):
        grad, jump = harmonic_gst.drift_parts(np.array([1.0, 2.0]))
        np.testing.assert_array_equal(jump, 0.0)
        np.testing.assert_allclose(grad, [-1.0, -2.0], atol=1e-3)

    def test_stable_drift_points_inwards(self, stable_gst):
        values = stable_gst.drift(np.array([-1.0, 1.0]))
        assert values[0] > 0 > values[1]
        assert values[0] == pytest.approx(-values[1], rel=1e-4)

    @pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
    def test_jump_drift_matches_adaptive_quadrature(self, stable_gst, x):
        density = stable_gst.levy.density

        def odd(z):
            pair = stable_gst.ratio(x, z) - stable_gst.ratio(x, -z)
            return float(z * pair * density(np.array([z]))[0])

        expected, _ = integrate.quad(odd, 0.0, 1.0, limit=200)
        _, jump = stable_gst.drift_parts(x)
        assert jump[0] == pytest.approx(expected, rel=1e-6)

    def test_pullback_radius(self, harmonic_gst, stable_gst):
        assert harmonic_gst.pullback_radius() == 0.0
        assert stable_gst.pullback_radius(6.0) < 6.0

    def test_drift_field_csv(self, stable_gst, tmp_path):
        field = stable_gst.drift_field()
        assert np.all(np.abs(field.x) <= stable_gst.domain_radius + 1e-12)
        np.testing.assert_allclose(field.total, field.grad + field.jump)
        path = tmp_path / "drift_field.csv"
        field.to_csv(str(path))
        assert path.read_text().splitlines()[0] == "# x,b_grad,b_jump,b_total"


class TestGenerator:
    def test_boundary_nodes_are_refused(self, stable_gst):
        f = SHIPPED_BUMPS["bump(0,1.5)"](stable_gst.grid.nodes)
        with pytest.raises(EvaluationRefusedError):
            stable_gst.apply_generator(f, 0)
        with pytest.raises(EvaluationRefusedError):
            stable_gst.unitary_equiv_rhs(f, stable_gst.grid.points - 1)

    def test_terms_add_up(self, stable_gst):
        f = SHIPPED_BUMPS["bump(0.5,1)"](stable_gst.grid.nodes)
        i = stable_gst.grid.points // 2
        terms = stable_gst.apply_generator(f, i, terms=True)
        assert set(terms) == {"diffusion", "small_jumps", "drift_correction", "big_jumps"}
        assert terms["diffusion"] == 0.0
        assert sum(terms.values()) == pytest.approx(stable_gst.apply_generator(f, i))

    @pytest.mark.parametrize(
        "fixture", [pytest.param("harmonic_gst", id="brownian"), pytest.param("stable_gst", id="stable")]
    )
    def test_unitary_equivalence(self, fixture, request):
        gst = request.getfixturevalue(fixture)
        nodes = gst.grid.interior(JUMP_REACH)[::8]
        assert check_unitary_equivalence(gst, SHIPPED_BUMPS, nodes) <= 1e-5

    def test_generator_of_constants_vanishes_in_the_bulk(self, harmonic_gst):
        values = harmonic_gst.generator_field(np.ones(harmonic_gst.grid.points))
        np.testing.assert_allclose(values, 0.0, atol=1e-10)

    @pytest.mark.parametrize("x", [0.5, 1.0, 2.0, -3.0])
    def test_drift_correction_uses_the_simulated_drift(self, stable_gst, x):
        nodes = stable_gst.grid.nodes
        i = int(np.argmin(np.abs(nodes - x)))
        terms = stable_gst.apply_generator(nodes, i, terms=True)
        _, jump = stable_gst.drift_parts(nodes[i])
        assert terms["drift_correction"] == pytest.approx(jump[0], rel=1e-9)
        assert terms["small_jumps"] == pytest.approx(0.0, abs=1e-6)

    @pytest.mark.parametrize("x", [0.5, 1.0, 2.0, -3.0])
    def test_linear_function_against_the_discrete_operator(self, stable_gst, x):
        # the generator of f(x) = x is the drift plus the kept big jumps, built without H
        nodes = stable_gst.grid.nodes
        i = int(np.argmin(np.abs(nodes - x)))
        rhs = stable_gst.unitary_equiv_rhs(nodes, i)
        assert abs(stable_gst.apply_generator(nodes, i) - rhs) <= 1e-5 * (1.0 + abs(rhs))

    def test_generator_table_matches_single_nodes(self, stable_gst):
        functions = [bump(stable_gst.grid.nodes) for bump in list(SHIPPED_BUMPS.values())[:2]]
        nodes = stable_gst.grid.interior(JUMP_REACH)[::97]
        table = stable_gst.generator_table(functions, nodes)
        for row, f in enumerate(functions):
            for col, i in enumerate(nodes):
                assert table[row, col] == pytest.approx(stable_gst.apply_generator(f, i), rel=1e-12, abs=1e-14)
