import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from cdglue import smoothing
from cdglue.chart import MetricChart
from cdglue.config import override_settings
from cdglue.curvature import Face, WeightedManifold
from cdglue.errors import MollificationError, ProfileError
from cdglue.expression import parse_field
from cdglue.gluing import assemble
from cdglue.smoothing import (
    Mollifier,
    ShapeTransport,
    SmoothingProfile,
    SweepGrid,
    c1_matching_check,
    deform,
    interface_operator,
    mollify,
    smoothing_sweep,
    smoothstep,
    smoothstep_integral,
)


class TestProfile:

    def test_smoothstep_plateaus(self):
        eta, eta_prime = smoothstep(np.array([-1.0, 0.0, 0.5, 1.0, 2.0]))
        assert eta == pytest.approx([1.0, 1.0, 0.5, 0.0, 0.0])
        assert eta_prime[[0, 1, 3, 4]] == pytest.approx([0.0, 0.0, 0.0, 0.0])
        assert eta_prime[2] < 0

    @given(st.floats(min_value=0.0, max_value=1.0))
    def test_smoothstep_symmetry(self, s):
        eta, _ = smoothstep(np.array([s, 1.0 - s]))
        assert eta[0] + eta[1] == pytest.approx(1.0)

    def test_smoothstep_integral(self):
        values = smoothstep_integral(np.array([0.0, 0.5, 1.0, 3.0]))
        assert values[0] == pytest.approx(0.0)
        assert 0.25 < values[1] < 0.5
        assert values[2] == pytest.approx(0.5, abs=1e-10)
        assert values[3] == 0.5

    def test_profile_shape(self):
        profile = SmoothingProfile(0.2)
        t = np.array([-0.1, 0.0, 0.2, 0.3])
        assert profile.F(t) == pytest.approx([0.0, 0.0, 0.0, 0.0])
        assert profile.F_prime(np.array([0.0]))[0] == pytest.approx(1.0)
        assert profile.Fc(t) == pytest.approx([0.0, 0.0, 0.0, 0.0])
        assert profile.Fc(np.array([0.1]))[0] > 0

    def test_default_width(self):
        assert SmoothingProfile(0.2).width == pytest.approx(0.2 ** 5)
        assert SmoothingProfile(0.05).width == pytest.approx(0.05 ** 5)
        with override_settings(mollifier_width_factor=0.1):
            assert SmoothingProfile(0.2).width == pytest.approx(0.1 * 0.2 ** 4)

    @pytest.mark.parametrize("power, scale", [(4.0, 0.2 ** 2), (2.0, 1.0)])
    def test_collar_term_power(self, power, scale):
        profile = SmoothingProfile(0.2, fc_power=power)
        t = np.array([0.02, 0.1, 0.15])
        eta = smoothstep(t / 0.2)[0]
        assert profile.Fc(t) == pytest.approx(scale * t ** 2 * eta)
        with override_settings(profile_fc_power=power):
            assert SmoothingProfile(0.2).fc_power == power

    def test_collar_term_power_below_two(self):
        with pytest.raises(ProfileError):
            SmoothingProfile(0.2, fc_power=1.5)

    def test_sign_switches_the_deformation_off(self):
        profile = SmoothingProfile(0.2, sign=0)
        assert profile.F_prime(np.array([0.0]))[0] == 0.0

    @pytest.mark.parametrize("kwargs", [{'delta': 0.0}, {'delta': 0.1, 'sign': 2}, {'delta': 0.1, 'C': -1.0}])
    def test_invalid_profiles(self, kwargs):
        with pytest.raises(ProfileError):
            SmoothingProfile(**kwargs)


class TestDeformation:

    def test_interface_operator_of_the_disk(self, disk):
        L = interface_operator(disk, disk.y_grid(3))
        assert L.shape == (3, 1, 1)
        assert L[:, 0, 0] == pytest.approx([2.0, 2.0, 2.0])

    def test_one_dimensional_interface_keeps_its_operator(self, disk):
        transport = ShapeTransport(disk, disk.y_grid(2), 0.2)
        table = transport.operator(np.array([0.0, 0.1, 0.2]))
        assert table.shape == (3, 2, 1, 1)
        assert table == pytest.approx(np.full((3, 2, 1, 1), 2.0))

    def test_deformation_is_local_to_side_zero(self, disk):
        deformed = deform(disk, SmoothingProfile(0.2))
        points = np.array([[1.0, -0.1], [1.0, 0.0], [1.0, 0.25], [1.0, 0.6]])
        assert deformed.values(points) == pytest.approx(disk.metric_values(points))

    def test_deformation_inside_the_band(self, disk):
        profile = SmoothingProfile(0.2)
        deformed = deform(disk, profile)
        point = np.array([[1.0, 0.05]])
        g = disk.metric_values(point)[0, 0, 0]
        F, Fc = profile.F(0.05), profile.Fc(0.05)
        expected = g + 2.0 * F * g * 2.0 - 2.0 * Fc * g
        assert deformed.values(point)[0, 0, 0] == pytest.approx(expected)

    def test_c1_matching_of_the_disk(self, disk):
        report = c1_matching_check(deform(disk, SmoothingProfile(0.1)), resolution=4)
        assert report.jump_before == pytest.approx(4.0)
        assert report.jump_after == pytest.approx(0.0, abs=1e-9)
        assert report.passed

    def test_wrong_sign_doubles_the_jump(self, disk):
        report = c1_matching_check(deform(disk, SmoothingProfile(0.1, sign=-1)), resolution=4)
        assert report.jump_after == pytest.approx(8.0)
        assert not report.passed

    def test_jump_is_measured_on_the_deformed_metric(self, disk, monkeypatch):
        deformed = deform(disk, SmoothingProfile(0.1))
        monkeypatch.setattr(deformed, "shape_operator", lambda points: np.zeros((len(points), 1, 1)))
        report = c1_matching_check(deformed, resolution=4)
        assert report.jump_after == pytest.approx(4.0)
        assert not report.passed


class TestThreeDimensionalCollar:

    @pytest.fixture
    def slab(self):
        chart = MetricChart.from_strings(3, [(0.0, 1.0), (0.0, 1.0), (0.0, 0.5)],
                                         ["(1-x3)^2", "0.3*x3^2", "0", "1 - 0.1*x1*x3", "0", "1"])
        side = WeightedManifold(chart, parse_field("1", 3), 3.0, (Face(2, "min", "glue"),))
        return assemble(side, side)

    def test_transport_table_matches_the_direct_transport(self, slab):
        deformed = deform(slab, SmoothingProfile(0.2))
        ys = np.array([[0.13, 0.71], [0.52, 0.37], [0.91, 0.05]])
        ts = np.array([0.013, 0.07, 0.155])
        points = np.array([np.append(y, t) for y in ys for t in ts])
        direct = ShapeTransport(slab, ys, 0.2).operator(ts)
        expected = np.array([direct[j, i] for i in range(len(ys)) for j in range(len(ts))])
        np.testing.assert_allclose(deformed.shape_operator(points), expected, atol=1e-6)

    def test_transport_table_is_built_once(self, slab):
        deformed = deform(slab, SmoothingProfile(0.2))
        assert deformed.transport_table() is deformed.transport_table()

    def test_c1_matching(self, slab):
        report = c1_matching_check(deform(slab, SmoothingProfile(0.1)), resolution=3)
        assert report.jump_before == pytest.approx(4.0)
        assert report.jump_after <= 1e-8
        assert report.passed


class TestMollifier:

    def test_affine_data_is_reproduced(self):
        mollifier = Mollifier(2)
        a, b = np.array([0.7, -1.3]), 0.4
        center = np.array([0.3, 0.2])
        value, first, second = mollifier.convolve(lambda p: p @ a + b, center, 0.05)
        assert value == pytest.approx(center @ a + b)
        assert first == pytest.approx(a)
        assert second == pytest.approx(np.zeros((2, 2)), abs=1e-8)

    def test_second_derivatives_of_quadratics(self):
        mollifier = Mollifier(2)
        func = lambda p: p[:, 0] ** 2 + 3 * p[:, 0] * p[:, 1] + 2 * p[:, 1] ** 2
        _, first, second = mollifier.convolve(func, np.array([0.5, -0.5]), 0.1)
        assert second == pytest.approx(np.array([[2.0, 3.0], [3.0, 4.0]]), rel=1e-6)
        assert first == pytest.approx([0.5 * 2 - 1.5, 1.5 - 2.0], rel=1e-6)

    def test_matrix_valued_data(self):
        mollifier = Mollifier(2)
        func = lambda p: np.stack([np.eye(2) * (1 + x[0]) for x in p])
        value, first, _ = mollifier.convolve(func, np.array([0.2, 0.0]), 0.01, order=1)
        assert value == pytest.approx(1.2 * np.eye(2))
        assert first[0] == pytest.approx(np.eye(2))
        assert first[1] == pytest.approx(np.zeros((2, 2)), abs=1e-10)

    def test_width_must_stay_below_half_delta_to_the_fourth(self, disk):
        deformed = deform(disk, SmoothingProfile(0.5))
        with pytest.raises(MollificationError):
            mollify(deformed, h=0.5 ** 4 / 2)

    def test_smoothed_metric_is_close_to_the_glued_one(self, disk):
        smoothed = mollify(deform(disk, SmoothingProfile(0.2)))
        for t in (-0.05, 0.0, 0.01, 0.1):
            jet = smoothed.metric_jet([1.0, t])
            assert jet.g == pytest.approx(disk.metric_values([[1.0, t]])[0], abs=0.01)

    def test_smoothed_metric_is_exact_away_from_the_band(self, disk):
        smoothed = mollify(deform(disk, SmoothingProfile(0.2)))
        exact = disk.metric_jet([1.0, 0.5])
        assert smoothed.metric_jet([1.0, 0.5]).dg == pytest.approx(exact.dg)


class TestSweep:

    GRID = SweepGrid(y_resolution=1, t_resolution=5, band_resolution=9)

    def test_disk_sweep(self, disk):
        sweep = smoothing_sweep(disk, 2.0, 0.0, [0.2, 0.1], grid=self.GRID)
        assert [row.delta for row in sweep.rows] == [0.2, 0.1]
        assert all(row.error is None for row in sweep.rows)
        assert sweep.distance_nonincreasing
        assert sweep.rows[1].sup_metric_distance < 0.01
        assert sweep.epsilons == pytest.approx([-row.min_bakry_emery_eig for row in sweep.rows])

    def test_deltas_must_decrease(self, disk):
        with pytest.raises(ProfileError):
            smoothing_sweep(disk, 2.0, 0.0, [0.1, 0.2], grid=self.GRID)

    def test_concave_gluing_is_refused(self, annulus):
        with pytest.raises(ProfileError):
            smoothing_sweep(annulus, 2.0, 0.0, [0.1], grid=self.GRID)

    def test_row_without_positive_weight_is_an_error(self, disk, monkeypatch):
        monkeypatch.setattr(smoothing, "WEIGHT_FLOOR", 10.0)
        sweep = smoothing_sweep(disk, 2.0, 0.0, [0.2], grid=self.GRID)
        assert "positive weight" in sweep.rows[0].error
        assert np.isnan(sweep.rows[0].epsilon)

    def test_undamped_collar_term_keeps_a_curvature_loss(self, hemisphere):
        with override_settings(profile_fc_power=2.0):
            sweep = smoothing_sweep(hemisphere, 2.0, 1.0, [0.1], grid=self.GRID)
        assert sweep.rows[0].error is None
        assert sweep.rows[0].epsilon > 1.0


@pytest.mark.slow
class TestSweepConvergence:

    def test_hemisphere(self, hemisphere):
        sweep = smoothing_sweep(hemisphere, 2.0, 1.0, [0.2, 0.1, 0.05])
        assert all(row.error is None for row in sweep.rows)
        assert sweep.epsilon_decreasing
        assert sweep.distance_nonincreasing
        assert sweep.rows[-1].epsilon <= 0.2
        assert sweep.rows[-1].sup_metric_distance <= 0.1

    def test_disk(self, disk):
        sweep = smoothing_sweep(disk, 2.0, 0.0, [0.2, 0.1, 0.05])
        assert all(row.error is None for row in sweep.rows)
        assert sweep.epsilon_decreasing
        assert sweep.distance_nonincreasing
        assert sweep.rows[-1].epsilon <= 0.1
        assert sweep.rows[-1].sup_metric_distance <= 0.1
