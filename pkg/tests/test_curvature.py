import math

import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from cdglue.chart import MetricChart
from cdglue.config import override_settings
from cdglue.curvature import (
    Face,
    WeightedManifold,
    albi_check,
    bakry_emery,
    bakry_emery_from_jets,
    boundary_geometry,
    positivity_check,
    ricci_bound_sweep,
    weight_concavity_check,
)
from cdglue.errors import WeightError
from cdglue.expression import parse_field

from conftest import collar

SPHERE = MetricChart.diagonal([(0.2, 2.9), (0.0, 2 * math.pi)], ["1", "sin(x1)^2"])
PLANE = MetricChart.diagonal([(-1.0, 1.0), (-1.0, 1.0)], ["1", "1"])


def line(weight, N, domain=(-2.0, 2.0)):
    chart = MetricChart.from_strings(1, [domain], ["1"])
    return WeightedManifold(chart, parse_field(weight, 1), N)


def sin_interval():
    return line("sin(x1)^2", 3.0, (0.05, math.pi - 0.05))


class TestBakryEmery:

    @given(st.floats(min_value=-1.9, max_value=1.9))
    def test_gaussian_line(self, x):
        wm = line("exp(-x1^2/2)", 2.0)
        value = bakry_emery(wm, [x])
        assert value.tensor.components[0, 0] == pytest.approx(1.0 - x * x)

    def test_round_sphere_unweighted(self):
        wm = WeightedManifold(SPHERE, parse_field("1", 2), 2.0)
        assert bakry_emery(wm, [1.0, 1.0]).lower_bound() == pytest.approx(1.0)

    def test_n_equal_dimension_with_constant_weight(self):
        wm = WeightedManifold(PLANE, parse_field("1", 2), 2.0)
        assert bakry_emery(wm, [0.1, 0.2]).lower_bound() == pytest.approx(0.0)

    def test_n_equal_dimension_with_varying_weight(self):
        wm = WeightedManifold(PLANE, parse_field("exp(x1)", 2), 2.0)
        assert bakry_emery(wm, [0.1, 0.2]).lower_bound() == -np.inf

    def test_n_below_dimension(self):
        mj = PLANE.metric_jet([0.0, 0.0])
        weight = parse_field("1", 2).jet([0.0, 0.0])
        assert bakry_emery_from_jets(mj, weight, 1.0).lower_bound() == -np.inf

    def test_manifold_rejects_n_below_dimension(self):
        with pytest.raises(WeightError):
            WeightedManifold(PLANE, parse_field("1", 2), 1.5)

    def test_negative_weight_rejected(self):
        with pytest.raises(WeightError):
            line("x1", 2.0)


class TestSweeps:

    def test_sphere_bound(self):
        wm = WeightedManifold(SPHERE, parse_field("1", 2), 2.0)
        result = ricci_bound_sweep(wm, resolution=7)
        assert result.value == pytest.approx(1.0)
        assert result.evaluated == 49

    def test_spherical_suspension_interval(self):
        result = ricci_bound_sweep(sin_interval(), resolution=9)
        assert result.value == pytest.approx(2.0)

    def test_interior_zero_of_the_weight(self):
        wm = line("x1^2", 2.0, (-1.0, 1.0))
        assert positivity_check(wm, resolution=3) == [(0.0,)]
        result = ricci_bound_sweep(wm, resolution=3)
        assert result.evaluated == 2
        assert len(result.skipped) == 1

    def test_resolution_from_settings(self):
        with override_settings(grid_resolution=4):
            assert ricci_bound_sweep(sin_interval()).evaluated == 4


class TestBoundaryGeometry:

    def test_disk_boundary_is_convex(self, disk_side):
        geometry = boundary_geometry(disk_side, disk_side.glue_face, [1.0, 0.0])
        assert geometry.normal == pytest.approx([0.0, 1.0])
        assert geometry.sff == pytest.approx(np.array([[1.0]]))
        assert geometry.trace == pytest.approx(1.0)
        assert geometry.weighted_mean_curvature == pytest.approx(1.0)

    def test_annulus_boundary_is_concave(self):
        side = collar(["(1+x2)^2", "0", "1"], 0.9)
        geometry = boundary_geometry(side, 0, [2.0, 0.0])
        assert geometry.sff_min_eigenvalue == pytest.approx(-1.0)

    def test_weight_enters_mean_curvature(self):
        side = collar(["(1-x2)^2", "0", "1"], 0.9, weight="1 + x2", N=3.0)
        geometry = boundary_geometry(side, side.glue_face, [0.5, 0.0])
        assert geometry.normal_log_derivative == pytest.approx(1.0)
        assert geometry.weighted_mean_curvature == pytest.approx(0.0)

    def test_glue_face_must_be_the_collar_base(self):
        chart = MetricChart.diagonal([(0.0, 1.0), (0.5, 1.0)], ["1", "1"])
        with pytest.raises(WeightError):
            WeightedManifold(chart, parse_field("1", 2), 2.0, (Face(1, "min", "glue"),))


class TestConcavityCriteria:

    def test_sine_warping_is_extremal(self):
        report = weight_concavity_check(sin_interval(), kappa_bar=-1.0, eta=1.0, resolution=9)
        assert report.theta == 1.0
        assert report.passed

    def test_larger_theta_fails(self):
        report = weight_concavity_check(sin_interval(), kappa_bar=-2.0, eta=2.0, resolution=9)
        assert not report.passed
        assert report.max_eigenvalue == pytest.approx(math.sin(math.pi / 2), rel=0.05)

    def test_undefined_for_n_equal_dimension(self):
        with pytest.raises(WeightError):
            weight_concavity_check(line("1", 1.0), -1.0, 1.0)

    def test_gradient_criterion(self):
        assert albi_check(sin_interval(), k=1.0, L=1.0, resolution=9).passed
        report = albi_check(sin_interval(), k=1.0, L=0.5, resolution=9)
        assert not report.passed
        assert report.bound_violation == pytest.approx(0.5, rel=0.05)
