import math

import numpy as np
import pytest

from cdglue.disintegration import disintegrate_signed_distance, logderiv_vs_meancurv, tilted_needle_check
from cdglue.needle import needle_jump_check

SAMPLES = 256


class TestSignedDistance:

    def test_disk_needle_is_a_tent(self, disk):
        nd = disintegrate_signed_distance(disk, [1.0])
        assert nd.provenance == "disintegration"
        assert (nd.a, nd.b) == (-0.9, 0.9)
        t = np.array([-0.6, -0.2, 0.0, 0.3, 0.8])
        assert nd.values(t) == pytest.approx(1.0 - np.abs(t), abs=1e-8)
        assert nd.d_plus == pytest.approx(-1.0, abs=1e-6)
        assert nd.d_minus == pytest.approx(1.0, abs=1e-6)

    def test_hemisphere_needle_is_a_cosine(self, hemisphere):
        nd = disintegrate_signed_distance(hemisphere, [2.0])
        t = np.array([-1.0, -0.4, 0.4, 1.1])
        assert nd.values(t) == pytest.approx(np.cos(t), abs=1e-8)
        assert nd.d_plus == pytest.approx(0.0, abs=1e-6)

    def test_weight_enters_the_needle(self, weighted_disk):
        nd = disintegrate_signed_distance(weighted_disk, [0.5], t_range=(-0.5, 0.5))
        t = np.array([-0.4, 0.1, 0.45])
        assert nd.values(t) == pytest.approx(1.0 - t ** 2, abs=1e-8)

    def test_range_must_stay_in_the_collar(self, disk):
        with pytest.raises(ValueError):
            disintegrate_signed_distance(disk, [1.0], t_range=(0.1, 0.5))
        with pytest.raises(ValueError):
            disintegrate_signed_distance(disk, [1.0], t_range=(-1.0, 0.5))


class TestInterfaceKink:

    def test_disk_kinks_downward(self, disk):
        report = needle_jump_check(disintegrate_signed_distance(disk, [1.0]), 0.0, 2.0, SAMPLES)
        assert report.passed

    def test_annulus_kinks_upward(self, annulus):
        nd = disintegrate_signed_distance(annulus, [1.0])
        report = needle_jump_check(nd, 0.0, 2.0, SAMPLES)
        assert report.d_minus == pytest.approx(-1.0, abs=1e-6)
        assert report.d_plus == pytest.approx(1.0, abs=1e-6)
        assert not report.jump_passed

    def test_weighted_disk_is_the_equality_case(self, weighted_disk):
        nd = disintegrate_signed_distance(weighted_disk, [1.0], t_range=(-0.5, 0.5))
        report = needle_jump_check(nd, 0.0, 3.0, SAMPLES)
        assert report.d_minus == pytest.approx(0.0, abs=1e-6)
        assert report.d_plus == pytest.approx(0.0, abs=1e-6)
        assert report.jump_passed

    @pytest.mark.parametrize("name", ["disk", "hemisphere", "weighted_disk"])
    def test_log_derivative_is_the_mean_curvature(self, name, request):
        gs = request.getfixturevalue(name)
        report = logderiv_vs_meancurv(gs, [1.0])
        assert report.passed
        assert report.d_plus_log == pytest.approx(-report.mean_curvature0, abs=1e-5)
        assert report.d_minus_log == pytest.approx(report.mean_curvature1, abs=1e-5)

    def test_disk_mean_curvatures(self, disk):
        report = logderiv_vs_meancurv(disk, [1.0])
        assert report.mean_curvature0 == pytest.approx(1.0)
        assert report.mean_curvature1 == pytest.approx(1.0)


class TestTiltedNeedles:

    @pytest.mark.parametrize("b", [1.0, 0.6, 0.3])
    def test_disk_kink_does_not_depend_on_the_tilt(self, disk, b):
        report = tilted_needle_check(disk, [1.0], [1.0], b)
        assert report.formula == pytest.approx(2.0)
        assert report.numeric == pytest.approx(2.0, abs=1e-4)
        assert report.passed
        assert report.a_hat == pytest.approx(math.sqrt(1.0 - b * b))

    def test_annulus_kink(self, annulus):
        report = tilted_needle_check(annulus, [1.0], [1.0], 0.6)
        assert report.formula == pytest.approx(-2.0)
        assert report.passed

    def test_weight_term_lowers_the_kink(self, weighted_disk):
        report = tilted_needle_check(weighted_disk, [1.0], [1.0], 0.6)
        assert report.formula == pytest.approx(2.0 * 0.64)
        assert report.numeric == pytest.approx(1.28, abs=1e-4)
        assert report.passed

    @pytest.mark.parametrize("b", [0.0, 0.1, 0.5])
    @pytest.mark.parametrize("y", [0.5, 1.0, 2.0, 3.0, 5.0])
    def test_shallow_and_tangent_needles_on_the_disk(self, disk, b, y):
        report = tilted_needle_check(disk, [y], [1.0], b)
        assert report.formula == pytest.approx(2.0)
        assert report.deviation <= 1e-3
        assert report.passed

    @pytest.mark.parametrize("b", [-0.1, 1.5])
    def test_normal_component_range(self, disk, b):
        with pytest.raises(ValueError):
            tilted_needle_check(disk, [1.0], [1.0], b)

    def test_tangent_must_be_nonzero(self, disk):
        with pytest.raises(ValueError):
            tilted_needle_check(disk, [1.0], [0.0], 0.5)
