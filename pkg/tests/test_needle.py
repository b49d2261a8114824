import math

import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from cdglue.errors import WeightError, WeightMismatchError
from cdglue.expression import parse_field
from cdglue.needle import (
    MmInterval,
    NeedleDensity,
    PiecewiseDensity,
    glue_1d,
    kn_concavity_check,
    mirror_density,
    needle_jump_check,
    one_d_bakry_emery_margin,
    one_sided_derivative,
    sigma,
    tau,
)

SAMPLES = 512


def field(expression):
    return parse_field(expression, 1)


class TestDistortion:

    @given(st.floats(min_value=0.0, max_value=1.0), st.floats(min_value=1e-3, max_value=5.0))
    def test_flat_coefficients_are_linear(self, t, theta):
        assert sigma(0.0, 2.0, t, theta) == pytest.approx(t)
        assert tau(0.0, 3.0, t, theta) == pytest.approx(t)

    def test_spherical_sigma(self):
        assert sigma(1.0, 1.0, 0.5, math.pi / 2) == pytest.approx(math.sqrt(0.5))
        assert sigma(1.0, 1.0, 0.5, math.pi) == math.inf
        assert sigma(1.0, 1.0, 0.5, 0.0) == 0.5

    def test_hyperbolic_sigma(self):
        assert sigma(-1.0, 1.0, 0.5, 1.0) == pytest.approx(math.sinh(0.5) / math.sinh(1.0))

    def test_tau_for_n_one(self):
        assert tau(1.0, 1.0, 0.3, 0.0) == 0.3
        assert tau(1.0, 1.0, 0.3, 0.1) == math.inf
        assert tau(-1.0, 1.0, 0.3, 0.1) == 0.3

    def test_arrays_broadcast(self):
        values = sigma(0.0, 2.0, np.array([0.25, 0.5]), 1.0)
        assert isinstance(values, np.ndarray)
        assert values == pytest.approx([0.25, 0.5])

    def test_invalid_dimensions(self):
        with pytest.raises(ValueError):
            sigma(1.0, 0.0, 0.5, 1.0)
        with pytest.raises(ValueError):
            tau(1.0, 0.5, 0.5, 1.0)


class TestIntervals:

    def test_interval_validation(self):
        with pytest.raises(ValueError):
            MmInterval(1.0, 0.0, field("1"), 0.0, 2.0)
        with pytest.raises(ValueError):
            MmInterval(0.0, 1.0, field("1"), 0.0, 1.0)
        with pytest.raises(WeightError):
            MmInterval(0.0, 1.0, field("x1 - 0.5"), 0.0, 2.0)
        with pytest.raises(WeightError):
            MmInterval(0.0, 1.0, field("0"), 0.0, 2.0)

    def test_sine_model_is_concave(self):
        mm = MmInterval(0.0, math.pi, field("sin(x1)^2"), 2.0, 3.0)
        scan = kn_concavity_check(mm, SAMPLES)
        assert scan.passed
        assert scan.samples == SAMPLES
        assert one_d_bakry_emery_margin(mm, 15).value == pytest.approx(0.0, abs=1e-10)

    def test_convex_density_fails(self):
        mm = MmInterval(-1.0, 1.0, field("exp(x1^2)"), 0.0, 2.0)
        scan = kn_concavity_check(mm, SAMPLES)
        assert not scan.passed
        assert scan.max_violation > 0
        assert mm.a <= scan.witness[0] <= mm.b
        assert one_d_bakry_emery_margin(mm, 15).value > 0

    def test_too_large_curvature_fails(self):
        mm = MmInterval(0.0, math.pi, field("sin(x1)^2"), 3.0, 3.0)
        assert not kn_concavity_check(mm, SAMPLES).passed

    def test_scan_is_reproducible(self):
        mm = MmInterval(-1.0, 1.0, field("exp(x1^2)"), 0.0, 2.0)
        first = kn_concavity_check(mm, SAMPLES, seed=7)
        second = kn_concavity_check(mm, SAMPLES, seed=7)
        assert first.max_violation == second.max_violation
        assert first.witness == second.witness


class TestGluing:

    def test_mirror(self):
        mirrored = mirror_density(field("x1^2"), 1.0)
        assert mirrored.value([0.5]) == pytest.approx(2.25)

    def test_piecewise_density(self):
        density = PiecewiseDensity((0.0, 1.0, 2.0), (field("1"), field("2")))
        assert density.values([0.5, 1.0, 1.5]) == pytest.approx([1.0, 1.0, 2.0])
        assert density.interval == (0.0, 2.0)
        with pytest.raises(ValueError):
            PiecewiseDensity((0.0, 1.0), (field("1"), field("2")))

    def test_sphere_halves_glue_smoothly(self):
        phi = field("sin(x1)^2")
        half = math.pi / 2
        report = glue_1d(phi, mirror_density(phi, half), 0.0, half, math.pi, 2.0, 3.0, SAMPLES)
        assert report.d_minus == pytest.approx(0.0, abs=1e-12)
        assert report.d_plus == pytest.approx(0.0, abs=1e-12)
        assert report.passed
        assert report.glued.passed

    def test_tent_passes(self):
        phi = field("1 + x1/2")
        report = glue_1d(phi, mirror_density(phi, 1.0), 0.0, 1.0, 2.0, 0.0, 2.0, SAMPLES)
        assert (report.d_minus, report.d_plus) == pytest.approx((0.5, -0.5))
        assert report.passed

    def test_valley_fails(self):
        phi = field("1 - x1/2")
        report = glue_1d(phi, mirror_density(phi, 1.0), 0.0, 1.0, 2.0, 0.0, 2.0, SAMPLES)
        assert (report.d_minus, report.d_plus) == pytest.approx((-0.5, 0.5))
        assert report.left.passed and report.right.passed
        assert not report.kink_passed
        assert not report.passed
        assert not report.glued.passed
        assert report.to_dict()['passed'] is False

    def test_densities_must_meet(self):
        with pytest.raises(WeightMismatchError):
            glue_1d(field("1"), field("2"), 0.0, 1.0, 2.0, 0.0, 2.0, SAMPLES)


class TestNeedleDensity:

    def test_analytic_tent(self):
        nd = NeedleDensity.from_fields(field("1 + x1"), field("1 - x1"), -0.5, 0.5)
        assert (nd.d_minus, nd.d_plus) == (1.0, -1.0)
        assert nd.values([-0.25, 0.0, 0.25]) == pytest.approx([0.75, 1.0, 0.75])
        report = needle_jump_check(nd, 0.0, 2.0, SAMPLES)
        assert report.passed

    def test_chain_rule_at_the_interface(self):
        nd = NeedleDensity.from_fields(field("1 + x1"), field("1 - x1"), -0.5, 0.5)
        report = needle_jump_check(nd, 0.0, 3.0, SAMPLES)
        assert (report.d_minus, report.d_plus) == pytest.approx((0.5, -0.5))

    def test_upward_kink_fails(self):
        nd = NeedleDensity.from_fields(field("1 - x1"), field("1 + x1"), -0.5, 0.5)
        report = needle_jump_check(nd, 0.0, 2.0, SAMPLES)
        assert not report.jump_passed
        assert report.to_dict()['passed'] is False

    def test_numeric_one_sided_derivatives(self):
        nd = NeedleDensity(-0.5, 0.5, np.exp, lambda t: np.exp(-np.asarray(t)))
        assert nd.d_minus == pytest.approx(1.0, rel=1e-8)
        assert nd.d_plus == pytest.approx(-1.0, rel=1e-8)
        assert nd.provenance == "user"

    def test_one_sided_derivative_of_a_kink(self):
        func = lambda t: np.abs(np.asarray(t))
        assert one_sided_derivative(func, 0.0, 1, 1.0) == pytest.approx(1.0)
        assert one_sided_derivative(func, 0.0, -1, 1.0) == pytest.approx(-1.0)

    def test_discontinuity_rejected(self):
        with pytest.raises(WeightMismatchError):
            NeedleDensity.from_fields(field("1"), field("2"), -0.5, 0.5)

    def test_interval_must_contain_zero(self):
        with pytest.raises(ValueError):
            NeedleDensity.from_fields(field("1"), field("1"), 0.1, 0.5)
