import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from cdglue.errors import (
    CollarNormalizationError,
    DomainError,
    InterfaceMismatchError,
    WeightError,
    WeightMismatchError,
)
from cdglue.gluing import assemble, compatibility_report, compatibility_row, interface_geometry

from conftest import collar

ys = st.floats(min_value=0.1, max_value=6.1)


class TestAssemble:

    def test_glued_domain(self, disk):
        assert disk.dim == 2 and disk.N == 2.0
        assert disk.domain == ((0.0, 2 * np.pi), (-0.9, 0.9))
        assert disk.contains([1.0, -0.9]) and not disk.contains([1.0, 1.0])

    def test_metric_is_continuous_across_the_interface(self, disk):
        above = disk.metric_values([[1.0, 1e-12]])[0]
        below = disk.metric_values([[1.0, -1e-12]])[0]
        assert above == pytest.approx(below)

    def test_reflected_side(self, disk):
        mj = disk.metric_jet([1.0, -0.5])
        assert mj.g[0, 0] == pytest.approx(0.25)
        # d_t g_11 changes sign under t -> -t
        assert mj.dg[1, 0, 0] == pytest.approx(1.0)
        assert disk.metric_jet([1.0, 0.5]).dg[1, 0, 0] == pytest.approx(-1.0)

    def test_outside_the_glued_box(self, disk):
        with pytest.raises(DomainError):
            disk.metric_jet([1.0, 1.5])

    def test_induced_metrics_must_agree(self, disk_side):
        wide = collar(["2*(1-x2)^2", "0", "1"], 0.9)
        with pytest.raises(InterfaceMismatchError):
            assemble(disk_side, wide)

    def test_weights_must_agree(self, disk_side):
        heavy = collar(["(1-x2)^2", "0", "1"], 0.9, weight="2")
        with pytest.raises(WeightMismatchError):
            assemble(disk_side, heavy)

    def test_collar_normalization(self, disk_side):
        stretched = collar(["(1-x2)^2", "0", "4"], 0.9)
        with pytest.raises(CollarNormalizationError):
            assemble(disk_side, stretched)

    def test_synthetic_dimensions_must_agree(self, disk_side):
        other = collar(["(1-x2)^2", "0", "1"], 0.9, N=3.0)
        with pytest.raises(WeightError):
            assemble(disk_side, other)

    def test_weight_kink_is_detected(self, disk, weighted_disk):
        assert disk.weight_is_c1(disk.y_grid(3))
        assert not weighted_disk.weight_is_c1(weighted_disk.y_grid(3))


class TestCompatibility:

    @given(ys)
    def test_disk_rows(self, y):
        side = collar(["(1-x2)^2", "0", "1"], 0.9)
        row = compatibility_row(assemble(side, side), [y])
        assert row.sff_min_eigenvalue == pytest.approx(2.0)
        assert row.weighted_margin == pytest.approx(2.0)

    def test_disk_passes(self, disk):
        report = compatibility_report(disk, resolution=5)
        assert report.passed
        assert len(report.rows) == 5

    def test_annulus_fails(self, annulus):
        report = compatibility_report(annulus, resolution=5)
        assert report.min_sff_eigenvalue == pytest.approx(-2.0)
        assert not report.sff_passed
        assert not report.passed

    def test_hemisphere_is_totally_geodesic(self, hemisphere):
        report = compatibility_report(hemisphere, resolution=5)
        assert report.min_sff_eigenvalue == pytest.approx(0.0, abs=1e-12)
        assert report.passed

    def test_weighted_disk_margin_is_zero(self, weighted_disk):
        report = compatibility_report(weighted_disk, resolution=5)
        assert report.min_sff_eigenvalue == pytest.approx(2.0)
        assert report.min_weighted_margin == pytest.approx(0.0, abs=1e-12)
        assert report.min_mean_curvature_sum == pytest.approx(0.0, abs=1e-12)
        assert report.passed

    def test_interface_geometry_pair(self, weighted_disk):
        g0, g1 = interface_geometry(weighted_disk, [0.3])
        assert g0.normal_log_derivative == pytest.approx(1.0)
        assert g1.normal_log_derivative == pytest.approx(1.0)
