import math

import pytest
from hypothesis import settings

from cdglue.chart import MetricChart
from cdglue.curvature import Face, WeightedManifold
from cdglue.expression import parse_field
from cdglue.gluing import assemble

settings.register_profile("cdglue", database=None, max_examples=25, deadline=None, derandomize=True)
settings.load_profile("cdglue")

TWO_PI = 2 * math.pi


def collar(metric, depth, weight="1", N=2.0):
    """2D collar over the circle coordinate x1 with the glue face at x2 = 0."""
    chart = MetricChart.from_strings(2, [(0.0, TWO_PI), (0.0, depth)], metric)
    return WeightedManifold(chart, parse_field(weight, 2), N, (Face(1, "min", "glue"),))


@pytest.fixture
def disk_side():
    return collar(["(1-x2)^2", "0", "1"], 0.9)


@pytest.fixture
def disk(disk_side):
    return assemble(disk_side, disk_side)


@pytest.fixture
def annulus():
    side = collar(["(1+x2)^2", "0", "1"], 0.9)
    return assemble(side, side)


@pytest.fixture
def hemisphere():
    side = collar(["cos(x2)^2", "0", "1"], 1.2)
    return assemble(side, side)


@pytest.fixture
def weighted_disk():
    side = collar(["(1-x2)^2", "0", "1"], 0.9, weight="1 + x2", N=3.0)
    return assemble(side, side)
