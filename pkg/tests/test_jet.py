import math

import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from cdglue.errors import DomainError, EvaluationDomainError
from cdglue.expression import parse_field
from cdglue.jet import Jet, evaluate_jets, finite_difference_jet, jet_eval

FIELDS = [
    "sin(x1)*x2^2",
    "exp(x1 - x2) / (2 + cos(x2))",
    "log(3 + x1^2) * sqrt(2 + x2)",
    "(1 + x1*x2)^1.5",
    "x1^x2",
]

coordinates = st.floats(min_value=0.3, max_value=1.2)


class TestJetEval:

    def test_closed_form(self):
        jet = jet_eval(parse_field("sin(x1)*x2^2", 2), [0.4, 1.5], order=3)
        x, y = 0.4, 1.5
        assert jet.value[0] == pytest.approx(math.sin(x) * y * y)
        assert jet.first[0] == pytest.approx([math.cos(x) * y * y, 2 * math.sin(x) * y])
        assert jet.second[0] == pytest.approx(np.array([
            [-math.sin(x) * y * y, 2 * math.cos(x) * y],
            [2 * math.cos(x) * y, 2 * math.sin(x)],
        ]))
        assert jet.third[0, 0, 1, 1] == pytest.approx(2 * math.cos(x))
        assert jet.third[0, 1, 1, 0] == pytest.approx(2 * math.cos(x))

    @pytest.mark.parametrize("text", FIELDS)
    @given(x=coordinates, y=coordinates)
    def test_matches_finite_differences(self, text, x, y):
        field = parse_field(text, 2)
        exact = jet_eval(field, [x, y], order=2)
        oracle = finite_difference_jet(field.value, [x, y], order=2)
        assert exact.first[0] == pytest.approx(oracle.first[0], rel=1e-6, abs=1e-7)
        assert exact.second[0] == pytest.approx(oracle.second[0], rel=1e-5, abs=1e-6)

    @given(x=coordinates, y=coordinates)
    def test_derivative_tensors_are_symmetric(self, x, y):
        jet = jet_eval(parse_field("exp(x1*x2) * sin(x1 + 2*x2)", 2), [x, y], order=3)
        assert jet.second[0] == pytest.approx(jet.second[0].T)
        third = jet.third[0]
        for perm in [(1, 0, 2), (0, 2, 1), (2, 1, 0)]:
            assert third.transpose(perm) == pytest.approx(third)

    def test_batched_matches_pointwise(self):
        field = parse_field("x1^3 - x1*x2", 2)
        points = np.array([[0.1, 0.2], [1.0, -1.0], [2.0, 0.5]])
        batch = evaluate_jets(field, points, order=2)
        for k, p in enumerate(points):
            single = jet_eval(field, p, order=2)
            assert batch.second[k] == pytest.approx(single.second[0])

    def test_domain_check(self):
        with pytest.raises(DomainError):
            jet_eval(parse_field("x1", 1), [2.0], domain=[(0.0, 1.0)])

    def test_sqrt_at_zero_has_no_jet(self):
        with pytest.raises(EvaluationDomainError):
            jet_eval(parse_field("sqrt(x1)", 1), [0.0], order=1)

    def test_order_bounds(self):
        with pytest.raises(ValueError):
            jet_eval(parse_field("x1", 1), [0.0], order=4)


class TestJetArithmetic:

    @given(x=coordinates, y=coordinates)
    def test_log_of_jet_equals_jet_of_log(self, x, y):
        base = jet_eval(parse_field("x1^2 + x2", 2), [x, y], order=3)
        direct = jet_eval(parse_field("log(x1^2 + x2)", 2), [x, y], order=3)
        composed = base.log()
        assert composed.second[0] == pytest.approx(direct.second[0])
        assert composed.third[0] == pytest.approx(direct.third[0])

    @given(x=coordinates, y=coordinates)
    def test_power_and_quotient(self, x, y):
        u = jet_eval(parse_field("1 + x1*x2", 2), [x, y], order=2)
        v = jet_eval(parse_field("2 + x1", 2), [x, y], order=2)
        expected = jet_eval(parse_field("(1 + x1*x2)^0.5 / (2 + x1)", 2), [x, y], order=2)
        result = u.power(0.5) / v
        assert result.first[0] == pytest.approx(expected.first[0])
        assert result.second[0] == pytest.approx(expected.second[0])

    def test_constants_lift(self):
        u = jet_eval(parse_field("x1", 1), [2.0], order=2)
        result = 3.0 - u * 2.0 + 1.0
        assert result.value[0] == pytest.approx(0.0)
        assert result.first[0, 0] == pytest.approx(-2.0)
        assert result.second[0, 0, 0] == pytest.approx(0.0)

    def test_constant_jet(self):
        jet = Jet.constant(5.0, batch=2, dim=3, order=2)
        assert jet.order == 2 and jet.batch == 2 and jet.dim == 3
        assert not np.any(jet.second)
