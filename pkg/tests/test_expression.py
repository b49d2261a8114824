import math

import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from cdglue.errors import (
    CoordinateIndexError,
    EvaluationDomainError,
    ExpressionSyntaxError,
    UnknownIdentifierError,
)
from cdglue.expression import (
    Number,
    affine_pullback,
    constant_field,
    parse_field,
    power_field,
    product_field,
    to_text,
)

TEXTS = [
    "x1^2 + 2*x2",
    "-x1^2",
    "2^3^2",
    "sin(x1)*cos(x2) / (1 + x1^2)",
    "exp(-x1) - log(2 + x2)",
    "sqrt(1 + x1^2) * pi",
    "1.5e-3 * x2 - .25",
]


class TestParse:

    def test_arithmetic(self):
        field = parse_field("x1^2 + 2*x2", 2)
        assert field.value([3.0, 1.0]) == pytest.approx(11.0)

    def test_unary_minus_binds_looser_than_power(self):
        assert parse_field("-x1^2", 1).value([2.0]) == pytest.approx(-4.0)

    def test_power_is_right_associative(self):
        assert parse_field("2^3^2", 1).value([0.0]) == pytest.approx(512.0)

    def test_functions_and_constants(self):
        field = parse_field("sin(pi*x1) + exp(x2)", 2)
        assert field.value([0.5, 0.0]) == pytest.approx(2.0)

    def test_vectorised_values(self):
        field = parse_field("x1*x2", 2)
        points = np.array([[1.0, 2.0], [3.0, 4.0], [-1.0, 0.5]])
        assert field.values(points) == pytest.approx([2.0, 12.0, -0.5])

    def test_missing_operand_reports_offset(self):
        with pytest.raises(ExpressionSyntaxError) as info:
            parse_field("x1 +", 1)
        assert info.value.offset == 4

    def test_bad_character_reports_offset(self):
        with pytest.raises(ExpressionSyntaxError) as info:
            parse_field("2 $ 3", 1)
        assert info.value.offset == 2

    def test_empty_expression(self):
        with pytest.raises(ExpressionSyntaxError):
            parse_field("   ", 1)

    def test_unknown_identifier(self):
        with pytest.raises(UnknownIdentifierError) as info:
            parse_field("foo(x1)", 1)
        assert info.value.name == "foo"

    def test_coordinate_out_of_range(self):
        with pytest.raises(CoordinateIndexError):
            parse_field("x3 + x1", 2)

    def test_errors_are_input_category(self):
        with pytest.raises(ExpressionSyntaxError) as info:
            parse_field("(x1", 1)
        assert info.value.category == "input"


class TestEvaluate:

    @pytest.mark.parametrize("text, point", [
        ("log(x1)", [0.0]),
        ("sqrt(x1)", [-1.0]),
        ("1/x1", [0.0]),
        ("x1^0.5", [-2.0]),
    ])
    def test_domain_errors(self, text, point):
        with pytest.raises(EvaluationDomainError) as info:
            parse_field(text, 1).value(point)
        assert info.value.category == "numerical"

    def test_constant_field(self):
        field = constant_field(-2.5, 3)
        assert field.is_constant
        assert field.value([1.0, 2.0, 3.0]) == pytest.approx(-2.5)


class TestPrinter:

    @pytest.mark.parametrize("text", TEXTS)
    def test_print_then_parse_is_identity(self, text):
        field = parse_field(text, 2)
        assert parse_field(to_text(field.expression), 2).expression == field.expression

    @given(st.floats(min_value=-3, max_value=3), st.floats(min_value=-3, max_value=3))
    def test_printed_field_evaluates_identically(self, a, b):
        field = parse_field("sin(x1)*x2 - x1^3/(2 + x2^2)", 2)
        reparsed = parse_field(str(field), 2)
        assert reparsed.value([a, b]) == field.value([a, b])

    @pytest.mark.parametrize("value", [math.inf, -math.inf, math.nan])
    def test_non_finite_constant_has_no_text(self, value):
        with pytest.raises(ValueError):
            to_text(Number(value))
        with pytest.raises(ValueError):
            constant_field(value, 1)

    def test_overflowing_literal_is_rejected(self):
        with pytest.raises(ExpressionSyntaxError) as info:
            parse_field("x1 + 1e999", 1)
        assert info.value.offset == 5


class TestComposition:

    @given(st.floats(min_value=-2, max_value=2))
    def test_affine_pullback(self, t):
        field = parse_field("x1^2 + sin(x1)", 1)
        mirrored = affine_pullback(field, -1.0, 3.0)
        assert mirrored.value([t]) == pytest.approx(field.value([3.0 - t]))

    def test_pullback_of_one_coordinate(self):
        field = parse_field("x1 * x2", 2)
        shifted = affine_pullback(field, 2.0, 1.0, index=2)
        assert shifted.value([3.0, 1.0]) == pytest.approx(9.0)

    def test_power_and_product(self):
        base = parse_field("1 + x1", 1)
        assert power_field(base, 0.5).value([3.0]) == pytest.approx(2.0)
        lifted = product_field(base, parse_field("x2", 2), 2)
        assert lifted.arity == 2
        assert lifted.value([1.0, 4.0]) == pytest.approx(8.0)
        assert math.isclose(power_field(base, 2.0, 3).value([1.0, 0.0, 0.0]), 4.0)
