import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ietspec.errors import DomainError, FieldMismatchError, ParseError
from ietspec.scalar import (
    QuadraticField,
    QuadraticReal,
    compare,
    floor_div,
    format_scalar,
    parse_scalar,
)

SQRT5 = QuadraticReal(0, 1, 5)
GOLDEN = QuadraticReal(Fraction(-1, 2), Fraction(1, 2), 5)

small = st.fractions(min_value=-20, max_value=20, max_denominator=50)
quad = st.builds(lambda a, b: QuadraticReal(a, b, 5), small, small)


def test_compare_examples():
    assert compare(Fraction(1, 3), Fraction(1, 3)) == 0
    assert compare(SQRT5, QuadraticReal(2, 0, 5)) == 1
    assert compare(GOLDEN, Fraction(61803, 100000)) == 1
    assert compare(GOLDEN, Fraction(61804, 100000)) == -1


def test_compare_rejects_mixed_fields():
    with pytest.raises(FieldMismatchError):
        compare(SQRT5, QuadraticReal(0, 1, 2))


def test_floor_div_examples():
    assert floor_div(Fraction(7, 3), Fraction(1, 2)) == 4
    assert floor_div(0, 1) == 0
    assert floor_div(SQRT5, 1) == 2
    assert floor_div(-SQRT5, 1) == -3


@pytest.mark.parametrize("y", [0, Fraction(-1, 2), -SQRT5])
def test_floor_div_needs_positive_divisor(y):
    with pytest.raises(DomainError):
        floor_div(1, y)


def test_golden_identity():
    assert GOLDEN * GOLDEN + GOLDEN == 1
    assert 1 / GOLDEN == GOLDEN + 1
    assert GOLDEN.conjugate() == QuadraticReal(Fraction(-1, 2), Fraction(-1, 2), 5)


def test_rational_embedding_hash_and_equality():
    x = QuadraticReal(Fraction(3, 4), 0, 5)
    assert x == Fraction(3, 4)
    assert hash(x) == hash(Fraction(3, 4))
    assert x.is_rational


def test_bad_field():
    with pytest.raises(DomainError):
        QuadraticField(8)


@pytest.mark.parametrize("text", ["1/2", "-3", "0", "-1/2+1/2*sqrt(5)", "sqrt(5)", "-sqrt(5)",
                                  "3/2-7/3*sqrt(5)", "1/4*sqrt(2)", "2+sqrt(3)"])
def test_round_trip(text):
    assert format_scalar(parse_scalar(text)) == text


def test_parse_decimal_and_errors():
    assert parse_scalar("0.25") == Fraction(1, 4)
    with pytest.raises(ParseError):
        parse_scalar("one half")
    with pytest.raises(ParseError):
        parse_scalar("")


@given(quad, quad, quad)
def test_field_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x - x == 0
    if x != 0:
        assert x * (1 / x) == 1


@given(quad, quad, quad)
def test_order_compatible_with_arithmetic(x, y, z):
    c = compare(x, y)
    assert compare(x + z, y + z) == c
    assert compare(y, x) == -c
    if z > 0:
        assert compare(x * z, y * z) == c


@given(quad)
def test_sign_matches_float(x):
    f = float(x)
    if abs(f) > 1e-9:
        assert (x > 0) == (f > 0)
    assert math.floor(x) == math.floor(f) or abs(f - round(f)) < 1e-9


@given(quad)
def test_text_round_trip_property(x):
    assert parse_scalar(format_scalar(x), 5) == x
    assert format_scalar(parse_scalar(format_scalar(x), 5)) == format_scalar(x)
