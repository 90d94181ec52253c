import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from iltkit import FieldTower, Lpdo, compose, format_operator, parse_expr, parse_operator
from iltkit.errors import DivisionByZero, ExprSyntaxError, InputError, NegativeExponent, UnknownSymbol
from iltkit.text import operator_from_json, operator_to_json

from randgen import rand_operator

T = FieldTower(["x", "y", "z"])
G = FieldTower(["x", "y"]).declare_generator("t", {"x": 0, "y": "-y*t"})

WORKED = {
    "X1": "x^2*Dy + x*y*Dz + 1",
    "X2": "Dx + 2/x",
    "H": "x^3*Dz^2",
    "L": "x^2*Dx*Dy + x*y*Dx*Dz - x^3*Dz^2 + Dx + 2*x*Dy + 2*y*Dz + 2/x",
    "L1": "x^2*Dx*Dy + x*y*Dx*Dz - x^3*Dz^2 + Dx + x*Dy - 1/x",
    "M1": "Dx - 1/x",
}


def test_parse_simple():
    A = parse_operator("Dx*Dy + x*y*Dx", T)
    assert dict(A.items()) == {(1, 1, 0): T.one, (1, 0, 0): T.expr("x*y")}


def test_parse_expands_noncommutatively():
    A = parse_operator("(Dx + 2/x)*(x^2*Dy + x*y*Dz + 1)", T)
    assert str(A) == "x^2*Dx*Dy + x*y*Dx*Dz + Dx + 4*x*Dy + 3*y*Dz + 2/x"
    X1, X2 = parse_operator(WORKED["X1"], T), parse_operator(WORKED["X2"], T)
    assert A == compose(X2, X1)


def test_precedence():
    assert parse_operator("-x^2", T) == -(parse_operator("x*x", T))
    assert parse_operator("1 - x - y", T) == parse_operator("1 - (x + y)", T)
    assert parse_operator("x/y/z", T) == parse_operator("x/(y*z)", T)
    assert parse_operator("Dx^2", T) == parse_operator("Dx*Dx", T)
    assert parse_operator("(Dx + x)^2", T) == parse_operator("Dx^2 + 2*x*Dx + x^2 + 1", T)
    assert parse_operator("Dx/x", T) == parse_operator("1/x*Dx - 1/x^2", T)


def test_division_by_operator_rejected():
    with pytest.raises(ExprSyntaxError) as info:
        parse_operator("Dx/Dy", T)
    assert info.value.column == 3


def test_syntax_error_position():
    with pytest.raises(ExprSyntaxError) as info:
        parse_operator("x + * y", T)
    assert (info.value.line, info.value.column) == (1, 5)
    assert "column 5" in str(info.value)
    for bad in ["", "x +", "(x + 1", "x $ y", "2 3", "x^y"]:
        with pytest.raises(ExprSyntaxError):
            parse_operator(bad, T)


def test_errors():
    with pytest.raises(NegativeExponent):
        parse_operator("x^-1", T)
    with pytest.raises(UnknownSymbol):
        parse_operator("w*Dx", T)
    with pytest.raises(UnknownSymbol):
        parse_operator("Dw", T)
    with pytest.raises(DivisionByZero):
        parse_operator("1/(x - x)", T)
    with pytest.raises(InputError):
        parse_expr("x*Dx", T)


def test_named_bindings_and_generators():
    X2 = parse_operator("Dx + 2/x", T)
    assert parse_operator("X2*X2", T, {"X2": X2}) == compose(X2, X2)
    assert parse_operator("theta*Dy", T, {"theta": T.expr("x^2")}) == parse_operator("x^2*Dy", T)
    A = parse_operator("Dy + y", G)
    assert (A.coeff((0, 1)), A.coeff((0, 0))) == (G.one, G.symbol("y"))
    assert str(parse_expr("t^2/y", G)) == "t^2/y"


def test_format_examples():
    assert format_operator(parse_operator(WORKED["L"], T)) == WORKED["L"]
    assert format_operator(Lpdo.zero(T)) == "0"
    assert format_operator(parse_operator("(x + 1)*Dy - Dx", T)) == "-Dx + (x + 1)*Dy"
    assert format_operator(parse_operator("-x/(y + 1)*Dz", T)) == "-x/(y + 1)*Dz"
    with pytest.raises(ValueError):
        format_operator(Lpdo.zero(T), "latex")


def test_json_form():
    A = parse_operator("x^2*Dx*Dy - 1/x", T)
    assert operator_to_json(A) == [{"index": {"x": 1, "y": 1}, "coeff": "x^2"}, {"index": {}, "coeff": "-1/x"}]
    assert operator_from_json(format_operator(A, "json"), T) == A


@pytest.mark.parametrize("name", sorted(WORKED))
def test_worked_example_round_trips_byte_identical(name):
    text = WORKED[name]
    A = parse_operator(text, T)
    assert format_operator(A) == text
    dumped = format_operator(A, "json")
    again = operator_from_json(dumped, T)
    assert again == A and format_operator(again, "json") == dumped and format_operator(again) == text


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32))
def test_round_trip_property(seed):
    rng = random.Random(seed)
    A = rand_operator(rng, T, rng.randint(0, 3), nonzero=False)
    text = format_operator(A)
    B = parse_operator(text, T)
    assert B == A and format_operator(B) == text
    assert operator_from_json(json.loads(format_operator(A, "json")), T) == A


def test_round_trip_with_generator():
    rng = random.Random(5)
    for _ in range(50):
        A = rand_operator(rng, G, 2, names=["x", "y", "t"])
        assert parse_operator(format_operator(A), G) == A
