from fractions import Fraction

import pytest

from courantcoh.fields import QQ, FunctionField, parse_scalar


def test_rationals_coerce():
    assert QQ.coerce(3) == Fraction(3)
    assert QQ.coerce("7/2") == Fraction(7, 2)
    assert not QQ.zero
    assert QQ.one + QQ.one == Fraction(2)


def test_function_field_reduction():
    F = FunctionField("nu")
    nu = F.symbol("nu")
    x = (nu + 1) * (nu - 1)
    assert x == nu * nu - F.one
    assert x / (nu - 1) == nu + 1
    # reduced form: coprime, monic denominator
    y = (F.coerce(2) * nu) / (F.coerce(2) * (nu + 2))
    assert y.den[-1] == Fraction(1)
    assert y * (nu + 2) == nu


def test_function_field_linear_independence():
    # m + nu n = 0 iff (m, n) = (0, 0): the decidable irrationality statement
    F = FunctionField("nu")
    nu = F.symbol("nu")
    for m in range(-3, 4):
        for n in range(-3, 4):
            val = F.coerce(m) + nu * n
            assert bool(val) == ((m, n) != (0, 0))


def test_zero_division():
    F = FunctionField("nu")
    with pytest.raises(ZeroDivisionError):
        F.one / F.zero


def test_parse_scalar():
    F = FunctionField("nu")
    nu = F.symbol("nu")
    assert parse_scalar(F, "1/2 + 3*nu") == F.coerce(Fraction(1, 2)) + nu * 3
    assert parse_scalar(F, "-nu") == -nu
    assert parse_scalar(QQ, "-7/3") == Fraction(-7, 3)
    with pytest.raises(KeyError):
        parse_scalar(QQ, "nu")
    with pytest.raises(ValueError):
        parse_scalar(QQ, "")


def test_two_symbols_tower():
    F = FunctionField("a", "b")
    a, b = F.symbol("a"), F.symbol("b")
    assert (a + b) * (a - b) == a * a - b * b
    assert (a * b) / b == a
