from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgclkit import EvalError, eval_expr, free_vars, parse_expression, pretty_expr, space_of
from pgclkit.exprs import Bracket, Lit, Var, substitute

F = Fraction


def s2():
    return space_of(("x", (0, 1, 2, 3)), ("y", (0, 1)))


def coin():
    return space_of(("c", ("H", "T")))


def ev(text, space, **vals):
    e = parse_expression(text, space)
    return eval_expr(e, space.state(**vals))


def test_arithmetic_is_exact():
    s = s2()
    assert ev("1 - y + 3", s, x=0, y=1) == F(3)
    assert ev("x * x - y / 2", s, x=3, y=1) == F(17, 2)
    assert ev("(x + y) / 2", s, x=3, y=0) == F(3, 2)


def test_division_by_zero_raises():
    s = s2()
    with pytest.raises(EvalError):
        ev("1 / y", s, x=0, y=0)


def test_comparisons_and_connectives():
    s = s2()
    assert ev("0 < y & y < 2", s, x=0, y=1) is True
    assert ev("x = 3 | y = 1", s, x=0, y=0) is False
    assert ev("!(x = 0)", s, x=1, y=0) is True
    assert ev("x != y", s, x=0, y=0) is False


def test_token_equality_only():
    c = coin()
    assert ev("c = H", c, c="H") is True
    assert ev("c != T", c, c="H") is True
    with pytest.raises(EvalError):
        ev("c < T", c, c="H")


def test_token_number_mix_is_an_error():
    s = space_of(("c", ("H", "T")), ("x", (0, 1)))
    with pytest.raises(EvalError) as ei:
        ev("c = x", s, c="H", x=0)
    assert "token" in str(ei.value)


def test_brackets_embed_booleans_as_0_1():
    s = s2()
    assert ev("[0 < y & y < 2]", s, x=0, y=1) == F(1)
    assert ev("[x = 3] * 5 + y", s, x=3, y=1) == F(6)
    assert ev("[x = 3]", s, x=0, y=0) == F(0)


def test_short_circuit_skips_undefined_side():
    s = s2()
    # right operand divides by zero, but the left side decides
    assert ev("y = 0 | 1 / y = 1", s, x=0, y=0) is True
    assert ev("y = 1 & 1 / y = 1", s, x=0, y=0) is False


def test_free_vars():
    s = s2()
    e = parse_expression("[x = 3] + y * y", s)
    assert free_vars(e) == frozenset({"x", "y"})


def test_substitute_is_capture_free_textually():
    s = s2()
    e = parse_expression("x + y", s)
    e2 = substitute(e, "x", parse_expression("y * 2", s))
    assert eval_expr(e2, s.state(x=0, y=1)) == F(3)


@given(st.integers(0, 3), st.integers(0, 1))
def test_substitution_lemma_exhaustive(xv, yv):
    # eval(E[x\e], s) == eval(E, s[x := eval(e, s)]) on every state
    s = s2()
    exprs = ["x + y", "x * x - y", "[x = 2] + y", "(x + 1) / 2"]
    repl = parse_expression("3 - x", s)
    st0 = s.state(x=xv, y=yv)
    for text in exprs:
        e = parse_expression(text, s)
        lhs = eval_expr(substitute(e, "x", repl), st0)
        rhs = eval_expr(e, st0.assign("x", eval_expr(repl, st0)))
        assert lhs == rhs


def test_pretty_round_trip_preserves_tree():
    s = s2()
    texts = [
        "x + y * 2",
        "(x + y) * 2",
        "[x = 1] + [y = 0]",
        "!(x = 1 & y = 0) | x < y",
        "x - y - 1",
        "x - (y - 1)",
        "3/4 * x",
    ]
    for text in texts:
        e = parse_expression(text, s)
        assert parse_expression(pretty_expr(e), s) == e


def test_pretty_prints_rationals_as_num_slash_den():
    assert pretty_expr(Lit(F(3, 4))) == "3/4"
    assert pretty_expr(Bracket(Var("b"))) == "[b]"


@settings(max_examples=50)
@given(st.fractions(min_value=-4, max_value=4))
def test_literals_round_trip(q):
    s = s2()
    e = Lit(q)
    assert parse_expression(pretty_expr(e), s) == e
