import math
import struct

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teleoscm.expr import (
    BinOp,
    Compare,
    EvaluationError,
    ExprSyntaxError,
    If,
    Logic,
    Neg,
    Not,
    Num,
    Var,
    evaluate,
    free_variables,
    parse_expression,
    rename,
    to_source,
)


def test_single_identifier():
    assert parse_expression("U_W") == Var("U_W")


def test_sum_is_left_associated():
    assert parse_expression("W + H + U_T") == BinOp("+", BinOp("+", Var("W"), Var("H")), Var("U_T"))


def test_conditional_with_comparison_guard():
    assert parse_expression("if(T < 0.5, 1, 0)") == If(Compare("<", Var("T"), Num(0.5)), Num(1.0), Num(0.0))


def test_trailing_operator_reports_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expression("1 +")
    assert info.value.offset == 3
    assert "NUMBER" in info.value.expected and "(" in info.value.expected


@pytest.mark.parametrize(
    "source, offset",
    [("(1 + 2", 6), ("if(1, 2)", 7), ("a b", 2), ("1 $ 2", 2), ("", 0), ("1e400", 0)],
)
def test_syntax_errors(source, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse_expression(source)
    assert info.value.offset == offset


def test_unknown_function():
    with pytest.raises(ExprSyntaxError, match="unknown function 'exp'"):
        parse_expression("exp(x)")


def test_precedence():
    e = parse_expression("not a < b and c or d")
    assert e == Logic("or", Logic("and", Not(Compare("<", Var("a"), Var("b"))), Var("c")), Var("d"))
    assert parse_expression("-a * b") == BinOp("*", Neg(Var("a")), Var("b"))
    assert parse_expression("a - b - c") == BinOp("-", BinOp("-", Var("a"), Var("b")), Var("c"))
    assert parse_expression("1 + 2 * 3 < 4 / 2") == Compare(
        "<", BinOp("+", Num(1.0), BinOp("*", Num(2.0), Num(3.0))), BinOp("/", Num(4.0), Num(2.0))
    )


@pytest.mark.parametrize(
    "source, env, expected",
    [
        ("W + H + U_T", {"W": 0, "H": 0, "U_T": 0}, 0.0),
        ("if(T < 0.5, 1, 0)", {"T": 0}, 1.0),
        ("0.5 * S + U_P + 1", {"S": 1, "U_P": 0}, 1.5),
        ("if(P > 1, 1, 0)", {"P": 1.0}, 0.0),
        ("2 and 0", {}, 0.0),
        ("-3 or 0", {}, 1.0),
        ("not 0.25", {}, 0.0),
        ("1 == 1.0", {}, 1.0),
        ("0.1 + 0.2 == 0.3", {}, 0.0),
        ("if(x != 0, 1 / x, 0)", {"x": 0}, 0.0),
    ],
)
def test_evaluate(source, env, expected):
    assert evaluate(parse_expression(source), env) == expected


def test_evaluation_errors():
    with pytest.raises(EvaluationError, match="not assigned"):
        evaluate(parse_expression("a + b"), {"a": 1})
    with pytest.raises(EvaluationError, match="division by zero"):
        evaluate(parse_expression("1 / (a - a)"), {"a": 2})
    with pytest.raises(EvaluationError, match="non-finite"):
        evaluate(parse_expression("a * a"), {"a": 1e200})


@pytest.mark.parametrize(
    "source, expected",
    [("W+H+U_T", {"W", "H", "U_T"}), ("3.0", set()), ("if(P>1,1,0)", {"P"}), ("a * a + a", {"a"})],
)
def test_free_variables(source, expected):
    assert free_variables(parse_expression(source)) == expected


def test_rename():
    e = rename(parse_expression("W + H + U_T"), {"W": "W_star", "H": "H_star"})
    assert to_source(e) == "W_star + H_star + U_T"


# --------------------------------------------------------------------------
# properties

names = st.sampled_from(["a", "b", "c", "U_x", "X1"])
literals = st.floats(allow_nan=False, allow_infinity=False, min_value=-1e6, max_value=1e6)


def _exprs():
    leaves = st.one_of(literals.map(Num), names.map(Var))

    def extend(children):
        return st.one_of(
            children.map(Neg),
            children.map(Not),
            st.tuples(st.sampled_from("+-*/"), children, children).map(lambda t: BinOp(*t)),
            st.tuples(st.sampled_from(["<", "<=", ">", ">=", "==", "!="]), children, children).map(
                lambda t: Compare(*t)
            ),
            st.tuples(st.sampled_from(["and", "or"]), children, children).map(lambda t: Logic(*t)),
            st.tuples(children, children, children).map(lambda t: If(*t)),
        )

    return st.recursive(leaves, extend, max_leaves=12)


exprs = _exprs()
envs = st.fixed_dictionaries({n: st.floats(-10, 10, allow_nan=False) for n in ["a", "b", "c", "U_x", "X1"]})


@settings(max_examples=400)
@given(exprs)
def test_print_parse_print_is_fixed_point(e):
    printed = to_source(e)
    assert to_source(parse_expression(printed)) == printed


@settings(max_examples=300)
@given(exprs, envs)
def test_parsed_tree_evaluates_like_original(e, env):
    # printing may turn a negative literal into a negation; values must not change
    again = parse_expression(to_source(e))
    try:
        v1 = evaluate(e, env)
    except EvaluationError:
        with pytest.raises(EvaluationError):
            evaluate(again, env)
        return
    assert struct.pack("<d", evaluate(again, env)) == struct.pack("<d", v1)


@settings(max_examples=300)
@given(exprs, envs)
def test_evaluate_is_pure(e, env):
    def run():
        try:
            return struct.pack("<d", evaluate(e, env))
        except EvaluationError as exc:
            return str(exc)

    assert run() == run()


class _Spy(dict):
    def __init__(self, *a, **k):
        super().__init__(*a, **k)
        self.read = set()

    def __getitem__(self, key):
        self.read.add(key)
        return super().__getitem__(key)


@settings(max_examples=300)
@given(exprs, envs)
def test_evaluate_reads_only_free_variables(e, env):
    spy = _Spy(env)
    try:
        evaluate(e, spy)
    except EvaluationError:
        pass
    assert spy.read <= free_variables(e)


@settings(max_examples=200)
@given(exprs, envs)
def test_booleans_are_zero_or_one(e, env):
    for node in (Compare("<", e, Num(0.0)), Not(e), Logic("and", e, e)):
        try:
            assert evaluate(node, env) in (0.0, 1.0)
        except EvaluationError:
            pass


def test_result_is_finite_or_raises():
    e = parse_expression("a - a")
    assert math.isfinite(evaluate(e, {"a": 1e308}))
