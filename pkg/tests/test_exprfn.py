import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varalg import exprfn
from varalg.errors import ExprSyntaxError, UnknownFunction, UnknownVariable
from varalg.exprfn import Bin, Call, Cmp, Neg, Num, Piece, Var, compile_source, interpret, parse, to_source

nums = st.floats(min_value=0.0, max_value=1e6, allow_nan=False).map(Num)
leaves = st.one_of(nums, st.just(Var()))


def _extend(children):
    unary = st.sampled_from(["log", "exp", "sqrt", "atan", "abs", "sign"])
    binary = st.sampled_from(["min", "max"])
    cmp = st.builds(Cmp, st.sampled_from(["<", "<=", ">", ">=", "==", "!="]), children, children)
    return st.one_of(
        st.builds(Neg, children),
        st.builds(Bin, st.sampled_from(["+", "-", "*", "/", "^"]), children, children),
        st.builds(lambda n, a: Call(n, (a,)), unary, children),
        st.builds(lambda n, a, b: Call(n, (a, b)), binary, children, children),
        st.builds(lambda c, e, o: Piece(((c, e),), o), cmp, children, children),
    )


asts = st.recursive(leaves, _extend, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(asts)
def test_round_trip(node):
    assert parse(to_source(node)) == node


@settings(max_examples=200, deadline=None)
@given(asts, st.floats(min_value=-50.0, max_value=50.0, allow_nan=False))
def test_compiled_matches_interpreter(node, s):
    a = interpret(node, s)
    b = exprfn.compile(node)(s)
    assert (math.isnan(a) and math.isnan(b)) or a == b


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=-20.0, max_value=20.0, allow_nan=False))
def test_agrees_with_python(s):
    # the same formula through Python's own evaluator
    src = "3*s^2 - s/(1+s^2) + atan(s)*2"
    expected = 3 * s ** 2 - s / (1 + s ** 2) + math.atan(s) * 2
    assert compile_source(src)(s) == pytest.approx(expected, rel=1e-14, abs=1e-14)


@pytest.mark.parametrize(
    "src,value",
    [
        ("2+3*4^2", 50.0),
        ("-2^2", -4.0),
        ("2^3^2", 512.0),
        ("2^-1", 0.5),
        ("(2+3)*4", 20.0),
        ("8/2/2", 2.0),
        ("1-2-3", -4.0),
        ("min(3, max(1, 2))", 2.0),
        ("pi", math.pi),
    ],
)
def test_precedence_and_associativity(src, value):
    assert interpret(parse(src), 0.0) == pytest.approx(value, rel=1e-15)


def test_piecewise():
    f = compile_source("piece{ s < 0 => 0, s <= 1 => s^2, else => 2*s - 1 }")
    assert [f(x) for x in (-1.0, 0.5, 3.0)] == [0.0, 0.25, 5.0]


def test_domain_semantics():
    assert math.isnan(compile_source("log(s)")(-1.0))
    assert compile_source("log(s)")(0.0) == -math.inf
    assert math.isnan(compile_source("sqrt(s)")(-4.0))
    assert compile_source("1/s")(0.0) == math.inf
    assert math.isnan(compile_source("s/s")(0.0))
    assert compile_source("exp(s)")(1e6) == math.inf


def test_syntax_error_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse("2 + * 3")
    assert info.value.position == 4


@pytest.mark.parametrize("src,pos", [("", 0), ("(s", 2), ("s )", 2), ("s $ 2", 2), ("2 s", 2)])
def test_more_syntax_errors(src, pos):
    with pytest.raises(ExprSyntaxError) as info:
        parse(src)
    assert info.value.position == pos


def test_unknown_names():
    with pytest.raises(UnknownFunction) as info:
        parse("1 + sinh(s)")
    assert info.value.position == 4
    with pytest.raises(UnknownVariable):
        parse("x + 1")


def test_arity():
    with pytest.raises(ExprSyntaxError):
        parse("min(s)")


def test_compiled_carries_canonical_source():
    f = compile_source("s^2 / (1 + s^2)")
    assert f.source == "((s ^ 2.0) / (1.0 + (s ^ 2.0)))"
    assert parse(f.source) == parse("s^2 / (1 + s^2)")
