"""Parser: accepted shapes, diagnostics with positions, and the printer
round trip parse(to_source(ast)) == ast."""
from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from fuzzfeed.minilang import (
    BadSignature, Binary, BoolLit, DuplicateFunction, For, If, IntLit,
    MiniSyntaxError, MissingFoo, Return, Throw, Unary, While,
    parse, to_source, wrap32,
)

from conftest import WEAKEST_WP, with_precondition

FOO_MIN = "int foo(int[] a, int[] b, int[] c) { return 0; }"


def test_minimal_program():
    ast = parse(FOO_MIN)
    assert set(ast.functions) == {"foo"}
    assert ast.foo.return_type == "int"
    assert [p.name for p in ast.foo.params] == ["a", "b", "c"]
    assert all(p.ty == "int[]" for p in ast.foo.params)
    assert not ast.has_precondition()
    assert ast.source_text == FOO_MIN


def test_sorting_example_shape(sorting_copy_ast):
    foo = sorting_copy_ast.foo
    whiles = [s for s in _flatten(foo.body) if isinstance(s, While)]
    throws = [s for s in _flatten(foo.body) if isinstance(s, Throw)]
    assert len(whiles) == 2
    assert len(throws) == 2


def test_program_with_precondition(sorting_copy):
    ast = with_precondition(sorting_copy.program_source, WEAKEST_WP)
    assert ast.has_precondition()
    pre = ast.precondition
    assert pre.return_type == "bool"
    assert any(isinstance(s, For) for s in pre.body)


def _flatten(body):
    for stmt in body:
        yield stmt
        if isinstance(stmt, (While, For)):
            yield from _flatten(stmt.body)
        elif isinstance(stmt, If):
            yield from _flatten(stmt.then_body)
            if stmt.else_body is not None:
                yield from _flatten(stmt.else_body)


# --- diagnostics ---

def test_empty_source_is_missing_foo():
    with pytest.raises(MissingFoo):
        parse("")


def test_precondition_alone_is_missing_foo():
    with pytest.raises(MissingFoo):
        parse("bool precondition(int[] a, int[] b, int[] c) { return true; }")


def test_duplicate_function():
    with pytest.raises(DuplicateFunction):
        parse(FOO_MIN + "\n" + FOO_MIN)


@pytest.mark.parametrize("header", [
    "int foo(int[] a, int[] b) { return 0; }",
    "int foo(int a, int[] b, int[] c) { return 0; }",
    "int foo(int[] x, int[] b, int[] c) { return 0; }",
    "bool foo(int[] a, int[] b, int[] c) { return true; }",
    "int precondition(int[] a, int[] b, int[] c) { return 0; }\n" + FOO_MIN,
])
def test_bad_signatures(header):
    with pytest.raises(BadSignature):
        parse(header)


def test_only_foo_and_precondition_allowed():
    src = FOO_MIN + "\nint helper(int[] a, int[] b, int[] c) { return 0; }"
    with pytest.raises(BadSignature):
        parse(src)


def test_syntax_error_carries_position():
    src = "int foo(int[] a, int[] b, int[] c) {\n    return 0\n}"
    with pytest.raises(MiniSyntaxError) as exc:
        parse(src)
    assert exc.value.line == 3
    assert "3:" in str(exc.value)


def test_unterminated_block():
    with pytest.raises(MiniSyntaxError):
        parse("int foo(int[] a, int[] b, int[] c) { return 0;")


def test_comments_are_skipped():
    src = "// leading\nint foo(int[] a, int[] b, int[] c) {\n" \
          "    // inner\n    return 0; // trailing\n}\n"
    assert parse(src).foo.body[0] == Return(IntLit(0))


# --- literals and precedence ---

def test_int_literal_wrap():
    assert wrap32(2147483648) == -2147483648
    assert wrap32(-2147483649) == 2147483647
    assert wrap32(4294967296) == 0
    src = "int foo(int[] a, int[] b, int[] c) { return 2147483648; }"
    assert parse(src).foo.body[0] == Return(IntLit(-2147483648))


def test_negative_literal_folds_to_one_node():
    src = "int foo(int[] a, int[] b, int[] c) { return -2147483648; }"
    assert parse(src).foo.body[0] == Return(IntLit(-2147483648))
    src = "int foo(int[] a, int[] b, int[] c) { return -(-5); }"
    ret = parse(src).foo.body[0]
    assert ret == Return(Unary("-", IntLit(-5)))


@pytest.mark.parametrize("expr,tree", [
    ("1 + 2 * 3", Binary("+", IntLit(1), Binary("*", IntLit(2), IntLit(3)))),
    ("1 * 2 + 3", Binary("+", Binary("*", IntLit(1), IntLit(2)), IntLit(3))),
    ("1 - 2 - 3", Binary("-", Binary("-", IntLit(1), IntLit(2)), IntLit(3))),
    ("1 < 2 == true",
     Binary("==", Binary("<", IntLit(1), IntLit(2)), BoolLit(True))),
])
def test_precedence(expr, tree):
    src = f"int foo(int[] a, int[] b, int[] c) {{ return {expr}; }}"
    assert parse(src).foo.body[0].value == tree


def test_logical_binds_loosest():
    src = "int foo(int[] a, int[] b, int[] c) { return 1 < 2 && 3 < 4 || false; }"
    top = parse(src).foo.body[0].value
    assert isinstance(top, Binary) and top.op == "||"
    assert isinstance(top.left, Binary) and top.left.op == "&&"


# --- printer round trip ---

def test_to_source_round_trip_corpus(builtin_set):
    for program in builtin_set:
        ast = program.with_truth()
        again = parse(to_source(ast))
        assert again == ast, program.id


def test_to_source_round_trip_candidates(sorting_copy):
    from conftest import LENGTH_ONLY_WP, REGRESSED_WP, STRONG_WP

    for pre in (LENGTH_ONLY_WP, STRONG_WP, REGRESSED_WP, WEAKEST_WP):
        ast = with_precondition(sorting_copy.program_source, pre)
        assert parse(to_source(ast)) == ast


@given(st.integers(min_value=-2**40, max_value=2**40))
def test_wrap32_matches_ctypes(value):
    import ctypes

    assert wrap32(value) == ctypes.c_int32(value).value


@given(st.integers(-2**31, 2**31 - 1), st.integers(-2**31, 2**31 - 1))
def test_literal_expression_round_trip(x, y):
    src = f"int foo(int[] a, int[] b, int[] c) {{ return {x} + {y}; }}"
    ast = parse(src)
    assert parse(to_source(ast)) == ast
