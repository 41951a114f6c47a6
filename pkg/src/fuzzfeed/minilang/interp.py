"""Deterministic MiniLang interpreter.

Each function body is compiled once into a tree of Python closures and cached
on the ProgramAst; running a function is then a plain closure call, which
keeps fuzzing throughput high. Semantics:

  - all integer arithmetic is 32-bit two's-complement with wrap-around;
    division truncates toward zero; division/modulo by zero is a Failure
  - array reads/writes outside [0, len) are a Failure
  - 'throw;' is a Failure
  - every execution is bounded by a step limit (one step per executed
    statement and per loop-condition check), so all evaluations are total

Execution never mutates caller-provided inputs: arrays are copied on entry.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union

from .astdefs import (
    Assign, Binary, BinarySearchCall, BoolLit, CloneCall, For, FunctionDef,
    If, Index, IndexAssign, IntLit, Len, ProgramAst, Return, SortCall,
    SortStmt, Throw, Unary, Var, VarDecl, While, FOO, PRECONDITION,
)
from .errors import MissingPrecondition

DEFAULT_STEP_LIMIT = 1_000_000

INT_MIN = -0x80000000
INT_MAX = 0x7FFFFFFF


class FailureKind(str, Enum):
    EXPLICIT_THROW = "explicit-throw"
    INDEX_OUT_OF_BOUNDS = "index-out-of-bounds"
    DIVISION_BY_ZERO = "division-by-zero"


@dataclass(frozen=True)
class Success:
    value: int


@dataclass(frozen=True)
class Failure:
    kind: FailureKind


@dataclass(frozen=True)
class StepLimitExceeded:
    steps_used: int


ExecOutcome = Union[Success, Failure, StepLimitExceeded]

SUCCESS_ZERO = Success(0)
SUCCESS_TRUE = Success(1)
SUCCESS_FALSE = Success(0)
FAIL_THROW = Failure(FailureKind.EXPLICIT_THROW)
FAIL_BOUNDS = Failure(FailureKind.INDEX_OUT_OF_BOUNDS)
FAIL_DIV_ZERO = Failure(FailureKind.DIVISION_BY_ZERO)


def is_success(outcome: ExecOutcome) -> bool:
    return type(outcome) is Success


# Control-flow signals inside compiled code. Only _ReturnSignal carries data.

class _ReturnSignal(Exception):
    __slots__ = ()


class _ThrowSignal(Exception):
    pass


class _BoundsSignal(Exception):
    pass


class _DivZeroSignal(Exception):
    pass


class _StepsExhausted(Exception):
    pass


# Frame layout: f[0] = remaining steps, f[1] = return value slot,
# f[2:] = parameters then locals.
_STEPS = 0
_RET = 1
_FIRST_SLOT = 2


class _SlotTable:
    def __init__(self):
        self.scopes = [{}]
        self.count = _FIRST_SLOT

    def push(self):
        self.scopes.append({})

    def pop(self):
        self.scopes.pop()

    def declare(self, name: str) -> int:
        slot = self.count
        self.count += 1
        self.scopes[-1][name] = slot
        return slot

    def lookup(self, name: str) -> int:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        raise KeyError(name)


def _compile_expr(e, slots: _SlotTable):
    if isinstance(e, IntLit):
        v = e.value
        return lambda f: v
    if isinstance(e, BoolLit):
        v = e.value
        return lambda f: v
    if isinstance(e, Var):
        i = slots.lookup(e.name)
        return lambda f: f[i]
    if isinstance(e, Index):
        i = slots.lookup(e.array)
        idx = _compile_expr(e.index, slots)

        def read(f):
            arr = f[i]
            j = idx(f)
            if j < 0 or j >= len(arr):
                raise _BoundsSignal
            return arr[j]
        return read
    if isinstance(e, Len):
        i = slots.lookup(e.array)
        return lambda f: len(f[i])
    if isinstance(e, Unary):
        sub = _compile_expr(e.operand, slots)
        if e.op == "-":
            def neg(f):
                v = -sub(f)
                return INT_MIN if v == 0x80000000 else v
            return neg
        return lambda f: not sub(f)
    if isinstance(e, Binary):
        return _compile_binary(e, slots)
    if isinstance(e, SortCall):
        i = slots.lookup(e.array)

        def sort_expr(f):
            arr = f[i]
            arr.sort()
            return arr
        return sort_expr
    if isinstance(e, CloneCall):
        i = slots.lookup(e.array)
        return lambda f: list(f[i])
    if isinstance(e, BinarySearchCall):
        i = slots.lookup(e.array)
        key = _compile_expr(e.key, slots)

        def bsearch(f):
            arr = f[i]
            v = key(f)
            lo, hi = 0, len(arr) - 1
            while lo <= hi:
                mid = (lo + hi) >> 1
                mv = arr[mid]
                if mv < v:
                    lo = mid + 1
                elif mv > v:
                    hi = mid - 1
                else:
                    return mid
            return -lo - 1
        return bsearch
    raise TypeError(f"unknown expression: {e!r}")


def _compile_binary(e: Binary, slots: _SlotTable):
    lf = _compile_expr(e.left, slots)
    rf = _compile_expr(e.right, slots)
    op = e.op
    if op == "+":
        def add(f):
            v = lf(f) + rf(f)
            if v > INT_MAX:
                return v - 0x100000000
            if v < INT_MIN:
                return v + 0x100000000
            return v
        return add
    if op == "-":
        def sub(f):
            v = lf(f) - rf(f)
            if v > INT_MAX:
                return v - 0x100000000
            if v < INT_MIN:
                return v + 0x100000000
            return v
        return sub
    if op == "*":
        def mul(f):
            v = (lf(f) * rf(f)) & 0xFFFFFFFF
            return v - 0x100000000 if v >= 0x80000000 else v
        return mul
    if op == "/":
        def div(f):
            l, r = lf(f), rf(f)
            if r == 0:
                raise _DivZeroSignal
            q = -(-l // r) if (l < 0) != (r < 0) else l // r
            return INT_MIN if q == 0x80000000 else q
        return div
    if op == "%":
        def mod(f):
            l, r = lf(f), rf(f)
            if r == 0:
                raise _DivZeroSignal
            q = -(-l // r) if (l < 0) != (r < 0) else l // r
            return l - q * r
        return mod
    if op == "<":
        return lambda f: lf(f) < rf(f)
    if op == "<=":
        return lambda f: lf(f) <= rf(f)
    if op == ">":
        return lambda f: lf(f) > rf(f)
    if op == ">=":
        return lambda f: lf(f) >= rf(f)
    if op == "==":
        return lambda f: lf(f) == rf(f)
    if op == "!=":
        return lambda f: lf(f) != rf(f)
    if op == "&&":
        return lambda f: lf(f) and rf(f)
    if op == "||":
        return lambda f: lf(f) or rf(f)
    raise TypeError(f"unknown operator: {op!r}")


def _compile_stmt(s, slots: _SlotTable):
    if isinstance(s, VarDecl):
        init = _compile_expr(s.init, slots)
        i = slots.declare(s.name)

        def decl(f):
            f[_STEPS] -= 1
            if f[_STEPS] < 0:
                raise _StepsExhausted
            f[i] = init(f)
        return decl
    if isinstance(s, Assign):
        value = _compile_expr(s.value, slots)
        i = slots.lookup(s.name)

        def assign(f):
            f[_STEPS] -= 1
            if f[_STEPS] < 0:
                raise _StepsExhausted
            f[i] = value(f)
        return assign
    if isinstance(s, IndexAssign):
        i = slots.lookup(s.array)
        idx = _compile_expr(s.index, slots)
        value = _compile_expr(s.value, slots)

        def store(f):
            f[_STEPS] -= 1
            if f[_STEPS] < 0:
                raise _StepsExhausted
            arr = f[i]
            j = idx(f)
            if j < 0 or j >= len(arr):
                raise _BoundsSignal
            arr[j] = value(f)
        return store
    if isinstance(s, While):
        cond = _compile_expr(s.cond, slots)
        slots.push()
        body = tuple(_compile_stmt(inner, slots) for inner in s.body)
        slots.pop()

        def loop(f):
            while True:
                f[_STEPS] -= 1
                if f[_STEPS] < 0:
                    raise _StepsExhausted
                if not cond(f):
                    return
                for st in body:
                    st(f)
        return loop
    if isinstance(s, For):
        slots.push()
        init = _compile_stmt(s.init, slots)
        cond = _compile_expr(s.cond, slots)
        update = _compile_stmt(s.update, slots)
        body = tuple(_compile_stmt(inner, slots) for inner in s.body)
        slots.pop()

        def for_loop(f):
            init(f)
            while True:
                f[_STEPS] -= 1
                if f[_STEPS] < 0:
                    raise _StepsExhausted
                if not cond(f):
                    return
                for st in body:
                    st(f)
                update(f)
        return for_loop
    if isinstance(s, If):
        cond = _compile_expr(s.cond, slots)
        slots.push()
        then_body = tuple(_compile_stmt(inner, slots) for inner in s.then_body)
        slots.pop()
        if s.else_body is None:
            def if_only(f):
                f[_STEPS] -= 1
                if f[_STEPS] < 0:
                    raise _StepsExhausted
                if cond(f):
                    for st in then_body:
                        st(f)
            return if_only
        slots.push()
        else_body = tuple(_compile_stmt(inner, slots) for inner in s.else_body)
        slots.pop()

        def if_else(f):
            f[_STEPS] -= 1
            if f[_STEPS] < 0:
                raise _StepsExhausted
            if cond(f):
                for st in then_body:
                    st(f)
            else:
                for st in else_body:
                    st(f)
        return if_else
    if isinstance(s, SortStmt):
        i = slots.lookup(s.array)

        def sort_stmt(f):
            f[_STEPS] -= 1
            if f[_STEPS] < 0:
                raise _StepsExhausted
            f[i].sort()
        return sort_stmt
    if isinstance(s, Throw):
        def throw(f):
            f[_STEPS] -= 1
            if f[_STEPS] < 0:
                raise _StepsExhausted
            raise _ThrowSignal
        return throw
    if isinstance(s, Return):
        value = _compile_expr(s.value, slots)

        def ret(f):
            f[_STEPS] -= 1
            if f[_STEPS] < 0:
                raise _StepsExhausted
            f[_RET] = value(f)
            raise _ReturnSignal
        return ret
    raise TypeError(f"unknown statement: {s!r}")


class _CompiledFunction:
    __slots__ = ("name", "body", "n_slots")

    def __init__(self, func: FunctionDef):
        slots = _SlotTable()
        for p in func.params:
            slots.declare(p.name)
        self.name = func.name
        self.body = tuple(_compile_stmt(s, slots) for s in func.body)
        self.n_slots = slots.count

    def call(self, a, b, c, step_limit: int) -> ExecOutcome:
        f = [0] * self.n_slots
        f[_STEPS] = step_limit
        f[_FIRST_SLOT] = list(a)
        f[_FIRST_SLOT + 1] = list(b)
        f[_FIRST_SLOT + 2] = list(c)
        try:
            for st in self.body:
                st(f)
        except _ReturnSignal:
            v = f[_RET]
            if v == 0:
                return SUCCESS_ZERO
            if v is True:
                return SUCCESS_TRUE
            return Success(v)
        except _ThrowSignal:
            return FAIL_THROW
        except _BoundsSignal:
            return FAIL_BOUNDS
        except _DivZeroSignal:
            return FAIL_DIV_ZERO
        except _StepsExhausted:
            return StepLimitExceeded(step_limit)
        # Unreachable after typecheck (definite-return analysis).
        raise AssertionError(f"{self.name} fell off the end of its body")


def _compiled(program: ProgramAst) -> dict:
    cache = program._compiled
    if cache is None:
        cache = {name: _CompiledFunction(f) for name, f in program.functions.items()}
        program._compiled = cache
    return cache


def run_function(program: ProgramAst, name: str, fuzz_input,
                 step_limit: int = DEFAULT_STEP_LIMIT) -> ExecOutcome:
    """Run one function on a FuzzInput-like (a, b, c) triple."""
    fn = _compiled(program)[name]
    return fn.call(fuzz_input.a, fuzz_input.b, fuzz_input.c, step_limit)


def run_foo(program: ProgramAst, fuzz_input,
            step_limit: int = DEFAULT_STEP_LIMIT) -> ExecOutcome:
    """Run 'foo'; Success(0) is the success convention."""
    return run_function(program, FOO, fuzz_input, step_limit)


# Diagnostics attached to precondition evaluations that did not run to a
# boolean. Such evaluations count as 'false'.
DIAG_OUT_OF_BOUNDS = "OutOfBoundsInPrecondition"
DIAG_DIVISION_BY_ZERO = "DivisionByZeroInPrecondition"
DIAG_THROW = "ThrowInPrecondition"
DIAG_STEP_LIMIT = "StepLimitInPrecondition"

_PRECOND_DIAG = {
    FailureKind.INDEX_OUT_OF_BOUNDS: DIAG_OUT_OF_BOUNDS,
    FailureKind.DIVISION_BY_ZERO: DIAG_DIVISION_BY_ZERO,
    FailureKind.EXPLICIT_THROW: DIAG_THROW,
}


@dataclass(frozen=True)
class PrecondResult:
    value: bool
    diagnostic: str | None = None


def run_precondition(program: ProgramAst, fuzz_input,
                     step_limit: int = DEFAULT_STEP_LIMIT) -> PrecondResult:
    """Evaluate 'precondition'; faulting evaluations are false + diagnostic."""
    if not program.has_precondition():
        raise MissingPrecondition("program has no 'precondition' function")
    outcome = run_function(program, PRECONDITION, fuzz_input, step_limit)
    t = type(outcome)
    if t is Success:
        return PrecondResult(bool(outcome.value))
    if t is Failure:
        return PrecondResult(False, _PRECOND_DIAG[outcome.kind])
    return PrecondResult(False, DIAG_STEP_LIMIT)


def eval_precondition(program: ProgramAst, fuzz_input,
                      step_limit: int = DEFAULT_STEP_LIMIT) -> bool:
    return run_precondition(program, fuzz_input, step_limit).value
