"""Static checks for MiniLang: types, scoping, and definite return.

Scoping is block-structured with no shadowing of names visible in an
enclosing scope; sibling blocks may reuse a name.
"""
from __future__ import annotations

from .astdefs import (
    Assign, Binary, BinarySearchCall, BoolLit, CloneCall, For, FunctionDef,
    If, Index, IndexAssign, IntLit, Len, ProgramAst, Return, SortCall,
    SortStmt, Throw, Unary, Var, VarDecl, While, Ty,
)
from .errors import MiniTypeError, MissingReturn

_ARITH = {"+", "-", "*", "/", "%"}
_COMPARE = {"<", "<=", ">", ">=", "==", "!="}
_LOGIC = {"&&", "||"}


class _Scope:
    def __init__(self):
        self.frames: list[dict[str, Ty]] = [{}]

    def push(self):
        self.frames.append({})

    def pop(self):
        self.frames.pop()

    def declare(self, name: str, ty: Ty, pos):
        for frame in self.frames:
            if name in frame:
                raise MiniTypeError(f"variable {name!r} is already declared",
                                    pos.line, pos.col)
        self.frames[-1][name] = ty

    def lookup(self, name: str, pos) -> Ty:
        for frame in reversed(self.frames):
            if name in frame:
                return frame[name]
        raise MiniTypeError(f"variable {name!r} is not declared", pos.line, pos.col)


def typecheck(program: ProgramAst) -> None:
    """Check every function; raises MiniTypeError or MissingReturn."""
    for func in program.functions.values():
        _check_function(func)


def _check_function(func: FunctionDef) -> None:
    scope = _Scope()
    for p in func.params:
        scope.declare(p.name, p.ty, func.pos)
    _check_block(func.body, scope, func)
    if not _terminates(func.body):
        raise MissingReturn(
            f"{func.name!r}: not every path ends in 'return' or 'throw'",
            func.pos.line, func.pos.col)


def _check_block(stmts, scope: _Scope, func: FunctionDef) -> None:
    for s in stmts:
        _check_stmt(s, scope, func)


def _check_stmt(s, scope: _Scope, func: FunctionDef) -> None:
    if isinstance(s, VarDecl):
        init_ty = _expr_ty(s.init, scope)
        if init_ty is not s.ty:
            raise MiniTypeError(f"cannot initialize {s.ty} {s.name!r} from {init_ty}",
                                s.pos.line, s.pos.col, expected=s.ty, found=init_ty)
        scope.declare(s.name, s.ty, s.pos)
        return
    if isinstance(s, Assign):
        var_ty = scope.lookup(s.name, s.pos)
        val_ty = _expr_ty(s.value, scope)
        if val_ty is not var_ty:
            raise MiniTypeError(f"cannot assign {val_ty} to {var_ty} {s.name!r}",
                                s.pos.line, s.pos.col, expected=var_ty, found=val_ty)
        return
    if isinstance(s, IndexAssign):
        _require_array(s.array, scope, s.pos)
        _require(s.index, Ty.INT, scope, "array index")
        _require(s.value, Ty.INT, scope, "array element")
        return
    if isinstance(s, While):
        _require(s.cond, Ty.BOOL, scope, "loop condition")
        scope.push()
        _check_block(s.body, scope, func)
        scope.pop()
        return
    if isinstance(s, For):
        scope.push()
        _check_stmt(s.init, scope, func)
        _require(s.cond, Ty.BOOL, scope, "loop condition")
        _check_stmt(s.update, scope, func)
        _check_block(s.body, scope, func)
        scope.pop()
        return
    if isinstance(s, If):
        _require(s.cond, Ty.BOOL, scope, "condition")
        scope.push()
        _check_block(s.then_body, scope, func)
        scope.pop()
        if s.else_body is not None:
            scope.push()
            _check_block(s.else_body, scope, func)
            scope.pop()
        return
    if isinstance(s, SortStmt):
        _require_array(s.array, scope, s.pos)
        return
    if isinstance(s, Throw):
        return
    if isinstance(s, Return):
        val_ty = _expr_ty(s.value, scope)
        if val_ty is not func.return_type:
            raise MiniTypeError(
                f"{func.name!r} must return {func.return_type}, found {val_ty}",
                s.pos.line, s.pos.col, expected=func.return_type, found=val_ty)
        return
    raise TypeError(f"unknown statement: {s!r}")


def _require(expr, ty: Ty, scope: _Scope, what: str) -> None:
    found = _expr_ty(expr, scope)
    if found is not ty:
        pos = expr.pos
        raise MiniTypeError(f"{what} must be {ty}, found {found}",
                            pos.line, pos.col, expected=ty, found=found)


def _require_array(name: str, scope: _Scope, pos) -> None:
    ty = scope.lookup(name, pos)
    if ty is not Ty.INT_ARRAY:
        raise MiniTypeError(f"{name!r} must be {Ty.INT_ARRAY}, found {ty}",
                            pos.line, pos.col, expected=Ty.INT_ARRAY, found=ty)


def _expr_ty(e, scope: _Scope) -> Ty:
    if isinstance(e, IntLit):
        return Ty.INT
    if isinstance(e, BoolLit):
        return Ty.BOOL
    if isinstance(e, Var):
        return scope.lookup(e.name, e.pos)
    if isinstance(e, Index):
        _require_array(e.array, scope, e.pos)
        _require(e.index, Ty.INT, scope, "array index")
        return Ty.INT
    if isinstance(e, Len):
        _require_array(e.array, scope, e.pos)
        return Ty.INT
    if isinstance(e, Unary):
        if e.op == "-":
            _require(e.operand, Ty.INT, scope, "operand of unary '-'")
            return Ty.INT
        _require(e.operand, Ty.BOOL, scope, "operand of '!'")
        return Ty.BOOL
    if isinstance(e, Binary):
        if e.op in _ARITH:
            _require(e.left, Ty.INT, scope, f"operand of {e.op!r}")
            _require(e.right, Ty.INT, scope, f"operand of {e.op!r}")
            return Ty.INT
        if e.op in _COMPARE:
            _require(e.left, Ty.INT, scope, f"operand of {e.op!r}")
            _require(e.right, Ty.INT, scope, f"operand of {e.op!r}")
            return Ty.BOOL
        if e.op in _LOGIC:
            _require(e.left, Ty.BOOL, scope, f"operand of {e.op!r}")
            _require(e.right, Ty.BOOL, scope, f"operand of {e.op!r}")
            return Ty.BOOL
        raise TypeError(f"unknown operator: {e.op!r}")
    if isinstance(e, SortCall):
        _require_array(e.array, scope, e.pos)
        return Ty.INT_ARRAY
    if isinstance(e, CloneCall):
        _require_array(e.array, scope, e.pos)
        return Ty.INT_ARRAY
    if isinstance(e, BinarySearchCall):
        _require_array(e.array, scope, e.pos)
        _require(e.key, Ty.INT, scope, "search key")
        return Ty.INT
    raise TypeError(f"unknown expression: {e!r}")


def _terminates(stmts) -> bool:
    """True if every path through the statement sequence returns or throws."""
    return any(_stmt_terminates(s) for s in stmts)


def _stmt_terminates(s) -> bool:
    if isinstance(s, (Return, Throw)):
        return True
    if isinstance(s, If):
        return (s.else_body is not None
                and _terminates(s.then_body) and _terminates(s.else_body))
    # A constant-true loop can only be left by return/throw (no break exists),
    # so control never falls past it.
    if isinstance(s, While):
        return isinstance(s.cond, BoolLit) and s.cond.value
    if isinstance(s, For):
        return isinstance(s.cond, BoolLit) and s.cond.value
    return False
