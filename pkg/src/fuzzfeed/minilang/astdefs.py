"""AST node definitions and the source printer for MiniLang.

Node equality is structural and ignores source positions, so two parses of
the same program modulo comments/whitespace compare equal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union


class Ty(str, Enum):
    INT = "int"
    BOOL = "bool"
    INT_ARRAY = "int[]"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self):
        return f"{self.line}:{self.col}"


NO_POS = Pos(0, 0)


def _pos_field():
    return field(default=NO_POS, compare=False, repr=False)


# --- expressions ---

@dataclass(frozen=True)
class IntLit:
    value: int
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Index:
    array: str
    index: "Expr"
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Len:
    array: str
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Unary:
    op: str  # "-" or "!"
    operand: "Expr"
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Binary:
    op: str  # + - * / % < <= > >= == != && ||
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class SortCall:
    array: str
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class CloneCall:
    array: str
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class BinarySearchCall:
    array: str
    key: "Expr"
    pos: Pos = _pos_field()


Expr = Union[
    IntLit, BoolLit, Var, Index, Len, Unary, Binary,
    SortCall, CloneCall, BinarySearchCall,
]


# --- statements ---

@dataclass(frozen=True)
class VarDecl:
    ty: Ty
    name: str
    init: Expr
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Assign:
    name: str
    value: Expr
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class IndexAssign:
    array: str
    index: Expr
    value: Expr
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class While:
    cond: Expr
    body: tuple["Stmt", ...]
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class For:
    init: Union[VarDecl, Assign]
    cond: Expr
    update: Assign
    body: tuple["Stmt", ...]
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class If:
    cond: Expr
    then_body: tuple["Stmt", ...]
    else_body: Optional[tuple["Stmt", ...]]
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class SortStmt:
    array: str
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Throw:
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Return:
    value: Expr
    pos: Pos = _pos_field()


Stmt = Union[
    VarDecl, Assign, IndexAssign, While, For, If, SortStmt, Throw, Return,
]


# --- functions and programs ---

@dataclass(frozen=True)
class Param:
    name: str
    ty: Ty


@dataclass(frozen=True)
class FunctionDef:
    name: str
    params: tuple[Param, ...]
    return_type: Ty
    body: tuple[Stmt, ...]
    pos: Pos = _pos_field()


FOO = "foo"
PRECONDITION = "precondition"


@dataclass
class ProgramAst:
    """A parsed program: 'foo' plus an optional 'precondition'.

    Equality compares function structure only; the retained source text and
    any cached compiled form are incidental.
    """

    functions: dict[str, FunctionDef]
    source_text: str = field(default="", compare=False, repr=False)
    _compiled: object = field(default=None, init=False, compare=False, repr=False)

    @property
    def foo(self) -> FunctionDef:
        return self.functions[FOO]

    @property
    def precondition(self) -> Optional[FunctionDef]:
        return self.functions.get(PRECONDITION)

    def has_precondition(self) -> bool:
        return PRECONDITION in self.functions


# --- source printer ---

def to_source(node) -> str:
    """Render a node (program, function, statement, or expression) as MiniLang."""
    if isinstance(node, ProgramAst):
        return "\n\n".join(to_source(f) for f in node.functions.values()) + "\n"
    if isinstance(node, FunctionDef):
        params = ", ".join(f"{p.ty} {p.name}" for p in node.params)
        lines = [f"{node.return_type} {node.name}({params}) {{"]
        for s in node.body:
            lines.extend(_stmt_lines(s, 1))
        lines.append("}")
        return "\n".join(lines)
    if isinstance(node, (VarDecl, Assign, IndexAssign, While, For, If,
                         SortStmt, Throw, Return)):
        return "\n".join(_stmt_lines(node, 0))
    return _expr_src(node)


def _stmt_lines(s, depth) -> list[str]:
    ind = "    " * depth
    if isinstance(s, VarDecl):
        return [f"{ind}{s.ty} {s.name} = {_expr_src(s.init)};"]
    if isinstance(s, Assign):
        return [f"{ind}{s.name} = {_expr_src(s.value)};"]
    if isinstance(s, IndexAssign):
        return [f"{ind}{s.array}[{_expr_src(s.index)}] = {_expr_src(s.value)};"]
    if isinstance(s, While):
        lines = [f"{ind}while ({_expr_src(s.cond)}) {{"]
        for inner in s.body:
            lines.extend(_stmt_lines(inner, depth + 1))
        lines.append(ind + "}")
        return lines
    if isinstance(s, For):
        init = _stmt_lines(s.init, 0)[0].rstrip(";")
        update = _stmt_lines(s.update, 0)[0].rstrip(";")
        lines = [f"{ind}for ({init}; {_expr_src(s.cond)}; {update}) {{"]
        for inner in s.body:
            lines.extend(_stmt_lines(inner, depth + 1))
        lines.append(ind + "}")
        return lines
    if isinstance(s, If):
        lines = [f"{ind}if ({_expr_src(s.cond)}) {{"]
        for inner in s.then_body:
            lines.extend(_stmt_lines(inner, depth + 1))
        if s.else_body is None:
            lines.append(ind + "}")
        else:
            lines.append(ind + "} else {")
            for inner in s.else_body:
                lines.extend(_stmt_lines(inner, depth + 1))
            lines.append(ind + "}")
        return lines
    if isinstance(s, SortStmt):
        return [f"{ind}sort({s.array});"]
    if isinstance(s, Throw):
        return [f"{ind}throw;"]
    if isinstance(s, Return):
        return [f"{ind}return {_expr_src(s.value)};"]
    raise TypeError(f"not a statement: {s!r}")


def _expr_src(e) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Index):
        return f"{e.array}[{_expr_src(e.index)}]"
    if isinstance(e, Len):
        return f"len({e.array})"
    if isinstance(e, Unary):
        return f"{e.op}{_wrap(e.operand)}"
    if isinstance(e, Binary):
        return f"{_wrap(e.left)} {e.op} {_wrap(e.right)}"
    if isinstance(e, SortCall):
        return f"sort({e.array})"
    if isinstance(e, CloneCall):
        return f"clone({e.array})"
    if isinstance(e, BinarySearchCall):
        return f"binarySearch({e.array}, {_expr_src(e.key)})"
    raise TypeError(f"not an expression: {e!r}")


def _wrap(e) -> str:
    # Parenthesize compound children; cheap and always semantics-preserving.
    # A negative literal also needs parens so "-" applied to it does not
    # lex as "--".
    if isinstance(e, (Binary, Unary)) or (isinstance(e, IntLit) and e.value < 0):
        return f"({_expr_src(e)})"
    return _expr_src(e)
