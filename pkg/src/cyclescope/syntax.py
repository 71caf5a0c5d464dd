"""AST node types for the object-oriented toy language.

Positions and static types are excluded from equality so that two trees
parsed from differently formatted text compare equal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

INT = "int"
NULL_TYPE = "null"

THIS = "this"
OUT = "out"
RHO = "rho"


@dataclass(frozen=True)
class IntLit:
    value: int
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)
    ty: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Null:
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)
    ty: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)
    ty: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class FieldRead:
    var: str
    field_name: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)
    ty: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expression"
    right: "Expression"
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)
    ty: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class New:
    cls: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)
    ty: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Call:
    receiver: str
    method: str
    args: tuple[str, ...]
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)
    ty: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Read:
    """The `read()` input primitive used by the list driver."""

    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)
    ty: str | None = field(default=None, compare=False)


Expression = Union[IntLit, Null, Var, FieldRead, BinOp, New, Call, Read]


@dataclass(frozen=True)
class Assign:
    var: str
    exp: Expression
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class FieldAssign:
    var: str
    field_name: str
    exp: Expression
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Seq:
    commands: tuple["Command", ...]
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class If:
    cond: Expression
    then: "Command"
    orelse: "Command"
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class While:
    cond: Expression
    body: "Command"
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Return:
    exp: Expression
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ExprStmt:
    """A call evaluated for its side effects only."""

    exp: Expression
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


Command = Union[Assign, FieldAssign, Seq, If, While, Return, ExprStmt]
ATOMIC = (Assign, FieldAssign, Return, ExprStmt)


@dataclass(frozen=True)
class MethodDecl:
    cls: str
    name: str
    params: tuple[tuple[str, str], ...]  # (type, name)
    ret_type: str
    locals: tuple[tuple[str, str], ...]
    body: Command
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    @property
    def signature(self) -> str:
        return f"{self.cls}.{self.name}"

    @property
    def inputs(self) -> tuple[str, ...]:
        return (THIS,) + tuple(n for _, n in self.params)

    @property
    def param_types(self) -> tuple[str, ...]:
        return tuple(t for t, _ in self.params)


@dataclass(frozen=True)
class ClassDecl:
    name: str
    superclass: str | None
    fields: tuple[tuple[str, str], ...]  # (type, name), own fields only
    methods: tuple[MethodDecl, ...]
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Program:
    classes: tuple[ClassDecl, ...]
    entry: str | None = None

    def class_named(self, name: str) -> ClassDecl:
        for c in self.classes:
            if c.name == name:
                return c
        raise KeyError(name)


def sub_expressions(exp: Expression):
    """Yield `exp` and every expression nested in it."""
    yield exp
    if isinstance(exp, BinOp):
        yield from sub_expressions(exp.left)
        yield from sub_expressions(exp.right)


def atomic_commands(com: Command):
    """Yield atomic commands of `com` in source order."""
    if isinstance(com, Seq):
        for c in com.commands:
            yield from atomic_commands(c)
    elif isinstance(com, If):
        yield from atomic_commands(com.then)
        yield from atomic_commands(com.orelse)
    elif isinstance(com, While):
        yield from atomic_commands(com.body)
    else:
        yield com
