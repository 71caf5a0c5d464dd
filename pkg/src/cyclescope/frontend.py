"""Lexing, parsing, pretty-printing and type checking of `.oo` programs."""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterator, Mapping

from .syntax import (
    ATOMIC, INT, NULL_TYPE, OUT, RHO, THIS,
    Assign, BinOp, Call, ClassDecl, Command, ExprStmt, Expression, FieldAssign,
    FieldRead, If, IntLit, MethodDecl, New, Null, Program, Read, Return, Seq,
    Var, While, atomic_commands,
)

KEYWORDS = {
    "class", "extends", "int", "null", "new", "if", "then", "else",
    "while", "do", "return", "read",
}
RESERVED_VARS = {THIS, OUT, RHO}
ARITH_OPS = {"+", "-", "*", "/", "%"}
ORDER_OPS = {"<", ">", "<=", ">="}
EQ_OPS = {"=", "!="}


class FrontendError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.line}:{self.col}: {self.message}"


# --------------------------------------------------------------------------
# lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<int>\d+)
  | (?P<id>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>:=|!=|<=|>=|[=<>+\-*/%(){};,.])
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "id", "kw", "op", "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FrontendError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        tok = m.group()
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "comment":
            line += tok.count("\n")
            if "\n" in tok:
                line_start = pos + tok.rindex("\n") + 1
        elif kind == "int":
            tokens.append(Token("int", tok, line, col))
        elif kind == "id":
            tokens.append(Token("kw" if tok in KEYWORDS else "id", tok, line, col))
        elif kind == "op":
            tokens.append(Token("op", tok, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# --------------------------------------------------------------------------
# parser

class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Token | None = None) -> FrontendError:
        tok = tok or self.tok
        where = "end of input" if tok.kind == "eof" else repr(tok.text)
        return FrontendError(f"{msg} (found {where})", tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "kw") and self.tok.text == text

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, text: str) -> Token:
        t = self.accept(text)
        if t is None:
            raise self.error(f"expected {text!r}")
        return t

    def ident(self) -> Token:
        t = self.tok
        if t.kind == "id":
            self.i += 1
            return t
        raise self.error("expected identifier")

    def type_name(self) -> Token:
        if self.at("int"):
            t = self.tok
            self.i += 1
            return t
        return self.ident()

    # declarations ---------------------------------------------------------

    def program(self) -> Program:
        classes = []
        while self.tok.kind != "eof":
            classes.append(self.class_decl())
        return Program(tuple(classes))

    def class_decl(self) -> ClassDecl:
        start = self.expect("class")
        name = self.ident().text
        sup = None
        if self.accept("extends"):
            sup = self.ident().text
        self.expect("{")
        fields: list[tuple[str, str]] = []
        methods: list[MethodDecl] = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("expected '}' to close class body")
            ty = self.type_name()
            mname = self.ident()
            if self.at("("):
                methods.append(self.method_rest(name, ty, mname))
            else:
                fields.append((ty.text, mname.text))
                while self.accept(","):
                    fields.append((ty.text, self.ident().text))
                self.expect(";")
        self.expect("}")
        return ClassDecl(name, sup, tuple(fields), tuple(methods), start.line, start.col)

    def method_rest(self, cls: str, ret: Token, name: Token) -> MethodDecl:
        self.expect("(")
        params: list[tuple[str, str]] = []
        if not self.at(")"):
            while True:
                pt = self.type_name().text
                params.append((pt, self.ident().text))
                if not self.accept(","):
                    break
        self.expect(")")
        self.expect("{")
        locals_: list[tuple[str, str]] = []
        while self._at_decl():
            ty = self.type_name().text
            locals_.append((ty, self.ident().text))
            while self.accept(","):
                locals_.append((ty, self.ident().text))
            self.expect(";")
        body = self.statements_until_close(name)
        return MethodDecl(cls, name.text, tuple(params), ret.text, tuple(locals_), body,
                          ret.line, ret.col)

    def _at_decl(self) -> bool:
        if self.at("int"):
            return True
        return self.tok.kind == "id" and self.peek().kind == "id"

    # statements -----------------------------------------------------------

    def statements_until_close(self, start: Token) -> Command:
        cmds = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("expected '}'")
            if self.accept(";"):
                continue
            cmds.append(self.statement())
        self.expect("}")
        return Seq(tuple(cmds), start.line, start.col)

    def block(self) -> Command:
        t = self.tok
        if self.accept("{"):
            return self.statements_until_close(t)
        return self.statement()

    def statement(self) -> Command:
        t = self.tok
        if self.accept("if"):
            cond = self.expression()
            self.accept("then")
            then = self.block()
            if self.accept("else"):
                orelse = self.block()
            else:
                orelse = Seq((), t.line, t.col)
            return If(cond, then, orelse, t.line, t.col)
        if self.accept("while"):
            cond = self.expression()
            self.accept("do")
            body = self.block()
            return While(cond, body, t.line, t.col)
        if self.accept("return"):
            exp = self.expression()
            self.expect(";")
            return Return(exp, t.line, t.col)
        if t.kind != "id":
            raise self.error("expected a statement")
        name = self.ident().text
        if self.accept(":="):
            exp = self.expression()
            self.expect(";")
            return Assign(name, exp, t.line, t.col)
        if self.at("("):
            call = self.call_rest(THIS, name, t)
            self.expect(";")
            return ExprStmt(call, t.line, t.col)
        self.expect(".")
        member = self.ident().text
        if self.at("("):
            call = self.call_rest(name, member, t)
            self.expect(";")
            return ExprStmt(call, t.line, t.col)
        if self.at("."):
            raise self.error("field access chains are not part of the language; use a temporary")
        self.expect(":=")
        exp = self.expression()
        self.expect(";")
        return FieldAssign(name, member, exp, t.line, t.col)

    def call_rest(self, receiver: str, method: str, t: Token) -> Call:
        self.expect("(")
        args: list[str] = []
        if not self.at(")"):
            while True:
                if self.tok.kind != "id":
                    raise self.error("call arguments must be variables")
                args.append(self.ident().text)
                if not self.at(",") and not self.at(")"):
                    raise self.error("call arguments must be variables")
                if not self.accept(","):
                    break
        self.expect(")")
        return Call(receiver, method, tuple(args), t.line, t.col)

    # expressions ----------------------------------------------------------

    def expression(self) -> Expression:
        return self._binary(0)

    _LEVELS = (EQ_OPS, ORDER_OPS, {"+", "-"}, {"*", "/", "%"})

    def _binary(self, level: int) -> Expression:
        if level == len(self._LEVELS):
            return self.unary()
        left = self._binary(level + 1)
        while self.tok.kind == "op" and self.tok.text in self._LEVELS[level]:
            op = self.tok
            self.i += 1
            right = self._binary(level + 1)
            left = BinOp(op.text, left, right, op.line, op.col)
        return left

    def unary(self) -> Expression:
        t = self.tok
        if self.accept("-"):
            operand = self.unary()
            if isinstance(operand, IntLit):
                return IntLit(-operand.value, t.line, t.col)
            return BinOp("-", IntLit(0, t.line, t.col), operand, t.line, t.col)
        return self.primary()

    def primary(self) -> Expression:
        t = self.tok
        if t.kind == "int":
            self.i += 1
            return IntLit(int(t.text), t.line, t.col)
        if self.accept("null"):
            return Null(t.line, t.col)
        if self.accept("new"):
            cls = self.ident().text
            if self.accept("("):
                self.expect(")")
            return New(cls, t.line, t.col)
        if self.accept("read"):
            self.expect("(")
            self.expect(")")
            return Read(t.line, t.col)
        if self.accept("("):
            e = self.expression()
            self.expect(")")
            return e
        if t.kind == "id":
            name = self.ident().text
            if self.at("("):
                return self.call_rest(THIS, name, t)
            if self.accept("."):
                member = self.ident().text
                if self.at("("):
                    return self.call_rest(name, member, t)
                if self.at("."):
                    raise self.error("field access chains are not part of the language; use a temporary")
                return FieldRead(name, member, t.line, t.col)
            return Var(name, t.line, t.col)
        raise self.error("expected an expression")


def parse_program(text: str) -> Program:
    """Parse source text into an untyped `Program`."""
    p = _Parser(text)
    prog = p.program()
    _check_duplicates(prog)
    return prog


def _check_duplicates(prog: Program) -> None:
    seen: dict[str, ClassDecl] = {}
    for c in prog.classes:
        if c.name in seen:
            raise FrontendError(f"duplicate class {c.name}", c.line, c.col)
        seen[c.name] = c
        names: set[str] = set()
        for _, f in c.fields:
            if f in names:
                raise FrontendError(f"duplicate field {c.name}.{f}", c.line, c.col)
            names.add(f)
        mnames: set[str] = set()
        for m in c.methods:
            if m.name in mnames:
                raise FrontendError(f"duplicate method {c.name}.{m.name}", m.line, m.col)
            mnames.add(m.name)


# --------------------------------------------------------------------------
# pretty printer

_PREC = {op: i for i, ops in enumerate(_Parser._LEVELS) for op in ops}


def format_expression(e: Expression, parent_prec: int = -1, right: bool = False) -> str:
    if isinstance(e, IntLit):
        return str(e.value) if e.value >= 0 else f"({e.value})"
    if isinstance(e, Null):
        return "null"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, FieldRead):
        return f"{e.var}.{e.field_name}"
    if isinstance(e, New):
        return f"new {e.cls}"
    if isinstance(e, Read):
        return "read()"
    if isinstance(e, Call):
        return f"{e.receiver}.{e.method}({', '.join(e.args)})"
    prec = _PREC[e.op]
    s = f"{format_expression(e.left, prec)} {e.op} {format_expression(e.right, prec, True)}"
    if prec < parent_prec or (right and prec == parent_prec):
        return f"({s})"
    return s


def _format_command(c: Command, indent: int) -> list[str]:
    pad = "  " * indent
    if isinstance(c, Seq):
        out: list[str] = []
        for sub in c.commands:
            out.extend(_format_command(sub, indent))
        return out
    if isinstance(c, Assign):
        return [f"{pad}{c.var} := {format_expression(c.exp)};"]
    if isinstance(c, FieldAssign):
        return [f"{pad}{c.var}.{c.field_name} := {format_expression(c.exp)};"]
    if isinstance(c, Return):
        return [f"{pad}return {format_expression(c.exp)};"]
    if isinstance(c, ExprStmt):
        return [f"{pad}{format_expression(c.exp)};"]
    if isinstance(c, If):
        lines = [f"{pad}if ({format_expression(c.cond)}) then {{"]
        lines += _format_command(c.then, indent + 1)
        lines.append(f"{pad}}} else {{")
        lines += _format_command(c.orelse, indent + 1)
        lines.append(f"{pad}}}")
        return lines
    if isinstance(c, While):
        lines = [f"{pad}while ({format_expression(c.cond)}) do {{"]
        lines += _format_command(c.body, indent + 1)
        lines.append(f"{pad}}}")
        return lines
    raise TypeError(c)


def format_program(prog: Program) -> str:
    lines: list[str] = []
    for c in prog.classes:
        ext = f" extends {c.superclass}" if c.superclass else ""
        lines.append(f"class {c.name}{ext} {{")
        for ty, name in c.fields:
            lines.append(f"  {ty} {name};")
        for m in c.methods:
            params = ", ".join(f"{t} {n}" for t, n in m.params)
            lines.append(f"  {m.ret_type} {m.name}({params}) {{")
            for ty, name in m.locals:
                lines.append(f"    {ty} {name};")
            lines += _format_command(m.body, 2)
            lines.append("  }")
        lines.append("}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# typed program

@dataclass(frozen=True)
class TypeEnvironment:
    bindings: Mapping[str, str]

    def __getitem__(self, var: str) -> str:
        return self.bindings[var]

    def __contains__(self, var: str) -> bool:
        return var in self.bindings

    def get(self, var: str, default=None):
        return self.bindings.get(var, default)

    def extend(self, extra: Mapping[str, str]) -> "TypeEnvironment":
        return TypeEnvironment({**self.bindings, **extra})

    def variables(self) -> tuple[str, ...]:
        return tuple(self.bindings)


@dataclass(frozen=True, eq=False)
class TypedProgram:
    program: Program
    superclass: Mapping[str, str | None]
    envs: Mapping[str, TypeEnvironment]  # keyed by method signature

    @cached_property
    def classes(self) -> dict[str, ClassDecl]:
        return {c.name: c for c in self.program.classes}

    @cached_property
    def methods(self) -> dict[str, MethodDecl]:
        return {m.signature: m for c in self.program.classes for m in c.methods}

    @cached_property
    def _ancestors(self) -> dict[str, tuple[str, ...]]:
        out = {}
        for name in self.classes:
            chain = []
            k: str | None = name
            while k is not None:
                chain.append(k)
                k = self.superclass[k]
            out[name] = tuple(chain)
        return out

    def ancestors(self, cls: str) -> tuple[str, ...]:
        """`cls` followed by its superclasses, closest first."""
        return self._ancestors[cls]

    def subclass_of(self, k1: str, k2: str) -> bool:
        if k1 not in self.classes:
            raise KeyError(k1)
        if k2 not in self.classes:
            raise KeyError(k2)
        return k2 in self._ancestors[k1]

    @cached_property
    def _subclasses(self) -> dict[str, frozenset[str]]:
        return {k: frozenset(s for s in self.classes if k in self._ancestors[s]) for k in self.classes}

    def subclasses(self, cls: str) -> frozenset[str]:
        """All classes k with k ≼ cls (including cls)."""
        return self._subclasses[cls]

    def fields(self, cls: str) -> dict[str, str]:
        """All fields of `cls`, inherited ones first, mapped to their types."""
        out: dict[str, str] = {}
        for k in reversed(self._ancestors[cls]):
            for ty, f in self.classes[k].fields:
                out[f] = ty
        return out

    def field_type(self, cls: str, f: str) -> str | None:
        return self.fields(cls).get(f)

    def ref_fields(self, cls: str) -> dict[str, str]:
        return {f: t for f, t in self.fields(cls).items() if t != INT}

    def lookup(self, cls: str, name: str) -> MethodDecl | None:
        """The method run when `name` is invoked on a `cls` instance."""
        for k in self._ancestors[cls]:
            for m in self.classes[k].methods:
                if m.name == name:
                    return m
        return None

    def dispatch_targets(self, static_cls: str, name: str) -> tuple[MethodDecl, ...]:
        """Every method body a call with receiver type `static_cls` may run."""
        seen: dict[str, MethodDecl] = {}
        for k in sorted(self.subclasses(static_cls)):
            m = self.lookup(k, name)
            if m is not None:
                seen.setdefault(m.signature, m)
        return tuple(seen[s] for s in sorted(seen))

    def env(self, sig: str) -> TypeEnvironment:
        return self.envs[sig]

    def resolve_method(self, name: str) -> MethodDecl:
        if name in self.methods:
            return self.methods[name]
        hits = [m for m in self.methods.values() if m.name == name]
        if len(hits) == 1:
            return hits[0]
        if not hits:
            raise KeyError(f"no method named {name}")
        raise KeyError(f"method name {name} is ambiguous: {', '.join(sorted(m.signature for m in hits))}")

    def is_ref(self, ty: str) -> bool:
        return ty != INT

    def assignable(self, src: str, dst: str) -> bool:
        if src == INT or dst == INT:
            return src == dst
        if src == NULL_TYPE:
            return True
        return self.subclass_of(src, dst)


# --------------------------------------------------------------------------
# type checker

class _Checker:
    def __init__(self, prog: Program):
        self.prog = prog
        self.classes = {c.name: c for c in prog.classes}

    def run(self) -> TypedProgram:
        sup = {}
        for c in self.prog.classes:
            if c.superclass is not None and c.superclass not in self.classes:
                raise FrontendError(f"unknown class {c.superclass}", c.line, c.col)
            sup[c.name] = c.superclass
        for c in self.prog.classes:
            seen = set()
            k: str | None = c.name
            while k is not None:
                if k in seen:
                    raise FrontendError(f"cyclic inheritance involving {c.name}", c.line, c.col)
                seen.add(k)
                k = sup[k]
        skeleton = TypedProgram(self.prog, sup, {})
        self.tp = skeleton
        for c in self.prog.classes:
            inherited: dict[str, str] = {}
            for k in skeleton.ancestors(c.name)[1:]:
                for _, f in self.classes[k].fields:
                    inherited[f] = k
            for ty, f in c.fields:
                self.check_type_name(ty, c.line, c.col)
                if f in inherited:
                    raise FrontendError(f"field {c.name}.{f} redeclares a field of {inherited[f]}", c.line, c.col)
        envs: dict[str, TypeEnvironment] = {}
        classes = []
        for c in self.prog.classes:
            methods = []
            for m in c.methods:
                self.check_override(m)
                env = self.method_env(m)
                envs[m.signature] = env
                body = self.command(m.body, env, m)
                methods.append(replace(m, body=body))
            classes.append(replace(c, methods=tuple(methods)))
        typed = replace(self.prog, classes=tuple(classes))
        return TypedProgram(typed, sup, envs)

    def check_type_name(self, ty: str, line: int, col: int) -> None:
        if ty != INT and ty not in self.classes:
            raise FrontendError(f"unknown class {ty}", line, col)

    def check_override(self, m: MethodDecl) -> None:
        for k in self.tp.ancestors(m.cls)[1:]:
            for other in self.classes[k].methods:
                if other.name == m.name:
                    if other.param_types != m.param_types or other.ret_type != m.ret_type:
                        raise FrontendError(
                            f"method {m.signature} overrides {other.signature} with a different signature",
                            m.line, m.col)
                    return

    def method_env(self, m: MethodDecl) -> TypeEnvironment:
        self.check_type_name(m.ret_type, m.line, m.col)
        b: dict[str, str] = {THIS: m.cls}
        for ty, name in m.params + m.locals:
            self.check_type_name(ty, m.line, m.col)
            if name in RESERVED_VARS:
                raise FrontendError(f"{name} is a reserved name", m.line, m.col)
            if name in b:
                raise FrontendError(f"duplicate variable {name} in {m.signature}", m.line, m.col)
            b[name] = ty
        b[OUT] = m.ret_type
        return TypeEnvironment(b)

    # expressions ----------------------------------------------------------

    def var_type(self, name: str, env: TypeEnvironment, node) -> str:
        if name == OUT or name not in env:
            raise FrontendError(f"unknown variable {name}", node.line, node.col)
        return env[name]

    def ref_var(self, name: str, env: TypeEnvironment, node) -> str:
        ty = self.var_type(name, env, node)
        if ty == INT:
            raise FrontendError(f"variable {name} has type int, not a class", node.line, node.col)
        return ty

    def exp(self, e: Expression, env: TypeEnvironment, in_cond: bool = False) -> Expression:
        if isinstance(e, IntLit):
            return replace(e, ty=INT)
        if isinstance(e, Null):
            return replace(e, ty=NULL_TYPE)
        if isinstance(e, Read):
            if in_cond:
                raise FrontendError("read() is not allowed in a condition", e.line, e.col)
            return replace(e, ty=INT)
        if isinstance(e, Var):
            return replace(e, ty=self.var_type(e.name, env, e))
        if isinstance(e, FieldRead):
            cls = self.ref_var(e.var, env, e)
            ft = self.tp.field_type(cls, e.field_name)
            if ft is None:
                raise FrontendError(f"class {cls} has no field {e.field_name}", e.line, e.col)
            return replace(e, ty=ft)
        if isinstance(e, New):
            if in_cond:
                raise FrontendError("object creation is not allowed in a condition", e.line, e.col)
            if e.cls not in self.classes:
                raise FrontendError(f"unknown class {e.cls}", e.line, e.col)
            return replace(e, ty=e.cls)
        if isinstance(e, Call):
            if in_cond:
                raise FrontendError("method calls are not allowed in a condition", e.line, e.col)
            cls = self.ref_var(e.receiver, env, e)
            m = self.tp.lookup(cls, e.method)
            if m is None:
                raise FrontendError(f"class {cls} has no method {e.method}", e.line, e.col)
            if len(m.params) != len(e.args):
                raise FrontendError(
                    f"{m.signature} expects {len(m.params)} arguments, got {len(e.args)}", e.line, e.col)
            for (pt, _), a in zip(m.params, e.args):
                at = self.var_type(a, env, e)
                if not self.tp.assignable(at, pt):
                    raise FrontendError(f"argument {a} of type {at} does not match {pt}", e.line, e.col)
            return replace(e, ty=m.ret_type)
        if isinstance(e, BinOp):
            left = self.exp(e.left, env, in_cond)
            right = self.exp(e.right, env, in_cond)
            lt, rt = left.ty, right.ty
            if e.op in EQ_OPS and (lt != INT or rt != INT):
                if lt == INT or rt == INT:
                    raise FrontendError(f"cannot compare {lt} with {rt}", e.line, e.col)
                if not in_cond:
                    raise FrontendError("reference comparison is only allowed in conditions", e.line, e.col)
            elif lt != INT or rt != INT:
                raise FrontendError(f"operator {e.op} needs int operands", e.line, e.col)
            return replace(e, left=left, right=right, ty=INT)
        raise TypeError(e)

    # commands -------------------------------------------------------------

    def command(self, c: Command, env: TypeEnvironment, m: MethodDecl) -> Command:
        if isinstance(c, Seq):
            return replace(c, commands=tuple(self.command(s, env, m) for s in c.commands))
        if isinstance(c, Assign):
            if c.var == THIS:
                raise FrontendError("cannot assign to this", c.line, c.col)
            vt = self.var_type(c.var, env, c)
            e = self.exp(c.exp, env)
            if not self.tp.assignable(e.ty, vt):
                raise FrontendError(f"cannot assign {e.ty} to {c.var} of type {vt}", c.line, c.col)
            return replace(c, exp=e)
        if isinstance(c, FieldAssign):
            cls = self.ref_var(c.var, env, c)
            ft = self.tp.field_type(cls, c.field_name)
            if ft is None:
                raise FrontendError(f"class {cls} has no field {c.field_name}", c.line, c.col)
            e = self.exp(c.exp, env)
            if not self.tp.assignable(e.ty, ft):
                raise FrontendError(
                    f"cannot assign {e.ty} to field {c.field_name} of type {ft}", c.line, c.col)
            return replace(c, exp=e)
        if isinstance(c, Return):
            e = self.exp(c.exp, env)
            if not self.tp.assignable(e.ty, m.ret_type):
                raise FrontendError(f"cannot return {e.ty} from {m.signature}", c.line, c.col)
            return replace(c, exp=e)
        if isinstance(c, ExprStmt):
            if not isinstance(c.exp, Call):
                raise FrontendError("only calls can be used as statements", c.line, c.col)
            return replace(c, exp=self.exp(c.exp, env))
        if isinstance(c, If):
            cond = self.exp(c.cond, env, in_cond=True)
            if cond.ty != INT:
                raise FrontendError("condition must be an int expression", c.line, c.col)
            return replace(c, cond=cond, then=self.command(c.then, env, m),
                           orelse=self.command(c.orelse, env, m))
        if isinstance(c, While):
            cond = self.exp(c.cond, env, in_cond=True)
            if cond.ty != INT:
                raise FrontendError("condition must be an int expression", c.line, c.col)
            return replace(c, cond=cond, body=self.command(c.body, env, m))
        raise TypeError(c)


def typecheck(prog: Program) -> TypedProgram:
    """Resolve names and types; raises `FrontendError` on the first problem."""
    return _Checker(prog).run()


def load_program(text: str) -> TypedProgram:
    return typecheck(parse_program(text))


def program_points(tp: TypedProgram, sig: str) -> list[int]:
    """Source lines holding atomic commands of method `sig`, in order."""
    lines = []
    for c in atomic_commands(tp.methods[sig].body):
        if c.line not in lines:
            lines.append(c.line)
    return lines


def parse_expression_in(tp: TypedProgram, sig: str, text: str, in_cond: bool = False) -> Expression:
    """Parse and type `text` as an expression inside method `sig`."""
    p = _Parser(text)
    e = p.expression()
    if p.tok.kind != "eof":
        raise p.error("unexpected trailing input")
    checker = _Checker(tp.program)
    checker.tp = tp
    return checker.exp(e, tp.env(sig), in_cond)


def parse_command_in(tp: TypedProgram, sig: str, text: str) -> Command:
    """Parse and type a statement sequence inside method `sig`."""
    p = _Parser(text + " }")
    body = p.statements_until_close(p.tok)
    if p.tok.kind != "eof":
        raise p.error("unexpected trailing input")
    checker = _Checker(tp.program)
    checker.tp = tp
    m = tp.methods[sig]
    cmd = checker.command(body, tp.env(sig), m)
    return cmd.commands[0] if len(cmd.commands) == 1 else cmd


def iter_methods(tp: TypedProgram) -> Iterator[MethodDecl]:
    for c in tp.program.classes:
        yield from c.methods


__all__ = [
    "FrontendError", "TypeEnvironment", "TypedProgram", "format_expression",
    "format_program", "iter_methods", "load_program", "parse_program",
    "parse_command_in", "parse_expression_in", "program_points", "tokenize",
    "typecheck", "ATOMIC",
]
