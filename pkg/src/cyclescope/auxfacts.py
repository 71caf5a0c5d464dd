"""Sharing, aliasing and purity facts consumed by the reachability rules.

The built-in analyses are deliberately simple:

* pair sharing and may-aliasing, flow-sensitive inside a method and
  context-insensitive across calls (every method starts from the
  assumption that all of its type-compatible inputs may share and alias);
* purity as a least fixpoint over the call graph: input `k` of a method is
  non-pure when a field update hits a variable that may share with the
  entry value of input `k`, or when a variable sharing with it is passed
  to a non-pure position of a callee.

Every method is analyzed with one extra "entry copy" per input, named
`#x` for input `x`, that is never assigned.  Facts about `#x` are what
makes the purity test possible, and the reachability analysis uses the
same names for its shallow variables.

An override file (see docs/facts.md) can replace the facts at chosen
lines and the purity of chosen methods.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .classgraph import ClassGraph
from .frontend import TypedProgram, iter_methods, program_points
from .syntax import (
    INT, OUT, RHO, THIS,
    Assign, BinOp, Call, Command, ExprStmt, Expression, FieldAssign, FieldRead,
    If, IntLit, MethodDecl, New, Null, Read, Return, Seq, Var, While, atomic_commands,
)


def shadow(v: str) -> str:
    return "#" + v


Pair = frozenset  # two distinct variable names


def _pair(v: str, w: str) -> frozenset[str]:
    return frozenset((v, w))


@dataclass(frozen=True)
class Facts:
    """May-share and may-alias pairs at one point.

    Both relations are reflexive by convention, so only pairs of distinct
    variables are stored.  Aliasing implies sharing.
    """

    share: frozenset[frozenset[str]] = frozenset()
    alias: frozenset[frozenset[str]] = frozenset()

    @staticmethod
    def of(share: Iterable[tuple[str, str]] = (), alias: Iterable[tuple[str, str]] = ()) -> "Facts":
        al = {_pair(a, b) for a, b in alias if a != b}
        sh = {_pair(a, b) for a, b in share if a != b} | al
        return Facts(frozenset(sh), frozenset(al))

    def sh(self, v: str, w: str) -> bool:
        return v == w or _pair(v, w) in self.share

    def al(self, v: str, w: str) -> bool:
        return v == w or _pair(v, w) in self.alias

    def sharers(self, v: str, candidates: Iterable[str]) -> list[str]:
        return [w for w in candidates if self.sh(v, w)]

    def join(self, other: "Facts") -> "Facts":
        return Facts(self.share | other.share, self.alias | other.alias)

    def drop(self, v: str) -> "Facts":
        return Facts(frozenset(p for p in self.share if v not in p),
                     frozenset(p for p in self.alias if v not in p))

    def rename(self, v: str, w: str) -> "Facts":
        """Rename `v` to `w`; `w` must not be mentioned already."""
        def m(p):
            return frozenset(w if x == v else x for x in p)
        return Facts(frozenset(m(p) for p in self.share), frozenset(m(p) for p in self.alias))

    def add(self, share: Iterable[frozenset[str]] = (), alias: Iterable[frozenset[str]] = ()) -> "Facts":
        al = frozenset(p for p in alias if len(p) == 2)
        sh = frozenset(p for p in share if len(p) == 2) | al
        if sh <= self.share and al <= self.alias:
            return self
        return Facts(self.share | sh, self.alias | al)

    def restrict(self, variables: Iterable[str]) -> "Facts":
        keep = frozenset(variables)
        return Facts(frozenset(p for p in self.share if p <= keep),
                     frozenset(p for p in self.alias if p <= keep))

    def lines(self) -> list[str]:
        out = [f"share {a} {b}" for a, b in sorted(tuple(sorted(p)) for p in self.share - self.alias)]
        out += [f"alias {a} {b}" for a, b in sorted(tuple(sorted(p)) for p in self.alias)]
        return out


EMPTY = Facts()


def node_key(node) -> tuple[int, int]:
    return (node.line, node.col)


# --------------------------------------------------------------------------
# transfer functions

class AuxTransfer:
    """Sharing/alias transfer for one program, parameterized by purity."""

    def __init__(self, tp: TypedProgram, graph: ClassGraph, nonpure: Mapping[str, frozenset[int]]):
        self.tp = tp
        self.graph = graph
        self.nonpure = nonpure
        self._envs: dict[str, dict[str, str]] = {}

    def env(self, m: MethodDecl) -> dict[str, str]:
        hit = self._envs.get(m.signature)
        if hit is None:
            base = dict(self.tp.env(m.signature).bindings)
            for v in m.inputs:
                base[shadow(v)] = base[v]
            hit = self._envs[m.signature] = base
        return hit

    def refs(self, env: Mapping[str, str]) -> list[str]:
        return [v for v, t in env.items() if t != INT]

    def can_share(self, t1: str, t2: str) -> bool:
        return self.graph.type_shares(t1, t2)

    def can_alias(self, t1: str, t2: str) -> bool:
        return self.graph.type_may_alias(t1, t2)

    def entry(self, m: MethodDecl) -> Facts:
        env = self.env(m)
        ins = [v for v in m.inputs if env[v] != INT]
        ins += [shadow(v) for v in ins]
        sh, al = [], []
        for a, b in itertools.combinations(ins, 2):
            if self.can_share(env[a], env[b]):
                sh.append(_pair(a, b))
            if self.can_alias(env[a], env[b]):
                al.append(_pair(a, b))
        return Facts().add(sh, al)

    def nonpure_of_call(self, e: Call, env: Mapping[str, str]) -> frozenset[int]:
        out: set[int] = set()
        for target in self.tp.dispatch_targets(env[e.receiver], e.method):
            out |= self.nonpure.get(target.signature, frozenset())
        return frozenset(out)

    # expressions: result facts mention RHO when the value is a reference

    def eval(self, e: Expression, s: Facts, env: Mapping[str, str]) -> Facts:
        s = s.drop(RHO)
        if isinstance(e, (IntLit, Null, New, Read)):
            return s
        if isinstance(e, Var):
            if env[e.name] == INT:
                return s
            return self.copy_into(s, e.name, env, env[e.name])
        if isinstance(e, FieldRead):
            ft = e.ty or self.tp.field_type(env[e.var], e.field_name)
            if ft == INT:
                return s
            sh, al = [], []
            for w in s.sharers(e.var, self.refs(env)):
                if self.can_share(ft, env[w]):
                    sh.append(_pair(RHO, w))
                if self.can_alias(ft, env[w]):
                    al.append(_pair(RHO, w))
            return s.add(sh, al)
        if isinstance(e, BinOp):
            s = self.eval(e.left, s, env).drop(RHO)
            return self.eval(e.right, s, env).drop(RHO)
        if isinstance(e, Call):
            return self.eval_call(e, s, env)
        raise TypeError(e)

    def copy_into(self, s: Facts, v: str, env: Mapping[str, str], ty: str) -> Facts:
        sh = [_pair(RHO, w) for w in s.sharers(v, self.refs(env)) if w != RHO]
        al = [_pair(RHO, w) for w in self.refs(env) if w != RHO and s.al(v, w)]
        return s.add(sh, al)

    def eval_call(self, e: Call, s: Facts, env: Mapping[str, str]) -> Facts:
        refs = self.refs(env)
        actuals = [e.receiver] + list(e.args)
        ref_actuals = [a for a in actuals if env[a] != INT]
        touched = sorted({w for a in ref_actuals for w in s.sharers(a, refs)})
        nonpure = self.nonpure_of_call(e, env)
        if any(i < len(actuals) and env[actuals[i]] != INT for i in nonpure):
            sh = [_pair(a, b) for a, b in itertools.combinations(touched, 2)
                  if self.can_share(env[a], env[b])]
            s = s.add(sh)
        ret = e.ty or self._ret_type(e, env)
        if ret == INT:
            return s
        sh = [_pair(RHO, w) for w in touched if self.can_share(ret, env[w])]
        al = [_pair(RHO, w) for w in touched if self.can_alias(ret, env[w])]
        return s.add(sh, al)

    def _ret_type(self, e: Call, env: Mapping[str, str]) -> str:
        return self.tp.lookup(env[e.receiver], e.method).ret_type

    def assign_result(self, s: Facts, var: str, env: Mapping[str, str]) -> Facts:
        """Bind the value held in RHO to `var`."""
        if env[var] == INT:
            return s.drop(RHO)
        return s.drop(var).rename(RHO, var)

    def field_update(self, s: Facts, v: str, env: Mapping[str, str], field_type: str) -> Facts:
        """Facts after `v.f := rho` given the post-expression facts `s`."""
        if field_type != INT:
            refs = self.refs(env) + [RHO]
            tenv = {**env, RHO: field_type}
            left = s.sharers(v, refs)
            right = s.sharers(RHO, refs)
            sh = [_pair(a, b) for a in left for b in right
                  if a != b and self.can_share(tenv[a], tenv[b])]
            s = s.add(sh)
        return s.drop(RHO)


# --------------------------------------------------------------------------
# the per-method dataflow

@dataclass
class MethodFacts:
    """Facts recorded while analyzing one method body."""

    before: dict[tuple[int, int], Facts] = field(default_factory=dict)
    updates: list[tuple[str, Facts]] = field(default_factory=list)  # (updated var, facts before update)
    calls: list[tuple[Call, Facts]] = field(default_factory=list)


class _MethodRun:
    def __init__(self, transfer: AuxTransfer, m: MethodDecl):
        self.t = transfer
        self.m = m
        self.env = transfer.env(m)
        self.rec = MethodFacts()

    def note(self, node, s: Facts) -> None:
        k = node_key(node)
        old = self.rec.before.get(k)
        self.rec.before[k] = s if old is None else old.join(s)

    def eval(self, e: Expression, s: Facts) -> Facts:
        for call in _calls_in(e):
            self.rec.calls.append((call, s))
        return self.t.eval(e, s, self.env)

    def run(self, c: Command, s: Facts) -> Facts:
        if isinstance(c, Seq):
            for sub in c.commands:
                s = self.run(sub, s)
            return s
        if isinstance(c, If):
            self.note(c, s)
            s = self.eval(c.cond, s).drop(RHO)
            return self.run(c.then, s).join(self.run(c.orelse, s))
        if isinstance(c, While):
            cur = s
            while True:
                self.note(c, cur)
                g = self.eval(c.cond, cur).drop(RHO)
                nxt = cur.join(self.run(c.body, g))
                if nxt == cur:
                    return g
                cur = nxt
        self.note(c, s)
        if isinstance(c, Assign):
            return self.t.assign_result(self.eval(c.exp, s), c.var, self.env)
        if isinstance(c, Return):
            return self.t.assign_result(self.eval(c.exp, s), OUT, self.env)
        if isinstance(c, ExprStmt):
            return self.eval(c.exp, s).drop(RHO)
        if isinstance(c, FieldAssign):
            post = self.eval(c.exp, s)
            self.rec.updates.append((c.var, post))
            ft = self.t.tp.field_type(self.env[c.var], c.field_name)
            return self.t.field_update(post, c.var, self.env, ft)
        raise TypeError(c)


def _calls_in(e: Expression):
    if isinstance(e, Call):
        yield e
    elif isinstance(e, BinOp):
        yield from _calls_in(e.left)
        yield from _calls_in(e.right)


def analyze_method(transfer: AuxTransfer, m: MethodDecl) -> MethodFacts:
    run = _MethodRun(transfer, m)
    run.run(m.body, transfer.entry(m))
    return run.rec


def purity_of(transfer: AuxTransfer, m: MethodDecl, rec: MethodFacts) -> frozenset[int]:
    env = transfer.env(m)
    out: set[int] = set()
    inputs = list(m.inputs)
    for k, x in enumerate(inputs):
        if env[x] == INT:
            continue
        sx = shadow(x)
        for v, s in rec.updates:
            if s.sh(v, sx):
                out.add(k)
        for call, s in rec.calls:
            actuals = [call.receiver] + list(call.args)
            np = transfer.nonpure_of_call(call, env)
            if any(i < len(actuals) and env[actuals[i]] != INT and s.sh(actuals[i], sx) for i in np):
                out.add(k)
    return frozenset(out)


# --------------------------------------------------------------------------
# fact table with overrides

@dataclass
class Overrides:
    before: dict[tuple[str, int], Facts] = field(default_factory=dict)
    after: dict[tuple[str, int], Facts] = field(default_factory=dict)
    nonpure: dict[str, frozenset[int]] = field(default_factory=dict)

    def is_empty(self) -> bool:
        return not (self.before or self.after or self.nonpure)


class FactsError(Exception):
    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.message = message
        self.line = line


_AT = re.compile(r"^at\s+(\S+):(\d+)\s+(.*)$")
_METHOD = re.compile(r"^method\s+(\S+)\s+(.*)$")


def parse_overrides(text: str, tp: TypedProgram) -> Overrides:
    """Parse an override file against a typed program (see docs/facts.md)."""
    raw_before: dict[tuple[str, int], tuple[list, list]] = {}
    raw_after: dict[tuple[str, int], tuple[list, list]] = {}
    nonpure: dict[str, set[int]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("//", 1)[0].strip()
        if not line:
            continue
        m = _AT.match(line)
        if m:
            sig = _resolve(tp, m.group(1), lineno)
            point = int(m.group(2))
            if point not in _fact_lines(tp, sig):
                raise FactsError(f"{sig} has no command at line {point}", lineno)
            words = m.group(3).split()
            table = raw_before
            if words and words[0] == "after":
                table = raw_after
                words = words[1:]
            slot = table.setdefault((sig, point), ([], []))
            if words == ["none"]:
                continue
            if len(words) != 3 or words[0] not in ("share", "alias"):
                raise FactsError(f"expected 'share v w', 'alias v w' or 'none', got {' '.join(words)!r}", lineno)
            env = _fact_env(tp, sig)
            for v in words[1:]:
                if v not in env:
                    raise FactsError(f"unknown variable {v} in {sig}", lineno)
                if env[v] == INT:
                    raise FactsError(f"variable {v} has type int", lineno)
            (slot[0] if words[0] == "share" else slot[1]).append((words[1], words[2]))
            continue
        m = _METHOD.match(line)
        if m:
            sig = _resolve(tp, m.group(1), lineno)
            words = m.group(2).split()
            entry = nonpure.setdefault(sig, set())
            if words == ["pure"]:
                continue
            if len(words) == 2 and words[0] == "nonpure" and words[1].isdigit():
                idx = int(words[1])
                if idx > len(tp.methods[sig].params):
                    raise FactsError(f"{sig} has no input number {idx}", lineno)
                entry.add(idx)
                continue
            raise FactsError(f"expected 'nonpure <index>' or 'pure', got {m.group(2)!r}", lineno)
        raise FactsError(f"cannot parse {line!r}", lineno)
    def close(key, pairs):
        return close_copies(Facts.of(*pairs), unassigned_inputs(tp.methods[key[0]]))
    return Overrides(
        {k: close(k, v) for k, v in raw_before.items()},
        {k: close(k, v) for k, v in raw_after.items()},
        {k: frozenset(v) for k, v in nonpure.items()},
    )


def unassigned_inputs(m: MethodDecl) -> list[str]:
    """Inputs never assigned in the body (always including `this`)."""
    assigned = {c.var for c in atomic_commands(m.body) if isinstance(c, Assign)}
    return [x for x in m.inputs if x not in assigned]


def close_copies(f: Facts, names: Iterable[str]) -> Facts:
    """An input that is never assigned always holds its entry value, so it
    and its entry copy `#x` are interchangeable in every pair."""
    names = list(names)
    if not names:
        return f
    sub = {x: shadow(x) for x in names}
    back = {shadow(x): x for x in names}

    def variants(p):
        a, b = tuple(p)
        for x in {a, sub.get(a, a), back.get(a, a)}:
            for y in {b, sub.get(b, b), back.get(b, b)}:
                if x != y:
                    yield frozenset((x, y))
    sh = {q for p in f.share for q in variants(p)}
    al = {q for p in f.alias for q in variants(p)} | {_pair(x, shadow(x)) for x in names}
    return f.add(sh, al)


def _resolve(tp: TypedProgram, name: str, lineno: int) -> str:
    try:
        return tp.resolve_method(name).signature
    except KeyError as exc:
        raise FactsError(str(exc.args[0]), lineno) from None


def _fact_env(tp: TypedProgram, sig: str) -> dict[str, str]:
    m = tp.methods[sig]
    env = dict(tp.env(sig).bindings)
    for v in m.inputs:
        env[shadow(v)] = env[v]
    env[RHO] = "?"
    return env


def _fact_lines(tp: TypedProgram, sig: str) -> set[int]:
    lines = set(program_points(tp, sig))

    def walk(c):
        if isinstance(c, Seq):
            for s in c.commands:
                walk(s)
        elif isinstance(c, If):
            lines.add(c.line)
            walk(c.then)
            walk(c.orelse)
        elif isinstance(c, While):
            lines.add(c.line)
            walk(c.body)
    walk(tp.methods[sig].body)
    return lines


class FactTable:
    """Facts per program point and purity per method, for one program."""

    def __init__(self, tp: TypedProgram, graph: ClassGraph, overrides: Overrides | None = None,
                 max_rounds: int = 100):
        self.tp = tp
        self.graph = graph
        self.overrides = overrides or Overrides()
        nonpure: dict[str, frozenset[int]] = {sig: frozenset() for sig in tp.methods}
        nonpure.update(self.overrides.nonpure)
        for _ in range(max_rounds):
            transfer = AuxTransfer(tp, graph, dict(nonpure))
            records = {m.signature: analyze_method(transfer, m) for m in iter_methods(tp)}
            new = dict(nonpure)
            for m in iter_methods(tp):
                if m.signature not in self.overrides.nonpure:
                    new[m.signature] = nonpure[m.signature] | purity_of(transfer, m, records[m.signature])
            if new == nonpure:
                break
            nonpure = new
        self.nonpure = nonpure
        self.transfer = transfer
        self.records = records

    # lookups used by the reachability rules

    def before(self, sig: str, node) -> Facts:
        o = self.overrides.before.get((sig, node.line))
        if o is not None:
            return o
        rec = self.records.get(sig)
        if rec is None:
            return EMPTY
        return rec.before.get(node_key(node), EMPTY)

    def after(self, sig: str, node) -> Facts | None:
        return self.overrides.after.get((sig, node.line))

    def nonpure_of(self, sig: str) -> frozenset[int]:
        return self.nonpure.get(sig, frozenset())

    def env(self, sig: str) -> dict[str, str]:
        return self.transfer.env(self.tp.methods[sig])


def build_fact_table(tp: TypedProgram, graph: ClassGraph, overrides_text: str | None = None) -> FactTable:
    ov = parse_overrides(overrides_text, tp) if overrides_text else None
    return FactTable(tp, graph, ov)
