"""A step-budgeted interpreter and the concrete side of the abstraction."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .domain import AbstractState, Universe, normalize
from .frontend import TypedProgram
from .heap import ConcreteState, Obj, Ref, Value, observed_facts
from .syntax import (
    INT, OUT, THIS,
    Assign, BinOp, Call, Command, ExprStmt, Expression, FieldAssign, FieldRead,
    If, IntLit, MethodDecl, New, Null, Read, Return, Seq, Var, While,
)

DEFAULT_STEPS = 10_000


class Fault(Exception):
    """Execution got stuck (null dereference, division by zero)."""


class OutOfBudget(Exception):
    """Step or call-depth budget exhausted; treated as nontermination."""


def shadow(v: str) -> str:
    """Name of the never-assigned copy of input `v`."""
    return "#" + v


Observer = Callable[[str, MethodDecl, Command, dict, dict], None]


@dataclass
class Interpreter:
    tp: TypedProgram
    max_steps: int = DEFAULT_STEPS
    max_depth: int = 60
    inputs: Sequence[int] = ()
    observer: Observer | None = None
    steps: int = 0
    heap: dict[int, Obj] = field(default_factory=dict)
    writes: list[tuple[int, int]] = field(default_factory=list)  # (step, location)
    _next: int = 1
    _read_pos: int = 0

    def adopt(self, heap: Mapping[int, Obj]) -> None:
        self.heap = {k: Obj(o.cls, dict(o.fields)) for k, o in heap.items()}
        self._next = max(self.heap, default=0) + 1

    def new_object(self, cls: str) -> Ref:
        loc = self._next
        self._next += 1
        self.heap[loc] = Obj(cls, {f: (0 if t == INT else None) for f, t in self.tp.fields(cls).items()})
        return Ref(loc)

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.max_steps:
            raise OutOfBudget("step budget exhausted")

    # calls ----------------------------------------------------------------

    def invoke(self, m: MethodDecl, this: Ref, args: Sequence[Value], depth: int = 0) -> dict:
        """Run `m` and return its final frame (including `out`)."""
        if depth > self.max_depth:
            raise OutOfBudget("call depth exhausted")
        frame: dict[str, Value] = {THIS: this, shadow(THIS): this}
        for (_, name), val in zip(m.params, args):
            frame[name] = val
            frame[shadow(name)] = val
        for ty, name in m.locals:
            frame[name] = 0 if ty == INT else None
        frame[OUT] = 0 if m.ret_type == INT else None
        try:
            self.exec(m.body, frame, m, depth)
        except RecursionError:
            raise OutOfBudget("host recursion limit reached") from None
        return frame

    # expressions ----------------------------------------------------------

    def deref(self, frame: dict, var: str) -> Obj:
        v = frame[var]
        if not isinstance(v, Ref):
            raise Fault(f"null dereference of {var}")
        return self.heap[v.loc]

    def eval(self, e: Expression, frame: dict, m: MethodDecl, depth: int) -> Value:
        self.tick()
        if isinstance(e, IntLit):
            return e.value
        if isinstance(e, Null):
            return None
        if isinstance(e, Var):
            return frame[e.name]
        if isinstance(e, FieldRead):
            return self.deref(frame, e.var).fields[e.field_name]
        if isinstance(e, New):
            return self.new_object(e.cls)
        if isinstance(e, Read):
            if self._read_pos < len(self.inputs):
                self._read_pos += 1
                return self.inputs[self._read_pos - 1]
            return 0
        if isinstance(e, BinOp):
            a = self.eval(e.left, frame, m, depth)
            b = self.eval(e.right, frame, m, depth)
            return binop(e.op, a, b)
        if isinstance(e, Call):
            recv = frame[e.receiver]
            if not isinstance(recv, Ref):
                raise Fault(f"call on null receiver {e.receiver}")
            target = self.tp.lookup(self.heap[recv.loc].cls, e.method)
            callee = self.invoke(target, recv, [frame[a] for a in e.args], depth + 1)
            return callee[OUT]
        raise TypeError(e)

    # commands -------------------------------------------------------------

    def exec(self, c: Command, frame: dict, m: MethodDecl, depth: int) -> None:
        self.tick()
        if isinstance(c, Seq):
            for sub in c.commands:
                self.exec(sub, frame, m, depth)
            return
        if isinstance(c, If):
            if self.eval(c.cond, frame, m, depth):
                self.exec(c.then, frame, m, depth)
            else:
                self.exec(c.orelse, frame, m, depth)
            return
        if isinstance(c, While):
            while self.eval(c.cond, frame, m, depth):
                self.exec(c.body, frame, m, depth)
                self.tick()
            return
        if self.observer:
            self.observer("pre", m, c, frame, self.heap)
        if isinstance(c, Assign):
            frame[c.var] = self.eval(c.exp, frame, m, depth)
        elif isinstance(c, Return):
            frame[OUT] = self.eval(c.exp, frame, m, depth)
        elif isinstance(c, FieldAssign):
            val = self.eval(c.exp, frame, m, depth)
            obj = self.deref(frame, c.var)
            obj.fields[c.field_name] = val
            self.writes.append((self.steps, frame[c.var].loc))
        elif isinstance(c, ExprStmt):
            self.eval(c.exp, frame, m, depth)
        else:
            raise TypeError(c)
        if self.observer:
            self.observer("post", m, c, frame, self.heap)


def binop(op: str, a: Value, b: Value) -> int:
    if op == "=":
        return int(a == b)
    if op == "!=":
        return int(a != b)
    if op == "<":
        return int(a < b)
    if op == ">":
        return int(a > b)
    if op == "<=":
        return int(a <= b)
    if op == ">=":
        return int(a >= b)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op in ("/", "%"):
        if b == 0:
            raise Fault("division by zero")
        q = abs(a) // abs(b)
        q = q if (a >= 0) == (b >= 0) else -q
        return q if op == "/" else a - q * b
    raise ValueError(op)


@dataclass
class RunResult:
    method: MethodDecl
    initial: ConcreteState
    final_frame: dict
    heap: dict[int, Obj]
    steps: int

    @property
    def out(self) -> Value:
        return self.final_frame[OUT]

    def merged_state(self) -> ConcreteState:
        """Initial input values, final `out`, final heap."""
        frame = {v: self.initial.frame.get(v) for v in self.method.inputs}
        frame[OUT] = self.out
        return ConcreteState(frame, self.heap)

    def final_state(self) -> ConcreteState:
        frame = {k: v for k, v in self.final_frame.items() if not k.startswith("#")}
        return ConcreteState(frame, self.heap)


def run_method(tp: TypedProgram, m: MethodDecl, state: ConcreteState, *,
               max_steps: int = DEFAULT_STEPS, inputs: Sequence[int] = (),
               observer: Observer | None = None) -> RunResult:
    """Execute `m` from `state`, whose frame binds `this` and the parameters.

    Raises `Fault` or `OutOfBudget`; the caller decides whether to skip.
    """
    it = Interpreter(tp, max_steps=max_steps, inputs=inputs, observer=observer)
    it.adopt(state.heap)
    this = state.frame.get(THIS)
    if not isinstance(this, Ref):
        raise Fault("receiver is null")
    args = [state.frame.get(n) for _, n in m.params]
    frame = it.invoke(m, this, args)
    return RunResult(m, state, frame, it.heap, it.steps)


def run_entry(tp: TypedProgram, m: MethodDecl, *, args: Mapping[str, int] | None = None,
              inputs: Sequence[int] = (), max_steps: int = 1_000_000) -> RunResult:
    """Run `m` on a fresh receiver with null/zero (or given int) parameters."""
    it = Interpreter(tp, max_steps=max_steps, inputs=inputs)
    this = it.new_object(m.cls)
    vals = []
    for ty, name in m.params:
        vals.append((args or {}).get(name, 0) if ty == INT else None)
    initial = ConcreteState({THIS: this, **{n: v for (_, n), v in zip(m.params, vals)}},
                            {k: Obj(o.cls, dict(o.fields)) for k, o in it.heap.items()})
    frame = it.invoke(m, this, vals)
    return RunResult(m, initial, frame, it.heap, it.steps)


# --------------------------------------------------------------------------
# abstraction

def alpha_rc(states: Iterable[ConcreteState], universe: Universe) -> AbstractState:
    """The statements witnessed by some state, restricted to the universe."""
    reach: set[tuple[str, str]] = set()
    cyc: set[str] = set()
    names = universe.ref_vars
    for s in states:
        r, c = observed_facts(s, names)
        reach |= r
        cyc |= c
    return normalize(AbstractState(frozenset(reach), frozenset(cyc)), universe)


# --------------------------------------------------------------------------
# state enumeration

def enumerate_states(tp: TypedProgram, env: Mapping[str, str], max_locations: int,
                     int_choices: Sequence[int] = (0, 1, 2),
                     classes_for: Mapping[str, Sequence[str]] | None = None) -> Iterator[ConcreteState]:
    """All well-typed states over `env` whose heap has at most `max_locations`
    objects, every one reachable from a variable.

    Locations are numbered 1.. in breadth-first discovery order (variables in
    `env` order, then fields in declaration order), so each heap shape is
    produced once.  `classes_for` optionally narrows the runtime classes a
    variable may point to.
    """
    env = dict(getattr(env, "bindings", env))
    variables = list(env)
    classes_for = dict(classes_for or {})

    def candidates(ty: str, restrict: Sequence[str] | None = None) -> list[str]:
        subs = sorted(tp.subclasses(ty))
        return [k for k in subs if restrict is None or k in restrict]

    def fill(slots: list, idx: int, frame: dict, heap: dict[int, Obj]) -> Iterator[ConcreteState]:
        # slots: ("var", name, type) or ("field", loc, fname, type); extended as locations appear
        if idx == len(slots):
            yield ConcreteState(dict(frame), {k: Obj(o.cls, dict(o.fields)) for k, o in heap.items()})
            return
        slot = slots[idx]
        ty = slot[-1]

        def assign(val):
            if slot[0] == "var":
                frame[slot[1]] = val
            else:
                heap[slot[1]].fields[slot[2]] = val

        if ty == INT:
            for n in int_choices:
                assign(n)
                yield from fill(slots, idx + 1, frame, heap)
            return
        restrict = classes_for.get(slot[1]) if slot[0] == "var" else None
        allowed = candidates(ty, restrict)
        assign(None)
        yield from fill(slots, idx + 1, frame, heap)
        for loc, obj in list(heap.items()):
            if obj.cls in allowed:
                assign(Ref(loc))
                yield from fill(slots, idx + 1, frame, heap)
        if len(heap) < max_locations:
            loc = len(heap) + 1
            for k in allowed:
                heap[loc] = Obj(k, {})
                new_slots = [("field", loc, f, t) for f, t in tp.fields(k).items()]
                for s in new_slots:
                    heap[loc].fields[s[2]] = None if s[3] != INT else 0
                assign(Ref(loc))
                yield from fill(slots + new_slots, idx + 1, frame, heap)
                del heap[loc]
        assign(None)

    slots = [("var", v, env[v]) for v in variables]
    yield from fill(slots, 0, {}, {})


def random_state(tp: TypedProgram, env: Mapping[str, str], max_locations: int,
                 rng: random.Random, int_choices: Sequence[int] = (0, 1, 2),
                 classes_for: Mapping[str, Sequence[str]] | None = None,
                 null_bias: float = 0.25) -> ConcreteState:
    """One random well-typed state with at most `max_locations` objects."""
    env = dict(getattr(env, "bindings", env))
    classes_for = dict(classes_for or {})
    heap: dict[int, Obj] = {}
    n = rng.randint(0, max_locations)
    for loc in range(1, n + 1):
        heap[loc] = Obj(rng.choice(sorted(tp.classes)), {})

    def pick(ty: str, restrict=None) -> Value:
        if ty == INT:
            return rng.choice(list(int_choices))
        options = [Ref(k) for k, o in heap.items() if tp.subclass_of(o.cls, ty)
                   and (restrict is None or o.cls in restrict)]
        if not options or rng.random() < null_bias:
            return None
        return rng.choice(options)

    for loc, obj in heap.items():
        for f, t in tp.fields(obj.cls).items():
            obj.fields[f] = pick(t)
    frame = {}
    for v, t in env.items():
        frame[v] = pick(t, classes_for.get(v))
    return ConcreteState(frame, heap)
