"""Abstract denotations of expressions and commands, and the summary engine.

States are `AbstractState`s over the variables of the method being
analyzed, its entry copies `#x` (the shallow variables) and, while an
expression is evaluated, the result variable `rho`.

Conventions worth knowing:

* `return e` behaves exactly like `out := e`; it does not leave the method.
* Facts for a command are looked up by its source position; the facts of
  sub-expressions are obtained by running the sharing transfer forward
  from the command's facts.
* The per-line results stored in `AnalysisResult.points` are the states
  right after the commands on that line, joined over every context in
  which the method was analyzed.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .auxfacts import EMPTY, AuxTransfer, Facts, FactTable, shadow
from .classgraph import ClassGraph, build_class_graph
from .domain import (
    BOTTOM, AbstractState, Universe, canonical, clone, join, normalize,
    project_onto, project_out, rename,
)
from .frontend import TypedProgram
from .syntax import (
    INT, OUT, RHO, THIS,
    Assign, BinOp, Call, Command, ExprStmt, Expression, FieldAssign, FieldRead,
    If, IntLit, MethodDecl, New, Null, Read, Return, Seq, Var, While,
)


@dataclass(frozen=True)
class AnalysisConfig:
    single_field_opt: bool = True
    shallow: bool = True
    max_rounds: int = 10_000


@dataclass
class AnalysisResult:
    summaries: dict[tuple[str, AbstractState], AbstractState]
    points: dict[tuple[str, int], AbstractState]
    loop_iterations: dict[tuple[str, int], int]
    rounds: int

    def summary(self, sig: str, state: AbstractState) -> AbstractState:
        return self.summaries[(sig, canonical(state))]

    def at(self, sig: str, line: int) -> AbstractState:
        return self.points.get((sig, line), BOTTOM)

    def method_points(self, sig: str) -> list[tuple[int, AbstractState]]:
        return sorted((ln, st) for (s, ln), st in self.points.items() if s == sig)


class FixedFacts:
    """A fact source that answers every query with the same facts."""

    def __init__(self, facts: Facts, transfer: AuxTransfer, nonpure: Mapping[str, frozenset[int]] | None = None,
                 after: Facts | None = None):
        self.facts = facts
        self.transfer = transfer
        self._after = after
        self._nonpure = dict(nonpure or {})

    def before(self, sig, node) -> Facts:
        return self.facts

    def after(self, sig, node) -> Facts | None:
        return self._after

    def nonpure_of(self, sig: str) -> frozenset[int]:
        return self._nonpure.get(sig, frozenset())


@dataclass
class _Ctx:
    """Where an expression or command is being evaluated."""

    method: MethodDecl
    env: dict[str, str]  # method variables + entry copies

    @property
    def sig(self) -> str:
        return self.method.signature


class Analyzer:
    """Tabulating abstract interpreter for one typed program."""

    def __init__(self, tp: TypedProgram, facts: FactTable | FixedFacts | None = None,
                 config: AnalysisConfig | None = None, graph: ClassGraph | None = None):
        self.tp = tp
        self.graph = graph or build_class_graph(tp)
        self.facts = facts if facts is not None else FactTable(tp, self.graph)
        self.config = config or AnalysisConfig()
        self.table: dict[tuple[str, AbstractState], AbstractState] = {}
        self._order: list[tuple[str, AbstractState]] = []
        self._new_keys = False
        self._recording = True
        self.points: dict[tuple[str, int], AbstractState] = {}
        self.loop_iterations: dict[tuple[str, int], int] = {}
        self.rounds = 0
        self._universes: dict[tuple[str, str | None], Universe] = {}
        self._envs: dict[str, dict[str, str]] = {}

    # environments ---------------------------------------------------------

    def env(self, m: MethodDecl) -> dict[str, str]:
        hit = self._envs.get(m.signature)
        if hit is None:
            base = dict(self.tp.env(m.signature).bindings)
            for v in m.inputs:
                base[shadow(v)] = base[v]
            hit = self._envs[m.signature] = base
        return hit

    def universe(self, m: MethodDecl, rho_type: str | None = None) -> Universe:
        key = (m.signature, rho_type)
        hit = self._universes.get(key)
        if hit is None:
            env = dict(self.env(m))
            if rho_type is not None and rho_type != INT:
                env[RHO] = rho_type
            hit = self._universes[key] = Universe.of(env, self.graph)
        return hit

    def input_universe(self, m: MethodDecl, with_out: bool = False) -> Universe:
        key = (m.signature, "<inputs+out>" if with_out else "<inputs>")
        hit = self._universes.get(key)
        if hit is None:
            env = {v: self.tp.env(m.signature)[v] for v in m.inputs}
            if with_out:
                env[OUT] = m.ret_type
            hit = self._universes[key] = Universe.of(env, self.graph)
        return hit

    def ctx(self, sig: str) -> _Ctx:
        m = self.tp.methods[sig]
        return _Ctx(m, self.env(m))

    def _ref_vars(self, ctx: _Ctx, with_rho: bool = True) -> list[str]:
        out = [v for v, t in ctx.env.items() if t != INT]
        return out + [RHO] if with_rho else out

    # expressions ----------------------------------------------------------

    def exp_denote(self, e: Expression, state: AbstractState, ctx: _Ctx, facts: Facts,
                   after: Facts | None = None) -> tuple[AbstractState, Facts]:
        """Rules for expressions.  Returns the state over the method
        variables plus `rho`, and the sharing facts after evaluation."""
        state = project_out(state, [RHO])
        transfer = self.facts.transfer
        if isinstance(e, (IntLit, Null, New, Read)):
            return state, transfer.eval(e, facts, ctx.env)
        if isinstance(e, Var):
            post = transfer.eval(e, facts, ctx.env)
            ty = ctx.env[e.name]
            if ty == INT:
                return state, post
            u = self.universe(ctx.method, ty)
            return join(state, clone(state, {e.name: RHO}, u), u), post
        if isinstance(e, FieldRead):
            post = transfer.eval(e, facts, ctx.env)
            ft = e.ty or self.tp.field_type(ctx.env[e.var], e.field_name)
            if ft == INT:
                return state, post
            u = self.universe(ctx.method, ft)
            v = e.var
            extra = {(w, RHO) for w in self._ref_vars(ctx, False) if facts.sh(w, v)}
            if v in state.cyclic:
                extra.add((RHO, RHO))
            cl = clone(state, {v: RHO}, u)
            out = AbstractState(state.reach | cl.reach | frozenset(extra), state.cyclic | cl.cyclic)
            return normalize(out, u), post
        if isinstance(e, BinOp):
            s1, f1 = self.exp_denote(e.left, state, ctx, facts)
            s1, f1 = project_out(s1, [RHO]), f1.drop(RHO)
            s2, f2 = self.exp_denote(e.right, s1, ctx, f1)
            return project_out(s2, [RHO]), f2.drop(RHO)
        if isinstance(e, Call):
            return self.call_denote(e, state, ctx, facts, after)
        raise TypeError(e)

    # method calls ---------------------------------------------------------

    def call_denote(self, e: Call, state: AbstractState, ctx: _Ctx, pre: Facts,
                    after: Facts | None = None) -> tuple[AbstractState, Facts]:
        env = ctx.env
        transfer = self.facts.transfer
        post = after if after is not None else transfer.eval_call(e, pre, env)
        actuals = [e.receiver] + list(e.args)
        ref_pos = [i for i, a in enumerate(actuals) if env[a] != INT]
        ref_actuals = sorted({actuals[i] for i in ref_pos})
        targets = self.tp.dispatch_targets(env[e.receiver], e.method)
        ret = targets[0].ret_type if targets else INT
        u = self.universe(ctx.method, ret)
        projected = project_onto(state, ref_actuals)

        i_m = BOTTOM
        nonpure_idx: set[int] = set()
        for target in targets:
            formals = list(target.inputs)
            positions: dict[str, list[str]] = {}
            for i in ref_pos:
                positions.setdefault(actuals[i], []).append(formals[i])
            i0 = _spread(projected, positions)
            i0 = normalize(i0, self.input_universe(target))
            result = self.summary(target.signature, i0)
            back = {formals[i]: actuals[i] for i in ref_pos}
            back[OUT] = RHO
            back_state = AbstractState(
                frozenset((back[a], back[b]) for a, b in result.reach if a in back and b in back),
                frozenset(back[v] for v in result.cyclic if v in back))
            i_m = i_m.union(back_state)
            nonpure_idx |= self.facts.nonpure_of(target.signature)
        i_m = normalize(i_m, u)
        nonpure_vars = {actuals[i] for i in nonpure_idx if i < len(actuals) and env[actuals[i]] != INT}

        callers = self._ref_vars(ctx, False)
        reach = state.reach
        new: set[tuple[str, str]] = set()
        # paths created from vi to vj propagate to vi's sharers
        for vi, vj in i_m.reach:
            if vj == RHO:
                # the result is reachable from vi: so it is from whoever shares with vi
                new.update((w1, RHO) for w1 in callers if pre.sh(w1, vi))
                continue
            if vi == RHO:
                # the result reaches vj: so it reaches what vj reached
                new.update((RHO, w2) for w2 in callers if pre.al(vj, w2) or (vj, w2) in reach)
                continue
            if vi not in nonpure_vars:
                continue
            for w1 in callers:
                if not pre.sh(w1, vi):
                    continue
                for w2 in callers:
                    if pre.al(vj, w2) or (vj, w2) in reach:
                        new.add((w1, w2))
        # sharing created between vi and vj
        for vi in nonpure_vars:
            for vj in ref_actuals:
                if not post.sh(vi, vj):
                    continue
                for w1 in callers:
                    if not pre.sh(w1, vi):
                        continue
                    for w2 in callers:
                        if (vj, w2) in reach:
                            new.add((w1, w2))
        # the result sharing with an actual may reach what that actual reached
        for vj in ref_actuals:
            if post.sh(RHO, vj):
                new.update((RHO, w2) for w2 in callers if (vj, w2) in reach)
        # cyclicity spreads to everything sharing with a cyclic argument
        cyc: set[str] = set()
        for vi in i_m.cyclic:
            if vi == RHO:
                continue
            cyc.update(w for w in callers if pre.sh(w, vi))
        acc = normalize(AbstractState(reach | i_m.reach | frozenset(new),
                                      state.cyclic | i_m.cyclic | frozenset(cyc)), u)
        # the result may be an existing object
        aliases = {v: RHO for v in callers if post.al(v, RHO)}
        i3 = BOTTOM
        for v in aliases:
            i3 = i3.union(clone(acc, {v: RHO}, u))
        return join(acc, i3, u), post

    # commands -------------------------------------------------------------

    def com_denote(self, c: Command, state: AbstractState, ctx: _Ctx) -> AbstractState:
        if isinstance(c, Seq):
            for sub in c.commands:
                state = self.com_denote(sub, state, ctx)
            return state
        if isinstance(c, If):
            g = self.guard(c.cond, state, ctx, c)
            return join(self.com_denote(c.then, g, ctx), self.com_denote(c.orelse, g, ctx))
        if isinstance(c, While):
            cur = state
            k = 0
            while True:
                k += 1
                g = self.guard(c.cond, cur, ctx, c)
                nxt = join(cur, self.com_denote(c.body, g, ctx))
                if nxt == cur:
                    break
                cur = nxt
            key = (ctx.sig, c.line)
            if self._recording:
                self.loop_iterations[key] = max(self.loop_iterations.get(key, 0), k)
            return self.guard(c.cond, cur, ctx, c)
        facts = self.facts.before(ctx.sig, c)
        after = self.facts.after(ctx.sig, c)
        out = self.atomic(c, state, ctx, facts, after)
        if self._recording:
            key = (ctx.sig, c.line)
            old = self.points.get(key)
            self.points[key] = out if old is None else join(old, out)
        return out

    def guard(self, cond: Expression, state: AbstractState, ctx: _Ctx, node) -> AbstractState:
        facts = self.facts.before(ctx.sig, node)
        s, _ = self.exp_denote(cond, state, ctx, facts)
        return project_out(s, [RHO])

    def atomic(self, c: Command, state: AbstractState, ctx: _Ctx, facts: Facts,
               after: Facts | None = None) -> AbstractState:
        if isinstance(c, (Assign, Return)):
            var = c.var if isinstance(c, Assign) else OUT
            s, _ = self.exp_denote(c.exp, state, ctx, facts, after)
            if ctx.env[var] == INT:
                return project_out(s, [RHO])
            s = project_out(s, [var])
            return rename(s, RHO, var, self.universe(ctx.method))
        if isinstance(c, ExprStmt):
            s, _ = self.exp_denote(c.exp, state, ctx, facts, after)
            return project_out(s, [RHO])
        if isinstance(c, FieldAssign):
            return self.field_update(c, state, ctx, facts, after)
        raise TypeError(c)

    def field_update(self, c: FieldAssign, state: AbstractState, ctx: _Ctx, facts: Facts,
                     after: Facts | None = None) -> AbstractState:
        s0, post = self.exp_denote(c.exp, state, ctx, facts, after)
        if after is not None:
            post = after
        v = c.var
        ft = self.tp.field_type(ctx.env[v], c.field_name)
        if ft == INT:
            return project_out(s0, [RHO])
        u = self.universe(ctx.method, ft)
        s1 = self.cond_remove(s0, v, c.field_name, {**ctx.env, RHO: ft}) if self.config.single_field_opt else s0
        names = self._ref_vars(ctx)
        left = [w for w in names if post.al(w, v) or (w, v) in s1.reach]
        right = [w for w in names if post.al(RHO, w) or (RHO, w) in s1.reach]
        i_r = {(a, b) for a in left for b in right}
        i_c: set[str] = set()
        if (RHO, v) in s1.reach or post.al(RHO, v) or RHO in s1.cyclic:
            i_c = set(left)
        out = normalize(AbstractState(s1.reach | frozenset(i_r), s1.cyclic | frozenset(i_c)), u)
        return project_out(out, [RHO])

    def cond_remove(self, state: AbstractState, v: str, f: str, env: Mapping[str, str]) -> AbstractState:
        return cond_remove(state, v, f, env, self.tp, self.graph)

    # summaries ------------------------------------------------------------

    def summary(self, sig: str, state: AbstractState) -> AbstractState:
        key = (sig, canonical(state))
        hit = self.table.get(key)
        if hit is None:
            self.table[key] = BOTTOM
            self._order.append(key)
            self._new_keys = True
            return BOTTOM
        return hit

    def transform(self, sig: str, state: AbstractState) -> AbstractState:
        """One application of the method transformer to one input."""
        m = self.tp.methods[sig]
        ctx = self.ctx(sig)
        u = self.universe(m)
        ref_inputs = [x for x in m.inputs if ctx.env[x] != INT]
        if self.config.shallow:
            copies = {x: shadow(x) for x in ref_inputs}
            start = _spread(state, {x: [x, shadow(x)] for x in ref_inputs})
            start = normalize(start, u)
            body = self.com_denote(m.body, start, ctx)
            kept = project_onto(body, list(copies.values()) + [OUT])
            result = rename(kept, {c: x for x, c in copies.items()})
        else:
            body = self.com_denote(m.body, normalize(state, u), ctx)
            result = project_onto(body, ref_inputs + [OUT])
        return normalize(result, self.input_universe(m, with_out=True))

    def solve(self, requests: Iterable[tuple[str, AbstractState]] = ()) -> AnalysisResult:
        for sig, st in requests:
            self.summary(sig, st)
        rounds = 0
        while True:
            rounds += 1
            if rounds > self.config.max_rounds:
                raise RuntimeError("fixpoint did not stabilize")
            self.points = {}
            self.loop_iterations = {}
            self._new_keys = False
            changed = False
            i = 0
            while i < len(self._order):
                key = self._order[i]
                new = join(self.table[key], self.transform(*key))
                if new != self.table[key]:
                    self.table[key] = new
                    changed = True
                i += 1
            if not changed and not self._new_keys:
                break
        self.rounds = rounds
        return AnalysisResult(dict(self.table), dict(self.points), dict(self.loop_iterations), rounds)

    def analyze(self, sig: str, state: AbstractState | None = None) -> AnalysisResult:
        m = self.tp.methods[sig]
        if state is None:
            state = top_state(self.input_universe(m))
        return self.solve([(sig, normalize(state, self.input_universe(m)))])


# --------------------------------------------------------------------------
# helpers

def _spread(state: AbstractState, positions: Mapping[str, list[str]]) -> AbstractState:
    """Rename each variable to every one of its targets, in all combinations.

    Variables absent from `positions` are dropped.
    """
    reach = set()
    for a, b in state.reach:
        for x in positions.get(a, ()):
            for y in positions.get(b, ()):
                reach.add((x, y))
    # a variable given twice aliases itself: copies reach each other when it is cyclic
    for v, targets in positions.items():
        if (v, v) in state.reach or v in state.cyclic:
            for x, y in itertools.product(targets, repeat=2):
                if (v, v) in state.reach:
                    reach.add((x, y))
    cyc = {x for v in state.cyclic for x in positions.get(v, ())}
    return AbstractState(frozenset(reach), frozenset(cyc))


def cond_remove(state: AbstractState, v: str, f: str, env: Mapping[str, str],
                tp: TypedProgram, graph: ClassGraph) -> AbstractState:
    """Drop statements about `v` whose witnesses must all leave through `f`."""
    kappa = env[v]
    subs = tp.subclasses(kappa)
    others = [t for k in subs for g, t in tp.ref_fields(k).items() if g != f]
    drop_cyc = all(not graph.type_cyclic(t) for t in others)

    def only_f_reaches(w: str) -> bool:
        tw = env.get(w)
        if tw is None or tw == INT:
            return True
        return not any(graph.type_may_alias(t, tw) or graph.type_reaches(t, tw) for t in others)

    reach = frozenset(p for p in state.reach if not (p[0] == v and only_f_reaches(p[1])))
    cyc = state.cyclic - {v} if drop_cyc else state.cyclic
    return AbstractState(reach, cyc)


def top_state(universe: Universe, acyclic: bool = False) -> AbstractState:
    """The most general state: every admissible statement (without cycles)."""
    adm = universe.admissible
    if acyclic:
        return canonical(AbstractState(adm.rset, frozenset()))
    return AbstractState(adm.rset, adm.cset)


def analyze_program(tp: TypedProgram, facts: FactTable | None = None,
                    config: AnalysisConfig | None = None,
                    requests: Iterable[tuple[str, AbstractState]] | None = None,
                    acyclic: bool = False) -> tuple[Analyzer, AnalysisResult]:
    """Analyze each requested (method, input); by default every method from
    its most general input."""
    an = Analyzer(tp, facts, config)
    if requests is None:
        requests = [(m.signature, top_state(an.input_universe(m), acyclic)) for m in tp.methods.values()]
    res = an.solve([(s, normalize(st, an.input_universe(tp.methods[s]))) for s, st in requests])
    return an, res
