"""Exhaustive checks of the abstraction on small type environments."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .classgraph import build_class_graph
from .concrete import enumerate_states
from .domain import AbstractState, BOTTOM, Universe, all_canonical_states, canonical, leq
from .frontend import TypedProgram
from .heap import observed_facts
from .semantics import Analyzer


@dataclass
class GaloisReport:
    concrete_states: int
    abstract_states: int
    not_recovered: list[tuple[AbstractState, AbstractState]] = field(default_factory=list)
    indistinct: list[tuple[AbstractState, AbstractState]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.not_recovered and not self.indistinct


def galois_check(tp: TypedProgram, env: Mapping[str, str], max_locations: int) -> GaloisReport:
    """Check that abstracting the concretization of every canonical state
    gives the state back, and that distinct states have distinct
    concretizations (restricted to heaps of at most `max_locations`)."""
    universe = Universe.of(env, build_class_graph(tp))
    names = universe.ref_vars
    observed = []
    for s in enumerate_states(tp, env, max_locations):
        r, c = observed_facts(s, names)
        observed.append((frozenset(r), frozenset(c)))
    distinct_obs = sorted(set(observed), key=repr)
    abstract = all_canonical_states(universe)
    report = GaloisReport(len(observed), len(abstract))
    signatures: dict[frozenset, AbstractState] = {}
    for a in abstract:
        members = frozenset(i for i, (r, c) in enumerate(distinct_obs) if r <= a.reach and c <= a.cyclic)
        reach = frozenset().union(*(distinct_obs[i][0] for i in members)) if members else frozenset()
        cyc = frozenset().union(*(distinct_obs[i][1] for i in members)) if members else frozenset()
        back = canonical(AbstractState(reach, cyc))
        if back != a:
            report.not_recovered.append((a, back))
        other = signatures.get(members)
        if other is not None:
            report.indistinct.append((other, a))
        else:
            signatures[members] = a
    return report


class ExactSummaries(Analyzer):
    """An analyzer whose summaries are always least fixpoints.

    The tabulating engine answers unseen inputs with ⊥ until the next round;
    that is fine inside a fixpoint iteration but makes a single rule
    application non-monotone when viewed in isolation.  Rule-level tests use
    this variant, which solves each requested input to completion first.
    """

    def __init__(self, *a, **kw):
        super().__init__(*a, **kw)
        self._solved: dict = {}

    def summary(self, sig: str, state: AbstractState) -> AbstractState:
        key = (sig, canonical(state))
        hit = self._solved.get(key)
        if hit is None:
            inner = Analyzer(self.tp, self.facts, self.config, self.graph)
            hit = inner.solve([key]).summary(*key)
            self._solved[key] = hit
        return hit


def monotone_on(analyzer: Analyzer, sig: str, command, small: AbstractState, big: AbstractState) -> bool:
    """`small ⊆ big` implies the command's results are ordered the same way."""
    ctx = analyzer.ctx(sig)
    analyzer._recording = False
    try:
        return leq(analyzer.com_denote(command, small, ctx), analyzer.com_denote(command, big, ctx))
    finally:
        analyzer._recording = True


__all__ = ["BOTTOM", "ExactSummaries", "GaloisReport", "galois_check", "monotone_on"]
