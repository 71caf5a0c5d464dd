"""The reduced product of reachability and cyclicity statements.

An abstract state is a set of may-reach pairs `v -> w` plus a set of
may-be-cyclic variables.  The canonical form drops `v -> v` whenever
`cyclic(v)` is absent, since a variable reaching itself is cyclic anyway.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

from .classgraph import AdmissibleSets, ClassGraph, admissible_sets
from .heap import ConcreteState, observed_facts
from .syntax import INT

Reach = frozenset[tuple[str, str]]
Cyc = frozenset[str]


@dataclass(frozen=True)
class Universe:
    """Typed variables a state may talk about, plus the class graph."""

    types: tuple[tuple[str, str], ...]
    graph: ClassGraph

    @staticmethod
    def of(env: Mapping[str, str], graph: ClassGraph) -> "Universe":
        env = dict(getattr(env, "bindings", env))
        return Universe(tuple(sorted(env.items())), graph)

    @cached_property
    def env(self) -> dict[str, str]:
        return dict(self.types)

    @cached_property
    def admissible(self) -> AdmissibleSets:
        return admissible_sets(self.graph, self.env)

    @cached_property
    def ref_vars(self) -> tuple[str, ...]:
        return tuple(v for v, t in self.types if t != INT)

    def type_of(self, v: str) -> str:
        return self.env[v]

    def can_reach(self, v: str, w: str) -> bool:
        env = self.env
        return v in env and w in env and self.graph.type_reaches(env[v], env[w])

    def can_cycle(self, v: str) -> bool:
        t = self.env.get(v)
        return t is not None and self.graph.type_cyclic(t)

    def extend(self, extra: Mapping[str, str]) -> "Universe":
        return Universe.of({**self.env, **extra}, self.graph)


@dataclass(frozen=True)
class AbstractState:
    reach: Reach = frozenset()
    cyclic: Cyc = frozenset()

    @staticmethod
    def of(reach: Iterable[tuple[str, str]] = (), cyclic: Iterable[str] = ()) -> "AbstractState":
        return AbstractState(frozenset(reach), frozenset(cyclic))

    def variables(self) -> frozenset[str]:
        return frozenset(itertools.chain(self.cyclic, *self.reach))

    def mentions(self, v: str) -> bool:
        return v in self.cyclic or any(v in p for p in self.reach)

    def union(self, other: "AbstractState") -> "AbstractState":
        return AbstractState(self.reach | other.reach, self.cyclic | other.cyclic)

    def __le__(self, other: "AbstractState") -> bool:
        return self.reach <= other.reach and self.cyclic <= other.cyclic

    def __len__(self) -> int:
        return len(self.reach) + len(self.cyclic)

    def __str__(self) -> str:
        return "{" + ", ".join(statement_strings(self)) + "}"


BOTTOM = AbstractState()


def statement_strings(state: AbstractState) -> list[str]:
    out = [f"{v} -> {w}" for v, w in sorted(state.reach)]
    out += [f"cyclic({v})" for v in sorted(state.cyclic)]
    return out


def render_text(state: AbstractState) -> list[str]:
    lines = statement_strings(state)
    return lines or ["(no reach or cyclic facts)"]


def render_structured(state: AbstractState) -> dict:
    return {"reach": [list(p) for p in sorted(state.reach)], "cyclic": sorted(state.cyclic)}


def render_json(state: AbstractState) -> str:
    return json.dumps(render_structured(state), sort_keys=True)


# --------------------------------------------------------------------------
# canonical form and lattice operations

def canonical(state: AbstractState) -> AbstractState:
    """Drop self-reach statements whose variable is not marked cyclic."""
    if all(v != w or v in state.cyclic for v, w in state.reach):
        return state
    return AbstractState(frozenset(p for p in state.reach if p[0] != p[1] or p[0] in state.cyclic),
                         state.cyclic)


def normalize(state: AbstractState, universe: Universe | None = None) -> AbstractState:
    """Restrict to admissible statements, then take the canonical form."""
    if universe is not None:
        state = AbstractState(
            frozenset(p for p in state.reach if universe.can_reach(*p)),
            frozenset(v for v in state.cyclic if universe.can_cycle(v)),
        )
    return canonical(state)


def normalize_raw(reach: Iterable[tuple[str, str]], cyclic: Iterable[str],
                  admissible: AdmissibleSets) -> AbstractState:
    r = frozenset(reach) & admissible.rset
    c = frozenset(cyclic) & admissible.cset
    return canonical(AbstractState(r, c))


def join(a: AbstractState, b: AbstractState, universe: Universe | None = None) -> AbstractState:
    return normalize(canonical(a).union(canonical(b)), universe)


def join_all(states: Iterable[AbstractState], universe: Universe | None = None) -> AbstractState:
    out = BOTTOM
    for s in states:
        out = join(out, s, universe)
    return out


def leq(a: AbstractState, b: AbstractState) -> bool:
    return canonical(a) <= canonical(b)


def project_out(state: AbstractState, variables: Iterable[str]) -> AbstractState:
    """Remove every statement mentioning one of `variables`."""
    xs = frozenset(variables)
    if not xs:
        return state
    return AbstractState(frozenset(p for p in state.reach if p[0] not in xs and p[1] not in xs),
                         frozenset(v for v in state.cyclic if v not in xs))


def project_onto(state: AbstractState, variables: Iterable[str]) -> AbstractState:
    keep = frozenset(variables)
    return AbstractState(frozenset(p for p in state.reach if p[0] in keep and p[1] in keep),
                         frozenset(v for v in state.cyclic if v in keep))


def rename(state: AbstractState, mapping: Mapping[str, str] | str, target: str | None = None,
           universe: Universe | None = None) -> AbstractState:
    """Replace every occurrence of each key of `mapping` by its value.

    `rename(I, "v", "w")` is shorthand for `rename(I, {"v": "w"})`.
    """
    if isinstance(mapping, str):
        mapping = {mapping: target}
    m = lambda x: mapping.get(x, x)  # noqa: E731
    out = AbstractState(frozenset((m(a), m(b)) for a, b in state.reach),
                        frozenset(m(v) for v in state.cyclic))
    return normalize(out, universe)


def clone(state: AbstractState, mapping: Mapping[str, str],
          universe: Universe | None = None) -> AbstractState:
    """Statements obtained by letting each mapped variable's occurrences
    independently stand for its copy.

    Copies alias their originals, so `v -> v` yields `v -> c`, `c -> v` and
    `c -> c` for the copy `c`.  The original statements are not included.
    """
    reach = set()
    for a, b in state.reach:
        for x in _choices(a, mapping):
            for y in _choices(b, mapping):
                if (x, y) != (a, b):
                    reach.add((x, y))
    cyc = {mapping[v] for v in state.cyclic if v in mapping}
    return normalize(AbstractState(frozenset(reach), frozenset(cyc)), universe)


def _choices(v: str, mapping: Mapping[str, str]) -> tuple[str, ...]:
    return (v, mapping[v]) if v in mapping else (v,)


def with_clone(state: AbstractState, mapping: Mapping[str, str],
               universe: Universe | None = None) -> AbstractState:
    """`I ∪ I[v/c]` in clone form."""
    return join(state, clone(state, mapping, universe), universe)


# --------------------------------------------------------------------------
# concretization membership

def gamma_contains(state: AbstractState, concrete: ConcreteState,
                   variables: Iterable[str] | None = None) -> bool:
    """Every reach and every cycle in `concrete` is licensed by `state`."""
    names = list(concrete.frame) if variables is None else list(variables)
    reach, cyc = observed_facts(concrete, names)
    return reach <= state.reach and cyc <= state.cyclic


def violations(state: AbstractState, concrete: ConcreteState,
               variables: Iterable[str] | None = None) -> AbstractState:
    """Statements true in `concrete` but missing from `state`."""
    names = list(concrete.frame) if variables is None else list(variables)
    reach, cyc = observed_facts(concrete, names)
    return AbstractState(frozenset(reach - state.reach), frozenset(cyc - state.cyclic))


def all_canonical_states(universe: Universe) -> list[AbstractState]:
    """Every canonical state over the admissible statements of `universe`."""
    adm = universe.admissible
    cvars = sorted(adm.cset)
    cross = sorted(p for p in adm.rset if p[0] != p[1])
    out = []
    for k in range(len(cvars) + 1):
        for cyc in itertools.combinations(cvars, k):
            selfs = sorted((v, v) for v in cyc if (v, v) in adm.rset)
            free = cross + selfs
            for mask in range(1 << len(free)):
                r = frozenset(free[i] for i in range(len(free)) if mask >> i & 1)
                out.append(AbstractState(r, frozenset(cyc)))
    return out
