"""Class-level reachability and cyclicity, computed once per program.

These relations bound which reach/cyclicity statements can ever hold
between variables of given static types.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

from .frontend import TypedProgram
from .syntax import INT


@dataclass(frozen=True)
class Edge:
    source: str
    declaring: str
    field_name: str
    target: str


@dataclass(frozen=True, eq=False)
class ClassGraph:
    nodes: frozenset[str]
    edges: frozenset[Edge]
    reach: frozenset[tuple[str, str]]  # paths of length >= 1
    cyclic: frozenset[str]
    subclasses: Mapping[str, frozenset[str]]
    ref_fields: Mapping[str, Mapping[str, str]]  # class -> own+inherited ref fields

    def reaches(self, k1: str, k2: str) -> bool:
        return (k1, k2) in self.reach

    @cached_property
    def _type_reach(self) -> dict[tuple[str, str], bool]:
        return {}

    def type_reaches(self, t1: str, t2: str) -> bool:
        """Some subclass of t1 class-reaches some subclass of t2."""
        if t1 == INT or t2 == INT:
            return False
        key = (t1, t2)
        hit = self._type_reach.get(key)
        if hit is None:
            hit = any((a, b) in self.reach for a in self.subclasses[t1] for b in self.subclasses[t2])
            self._type_reach[key] = hit
        return hit

    def type_cyclic(self, t: str) -> bool:
        """Some subclass of t is a cyclic class."""
        if t == INT:
            return False
        return any(k in self.cyclic for k in self.subclasses[t])

    def type_shares(self, t1: str, t2: str) -> bool:
        """Two variables of these types could epsilon-reach a common object."""
        if t1 == INT or t2 == INT:
            return False
        r1 = self.epsilon_reach_of_type(t1)
        r2 = self.epsilon_reach_of_type(t2)
        return not r1.isdisjoint(r2)

    def type_may_alias(self, t1: str, t2: str) -> bool:
        if t1 == INT or t2 == INT:
            return False
        return not self.subclasses[t1].isdisjoint(self.subclasses[t2])

    @cached_property
    def _eps_reach(self) -> dict[str, frozenset[str]]:
        return {}

    def epsilon_reach_of_type(self, t: str) -> frozenset[str]:
        hit = self._eps_reach.get(t)
        if hit is None:
            out = set(self.subclasses[t])
            for k in self.subclasses[t]:
                out.update(b for (a, b) in self.reach if a == k)
            hit = self._eps_reach[t] = frozenset(out)
        return hit

    def lines(self) -> list[str]:
        """Text dump: `A -f-> B` per edge and `cyclic: A` per cyclic class."""
        out = sorted({f"{e.source} -{e.field_name}-> {e.target}" for e in self.edges})
        out += [f"cyclic: {k}" for k in sorted(self.cyclic)]
        return out


def transitive_closure(nodes: Iterable[str], pairs: Iterable[tuple[str, str]]) -> frozenset[tuple[str, str]]:
    succ: dict[str, set[str]] = {n: set() for n in nodes}
    for a, b in pairs:
        succ[a].add(b)
    closure = set()
    for start in succ:
        stack = list(succ[start])
        seen: set[str] = set()
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            stack.extend(succ[n])
        closure.update((start, n) for n in seen)
    return frozenset(closure)


def build_class_graph(tp: TypedProgram) -> ClassGraph:
    nodes = frozenset(tp.classes)
    edges = set()
    for k in nodes:
        # fields of any subclass count: a k-typed variable may hold one
        for sub in tp.subclasses(k):
            for f, ft in tp.ref_fields(sub).items():
                declaring = next(a for a in reversed(tp.ancestors(sub))
                                 if any(name == f for _, name in tp.classes[a].fields))
                for target in tp.subclasses(ft):
                    edges.add(Edge(k, declaring, f, target))
    reach = transitive_closure(nodes, ((e.source, e.target) for e in edges))
    on_cycle = {a for (a, b) in reach if a == b}
    cyclic = frozenset(k for k in nodes
                       if k in on_cycle or any((k, c) in reach for c in on_cycle))
    return ClassGraph(
        nodes=nodes,
        edges=frozenset(edges),
        reach=reach,
        cyclic=cyclic,
        subclasses={k: tp.subclasses(k) for k in nodes},
        ref_fields={k: tp.ref_fields(k) for k in nodes},
    )


@dataclass(frozen=True)
class AdmissibleSets:
    rset: frozenset[tuple[str, str]]
    cset: frozenset[str]


def admissible_sets(graph: ClassGraph, env) -> AdmissibleSets:
    env = dict(getattr(env, "bindings", env))
    refs = [v for v, t in env.items() if t != INT]
    rset = frozenset((v, w) for v in refs for w in refs if graph.type_reaches(env[v], env[w]))
    cset = frozenset(v for v in refs if graph.type_cyclic(env[v]))
    return AdmissibleSets(rset, cset)
