"""Concrete states and heap reachability."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

Location = int
Value = Union[int, "Ref", None]


@dataclass(frozen=True)
class Ref:
    """A heap location.  Kept distinct from ints so frames stay unambiguous."""

    loc: Location

    def __repr__(self) -> str:
        return f"ℓ{self.loc}"


@dataclass
class Obj:
    cls: str
    fields: dict[str, Value] = field(default_factory=dict)


@dataclass
class ConcreteState:
    frame: dict[str, Value]
    heap: dict[Location, Obj]

    def copy(self) -> "ConcreteState":
        return ConcreteState(dict(self.frame),
                             {k: Obj(o.cls, dict(o.fields)) for k, o in self.heap.items()})

    def check_closed(self) -> None:
        """Every location mentioned in the frame or in an object is allocated."""
        for v in list(self.frame.values()) + [x for o in self.heap.values() for x in o.fields.values()]:
            if isinstance(v, Ref) and v.loc not in self.heap:
                raise ValueError(f"dangling location {v!r}")

    def dump(self) -> list[str]:
        lines = []
        for k in sorted(self.heap):
            o = self.heap[k]
            body = ", ".join(f"{f}: {_fmt(v)}" for f, v in o.fields.items())
            lines.append(f"ℓ{k}: {o.cls} {{{body}}}")
        return lines


def _fmt(v: Value) -> str:
    if v is None:
        return "null"
    return repr(v) if isinstance(v, Ref) else str(v)


def format_value(v: Value) -> str:
    return _fmt(v)


def successors(heap: Mapping[Location, Obj], loc: Location) -> Iterable[Location]:
    obj = heap.get(loc)
    if obj is None:
        raise ValueError(f"dangling location ℓ{loc}")
    for v in obj.fields.values():
        if isinstance(v, Ref):
            yield v.loc


def reachable_locations(heap: Mapping[Location, Obj], loc: Location, epsilon: bool = False) -> frozenset[Location]:
    """Locations reachable from `loc` by paths of length >= 1 (>= 0 with epsilon)."""
    seen: set[Location] = set()
    stack = list(successors(heap, loc))
    while stack:
        n = stack.pop()
        if n in seen:
            continue
        seen.add(n)
        stack.extend(successors(heap, n))
    if epsilon:
        seen.add(loc)
    return frozenset(seen)


class ReachCache:
    """Memoized reachability over one fixed heap."""

    def __init__(self, heap: Mapping[Location, Obj]):
        self.heap = heap
        self._r: dict[Location, frozenset[Location]] = {}

    def r(self, loc: Location) -> frozenset[Location]:
        hit = self._r.get(loc)
        if hit is None:
            hit = self._r[loc] = reachable_locations(self.heap, loc)
        return hit

    def r_eps(self, loc: Location) -> frozenset[Location]:
        return self.r(loc) | {loc}

    def on_cycle(self, loc: Location) -> bool:
        return loc in self.r(loc)


def _loc(state: ConcreteState, v: str) -> Location | None:
    val = state.frame.get(v)
    return val.loc if isinstance(val, Ref) else None


def reaches_in(state: ConcreteState, v: str, w: str, cache: ReachCache | None = None) -> bool:
    a, b = _loc(state, v), _loc(state, w)
    if a is None or b is None:
        return False
    cache = cache or ReachCache(state.heap)
    return b in cache.r(a)


def cyclic_in(state: ConcreteState, v: str, cache: ReachCache | None = None) -> bool:
    a = _loc(state, v)
    if a is None:
        return False
    cache = cache or ReachCache(state.heap)
    return any(cache.on_cycle(x) for x in cache.r_eps(a))


def shares_in(state: ConcreteState, v: str, w: str, cache: ReachCache | None = None) -> bool:
    a, b = _loc(state, v), _loc(state, w)
    if a is None or b is None:
        return False
    cache = cache or ReachCache(state.heap)
    return not cache.r_eps(a).isdisjoint(cache.r_eps(b))


def aliases_in(state: ConcreteState, v: str, w: str) -> bool:
    a, b = _loc(state, v), _loc(state, w)
    return a is not None and a == b


def observed_facts(state: ConcreteState, variables: Iterable[str]):
    """All (reach pairs, cyclic vars) that actually hold among `variables`."""
    cache = ReachCache(state.heap)
    refs = [v for v in variables if isinstance(state.frame.get(v), Ref)]
    reach = set()
    for v in refs:
        rv = cache.r(state.frame[v].loc)
        for w in refs:
            if state.frame[w].loc in rv:
                reach.add((v, w))
    cyc = {v for v in refs if any(cache.on_cycle(x) for x in cache.r_eps(state.frame[v].loc))}
    return reach, cyc
