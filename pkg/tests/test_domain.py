from __future__ import annotations

from cyclescope import build_class_graph, load_program
from cyclescope.domain import (
    BOTTOM, AbstractState, Universe, all_canonical_states, canonical, clone, gamma_contains, join,
    leq, normalize, project_onto, project_out, render_json, render_structured, render_text, rename,
    violations,
)
from cyclescope.heap import ConcreteState, Obj, Ref

TP = load_program("class C { C f; } class D { int n; }")
U = Universe.of({"x": "C", "y": "C", "d": "D"}, build_class_graph(TP))


def S(reach=(), cyc=()):
    return AbstractState.of(reach, cyc)


def test_canonical_drops_self_reach_without_cycle():
    assert canonical(S([("x", "x"), ("x", "y")])) == S([("x", "y")])
    assert canonical(S([("x", "x")], ["x"])) == S([("x", "x")], ["x"])


def test_normalize_drops_inadmissible_statements():
    s = S([("x", "d"), ("d", "d"), ("x", "y")], ["d", "x"])
    assert normalize(s, U) == S([("x", "y")], ["x"])


def test_join_and_order():
    a, b = S([("x", "y")]), S([("y", "x")], ["y"])
    j = join(a, b, U)
    assert leq(a, j) and leq(b, j) and not leq(j, a)
    assert join(BOTTOM, a, U) == a


def test_projections():
    s = S([("x", "y"), ("y", "x")], ["x"])
    assert project_out(s, ["y"]) == S((), ["x"])
    assert project_onto(s, ["x", "y"]) == s


def test_rename_merges_occurrences():
    s = S([("x", "y")], ["y"])
    assert rename(s, "y", "z") == S([("x", "z")], ["z"])
    assert rename(s, {"x": "a", "y": "b"}) == S([("a", "b")], ["b"])


def test_clone_substitutes_each_occurrence_independently():
    got = clone(S([("x", "x"), ("x", "y")], ["x"]), {"x": "r"})
    assert got == S([("x", "r"), ("r", "x"), ("r", "r"), ("r", "y")], ["r"])


def test_gamma_contains_and_violations():
    heap = {1: Obj("C", {"f": Ref(2)}), 2: Obj("C", {"f": Ref(2)})}
    st = ConcreteState({"x": Ref(1), "y": Ref(2), "d": None}, heap)
    full = S([("x", "y"), ("y", "y")], ["x", "y"])
    assert gamma_contains(full, st)
    missing = violations(S([("x", "y")]), st)
    assert missing == S([("y", "y")], ["x", "y"])


def test_null_variables_satisfy_everything():
    st = ConcreteState({"x": None, "y": None, "d": None}, {})
    assert gamma_contains(BOTTOM, st)


def test_all_canonical_states_are_distinct_and_canonical():
    states = all_canonical_states(U)
    assert len(states) == len(set(states))
    assert all(canonical(s) == s and normalize(s, U) == s for s in states)
    assert BOTTOM in states


def test_renderings():
    s = S([("y", "x"), ("x", "y")], ["x"])
    assert render_text(s) == ["x -> y", "y -> x", "cyclic(x)"]
    assert render_text(BOTTOM) == ["(no reach or cyclic facts)"]
    assert render_structured(s) == {"reach": [["x", "y"], ["y", "x"]], "cyclic": ["x"]}
    assert render_json(s) == '{"cyclic": ["x"], "reach": [["x", "y"], ["y", "x"]]}'
    assert str(s) == "{x -> y, y -> x, cyclic(x)}"
