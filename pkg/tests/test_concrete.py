from __future__ import annotations

import random

import pytest

from cyclescope import build_class_graph, load_program
from cyclescope.concrete import (
    Fault, OutOfBudget, alpha_rc, binop, enumerate_states, random_state, run_entry, run_method,
)
from cyclescope.domain import AbstractState, Universe
from cyclescope.heap import ConcreteState, Obj, Ref, cyclic_in, reaches_in, shares_in

from conftest import CORPUS

LIST = load_program((CORPUS / "ordered_list.oo").read_text())


def test_driver_builds_a_sorted_list():
    res = run_entry(LIST, LIST.methods["Main.main"], args={"j": 4}, inputs=[5, 2, 9, 2])
    st = res.final_state()
    lst = st.heap[st.frame["x"].loc]
    values, node = [], lst.fields["head"]
    while node is not None:
        values.append(st.heap[node.loc].fields["value"])
        node = st.heap[node.loc].fields["next"]
    assert values == [2, 2, 5, 9]
    assert not cyclic_in(st, "x")


def test_insert_reports_position():
    m = LIST.methods["OrderedList.insert"]
    heap = {1: Obj("OrderedList", {"head": None, "lastInserted": None})}
    res = run_method(LIST, m, ConcreteState({"this": Ref(1), "i": 4}, heap))
    assert res.out == 0
    res2 = run_method(LIST, m, ConcreteState({"this": Ref(1), "i": 7}, res.heap))
    assert res2.out == 1


def test_return_does_not_leave_the_method():
    tp = load_program("class A { int m() { return 1; return 2; } }")
    assert run_entry(tp, tp.methods["A.m"]).out == 2


def test_faults_and_budget():
    tp = load_program("""
    class A { A f;
      A bad() { A x; return x.f; }
      int spin() { while (1) do { } return 0; }
      int div(int k) { return 1 / k; }
    }""")
    with pytest.raises(Fault):
        run_entry(tp, tp.methods["A.bad"])
    with pytest.raises(OutOfBudget):
        run_entry(tp, tp.methods["A.spin"], max_steps=500)
    with pytest.raises(Fault):
        run_entry(tp, tp.methods["A.div"], args={"k": 0})


def test_integer_division_truncates_towards_zero():
    assert binop("/", -7, 2) == -3 and binop("%", -7, 2) == -1
    assert binop("<", 1, 2) == 1 and binop("!=", None, None) == 0


def test_merged_state_keeps_initial_inputs():
    tp = load_program("class N { N next; N m(N a) { a := a.next; return a; } }")
    heap = {1: Obj("N", {"next": Ref(2)}), 2: Obj("N", {"next": None})}
    res = run_method(tp, tp.methods["N.m"], ConcreteState({"this": Ref(1), "a": Ref(1)}, heap))
    merged = res.merged_state()
    assert merged.frame == {"this": Ref(1), "a": Ref(1), "out": Ref(2)}
    assert reaches_in(merged, "a", "out")


def test_enumeration_is_garbage_free_and_duplicate_free():
    tp = load_program("class C { C f; }")
    states = list(enumerate_states(tp, {"x": "C", "y": "C"}, 2))
    keys = {(tuple(sorted(s.frame.items(), key=str)), tuple(sorted((k, o.cls, tuple(o.fields.items()))
                                                                    for k, o in s.heap.items())))
            for s in states}
    assert len(keys) == len(states)
    for s in states:
        s.check_closed()
        reachable = set()
        for v in s.frame.values():
            if isinstance(v, Ref):
                reachable.add(v.loc)
                reachable |= {l for l in s.heap if reaches_in(ConcreteState({"a": v, "b": Ref(l)}, s.heap), "a", "b")}
        assert reachable == set(s.heap)
    assert any(len(s.heap) == 2 for s in states)


def test_enumeration_respects_class_restrictions():
    tp = load_program("class A { } class B extends A { }")
    states = list(enumerate_states(tp, {"x": "A"}, 1, classes_for={"x": ["B"]}))
    assert {s.heap[s.frame["x"].loc].cls for s in states if s.frame["x"]} == {"B"}


def test_random_states_are_well_typed():
    tp = load_program("class C { C f; D g; } class D { int n; }")
    rng = random.Random(3)
    for _ in range(200):
        s = random_state(tp, {"x": "C", "d": "D"}, 3, rng)
        s.check_closed()
        for obj in s.heap.values():
            for f, t in tp.fields(obj.cls).items():
                v = obj.fields[f]
                if t == "int":
                    assert isinstance(v, int)
                elif v is not None:
                    assert tp.subclass_of(s.heap[v.loc].cls, t)


def test_alpha_collects_observed_statements():
    tp = load_program("class C { C f; }")
    u = Universe.of({"x": "C", "y": "C"}, build_class_graph(tp))
    heap = {1: Obj("C", {"f": Ref(2)}), 2: Obj("C", {"f": None})}
    s1 = ConcreteState({"x": Ref(1), "y": Ref(2)}, heap)
    s2 = ConcreteState({"x": Ref(2), "y": Ref(2)}, {2: Obj("C", {"f": Ref(2)})})
    assert alpha_rc([s1], u) == AbstractState.of([("x", "y")])
    assert alpha_rc([s1, s2], u) == AbstractState.of([("x", "y"), ("x", "x"), ("y", "x"), ("y", "y")], ["x", "y"])
    assert shares_in(s2, "x", "y")
