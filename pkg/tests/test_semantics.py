from __future__ import annotations

import random

from cyclescope import AnalysisConfig, Analyzer, build_class_graph, build_fact_table, load_program
from cyclescope.auxfacts import AuxTransfer, Facts
from cyclescope.concrete import run_method
from cyclescope.domain import BOTTOM, AbstractState, project_out
from cyclescope.frontend import parse_command_in, parse_expression_in
from cyclescope.heap import ConcreteState, Obj, Ref, reaches_in
from cyclescope.semantics import FixedFacts, cond_remove, top_state
from cyclescope.soundness import SoundnessConfig, check_program

from conftest import load_corpus


def S(reach=(), cyc=()):
    return AbstractState.of(reach, cyc)


def fixed(src: str, share=(), alias=()):
    tp = load_program(src)
    g = build_class_graph(tp)
    return Analyzer(tp, FixedFacts(Facts.of(share, alias), AuxTransfer(tp, g, {})), graph=g), tp


def hide_copies(state):
    return project_out(state, {v for v in state.variables() if v.startswith("#")})


CELL = "class C { C f; C m(C x) { C y; y := x.f; return y; } }"


def test_reading_from_a_cyclic_variable_gives_a_cyclic_result():
    an, tp = fixed(CELL)
    got, _ = an.exp_denote(parse_expression_in(tp, "C.m", "x.f"), S([("x", "x")], ["x"]),
                           an.ctx("C.m"), Facts.of())
    assert got == S([("x", "x"), ("x", "rho"), ("rho", "x"), ("rho", "rho")], ["x", "rho"])


def test_reading_from_an_acyclic_variable():
    an, tp = fixed(CELL)
    got, _ = an.exp_denote(parse_expression_in(tp, "C.m", "x.f"), BOTTOM, an.ctx("C.m"), Facts.of())
    assert got == S([("x", "rho")])


def test_self_loop_update_makes_the_variable_cyclic():
    an, tp = fixed(CELL)
    got = an.com_denote(parse_command_in(tp, "C.m", "x.f := x;"), BOTTOM, an.ctx("C.m"))
    assert got == S([("x", "x")], ["x"])


def test_closing_a_loop_over_a_path():
    src = "class N { N next; N m(N curr) { curr.next := this; return curr; } }"
    an, tp = fixed(src, share=[("this", "curr")])
    got = an.com_denote(parse_command_in(tp, "N.m", "curr.next := this;"), S([("this", "curr")]), an.ctx("N.m"))
    assert {"this", "curr"} <= got.cyclic
    assert {("curr", "this"), ("this", "curr"), ("this", "this")} <= got.reach


def test_cond_remove_depends_on_the_other_fields():
    state = S([("x", "y"), ("x", "x")], ["x"])
    env = {"x": "C", "y": "C"}
    one = load_program("class C { C f; }")
    assert cond_remove(state, "x", "f", env, one, build_class_graph(one)) == BOTTOM
    two = load_program("class C { C f; C g; }")
    assert cond_remove(state, "x", "f", env, two, build_class_graph(two)) == state
    mixed = load_program("class C { C f; D g; } class D { int k; }")
    assert cond_remove(state, "x", "f", env, mixed, build_class_graph(mixed)) == BOTTOM


def test_cond_remove_sees_fields_of_subclasses():
    tp = load_program("class C { C f; } class E extends C { C g; }")
    state = S([("x", "y")], ["x"])
    assert cond_remove(state, "x", "f", {"x": "C", "y": "C"}, tp, build_class_graph(tp)) == state


UNLINK = """class N { N next;
  N drop(N x) { N t;
    t := x.next;
    t := t.next;
    x.next := t;
    return x;
  }
}"""


def test_unlinking_needs_to_know_that_the_successor_is_not_the_head():
    tp = load_program(UNLINK)
    g = build_class_graph(tp)
    plain = Analyzer(tp, graph=g).analyze("N.drop", BOTTOM)
    assert "x" in plain.at("N.drop", 5).cyclic  # t may alias x as far as sharing knows
    pinned = Analyzer(tp, build_fact_table(tp, g, "at N.drop:5 share t x\n"), graph=g)
    res = pinned.analyze("N.drop", BOTTOM)
    assert all(not st.cyclic for _, st in res.method_points("N.drop"))
    assert not res.summary("N.drop", BOTTOM).cyclic


def test_loops_reach_a_fixpoint_that_covers_every_iteration():
    c = load_corpus("connect")
    res = c.analyzer.analyze("Node.connect", BOTTOM)
    assert ("this", "curr") in res.at("Node.connect", 6).reach
    assert res.loop_iterations[("Node.connect", 5)] == 2


def test_method_call_example_out_reaches_this_concretely():
    """f on four distinct fresh nodes returns b, and b.next.next is this."""
    c = load_corpus("method_calls", with_facts=False)
    heap = {i: Obj("Node", {"next": None}) for i in range(1, 5)}
    frame = {"this": Ref(1), "a": Ref(2), "b": Ref(3), "c": Ref(4)}
    res = run_method(c.tp, c.tp.methods["Node.f"], ConcreteState(frame, heap))
    merged = res.merged_state()
    assert merged.frame["out"] == Ref(3)
    assert reaches_in(merged, "out", "this")
    summary = c.analyzer.analyze("Node.f", BOTTOM).summary("Node.f", BOTTOM)
    assert ("out", "this") in summary.reach


def test_result_of_a_read_through_a_sharer():
    c = load_corpus("call_results", with_facts=False)
    res = c.analyzer.analyze("N.viaSharer", BOTTOM)
    assert ("a", "out") in res.summary("N.viaSharer", BOTTOM).reach


def test_result_that_reaches_caller_data():
    c = load_corpus("call_results", with_facts=False)
    res = c.analyzer.solve([("N.wrapsReach", S([("a", "b")])), ("N.succReach", S([("a", "b")]))])
    assert ("out", "b") in res.summary("N.wrapsReach", S([("a", "b")])).reach
    assert ("out", "b") in res.summary("N.succReach", S([("a", "b")])).reach


def test_result_that_shares_after_the_call():
    c = load_corpus("call_results")
    res = c.analyzer.analyze("N.hidden", BOTTOM)
    assert ("out", "b") in hide_copies(res.at("N.hidden", 21)).reach


def test_call_result_methods_pass_the_differential_check():
    c = load_corpus("call_results", with_facts=False)
    report = check_program(c.tp, cfg=SoundnessConfig(samples_per_method=60), rng=random.Random(5))
    assert report.samples > 100
    assert report.violations == 0, report.findings[0].render()


def test_without_entry_copies_h_loses_its_reachability():
    on = load_corpus("method_calls")
    off = load_corpus("method_calls", config=AnalysisConfig(shallow=False))
    h_on = on.analyzer.analyze("Node.h", BOTTOM).summary("Node.h", BOTTOM)
    h_off = off.analyzer.analyze("Node.h", BOTTOM).summary("Node.h", BOTTOM)
    assert ("this", "y") in h_on.reach and h_off == BOTTOM


def test_solve_is_deterministic():
    a = load_corpus("ordered_list").analyzer
    b = load_corpus("ordered_list").analyzer
    ra = a.analyze("OrderedList.insert")
    rb = b.analyze("OrderedList.insert")
    assert ra.points == rb.points and ra.summaries == rb.summaries
