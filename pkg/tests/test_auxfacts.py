from __future__ import annotations

import pytest

from cyclescope import build_class_graph, load_program
from cyclescope.auxfacts import (
    Facts, FactsError, FactTable, build_fact_table, close_copies, parse_overrides, unassigned_inputs,
)
from cyclescope.syntax import atomic_commands

from conftest import load_corpus

PROG = load_program("""
class N { N next; M m;
  N keep(N a) { return a; }
  N link(N a, N b) { a.next := b; return a; }
  N relay(N a, N b) { N t; t := a.link(b, a); return t; }
  N fresh() { N x; x := new N; x.next := this; return x; }
}
class M { int k; }
""")
GRAPH = build_class_graph(PROG)


def test_facts_relations_are_reflexive_and_alias_implies_share():
    f = Facts.of(share=[("a", "b")], alias=[("c", "d")])
    assert f.sh("a", "a") and f.al("a", "a")
    assert f.sh("b", "a") and not f.al("a", "b")
    assert f.sh("c", "d") and f.al("d", "c")
    assert f.drop("c").lines() == ["share a b"]
    assert f.rename("a", "z").sh("z", "b")


def test_close_copies_adds_entry_copy_variants():
    f = close_copies(Facts.of(share=[("this", "y")]), ["this"])
    assert f.sh("#this", "y") and f.al("this", "#this")


def test_unassigned_inputs():
    m = PROG.methods["N.link"]
    assert unassigned_inputs(m) == ["this", "a", "b"]
    tp = load_program("class A { A f; A m(A x) { x := x.f; return x; } }")
    assert unassigned_inputs(tp.methods["A.m"]) == ["this"]


def test_purity_fixpoint_propagates_through_calls():
    table = FactTable(PROG, GRAPH)
    assert table.nonpure_of("N.keep") == frozenset()
    # a.next := b may change anything sharing with a, and all three may share
    assert table.nonpure_of("N.link") == {0, 1, 2}
    assert table.nonpure_of("N.relay") == {0, 1, 2}
    assert table.nonpure_of("N.fresh") == frozenset()


def test_entry_sharing_follows_types():
    table = FactTable(PROG, GRAPH)
    link = PROG.methods["N.link"]
    first = next(iter(atomic_commands(link.body)))
    f = table.before("N.link", first)
    assert f.sh("a", "b") and f.al("a", "this")


def test_override_syntax():
    text = """
    // comment line
    at N.link:4 share a b   // trailing comment
    at link:4 alias a this
    at N.relay:5 after share rho b
    at N.keep:3 none
    method N.keep nonpure 1
    method N.fresh pure
    """
    ov = parse_overrides(text, PROG)
    before = ov.before[("N.link", 4)]
    assert before.sh("a", "b") and before.al("a", "this") and before.al("this", "#this")
    assert ov.after[("N.relay", 5)].sh("rho", "b")
    assert ov.before[("N.keep", 3)].al("this", "#this") and not ov.before[("N.keep", 3)].sh("this", "a")
    assert ov.nonpure == {"N.keep": {1}, "N.fresh": frozenset()}


def test_overrides_win_over_the_builtin_analysis():
    table = build_fact_table(PROG, GRAPH, "at N.link:4 none\nmethod N.link pure\n")
    link = PROG.methods["N.link"]
    assert not table.before("N.link", next(iter(atomic_commands(link.body)))).sh("a", "b")
    assert table.nonpure_of("N.link") == frozenset()
    assert table.nonpure_of("N.relay") == frozenset()


@pytest.mark.parametrize("text, fragment", [
    ("at N.nope:4 none", "N.nope"),
    ("at N.link:99 none", "no command at line 99"),
    ("at N.link:4 share a q", "unknown variable q"),
    ("at N.link:4 link a b", "expected 'share v w'"),
    ("method N.link nonpure 7", "no input number 7"),
    ("method N.link sometimes", "expected 'nonpure"),
    ("hello", "cannot parse"),
])
def test_override_errors_carry_line_numbers(text, fragment):
    with pytest.raises(FactsError) as info:
        parse_overrides("// first line\n" + text, PROG)
    assert info.value.line == 2
    assert fragment in str(info.value)


def test_int_variables_are_rejected():
    tp = load_program("class A { int m(int i) { return i; } }")
    with pytest.raises(FactsError, match="type int"):
        parse_overrides("at A.m:1 share i this", tp)


def test_corpus_fact_files_parse():
    for name in ("ordered_list", "method_calls", "mirror", "call_results", "shared_node"):
        c = load_corpus(name)
        assert not c.facts.overrides.is_empty()
