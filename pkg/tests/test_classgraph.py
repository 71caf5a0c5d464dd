from __future__ import annotations

from cyclescope import build_class_graph, load_program
from cyclescope.classgraph import admissible_sets

SRC = """
class A { B b; }
class B { C c; int n; }
class C { }
class L { L next; }
class T { T left; T right; }
class S extends C { A back; }
"""


def graph():
    tp = load_program(SRC)
    return tp, build_class_graph(tp)


def test_reach_is_transitive_and_counts_subclass_fields():
    _, g = graph()
    assert g.type_reaches("A", "C")
    # a C-typed field may hold an S, whose back field leads to A
    assert g.type_reaches("B", "A") and g.type_reaches("C", "A")
    assert not g.type_reaches("L", "A")


def test_cyclic_classes():
    _, g = graph()
    assert g.type_cyclic("L") and g.type_cyclic("T")
    # A -> B -> C(=S) -> A closes a cycle through the subclass
    assert g.type_cyclic("A")
    assert not g.type_cyclic("int")


def test_alias_and_share_by_type():
    _, g = graph()
    assert g.type_may_alias("C", "S") and not g.type_may_alias("L", "T")
    assert g.type_shares("A", "B") and not g.type_shares("L", "T")


def test_admissible_sets_drop_impossible_statements():
    _, g = graph()
    adm = admissible_sets(g, {"x": "L", "y": "T", "k": "int"})
    assert adm.rset == {("x", "x"), ("y", "y")}
    assert adm.cset == {"x", "y"}


def test_acyclic_program_has_no_admissible_cycles():
    tp = load_program("class P { Q q; } class Q { int v; }")
    g = build_class_graph(tp)
    adm = admissible_sets(g, {"p": "P", "q": "Q"})
    assert adm.rset == {("p", "q")} and adm.cset == frozenset()


def test_lines_are_sorted_and_stable():
    _, g = graph()
    lines = g.lines()
    assert "L -next-> L" in lines and "cyclic: L" in lines
    assert lines == build_class_graph(load_program(SRC)).lines()
