from __future__ import annotations

import pytest

from cyclescope.frontend import (
    FrontendError, format_program, iter_methods, load_program, parse_command_in,
    parse_expression_in, parse_program, program_points,
)
from cyclescope.syntax import Assign, BinOp, Call, FieldAssign, FieldRead, New, Return, Var, While

from conftest import CORPUS

LIST = """
class Node { Node next; int v; }
class L extends Node {
  Node head;
  int size() { Node c; int n;
    c := this.head;            // walk from the head
    while (c != null) do { n := n + 1; c := c.next; }
    return n;
  }
}
"""


def test_every_corpus_program_typechecks():
    for path in sorted(CORPUS.glob("*.oo")):
        tp = load_program(path.read_text())
        assert tp.methods, path.name


def test_signatures_inputs_and_inherited_fields():
    tp = load_program(LIST)
    m = tp.methods["L.size"]
    assert m.inputs == ("this",) or list(m.inputs) == ["this"]
    assert tp.fields("L") == {"next": "Node", "v": "int", "head": "Node"}
    assert tp.ref_fields("L") == {"next": "Node", "head": "Node"}
    assert tp.subclasses("Node") == frozenset({"Node", "L"})


def test_program_points_are_lines_of_atomic_commands():
    tp = load_program(LIST)
    assert program_points(tp, "L.size") == [6, 7, 8]


def test_comments_and_optional_keywords():
    tp = load_program("""
    /* block
       comment */
    class A { A f;
      A m(A x) { if (x = null) { x := new A(); } else x := x.f; while (0 > 1) { x := x; } return x; }
    }""")
    assert "A.m" in tp.methods


def test_new_with_and_without_parentheses():
    a = load_program("class A { A m() { return new A; } }")
    b = load_program("class A { A m() { return new A(); } }")
    ra = a.methods["A.m"].body.commands[0]
    rb = b.methods["A.m"].body.commands[0]
    assert isinstance(ra.exp, New) and ra.exp == rb.exp


def test_implicit_this_call():
    tp = load_program("class A { int m(int k) { return k; } int n() { int z; return m(z); } }")
    ret = tp.methods["A.n"].body.commands[0]
    assert isinstance(ret.exp, Call) and ret.exp.receiver == "this"


@pytest.mark.parametrize("src, fragment", [
    ("class A { A f; A m() { return this.f.f; } }", "chains"),
    ("class A { A m(A x) { return x.m(x.f); } }", "arguments must be variables"),
    ("class A { int m() { y := 1; return 0; } }", "unknown variable y"),
    ("class A { int m(A x) { return x + 1; } }", "int operands"),
    ("class A { int m(A x) { int b; b := x = x; return b; } }", "only allowed in conditions"),
    ("class A { int m() { this := null; return 0; } }", "cannot assign to this"),
    ("class A extends B { }", "unknown class B"),
    ("class A extends B { } class B extends A { }", "cyclic inheritance"),
    ("class A { A f; A f; }", "duplicate field"),
    ("class A { int m(int rho) { return 0; } }", "reserved"),
    ("class A { int m() { return 0 } }", "expected"),
    ("class A { int m() { if (read() > 0) { } return 0; } }", "read()"),
    ("class A { int m() { return 0; } int m() { return 1; } }", "duplicate method"),
    ("class A { int m() { $ } }", "unexpected character"),
])
def test_rejections_carry_positions(src, fragment):
    with pytest.raises(FrontendError) as exc:
        load_program(src)
    assert fragment in exc.value.message
    assert exc.value.line >= 1 and exc.value.col >= 1
    assert exc.value.format("f.oo").startswith(f"f.oo:{exc.value.line}:{exc.value.col}: ")


def test_fragment_parsing_in_method_scope():
    tp = load_program(LIST)
    e = parse_expression_in(tp, "L.size", "c.next")
    assert isinstance(e, FieldRead) and e.ty == "Node"
    cmd = parse_command_in(tp, "L.size", "c := c.next;")
    assert isinstance(cmd, Assign)
    seq = parse_command_in(tp, "L.size", "c := null; n := 1;")
    assert len(seq.commands) == 2
    with pytest.raises(FrontendError):
        parse_expression_in(tp, "L.size", "q.next")


def test_format_round_trip():
    prog = parse_program(LIST)
    again = parse_program(format_program(prog))
    assert format_program(again) == format_program(prog)


def test_iter_methods_in_declaration_order():
    tp = load_program((CORPUS / "method_calls.oo").read_text())
    assert [m.signature for m in iter_methods(tp)] == ["Node.f", "Node.g", "Node.h", "Node.k"]


def test_dispatch_targets_follow_overriding():
    tp = load_program("""
    class A { int m() { return 0; } }
    class B extends A { int m() { return 1; } }
    class C extends B { }
    """)
    assert {m.signature for m in tp.dispatch_targets("A", "m")} == {"A.m", "B.m"}
    assert [m.signature for m in tp.dispatch_targets("C", "m")] == ["B.m"]
    assert tp.lookup("C", "m").signature == "B.m"


def test_override_with_different_signature_is_rejected():
    with pytest.raises(FrontendError):
        load_program("class A { int m() { return 0; } } class B extends A { A m() { return null; } }")
