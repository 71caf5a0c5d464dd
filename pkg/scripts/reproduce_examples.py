"""Print the analysis results for the worked examples in corpus/.

Each block shows what the analysis derives, next to what a concrete run
does where that is informative.
"""
from __future__ import annotations

from pathlib import Path

from cyclescope import AnalysisConfig, Analyzer, build_class_graph, build_fact_table, load_program, top_state
from cyclescope.concrete import run_entry, run_method
from cyclescope.domain import BOTTOM, project_out
from cyclescope.heap import ConcreteState, Obj, Ref, reaches_in

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def load(name: str, facts: bool = True, config: AnalysisConfig | None = None):
    tp = load_program((CORPUS / f"{name}.oo").read_text())
    g = build_class_graph(tp)
    fp = CORPUS / f"{name}.facts"
    table = build_fact_table(tp, g, fp.read_text() if facts and fp.exists() else None)
    return tp, Analyzer(tp, table, config, g)


def visible(s):
    return project_out(s, {v for v in s.variables() if v.startswith("#")})


def show(title, state):
    print(f"  {title:40s} {visible(state)}")


def main() -> None:
    print("method calls")
    tp, an = load("method_calls")
    res = an.solve([(s, BOTTOM) for s in ("Node.f", "Node.g", "Node.h", "Node.k")])
    for s in ("Node.f", "Node.g", "Node.h", "Node.k"):
        show(f"summary of {s}", res.summary(s, BOTTOM))
    heap = {i: Obj("Node", {"next": None}) for i in range(1, 5)}
    run = run_method(tp, tp.methods["Node.f"],
                     ConcreteState({"this": Ref(1), "a": Ref(2), "b": Ref(3), "c": Ref(4)}, heap))
    print(f"  concrete f on fresh nodes: out reaches this = {reaches_in(run.merged_state(), 'out', 'this')}")
    _, plain = load("method_calls", config=AnalysisConfig(shallow=False))
    show("summary of Node.h without entry copies", plain.analyze("Node.h", BOTTOM).summary("Node.h", BOTTOM))

    print("ordered list insert (acyclic inputs)")
    tp, an = load("ordered_list")
    m = tp.methods["OrderedList.insert"]
    start = top_state(an.input_universe(m), acyclic=True)
    res = an.analyze(m.signature, start)
    for line, st in res.method_points(m.signature):
        show(f"line {line}", st)
    show("summary", res.summary(m.signature, start))

    print("connect")
    tp, an = load("connect")
    res = an.analyze("Node.connect", BOTTOM)
    for line, st in res.method_points("Node.connect"):
        show(f"line {line}", st)
    print(f"  loop stable after {res.loop_iterations[('Node.connect', 5)]} iterations")

    print("mirror")
    tp, an = load("mirror")
    res = an.analyze("TreeUtil.mirror", BOTTOM)
    show("summary", res.summary("TreeUtil.mirror", BOTTOM))
    print(f"  fixpoint rounds: {res.rounds}")

    print("single-field optimization")
    for flag in (True, False):
        tp, an = load("single_field", config=AnalysisConfig(single_field_opt=flag))
        show(f"line 7, optimization {'on' if flag else 'off'}", an.analyze("Demo.run", BOTTOM).at("Demo.run", 7))

    print("shared node")
    tp, an = load("shared_node")
    show("line 8", an.analyze("Demo.run", BOTTOM).at("Demo.run", 8))
    final = run_entry(tp, tp.methods["Demo.run"]).final_state()
    print(f"  concretely x reaches z = {reaches_in(final, 'x', 'z')}")


if __name__ == "__main__":
    main()
