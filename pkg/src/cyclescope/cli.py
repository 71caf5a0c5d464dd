"""Command-line driver: `cyclescope analyze|run|check-soundness|dump-class-graph`."""
from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path
from typing import Sequence, TextIO

from .auxfacts import FactsError, build_fact_table
from .classgraph import build_class_graph
from .concrete import Fault, OutOfBudget, run_entry
from .config import INPUT_KINDS, RunConfig
from .domain import BOTTOM, AbstractState, project_out, render_structured, render_text
from .frontend import FrontendError, TypedProgram, iter_methods, load_program
from .heap import format_value
from .semantics import AnalysisConfig, Analyzer, top_state
from .soundness import SoundnessConfig, check_program, check_random

EXIT_OK = 0
EXIT_FRONTEND = 1
EXIT_UNSOUND = 2


class _Failure(Exception):
    def __init__(self, message: str, code: int = EXIT_FRONTEND):
        super().__init__(message)
        self.code = code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cyclescope",
                                description="Reachability and cyclicity analysis for a small object-oriented language.")
    sub = p.add_subparsers(dest="mode", required=True)

    a = sub.add_parser("analyze", help="print per-line reach/cyclicity statements")
    a.add_argument("file")
    a.add_argument("--facts", help="sharing/alias/purity overrides")
    a.add_argument("--entry", help="analyze only this method (Class.m or a unique m)")
    a.add_argument("--input", choices=INPUT_KINDS, default="top",
                   help="abstract input: every admissible statement, the same without cycles, or nothing")
    a.add_argument("--assume-acyclic", action="store_true", help="shorthand for --input acyclic")
    a.add_argument("--no-single-field-opt", action="store_true")
    a.add_argument("--no-shallow", action="store_true", help="diagnostic: analyze without entry copies")
    a.add_argument("--format", choices=("text", "structured"), default="text")
    a.add_argument("--show-shallow", action="store_true", help="keep #x entry copies in per-line output")

    r = sub.add_parser("run", help="execute a method on a fresh receiver")
    r.add_argument("file")
    r.add_argument("--entry", required=True)
    r.add_argument("--inputs", default="", help="comma-separated values returned by read()")
    r.add_argument("--arg", action="append", default=[], metavar="NAME=INT", help="int parameter value")
    r.add_argument("--max-steps", type=int, default=1_000_000)

    c = sub.add_parser("check-soundness", help="differential check against the interpreter")
    c.add_argument("file", nargs="?")
    c.add_argument("--facts")
    c.add_argument("--random", type=int, default=0, metavar="N", help="number of random programs")
    c.add_argument("--heap-bound", type=int, default=3)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--samples-per-method", type=int, default=20)
    c.add_argument("--max-steps", type=int, default=10_000)
    c.add_argument("--no-fact-check", action="store_true")

    d = sub.add_parser("dump-class-graph", help="print class-level reachability")
    d.add_argument("file")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    kw: dict = {"mode": ns.mode}
    if getattr(ns, "file", None):
        kw["paths"] = (ns.file,)
    if ns.mode == "analyze":
        kw.update(entry=ns.entry, facts_path=ns.facts, output_format=ns.format,
                  show_shallow=ns.show_shallow,
                  input_kind="acyclic" if ns.assume_acyclic else ns.input,
                  analysis=AnalysisConfig(single_field_opt=not ns.no_single_field_opt,
                                          shallow=not ns.no_shallow))
    elif ns.mode == "run":
        reads = tuple(int(x) for x in ns.inputs.split(",") if x.strip())
        pairs = []
        for item in ns.arg:
            name, _, val = item.partition("=")
            pairs.append((name.strip(), int(val)))
        kw.update(entry=ns.entry, read_values=reads, int_args=tuple(pairs),
                  soundness=SoundnessConfig(max_steps=ns.max_steps))
    elif ns.mode == "check-soundness":
        kw.update(facts_path=ns.facts, random_programs=ns.random, seed=ns.seed,
                  soundness=SoundnessConfig(heap_bound=ns.heap_bound, samples_per_method=ns.samples_per_method,
                                            max_steps=ns.max_steps, check_facts=not ns.no_fact_check))
    return RunConfig(**kw)


# --------------------------------------------------------------------------

def _load(path: str) -> tuple[str, TypedProgram]:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise _Failure(f"{path}: {e.strerror}")
    try:
        return text, load_program(text)
    except FrontendError as e:
        raise _Failure(e.format(path))


def _facts(tp: TypedProgram, graph, path: str | None):
    text = None
    if path:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise _Failure(f"{path}: {e.strerror}")
    try:
        return build_fact_table(tp, graph, text)
    except FactsError as e:
        raise _Failure(f"{path}:{e.line}: {e.message}" if e.line else f"{path}: {e.message}")


def _entry(tp: TypedProgram, name: str):
    try:
        return tp.resolve_method(name)
    except (KeyError, ValueError, FrontendError) as e:
        raise _Failure(f"unknown or ambiguous method {name!r}: {e}")


def _visible(state: AbstractState, show_shallow: bool) -> AbstractState:
    if show_shallow:
        return state
    return project_out(state, {v for v in state.variables() if v.startswith("#")})


def cmd_analyze(cfg: RunConfig, out: TextIO) -> int:
    _, tp = _load(cfg.paths[0])
    graph = build_class_graph(tp)
    facts = _facts(tp, graph, cfg.facts_path)
    an = Analyzer(tp, facts, cfg.analysis, graph)
    methods = [_entry(tp, cfg.entry)] if cfg.entry else list(iter_methods(tp))
    requests = []
    for m in methods:
        u = an.input_universe(m)
        start = BOTTOM if cfg.input_kind == "empty" else top_state(u, acyclic=cfg.input_kind == "acyclic")
        requests.append((m.signature, start))
    result = an.solve(requests)

    order = [m.signature for m in iter_methods(tp)]
    if cfg.output_format == "structured":
        doc = {"methods": []}
        for sig in order:
            pts = result.method_points(sig)
            sums = sorted(((i, o) for (s, i), o in result.summaries.items() if s == sig),
                          key=lambda io: render_text(io[0]))
            if not pts and not sums:
                continue
            doc["methods"].append({
                "method": sig,
                "points": [{"line": ln, **render_structured(_visible(st, cfg.show_shallow))} for ln, st in pts],
                "summaries": [{"input": render_structured(i), "output": render_structured(o)} for i, o in sums],
            })
        doc["rounds"] = result.rounds
        out.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return EXIT_OK

    for sig in order:
        for ln, st in result.method_points(sig):
            out.write(f"== {sig} @ line {ln} ==\n")
            for line in render_text(_visible(st, cfg.show_shallow)):
                out.write(f"  {line}\n")
    for sig, start in requests:
        out.write(f"== {sig} summary ==\n")
        for line in render_text(result.summary(sig, start)):
            out.write(f"  {line}\n")
    return EXIT_OK


def cmd_run(cfg: RunConfig, out: TextIO) -> int:
    _, tp = _load(cfg.paths[0])
    m = _entry(tp, cfg.entry)
    try:
        res = run_entry(tp, m, args=dict(cfg.int_args), inputs=cfg.read_values,
                        max_steps=cfg.soundness.max_steps)
    except Fault as e:
        raise _Failure(f"runtime fault: {e}")
    except OutOfBudget as e:
        raise _Failure(f"stopped: {e}")
    st = res.final_state()
    out.write(f"out = {format_value(res.out)}\n")
    out.write("frame:\n")
    for v in sorted(st.frame):
        out.write(f"  {v} = {format_value(st.frame[v])}\n")
    out.write("heap:\n")
    for line in st.dump():
        out.write(f"  {line}\n")
    out.write(f"steps = {res.steps}\n")
    return EXIT_OK


def cmd_check(cfg: RunConfig, out: TextIO) -> int:
    if cfg.paths:
        text, tp = _load(cfg.paths[0])
        facts = _facts(tp, build_class_graph(tp), cfg.facts_path)
        report = check_program(tp, facts, cfg.soundness, random.Random(cfg.seed), program_text=text)
    else:
        report = check_random(cfg.random_programs, cfg.seed, cfg.soundness)
    for f in report.findings[:20]:
        out.write(f.render() + "\n")
        if f.program and not cfg.paths:
            out.write(f.program)
    out.write(report.summary_line() + "\n")
    return EXIT_UNSOUND if report.violations else EXIT_OK


def cmd_dump(cfg: RunConfig, out: TextIO) -> int:
    _, tp = _load(cfg.paths[0])
    for line in build_class_graph(tp).lines():
        out.write(line + "\n")
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "run": cmd_run, "check-soundness": cmd_check, "dump-class-graph": cmd_dump}


def main(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except ValueError as e:
        err.write(f"cyclescope: {e}\n")
        return EXIT_FRONTEND
    try:
        return COMMANDS[cfg.mode](cfg, out)
    except _Failure as e:
        err.write(str(e) + "\n")
        return e.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
