"""Differential checks of the analysis against the concrete interpreter.

Three oracles are run on every sample:

* summaries: for an input state σ, the summary computed for α({σ}) must
  describe the state made of σ's inputs, the final `out` and the final heap;
* sharing/alias facts: right before each atomic command, every pair of
  reference variables that really shares (or aliases) must be listed in the
  facts used at that command;
* purity: a method may only write into the part of the heap an input could
  reach at call time if that input is declared nonpure.
"""
from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .auxfacts import FactTable
from .classgraph import build_class_graph
from .concrete import Fault, Interpreter, OutOfBudget, alpha_rc, enumerate_states, random_state
from .domain import AbstractState, canonical, violations
from .frontend import TypedProgram, iter_methods
from .heap import ConcreteState, Obj, ReachCache, Ref, format_value, reachable_locations
from .randprog import GenConfig, random_program
from .semantics import AnalysisConfig, Analyzer
from .syntax import INT, OUT, MethodDecl


@dataclass(frozen=True)
class SoundnessConfig:
    heap_bound: int = 3
    samples_per_method: int = 20
    max_steps: int = 10_000
    enumeration_limit: int = 2_000
    int_choices: tuple[int, ...] = (0, 1, 2)
    check_facts: bool = True
    check_purity: bool = True
    check_summaries: bool = True
    # observations stop once a run has allocated this many objects; such
    # runs are almost always allocation loops that exhaust the step budget
    observe_heap_limit: int = 64


@dataclass
class Finding:
    kind: str  # "summary", "facts" or "purity"
    method: str
    detail: str
    state: str = ""
    program: str = ""

    def render(self) -> str:
        out = [f"[{self.kind}] {self.method}: {self.detail}"]
        if self.state:
            out.append(self.state)
        return "\n".join(out)


@dataclass
class SoundnessReport:
    samples: int = 0
    skipped_budget: int = 0
    skipped_fault: int = 0
    fact_checks: int = 0
    purity_checks: int = 0
    findings: list[Finding] = field(default_factory=list)
    programs: int = 0
    seconds: float = 0.0

    @property
    def violations(self) -> int:
        return len(self.findings)

    def merge(self, other: "SoundnessReport") -> None:
        self.samples += other.samples
        self.skipped_budget += other.skipped_budget
        self.skipped_fault += other.skipped_fault
        self.fact_checks += other.fact_checks
        self.purity_checks += other.purity_checks
        self.findings.extend(other.findings)
        self.programs += other.programs

    def summary_line(self) -> str:
        return (f"programs={self.programs} samples={self.samples} "
                f"skipped_nonterminating={self.skipped_budget} skipped_faults={self.skipped_fault} "
                f"fact_checks={self.fact_checks} purity_checks={self.purity_checks} "
                f"violations={self.violations}")


# --------------------------------------------------------------------------
# the instrumented interpreter

class _CheckingInterpreter(Interpreter):
    """Interpreter that validates facts and purity while it runs."""

    def __init__(self, tp: TypedProgram, facts: FactTable, report: SoundnessReport,
                 cfg: SoundnessConfig, **kw):
        super().__init__(tp, max_steps=cfg.max_steps, **kw)
        self.facts = facts
        self.report = report
        self.cfg = cfg
        self.found: list[Finding] = []
        if cfg.check_facts:
            self.observer = self._observe

    def _observe(self, phase, m: MethodDecl, cmd, frame, heap) -> None:
        if phase != "pre" or len(heap) > self.cfg.observe_heap_limit:
            return
        f = self.facts.before(m.signature, cmd)
        env = self.facts.env(m.signature)
        cache = ReachCache(heap)
        refs = [v for v in frame if env.get(v, INT) != INT and isinstance(frame[v], Ref)]
        region = {v: cache.r_eps(frame[v].loc) for v in refs}
        self.report.fact_checks += 1
        for a, b in itertools.combinations(refs, 2):
            if not f.sh(a, b) and not region[a].isdisjoint(region[b]):
                self.found.append(Finding("facts", m.signature, f"line {cmd.line}: sh({a},{b}) holds but is missing"))
            if not f.al(a, b) and frame[a] == frame[b]:
                self.found.append(Finding("facts", m.signature, f"line {cmd.line}: al({a},{b}) holds but is missing"))

    def invoke(self, m: MethodDecl, this, args, depth: int = 0) -> dict:
        if not self.cfg.check_purity or len(self.heap) > self.cfg.observe_heap_limit:
            return super().invoke(m, this, args, depth)
        values = [this] + list(args)
        regions = [reachable_locations(self.heap, v.loc, epsilon=True) if isinstance(v, Ref) else frozenset()
                   for v in values]
        start = len(self.writes)
        try:
            return super().invoke(m, this, args, depth)
        finally:
            # writes made before a fault or budget stop count as well
            self._check_purity(m, regions, self.writes[start:])

    def _check_purity(self, m: MethodDecl, regions, writes) -> None:
        nonpure = self.facts.nonpure_of(m.signature)
        self.report.purity_checks += 1
        for k, region in enumerate(regions):
            if k in nonpure or not region:
                continue
            hit = [loc for _, loc in writes if loc in region]
            if hit:
                self.found.append(Finding("purity", m.signature,
                                          f"input {m.inputs[k]} is declared pure but ℓ{hit[0]} was written"))


def describe_state(s: ConcreteState) -> str:
    frame = ", ".join(f"{v}={format_value(x)}" for v, x in s.frame.items())
    return "\n".join([f"  frame: {frame}"] + [f"  {line}" for line in s.dump()])


# --------------------------------------------------------------------------
# input states

def receiver_classes(tp: TypedProgram, m: MethodDecl) -> list[str]:
    """Runtime classes of `this` for which a call dispatches to `m`."""
    return sorted(k for k in tp.subclasses(m.cls) if tp.lookup(k, m.name) is m)


def input_states(tp: TypedProgram, m: MethodDecl, cfg: SoundnessConfig,
                 rng: random.Random) -> Iterator[ConcreteState]:
    """Input states for `m` with a non-null, correctly dispatching receiver.

    When the enumeration at the heap bound is small it is used exhaustively
    (in a shuffled order); otherwise states are drawn at random.
    """
    env = {v: tp.env(m.signature)[v] for v in m.inputs}
    classes_for = {"this": receiver_classes(tp, m)}
    limit = cfg.enumeration_limit
    listed = [s for s in itertools.islice(
        enumerate_states(tp, env, cfg.heap_bound, cfg.int_choices, classes_for), limit + 1)
        if isinstance(s.frame.get("this"), Ref)]
    if len(listed) <= limit:
        rng.shuffle(listed)
        yield from listed[:cfg.samples_per_method]
        return
    produced = 0
    while produced < cfg.samples_per_method:
        s = random_state(tp, env, cfg.heap_bound, rng, cfg.int_choices, classes_for)
        if not isinstance(s.frame.get("this"), Ref):
            # make room for the receiver if the draw left it null
            s = _with_receiver(tp, s, classes_for["this"], rng, cfg.heap_bound)
            if s is None:
                continue
        produced += 1
        yield s


def _with_receiver(tp: TypedProgram, s: ConcreteState, classes: Sequence[str], rng: random.Random,
                   bound: int) -> ConcreteState | None:
    fits = [loc for loc, o in s.heap.items() if o.cls in classes]
    if fits:
        s.frame["this"] = Ref(rng.choice(fits))
        return s
    if len(s.heap) >= bound or not classes:
        return None
    loc = max(s.heap, default=0) + 1
    cls = rng.choice(list(classes))
    s.heap[loc] = Obj(cls, {f: (0 if t == INT else None) for f, t in tp.fields(cls).items()})
    s.frame["this"] = Ref(loc)
    return s


# --------------------------------------------------------------------------
# driving

def check_program(tp: TypedProgram, facts: FactTable | None = None, cfg: SoundnessConfig | None = None,
                  rng: random.Random | None = None, analysis: AnalysisConfig | None = None,
                  methods: Sequence[str] | None = None, program_text: str = "") -> SoundnessReport:
    cfg = cfg or SoundnessConfig()
    rng = rng or random.Random(0)
    graph = build_class_graph(tp)
    facts = facts or FactTable(tp, graph)
    report = SoundnessReport(programs=1)
    an = Analyzer(tp, facts, analysis, graph)

    runs: list[tuple[MethodDecl, ConcreteState, ConcreteState, AbstractState]] = []
    wanted = set(methods) if methods is not None else None
    for m in iter_methods(tp):
        if wanted is not None and m.signature not in wanted:
            continue
        u = an.input_universe(m)
        for s in input_states(tp, m, cfg, rng):
            it = _CheckingInterpreter(tp, facts, report, cfg)
            it.adopt(s.heap)
            this = s.frame["this"]
            frame = None
            try:
                frame = it.invoke(m, this, [s.frame.get(n) for _, n in m.params])
            except OutOfBudget:
                report.skipped_budget += 1
            except Fault:
                report.skipped_fault += 1
            for f in it.found:
                f.state = describe_state(s)
                f.program = program_text
            report.findings.extend(it.found)
            if frame is None:
                continue
            report.samples += 1
            merged = {v: s.frame.get(v) for v in m.inputs}
            merged[OUT] = frame[OUT]
            runs.append((m, s, ConcreteState(merged, it.heap), canonical(alpha_rc([s], u))))

    if not cfg.check_summaries:
        return report
    result = an.solve([(m.signature, a) for m, _, _, a in runs])
    for m, s, merged, a in runs:
        summ = result.summary(m.signature, a)
        names = [v for v in list(m.inputs) + [OUT] if an.input_universe(m, True).env.get(v, INT) != INT]
        miss = violations(summ, merged, names)
        if miss.reach or miss.cyclic:
            report.findings.append(Finding(
                "summary", m.signature,
                f"input {a} gave summary {summ}; missing {miss}",
                state=describe_state(s), program=program_text))
    return report


def check_random(n_programs: int, seed: int = 0, cfg: SoundnessConfig | None = None,
                 gen: GenConfig | None = None, time_budget: float | None = None,
                 enough_samples: int | None = None) -> SoundnessReport:
    """Run the oracles on up to `n_programs` random programs drawn from `seed`.

    Stops early once `enough_samples` terminating runs were checked or the
    time budget (seconds) is spent.
    """
    cfg = cfg or SoundnessConfig()
    total = SoundnessReport()
    t0 = time.monotonic()
    for i in range(n_programs):
        if time_budget is not None and time.monotonic() - t0 > time_budget:
            break
        if enough_samples is not None and total.samples >= enough_samples:
            break
        prog_rng = random.Random(f"{seed}:{i}")
        text, tp = random_program(prog_rng, gen)
        total.merge(check_program(tp, cfg=cfg, rng=prog_rng, program_text=text))
    total.seconds = time.monotonic() - t0
    return total
