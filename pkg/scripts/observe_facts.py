"""Run a program's methods on many small inputs and print the sharing and
aliasing pairs actually seen before each line, in fact-file syntax.

The output is an under-approximation of the true facts (it only covers the
inputs that were tried), so it is a starting point for a hand-written fact
file or a way to compare a pinned file against reality.

    python3 scripts/observe_facts.py corpus/ordered_list.oo --method OrderedList.insert
"""
from __future__ import annotations

import argparse
import itertools
import random
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

from cyclescope import build_class_graph, load_program
from cyclescope.auxfacts import FactTable
from cyclescope.concrete import Fault, Interpreter, OutOfBudget
from cyclescope.frontend import iter_methods
from cyclescope.heap import ReachCache, Ref
from cyclescope.soundness import SoundnessConfig, input_states
from cyclescope.syntax import INT


@dataclass(frozen=True)
class ObserveConfig:
    samples_per_method: int = 200
    heap_bound: int = 3
    max_steps: int = 10_000
    seed: int = 0


def observe(tp, methods, cfg: ObserveConfig):
    env_of = FactTable(tp, build_class_graph(tp)).env
    seen = defaultdict(lambda: (set(), set()))  # (sig, line) -> (share, alias)

    def watch(phase, m, cmd, frame, heap):
        if phase != "pre":
            return
        env = env_of(m.signature)
        refs = sorted(v for v in frame if env.get(v, INT) != INT and isinstance(frame[v], Ref))
        cache = ReachCache(heap)
        share, alias = seen[(m.signature, cmd.line)]
        for a, b in itertools.combinations(refs, 2):
            if frame[a] == frame[b]:
                alias.add((a, b))
            elif not cache.r_eps(frame[a].loc).isdisjoint(cache.r_eps(frame[b].loc)):
                share.add((a, b))

    rng = random.Random(cfg.seed)
    scfg = SoundnessConfig(heap_bound=cfg.heap_bound, samples_per_method=cfg.samples_per_method)
    runs = 0
    for m in methods:
        for s in input_states(tp, m, scfg, rng):
            it = Interpreter(tp, max_steps=cfg.max_steps, observer=watch)
            it.adopt(s.heap)
            try:
                it.invoke(m, s.frame["this"], [s.frame[n] for _, n in m.params])
                runs += 1
            except (Fault, OutOfBudget):
                pass
    return seen, runs


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("file")
    p.add_argument("--method", action="append", help="restrict to these methods (repeatable)")
    p.add_argument("--samples", type=int, default=ObserveConfig.samples_per_method)
    p.add_argument("--heap-bound", type=int, default=ObserveConfig.heap_bound)
    p.add_argument("--seed", type=int, default=0)
    ns = p.parse_args(argv)
    tp = load_program(Path(ns.file).read_text())
    methods = [tp.resolve_method(n) for n in ns.method] if ns.method else list(iter_methods(tp))
    cfg = ObserveConfig(ns.samples, ns.heap_bound, seed=ns.seed)
    seen, runs = observe(tp, methods, cfg)
    print(f"// observed on {runs} terminating runs, heaps of at most {cfg.heap_bound} objects")
    for (sig, line), (share, alias) in sorted(seen.items()):
        if not share and not alias:
            print(f"at {sig}:{line} none")
        for a, b in sorted(share):
            print(f"at {sig}:{line} share {a} {b}")
        for a, b in sorted(alias):
            print(f"at {sig}:{line} alias {a} {b}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
