"""Differential soundness sweep over random programs.

    python3 scripts/soundness_sweep.py --programs 500 --seed 1 --json sweep.json
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass

from cyclescope.randprog import GenConfig
from cyclescope.soundness import SoundnessConfig, check_random


@dataclass(frozen=True)
class SweepConfig:
    programs: int = 200
    seed: int = 0
    samples_per_method: int = 20
    heap_bound: int = 3
    max_steps: int = 10_000
    time_budget: float | None = None
    show_findings: int = 5


def sweep(cfg: SweepConfig):
    scfg = SoundnessConfig(heap_bound=cfg.heap_bound, samples_per_method=cfg.samples_per_method,
                           max_steps=cfg.max_steps)
    return check_random(cfg.programs, seed=cfg.seed, cfg=scfg, gen=GenConfig(), time_budget=cfg.time_budget)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    defaults = SweepConfig()
    p.add_argument("--programs", type=int, default=defaults.programs)
    p.add_argument("--seed", type=int, default=defaults.seed)
    p.add_argument("--samples-per-method", type=int, default=defaults.samples_per_method)
    p.add_argument("--heap-bound", type=int, default=defaults.heap_bound)
    p.add_argument("--max-steps", type=int, default=defaults.max_steps)
    p.add_argument("--time-budget", type=float, default=None)
    p.add_argument("--json", help="write counts and findings to this file")
    ns = p.parse_args(argv)
    cfg = SweepConfig(ns.programs, ns.seed, ns.samples_per_method, ns.heap_bound, ns.max_steps, ns.time_budget)
    report = sweep(cfg)
    for f in report.findings[:cfg.show_findings]:
        print(f.render())
        print(f.program)
    print(report.summary_line(), f"seconds={report.seconds:.1f}")
    if ns.json:
        with open(ns.json, "w") as fh:
            json.dump({"config": asdict(cfg), "samples": report.samples, "programs": report.programs,
                       "skipped_budget": report.skipped_budget, "skipped_fault": report.skipped_fault,
                       "fact_checks": report.fact_checks, "purity_checks": report.purity_checks,
                       "violations": [f.render() for f in report.findings], "seconds": report.seconds},
                      fh, indent=2)
    return 2 if report.violations else 0


if __name__ == "__main__":
    sys.exit(main())
