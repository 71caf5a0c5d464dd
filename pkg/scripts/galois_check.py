"""Exhaustively check that abstraction after concretization is the identity
on small type environments, and report the sizes involved."""
from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field

from cyclescope import load_program
from cyclescope.checks import galois_check


@dataclass(frozen=True)
class Case:
    name: str
    program: str
    env: dict = field(default_factory=dict)
    max_locations: int = 3


CASES = [
    Case("one field, two vars", "class C { C f; }", {"x": "C", "y": "C"}),
    Case("two fields, two vars", "class C { C f; C g; }", {"x": "C", "y": "C"}),
    Case("one field, three vars", "class C { C f; }", {"x": "C", "y": "C", "z": "C"}),
    Case("two classes", "class C { C f; D g; } class D { int n; }", {"x": "C", "y": "D"}),
    Case("subclass with extra field", "class C { C f; } class E extends C { C g; }", {"x": "C", "y": "E"}),
]


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--max-locations", type=int, default=None, help="override the heap bound for every case")
    ns = p.parse_args(argv)
    bad = 0
    print(f"{'case':30s} {'abstract':>9s} {'heaps':>8s} {'ok':>4s} {'secs':>6s}")
    for case in CASES:
        t0 = time.monotonic()
        r = galois_check(load_program(case.program), case.env, ns.max_locations or case.max_locations)
        bad += not r.ok
        print(f"{case.name:30s} {r.abstract_states:9d} {r.concrete_states:8d} {str(r.ok):>4s} "
              f"{time.monotonic() - t0:6.1f}")
        for a, back in r.not_recovered[:3]:
            print(f"    {a} comes back as {back}")
        for a, b in r.indistinct[:3]:
            print(f"    {a} and {b} describe the same heaps")
    return 1 if bad else 0


if __name__ == "__main__":
    raise SystemExit(main())
