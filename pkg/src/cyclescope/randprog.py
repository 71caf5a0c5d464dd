"""Random well-typed programs for differential testing.

Programs have at most three classes.  Methods are arranged in layers so
that a method only calls methods of the next layer, which bounds the call
depth and rules out recursion.  Loops always walk a reference field
(`while (v != null) do { ...; v := v.f; }`) so most runs terminate on
acyclic heaps; the interpreter's step budget catches the rest.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .frontend import TypedProgram, load_program


@dataclass(frozen=True)
class GenConfig:
    max_classes: int = 3
    max_fields: int = 2
    call_depth: int = 2
    methods_per_layer: int = 2
    max_params: int = 2
    max_locals: int = 3
    max_statements: int = 6
    nesting: int = 2
    guard_probability: float = 0.8


@dataclass
class _Method:
    name: str
    owner: str
    layer: int
    params: list[tuple[str, str]]
    ret: str


@dataclass
class _Class:
    name: str
    parent: str | None
    fields: list[tuple[str, str]] = field(default_factory=list)


class _Gen:
    def __init__(self, rng: random.Random, cfg: GenConfig):
        self.rng = rng
        self.cfg = cfg

    # class hierarchy ------------------------------------------------------

    def classes(self) -> list[_Class]:
        n = self.rng.randint(1, self.cfg.max_classes)
        out: list[_Class] = []
        for i in range(n):
            parent = None
            if i > 0 and self.rng.random() < 0.35:
                parent = out[self.rng.randrange(i)].name
            out.append(_Class(f"K{i}", parent))
        names = [c.name for c in out]
        fid = 0
        for c in out:
            for _ in range(self.rng.randint(0 if c.parent else 1, self.cfg.max_fields)):
                c.fields.append((self.rng.choice(names), f"f{fid}"))
                fid += 1
            if self.rng.random() < 0.3:
                c.fields.append(("int", f"n{fid}"))
                fid += 1
        return out

    def ancestors(self, name: str) -> list[str]:
        chain = []
        k: str | None = name
        while k is not None:
            chain.append(k)
            k = self.by_name[k].parent
        return chain

    def is_sub(self, a: str, b: str) -> bool:
        return b in self.ancestors(a)

    def subs(self, t: str) -> list[str]:
        return [k for k in self.by_name if self.is_sub(k, t)]

    def fields_of(self, cls: str) -> list[tuple[str, str]]:
        out = []
        for k in reversed(self.ancestors(cls)):
            out.extend(self.by_name[k].fields)
        return out

    # methods --------------------------------------------------------------

    def signatures(self) -> list[_Method]:
        ms: list[_Method] = []
        names = list(self.by_name)
        for layer in range(self.cfg.call_depth + 1):
            for j in range(self.rng.randint(1, self.cfg.methods_per_layer)):
                owner = self.rng.choice(names)
                params = [(self._type(), f"a{k}") for k in range(self.rng.randint(0, self.cfg.max_params))]
                ret = self._type()
                ms.append(_Method(f"m{layer}x{j}", owner, layer, params, ret))
        # occasional overriding in a subclass
        for m in list(ms):
            kids = [k for k in self.subs(m.owner) if k != m.owner]
            if kids and self.rng.random() < 0.5:
                kid = self.rng.choice(kids)
                if any(x.name == m.name and x.owner == kid for x in ms):
                    continue
                ms.append(_Method(m.name, kid, m.layer, m.params, m.ret))
        return ms

    def _type(self) -> str:
        if self.rng.random() < 0.2:
            return "int"
        return self.rng.choice(list(self.by_name))

    def methods_of(self, cls: str) -> dict[str, _Method]:
        """Methods visible on a `cls` receiver (closest declaration wins)."""
        out: dict[str, _Method] = {}
        for k in self.ancestors(cls):
            for m in self.methods:
                if m.owner == k and m.name not in out:
                    out[m.name] = m
        return out

    def program(self) -> str:
        self.by_name = {c.name: c for c in self.classes()}
        self.methods = self.signatures()
        parts = []
        for c in self.by_name.values():
            head = f"class {c.name}" + (f" extends {c.parent}" if c.parent else "") + " {"
            lines = [head]
            for ty, f in c.fields:
                lines.append(f"  {ty} {f};")
            for m in self.methods:
                if m.owner == c.name:
                    lines.extend(self.method_text(m))
            lines.append("}")
            parts.append("\n".join(lines))
        return "\n".join(parts) + "\n"

    def method_text(self, m: _Method) -> list[str]:
        nloc = self.rng.randint(1, self.cfg.max_locals)
        locs = [(self._type(), f"v{k}") for k in range(nloc)]
        self.scope = {"this": m.owner, **{n: t for t, n in m.params}, **{n: t for t, n in locs}}
        self.assignable = [n for t, n in m.params + locs]
        self.locals = {n for _, n in locs}
        self.layer = m.layer
        params = ", ".join(f"{t} {n}" for t, n in m.params)
        lines = [f"  {m.ret} {m.name}({params}) {{"]
        decls = " ".join(f"{t} {n};" for t, n in locs)
        lines.append(f"    {decls}")
        for _ in range(self.rng.randint(1, self.cfg.max_statements)):
            lines.extend(self.statement(2, self.cfg.nesting))
        ret = self.expr_of(m.ret, allow_call=True)
        lines.append(f"    return {ret};")
        lines.append("  }")
        return lines

    # statements -----------------------------------------------------------

    def vars_of(self, pred) -> list[str]:
        return [v for v, t in self.scope.items() if pred(t)]

    def ref_vars(self) -> list[str]:
        return self.vars_of(lambda t: t != "int")

    def statement(self, indent: int, depth: int) -> list[str]:
        pad = "  " * indent
        r = self.rng.random()
        refs = self.ref_vars()
        if r < 0.3:
            target = self.rng.choice(self.assignable)
            return [f"{pad}{target} := {self.expr_of(self.scope[target], allow_call=True)};"]
        if r < 0.55 and refs:
            v = self.rng.choice(refs)
            flds = self.fields_of(self.scope[v])
            if flds:
                ty, f = self.rng.choice(flds)
                stmt = f"{v}.{f} := {self.expr_of(ty, allow_call=True)};"
                if self.rng.random() < self.cfg.guard_probability:
                    return [f"{pad}if ({v} != null) then {{ {stmt} }}"]
                return [pad + stmt]
        if r < 0.65:
            call = self.call_of(None)
            if call:
                return [f"{pad}{call};"]
        if r < 0.8 and depth > 0 and refs:
            v = self.rng.choice(refs)
            then = [s for _ in range(self.rng.randint(1, 2)) for s in self.statement(indent + 1, depth - 1)]
            other = [s for _ in range(self.rng.randint(0, 1)) for s in self.statement(indent + 1, depth - 1)]
            op = self.rng.choice(["!=", "="])
            w = self.rng.choice(refs + ["null"])
            if w != "null" and not (self._related(self.scope[v], self.scope[w])):
                w = "null"
            out = [f"{pad}if ({v} {op} {w}) then {{"] + then + [f"{pad}}} else {{"] + other + [f"{pad}}}"]
            return out
        if depth > 0:
            walkers = [(v, f) for v in self.assignable if self.scope[v] != "int"
                       for ty, f in self.fields_of(self.scope[v]) if self._fits(ty, self.scope[v])]
            if walkers:
                v, f = self.rng.choice(walkers)
                body = [s for _ in range(self.rng.randint(0, 2)) for s in self.statement(indent + 1, depth - 1)
                        if not s.strip().startswith(f"{v} :=")]
                return [f"{pad}while ({v} != null) do {{"] + body + [f"{pad}  {v} := {v}.{f};", f"{pad}}}"]
        target = self.rng.choice(self.assignable)
        return [f"{pad}{target} := {self.expr_of(self.scope[target], allow_call=False)};"]

    def _related(self, a: str, b: str) -> bool:
        return a != "int" and b != "int"

    def call_of(self, want: str | None) -> str | None:
        if self.layer >= self.cfg.call_depth:
            return None
        options = []
        for v in self.ref_vars():
            for m in self.methods_of(self.scope[v]).values():
                if m.layer != self.layer + 1:
                    continue
                if want is not None and not self._fits(m.ret, want):
                    continue
                args = []
                for pt, _ in m.params:
                    cands = self.vars_of(lambda t, pt=pt: self._fits(t, pt))
                    if not cands:
                        break
                    args.append(self.rng.choice(cands))
                else:
                    options.append(f"{v}.{m.name}({', '.join(args)})")
        if not options:
            return None
        return self.rng.choice(options)

    def _fits(self, src: str, dst: str) -> bool:
        if src == "int" or dst == "int":
            return src == dst
        return self.is_sub(src, dst)

    def expr_of(self, ty: str, allow_call: bool) -> str:
        r = self.rng.random()
        if allow_call and r < 0.2:
            c = self.call_of(ty)
            if c:
                return c
        if ty == "int":
            ints = self.vars_of(lambda t: t == "int")
            if ints and r < 0.6:
                return f"{self.rng.choice(ints)} + {self.rng.randint(0, 2)}"
            return str(self.rng.randint(0, 3))
        if r < 0.35:
            cands = self.vars_of(lambda t: self._fits(t, ty))
            if cands:
                return self.rng.choice(cands)
        if r < 0.7:
            reads = [(v, f) for v in self.ref_vars() for ft, f in self.fields_of(self.scope[v]) if self._fits(ft, ty)]
            # locals start out null, so reading through them mostly faults
            safer = [(v, f) for v, f in reads if v not in self.locals]
            if safer and self.rng.random() < 0.7:
                reads = safer
            if reads:
                v, f = self.rng.choice(reads)
                return f"{v}.{f}"
        if r < 0.85:
            return f"new {self.rng.choice(self.subs(ty))}"
        return "null"


def random_program_text(rng: random.Random, cfg: GenConfig | None = None) -> str:
    return _Gen(rng, cfg or GenConfig()).program()


def random_program(rng: random.Random, cfg: GenConfig | None = None) -> tuple[str, TypedProgram]:
    text = random_program_text(rng, cfg)
    return text, load_program(text)
