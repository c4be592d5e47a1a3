"""Command-line front end: ``sct <command> ...``.

Exit status is 0 on success or a positive verdict, 1 on a negative verdict
(not ISCT, a descent or safety failure, fuel exhausted) and 2 on usage or
input errors.
"""

from __future__ import annotations

import argparse
import sys
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from . import corpus
from . import ordinal as O
from .bounds import (
    TracerError,
    tail_length_bound,
    trace_ordinals,
    trace_tail_ordinals,
)
from .fgh import FValue, check_fa_equivalence, compute_F, gen_ackermann_program, parse_base
from .lang import Program, ProgramError, format_program, parse_program
from .rewrite import STANDARD_OPS, MissingOpInterpretation, OutOfFuel, Value, reduce, trace_lines
from .scg import (
    Description,
    DescriptionError,
    RamseyOverflow,
    check_isct,
    closure,
    extract_description,
    format_description,
    is_idempotent,
    monitor,
    parse_description,
)
from .terms import App, Num

OK, NEGATIVE, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    program: Program
    description: Description | None = None
    args: tuple[int, ...] = ()
    fuel: int = 100_000
    budget: int = 10**6
    ops: dict[str, Callable[..., int]] = field(default_factory=dict)
    fmt: str = "human"

    def __post_init__(self):
        if self.fuel < 0 or self.budget < 0:
            raise UsageError("fuel and budget must be non-negative")

    def desc(self) -> Description:
        return self.description if self.description is not None else extract_description(self.program)


def load_source(path: str) -> str:
    """Read a program file; a bare corpus name such as ``ackermann`` or ``ackermann.fun`` also works."""
    fp = Path(path)
    if fp.is_file():
        return fp.read_text(encoding="utf-8")
    stem = fp.name[:-4] if fp.name.endswith(".fun") else fp.name
    if fp.parent == Path(".") and stem in corpus.names():
        return corpus.source(stem)
    raise UsageError(f"no such program file: {path}")


def parse_op(spec: str) -> tuple[str, Callable[..., int]]:
    name, eq, rhs = spec.partition("=")
    if not eq or not name:
        raise UsageError(f"--op expects name=spec, got {spec!r}")
    if rhs in STANDARD_OPS:
        return name, STANDARD_OPS[rhs]
    try:
        return name, parse_base(rhs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def build_config(ns: argparse.Namespace) -> RunConfig:
    prog = parse_program(load_source(ns.program))
    desc = None
    if getattr(ns, "desc", None):
        desc = parse_description(Path(ns.desc).read_text(encoding="utf-8"))
        desc.validate(prog)
    ops = dict(parse_op(s) for s in getattr(ns, "op", None) or [])
    args = tuple(getattr(ns, "args", ()) or ())
    if args and len(args) != prog.entry.arity:
        raise UsageError(f"{prog.entry.name} takes {prog.entry.arity} arguments, got {len(args)}")
    return RunConfig(prog, desc, args, getattr(ns, "fuel", 100_000), getattr(ns, "budget", 10**6), ops,
                     getattr(ns, "format", "human"))


# commands ---------------------------------------------------------------


def cmd_parse(ns, out) -> int:
    print(format_program(parse_program(load_source(ns.program))), end="", file=out)
    return OK


def cmd_run(ns, out) -> int:
    cfg = build_config(ns)
    t = App(cfg.program.entry.name, tuple(Num(v) for v in cfg.args))
    if ns.trace:
        lines, last = trace_lines(t, cfg.program, cfg.fuel, cfg.ops)
        for line in lines:
            print(line, file=out)
    res = reduce(t, cfg.program, cfg.fuel, cfg.ops)
    if isinstance(res, Value):
        if cfg.fmt == "tsv":
            print(f"value\t{res.value}\nsteps\t{res.steps}\nproper\t{res.proper_steps}", file=out)
        else:
            print(res.value, file=out)
            print(f"{res.steps} steps, {res.proper_steps} proper", file=sys.stderr)
        return OK
    assert isinstance(res, OutOfFuel)
    print(f"out of fuel after {res.steps} steps", file=out)
    return NEGATIVE


def cmd_graphs(ns, out) -> int:
    cfg = build_config(ns)
    text = format_description(extract_description(cfg.program))
    if ns.output:
        Path(ns.output).write_text(text, encoding="utf-8")
    else:
        print(text, end="", file=out)
    return OK


def cmd_closure(ns, out) -> int:
    cfg = build_config(ns)
    cl = closure(cfg.desc().range())
    for g in cl:
        mark = " (idempotent)" if is_idempotent(g) else ""
        print(f"{g}{mark}", file=out)
    print(f"{len(cl)} graphs", file=out)
    return OK


def cmd_check(ns, out) -> int:
    cfg = build_config(ns)
    verdict = check_isct(cfg.desc())
    if verdict:
        print("ISCT", file=out)
        return OK
    print(f"NOT ISCT, witness: {verdict.witness}", file=out)
    return NEGATIVE


def cmd_trace(ns, out) -> int:
    cfg = build_config(ns)
    d = cfg.desc()
    if ns.tail:
        res = trace_tail_ordinals(cfg.program, d, cfg.args, cfg.fuel, cfg.ops)
    else:
        res = trace_ordinals(cfg.program, d, cfg.args, cfg.fuel, cfg.ops)
    if cfg.fmt == "tsv":
        print("step\tkind\tredex\tordinal", file=out)
        for line in res.tsv():
            print(line, file=out)
    else:
        for s in res.steps:
            kind = "end" if s.rho is None else ("proper" if s.proper else "op")
            print(f"{s.step:>5} {kind:<6} {O.format_ordinal(s.alpha)}", file=out)
    if res.value is None:
        print(f"stopped after {len(res.steps) - 1} steps without a value", file=out)
        return NEGATIVE
    print(f"value {res.value}", file=out)
    if ns.tail:
        bound = tail_length_bound(cfg.program, d, cfg.args, cfg.budget, cfg.fuel, cfg.ops)
        print(bound.describe(), file=out)
    return OK


def cmd_fgh(ns, out) -> int:
    try:
        alpha = O.parse_ordinal(ns.alpha)
        base = parse_base(ns.base)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if ns.x < 0 or ns.budget < 0:
        raise UsageError("x and budget must be non-negative")
    res = compute_F(base, alpha, ns.x, ns.budget, trace=ns.trace)
    if ns.trace:
        for e in res.trace:
            stack = ", ".join(O.format_ordinal(a) for a in e.state.stack)
            print(f"{e.step}\t[{stack}]\t{e.state.value}\t{O.format_ordinal(e.h)}", file=out)
    if isinstance(res, FValue):
        print(res.value, file=out)
        return OK
    print(f"budget exhausted after {res.steps} steps", file=out)
    return NEGATIVE


def cmd_ackermann(ns, out) -> int:
    n = ns.n
    if n < 1:
        raise UsageError("n must be at least 1")
    prog = gen_ackermann_program(n)
    try:
        base = parse_base(ns.base)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(format_program(prog), end="", file=out)
    status = OK
    if ns.args:
        if len(ns.args) != n + 1:
            raise UsageError(f"A takes {n + 1} arguments, got {len(ns.args)}")
        res = reduce(App("A", tuple(Num(v) for v in ns.args)), prog, ns.fuel, {"f": base})
        if isinstance(res, Value):
            print(f"A{tuple(ns.args)} = {res.value}", file=out)
        else:
            print(f"A{tuple(ns.args)}: out of fuel after {res.steps} steps", file=out)
            status = NEGATIVE
    if ns.grid is not None:
        report = check_fa_equivalence(n, base, [ns.grid] * (n + 1), ns.fuel, ns.budget, prog)
        print(
            f"FA check: {report.count('agree')} agree, {report.count('disagree')} disagree, "
            f"{report.count('budget')} over budget",
            file=out,
        )
        if not report.ok:
            status = NEGATIVE
    return status


def cmd_monitor(ns, out) -> int:
    cfg = build_config(ns)
    rep = monitor(cfg.program, cfg.desc(), cfg.program.entry.name, cfg.args, cfg.fuel, cfg.ops)
    print(f"{rep.checked} transitions checked, {len(rep.violations)} violations", file=out)
    for st in rep.violations:
        print(f"  {st.source} -> {st.target} via {st.call}", file=out)
    if rep.value is None:
        print(f"out of fuel after {rep.steps} steps", file=out)
    return OK if rep.ok else NEGATIVE


# argument parsing -------------------------------------------------------


def _add_program(sp: argparse.ArgumentParser, args: bool = False, desc: bool = False) -> None:
    sp.add_argument("program", help="program file, or the name of a bundled example")
    if args:
        sp.add_argument("args", nargs="*", type=int, help="entry arguments")
        sp.add_argument("--fuel", type=int, default=100_000)
        sp.add_argument("--op", action="append", metavar="NAME=SPEC",
                        help="interpret a primitive (succ, affine:a,b, table:..., or add/sub/mul/max/min/pred)")
    if desc:
        sp.add_argument("--desc", help="description file (default: extracted from the program)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sct", description="Size-change termination toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("parse", help="parse and pretty-print a program")
    _add_program(sp)
    sp.set_defaults(func=cmd_parse)

    sp = sub.add_parser("run", help="evaluate the entry function")
    _add_program(sp, args=True)
    sp.add_argument("--trace", action="store_true", help="print every reduction step")
    sp.add_argument("--format", choices=("human", "tsv"), default="human")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("graphs", help="extract a size-change description")
    _add_program(sp)
    sp.add_argument("-o", "--output", help="write the description here")
    sp.set_defaults(func=cmd_graphs)

    sp = sub.add_parser("closure", help="list the composition closure")
    _add_program(sp, desc=True)
    sp.set_defaults(func=cmd_closure)

    sp = sub.add_parser("check", help="decide ISCT for a description")
    _add_program(sp, desc=True)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("trace", help="assign descending ordinals to a run")
    _add_program(sp, args=True, desc=True)
    sp.add_argument("--tail", action="store_true", help="use the tail-recursive weighting")
    sp.add_argument("--budget", type=int, default=10**6, help="machine steps for the tail length bound")
    sp.add_argument("--format", choices=("human", "tsv"), default="human")
    sp.set_defaults(func=cmd_trace)

    sp = sub.add_parser("fgh", help="evaluate the fast-growing hierarchy")
    sp.add_argument("--alpha", required=True, help="ordinal, e.g. 'w^2+1'")
    sp.add_argument("--x", type=int, required=True)
    sp.add_argument("--base", default="succ", help="succ, affine:a,b or table:v0,v1,...")
    sp.add_argument("--budget", type=int, default=10**6)
    sp.add_argument("--trace", action="store_true", help="print machine states")
    sp.set_defaults(func=cmd_fgh)

    sp = sub.add_parser("ackermann", help="generate, run and cross-check the n-ary Ackermann program")
    sp.add_argument("n", type=int)
    sp.add_argument("args", nargs="*", type=int)
    sp.add_argument("--base", default="succ")
    sp.add_argument("--fuel", type=int, default=10**6)
    sp.add_argument("--budget", type=int, default=10**6)
    sp.add_argument("--grid", type=int, metavar="B", help="compare with the machine on all inputs up to B")
    sp.set_defaults(func=cmd_ackermann)

    sp = sub.add_parser("monitor", help="check observed transitions against a description")
    _add_program(sp, args=True, desc=True)
    sp.set_defaults(func=cmd_monitor)
    return ap


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    ns = build_parser().parse_args(argv)
    try:
        return ns.func(ns, out)
    except (UsageError, ProgramError, DescriptionError, MissingOpInterpretation, O.OrdinalError, OSError) as exc:
        print(f"sct: error: {exc}", file=sys.stderr)
        return USAGE
    except (TracerError, RamseyOverflow) as exc:
        print(f"sct: {type(exc).__name__}: {exc}", file=sys.stderr)
        return NEGATIVE


if __name__ == "__main__":
    sys.exit(main())
