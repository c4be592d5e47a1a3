"""The fast-growing hierarchy through its stack machine, and generalized Ackermann programs."""

from __future__ import annotations

import itertools
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Union

from . import ordinal as O
from .lang import Program, format_program, parse_program
from .ordinal import Ordinal
from .rewrite import App, Num, Value, reduce

BaseFn = Callable[[int], int]


@dataclass(frozen=True, slots=True)
class FghState:
    """``stack`` lists the pending ordinals with the top on the right."""

    stack: tuple[Ordinal, ...]
    value: int

    @property
    def halted(self) -> bool:
        return not self.stack


def h_value(s: FghState) -> Ordinal:
    """Natural sum of ``w^a`` over the stack; strictly decreases along the machine."""
    return O.nat_sum(*(O.omega_pow(a) for a in s.stack)) if s.stack else O.ZERO


def k_step(f: BaseFn, s: FghState) -> FghState:
    if not s.stack:
        return s
    *rest, top = s.stack
    x = s.value
    if top.is_zero():
        return FghState(tuple(rest), f(x))
    if top.is_successor():
        beta = O.predecessor(top)
        return FghState(tuple(rest) + (beta,) * (x + 1), 1)
    return FghState(tuple(rest) + (O.fund_seq(top, x),), x)


@dataclass(frozen=True, slots=True)
class FghTraceEntry:
    step: int
    state: FghState
    h: Ordinal


@dataclass(frozen=True, slots=True)
class FValue:
    value: int
    steps: int
    trace: tuple[FghTraceEntry, ...] = field(default=(), repr=False)


@dataclass(frozen=True, slots=True)
class FBudget:
    state: FghState
    steps: int
    trace: tuple[FghTraceEntry, ...] = field(default=(), repr=False)


def compute_F(
    f: BaseFn, alpha: Ordinal | int, x: int, step_budget: int, trace: bool = False
) -> Union[FValue, FBudget]:
    """Run the machine from ``(<alpha>, x)`` until the stack empties or the budget runs out."""
    if isinstance(alpha, int):
        alpha = Ordinal.of(alpha)
    s = FghState((alpha,), x)
    entries: list[FghTraceEntry] = []
    steps = 0
    while True:
        if trace:
            entries.append(FghTraceEntry(steps, s, h_value(s)))
        if s.halted:
            return FValue(s.value, steps, tuple(entries))
        if steps >= step_budget:
            return FBudget(s, steps, tuple(entries))
        top = s.stack[-1]
        # every pushed entry costs at least one more step to pop
        if top.is_successor() and len(s.stack) + s.value > step_budget - steps:
            return FBudget(s, steps, tuple(entries))
        s = k_step(f, s)
        steps += 1


def alpha_of(xs: Sequence[int]) -> Ordinal:
    n = len(xs)
    if n < 1:
        raise ValueError("alpha_of needs at least one coordinate")
    return Ordinal.from_terms((Ordinal.of(n - 1 - i), c) for i, c in enumerate(xs) if c)


@dataclass(frozen=True, slots=True)
class Descending:
    length: int


@dataclass(frozen=True, slots=True)
class Violation:
    index: int  # the pair (index, index + 1) fails to descend


def descending_witness(seq: Sequence[Ordinal]) -> Union[Descending, Violation]:
    """Check that ``seq`` strictly descends until it first hits zero."""
    for i in range(len(seq) - 1):
        if seq[i].is_zero():
            break
        if not seq[i] > seq[i + 1]:
            return Violation(i)
    return Descending(len(seq))


# base functions ---------------------------------------------------------


def parse_base(spec: str) -> BaseFn:
    """``succ``, ``affine:a,b`` (``x -> a*x + b``) or ``table:v0,v1,...`` (``v_x``, last value repeated)."""
    spec = spec.strip()
    if spec == "succ":
        return lambda x: x + 1
    kind, _, params = spec.partition(":")
    try:
        nums = [int(v) for v in params.split(",")] if params else []
    except ValueError:
        raise ValueError(f"bad base function {spec!r}") from None
    if kind == "affine" and len(nums) == 2 and min(nums) >= 0:
        a, b = nums
        return lambda x: a * x + b
    if kind == "table" and nums and min(nums) >= 0:
        vals = tuple(nums)
        return lambda x: vals[min(x, len(vals) - 1)]
    raise ValueError(f"bad base function {spec!r}")


# generalized Ackermann --------------------------------------------------


def ackermann_source(n: int, name: str = "A", base: str = "f") -> str:
    """Source text of the ``n``-ary generalized Ackermann function over the primitive ``base``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    xs = [f"x{i}" for i in range(1, n + 1)]
    params = xs + ["y"]

    def call(args: Sequence[str]) -> str:
        return f"{name}({', '.join(args)})"

    def zeros(vs: Sequence[str]) -> list[str]:
        return [f"{v} = 0" for v in vs]

    branches = [(" && ".join(zeros(xs)), f"{base}(y)")]
    for i in range(1, n):
        guard = " && ".join([f"!({xs[i - 1]} = 0)"] + zeros(xs[i:]))
        args = xs[: i - 1] + [f"{xs[i - 1]} - 1", "y"] + xs[i + 1 :] + ["y"]
        branches.append((guard, call(args)))
    dec = xs[:-1] + [f"{xs[-1]} - 1"]
    branches.append((f"!({xs[-1]} = 0) && y = 0", call(dec + ["1"])))
    final = call(dec + [call(xs + ["y - 1"])])
    lines = [f"primitive {base}/1", f"{name}({', '.join(params)}) ="]
    for k, (guard, rhs) in enumerate(branches):
        lead = "if" if k == 0 else "else if"
        lines.append(f"    {lead} {guard} then {rhs}")
    lines.append(f"    else {final}")
    return "\n".join(lines) + "\n"


def gen_ackermann_program(n: int) -> Program:
    return parse_program(ackermann_source(n))


@dataclass(frozen=True, slots=True)
class FaRow:
    xs: tuple[int, ...]
    y: int
    interp: int | None
    machine: int | None
    interp_steps: int | None
    machine_steps: int | None

    @property
    def status(self) -> str:
        if self.interp is None or self.machine is None:
            return "budget"
        return "agree" if self.interp == self.machine else "disagree"


@dataclass(frozen=True)
class FaReport:
    n: int
    rows: tuple[FaRow, ...]

    def count(self, status: str) -> int:
        return sum(1 for r in self.rows if r.status == status)

    @property
    def ok(self) -> bool:
        return self.count("disagree") == 0

    def step_mismatches(self) -> list[FaRow]:
        """Completed rows whose interpreter step count differs from the machine's."""
        return [r for r in self.rows if r.status == "agree" and r.interp_steps != r.machine_steps]


def check_fa_equivalence(
    n: int,
    f: BaseFn,
    bounds: Sequence[int],
    fuel: int = 10**6,
    step_budget: int = 10**6,
    program: Program | None = None,
) -> FaReport:
    """Compare the rewrite interpreter on the Ackermann program with the machine.

    ``bounds`` lists inclusive maxima for ``x1..xn`` followed by ``y``.
    """
    if len(bounds) != n + 1:
        raise ValueError(f"need {n + 1} bounds, got {len(bounds)}")
    prog = program or gen_ackermann_program(n)
    name = prog.entry.name
    ops = {"f": f}
    rows = []
    for tup in itertools.product(*(range(b + 1) for b in bounds)):
        xs, y = tup[:-1], tup[-1]
        res = reduce(App(name, tuple(Num(v) for v in tup)), prog, fuel, ops)
        mres = compute_F(f, alpha_of(xs), y, step_budget)
        rows.append(
            FaRow(
                tuple(xs),
                y,
                res.value if isinstance(res, Value) else None,
                mres.value if isinstance(mres, FValue) else None,
                res.steps if isinstance(res, Value) else None,
                mres.steps if isinstance(mres, FValue) else None,
            )
        )
    return FaReport(n, tuple(rows))


__all__ = [
    "FghState", "FghTraceEntry", "FValue", "FBudget", "Descending", "Violation", "FaRow",
    "FaReport", "h_value", "k_step", "compute_F", "alpha_of", "descending_witness",
    "parse_base", "ackermann_source", "gen_ackermann_program", "check_fa_equivalence",
    "format_program",
]
