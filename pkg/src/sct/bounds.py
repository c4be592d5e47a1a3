"""Descending ordinal assignments along reductions, and tail-recursive length bounds.

Every defined-function subterm of the current term carries a :class:`SubtermTag`:
a chain of state transitions ``(f_0, u_0) -> ... -> (f_l, u_l)`` through graphs of
the description's closure, kept shorter than the Ramsey bound by folding.  The
chain's flattened values are mapped into ``w^w`` by :func:`~sct.ordinal.gamma_p`;
the term's ordinal is the natural sum of one power of ``w`` per subterm.
"""

from __future__ import annotations

import graphlib
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Union

from . import ordinal as O
from .fgh import FValue, compute_F
from .lang import Apply, Call, IfThenElse, Program, body_size, calls_of, format_position, positions
from .ordinal import Ordinal
from .rewrite import Ops, Value, _contract, find_redex, reduce, resolve_ops
from .scg import (
    Description, Folding, SizeChangeGraph, check_isct, closure, find_folding, find_inner_folding,
    graph_holds, ramsey_bound,
)
from .terms import App, Num, Term, format_term, replace_at, subterm_at, term_positions


class TracerError(RuntimeError):
    pass


class StemNotFound(TracerError):
    pass


class UnsafeDescription(TracerError):
    pass


class MonotonicityViolation(TracerError):
    pass


class ShapeError(TracerError):
    pass


class NotTailRecursive(TracerError):
    def __init__(self, function: str, position):
        self.function = function
        self.position = position
        super().__init__(f"{function}: recursive call at {format_position(position)} is not in tail position")


class MutualRecursion(TracerError):
    def __init__(self, cycle: Sequence[str]):
        self.cycle = tuple(cycle)
        super().__init__("mutual recursion: " + " -> ".join(self.cycle))


# stems -----------------------------------------------------------------

DISJOINT, STRICTLY_ABOVE, EQUAL = "Disjoint", "StrictlyAbove", "Equal"


def _is_prefix(a: Sequence[int], b: Sequence[int]) -> bool:
    return len(a) <= len(b) and tuple(b[: len(a)]) == tuple(a)


def stem_of(t_n: Term, rho: Sequence[int], s_pos: Sequence[int], p: Program | None = None):
    """Position in ``t_n`` that a defined-function subterm at ``s_pos`` of the next term stems from."""
    rho, s_pos = tuple(rho), tuple(s_pos)
    if _is_prefix(rho, s_pos):
        sigma, case = rho, EQUAL
    elif _is_prefix(s_pos, rho):
        sigma, case = s_pos, STRICTLY_ABOVE
    else:
        sigma, case = s_pos, DISJOINT
    try:
        node = subterm_at(t_n, sigma)
    except IndexError:
        raise StemNotFound(f"no subterm at {format_position(sigma)}") from None
    if not isinstance(node, App) or (p is not None and not p.is_function(node.head)):
        raise StemNotFound(f"subterm at {format_position(sigma)} is not a defined-function application")
    return sigma, case


# tags ------------------------------------------------------------------


@dataclass(frozen=True)
class SubtermTag:
    funcs: tuple[str, ...]  # f_0 .. f_l
    states: tuple[tuple[int, ...], ...]  # u_0 .. u_l
    graphs: tuple[SizeChangeGraph, ...]  # G_0 .. G_{l-1}
    pending: Call | None  # call from (f_l, u_l) to this subterm when it is not proper
    proper: bool
    flat: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "flat", tuple(v for s in self.states for v in s))

    def moved(self, pending: Call | None, proper: bool) -> SubtermTag:
        return SubtermTag(self.funcs, self.states, self.graphs, pending, proper)


@dataclass(frozen=True, slots=True)
class TracerParams:
    m: int
    r: int
    p_len: int
    a: int
    closure_size: int


def tracer_params(p: Program, d: Description) -> TracerParams:
    c = len(closure(d.graphs.values()))
    m = ramsey_bound(max(c, 1))
    r = max(fd.arity for fd in p.defs)
    a = max(1, max(body_size(fd.body) for fd in p.defs))
    return TracerParams(m, r, (m + 1) * r, a, c)


@dataclass(frozen=True)
class FoldEvent:
    step: int
    split: tuple[int, int]
    end: int
    H: SizeChangeGraph


@dataclass(frozen=True)
class TraceStep:
    step: int
    rho: tuple[int, ...] | None  # redex reduced from this term (None once a numeral)
    proper: bool
    alpha: Ordinal
    parts: tuple[tuple[tuple[int, ...], Ordinal], ...] = field(repr=False)
    term: str = field(default="", repr=False)


@dataclass(frozen=True)
class TraceResult:
    params: TracerParams
    steps: tuple[TraceStep, ...]
    value: int | None
    folds: tuple[FoldEvent, ...]
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def alphas(self) -> list[Ordinal]:
        return [s.alpha for s in self.steps]

    @property
    def terminated(self) -> bool:
        return self.value is not None

    def weak_descent(self) -> bool:
        a = self.alphas
        return all(x >= y for x, y in zip(a, a[1:]))

    def strict_on_proper(self) -> bool:
        return all(s.alpha > t.alpha for s, t in zip(self.steps, self.steps[1:]) if s.proper)

    def max_alpha(self) -> Ordinal:
        return max(self.alphas, default=O.ZERO)

    def tsv(self) -> list[str]:
        folds = {}
        for ev in self.folds:
            folds.setdefault(ev.step, []).append(ev)
        lines = []
        for s in self.steps:
            flag = "-" if s.rho is None else ("P" if s.proper else "O")
            pos = "-" if s.rho is None else format_position(s.rho)
            note = "".join(f"\tfold({ev.split[0]},{ev.split[1]},{ev.end}) H={ev.H}" for ev in folds.get(s.step, ()))
            lines.append(f"{s.step}\t{flag}\t{pos}\t{O.format_ordinal(s.alpha)}{note}")
        return lines


Weight = Callable[[SubtermTag, str, Ordinal], Ordinal]


class _Engine:
    def __init__(self, p: Program, d: Description, params: TracerParams, weight: Weight, ops, check: bool):
        self.p = p
        self.d = d
        self.params = params
        self.weight = weight
        self.ops = resolve_ops(p, ops)
        self.check = check
        self.folds: list[FoldEvent] = []
        self._gamma: dict[tuple[int, ...], Ordinal] = {}
        self.step = 0

    def gamma(self, tag: SubtermTag) -> Ordinal:
        g = self._gamma.get(tag.flat)
        if g is None:
            g = O.gamma_p(tag.flat, self.params.p_len)
            self._gamma[tag.flat] = g
        return g

    def ordinal(self, tag: SubtermTag, head: str) -> Ordinal:
        return self.weight(tag, head, self.gamma(tag))

    # construction ------------------------------------------------------

    def extend(self, tag: SubtermTag, call: Call, w: tuple[int, ...]) -> SubtermTag:
        G = self.d[call]
        u_l = tag.states[-1]
        if not graph_holds(G, u_l, w):
            raise UnsafeDescription(
                f"transition ({call.source}, {u_l}) -> ({call.target}, {w}) via {call} violates {G}"
            )
        graphs = tag.graphs + (G,)
        states = tag.states + (w,)
        funcs = tag.funcs + (call.target,)
        if len(graphs) < self.params.m:
            return SubtermTag(funcs, states, graphs, None, True)
        fold = find_folding(graphs) or find_inner_folding(graphs)
        if fold is None:
            raise TracerError(f"multipath of length {len(graphs)} is not foldable")
        return self.fold(tag, funcs, states, graphs, fold)

    def fold(self, old: SubtermTag, funcs, states, graphs, fold: Folding) -> SubtermTag:
        i, j = fold.split
        k = fold.stop(len(graphs))
        H = fold.H
        strict = {a.src for a in H.arcs if a.strict and a.src == a.dst}
        if not strict:
            raise TracerError(f"idempotent {H} has no strict self-arc; the description is not ISCT")
        u_i, u_j = states[i], states[j]
        v_i = tuple(u_j[x] if x in strict else u_i[x] for x in range(len(u_i)))
        new = SubtermTag(
            funcs[: i + 1] + funcs[k:],
            states[:i] + (v_i,) + states[k:],
            graphs[:i] + (H,) + graphs[k:],
            None,
            True,
        )
        self.folds.append(FoldEvent(self.step, (i, j), k, H))
        if self.check:
            self.validate(new)
            if not O.is_above(old.flat, new.flat, self.params.p_len):
                raise MonotonicityViolation(f"fold at step {self.step} did not move below the previous sequence")
        return new

    def validate(self, tag: SubtermTag, node: App | None = None) -> None:
        """Conditions (a)-(c): consistent chain, proper endpoint, pending call."""
        if len(tag.funcs) != len(tag.states) or len(tag.graphs) != len(tag.states) - 1:
            raise TracerError("malformed tag")
        for idx, G in enumerate(tag.graphs):
            if (G.source, G.target) != (tag.funcs[idx], tag.funcs[idx + 1]):
                raise TracerError(f"graph {G} does not link {tag.funcs[idx]} and {tag.funcs[idx + 1]}")
            if not graph_holds(G, tag.states[idx], tag.states[idx + 1]):
                raise UnsafeDescription(f"recorded transition {idx} violates {G}")
        if len(tag.flat) >= self.params.p_len:
            raise TracerError("sequence longer than the padding length")
        if node is not None:
            if tag.proper:
                if tag.funcs[-1] != node.head or tag.states[-1] != tuple(a.value for a in node.args):
                    raise TracerError("proper subterm does not match the end of its chain")
            elif tag.pending is None or tag.pending.source != tag.funcs[-1] or tag.pending.target != node.head:
                raise TracerError("non-proper subterm lacks a matching pending call")

    def run(self, entry: str, args: Sequence[int], fuel: int) -> TraceResult:
        p = self.p
        t: Term = App(entry, tuple(Num(v) for v in args))
        tags: dict[tuple[int, ...], SubtermTag] = {(): SubtermTag((entry,), (tuple(args),), (), None, True)}
        out: list[TraceStep] = []
        value = None
        for n in range(fuel + 1):
            self.step = n
            parts = tuple((pos, self.ordinal(tag, subterm_at(t, pos).head)) for pos, tag in sorted(tags.items()))
            alpha = O.nat_sum(*(o for _, o in parts)) if parts else O.ZERO
            r = find_redex(t, p)
            out.append(TraceStep(n, r.position if r else None, bool(r and r.proper), alpha, parts, format_term(t, 120)))
            if self.check:
                self.check_step(out, parts)
            if r is None:
                value = t.value
                break
            if n == fuel:
                break
            rho = r.position
            t_next = replace_at(t, rho, _contract(r, p, self.ops))
            new_tags: dict[tuple[int, ...], SubtermTag] = {}
            for pos, tag in tags.items():
                if pos == rho:
                    continue
                if _is_prefix(pos, rho):
                    node = subterm_at(t_next, pos)
                    if all(isinstance(a, Num) for a in node.args):
                        new_tags[pos] = self.extend(tag, tag.pending, tuple(a.value for a in node.args))
                    else:
                        new_tags[pos] = tag
                else:
                    new_tags[pos] = tag
            if r.proper:
                parent = tags[rho]
                sub = subterm_at(t_next, rho)
                for rel, node in term_positions(sub):
                    if not (isinstance(node, App) and p.is_function(node.head)):
                        continue
                    f, u, tau = node.origin
                    call = Call(tau, f, node.head)
                    if all(isinstance(a, Num) for a in node.args):
                        new_tags[rho + rel] = self.extend(parent, call, tuple(a.value for a in node.args))
                    else:
                        new_tags[rho + rel] = parent.moved(call, False)
            if self.check:
                for pos, tag in new_tags.items():
                    self.validate(tag, subterm_at(t_next, pos))
                    stem_of(t, rho, pos, p)
                self.check_case3(tags, new_tags, rho, r.proper, t, t_next)
            t, tags = t_next, new_tags
        return TraceResult(self.params, tuple(out), value, tuple(self.folds))

    def check_step(self, out: list[TraceStep], parts) -> None:
        cur = out[-1]
        if not cur.alpha < O.omega_tower(3):
            raise MonotonicityViolation(f"ordinal at step {cur.step} is not below w_3")
        if len(out) < 2:
            return
        prev = out[-2]
        if prev.alpha < cur.alpha or (prev.proper and not prev.alpha > cur.alpha):
            raise MonotonicityViolation(
                f"step {prev.step} -> {cur.step} ({'proper' if prev.proper else 'operator'}): "
                f"{O.format_ordinal(prev.alpha)} then {O.format_ordinal(cur.alpha)}"
            )

    def check_case3(self, tags, new_tags, rho, proper, t, t_next) -> None:
        """Per-stem comparison: the reduced proper subterm strictly outweighs its offspring."""
        if not proper:
            return
        before = self.ordinal(tags[rho], subterm_at(t, rho).head)
        after = [
            self.ordinal(tag, subterm_at(t_next, pos).head)
            for pos, tag in new_tags.items()
            if _is_prefix(rho, pos)
        ]
        if not before > (O.nat_sum(*after) if after else O.ZERO):
            raise MonotonicityViolation(f"reduced subterm at {format_position(rho)} does not outweigh its offspring")


def _require_isct(d: Description) -> None:
    verdict = check_isct(d)
    if not verdict:
        raise TracerError(f"description is not ISCT (witness {verdict.witness})")


def trace_ordinals(
    p: Program,
    d: Description,
    entry_args: Sequence[int],
    fuel: int = 10_000,
    ops: Ops | None = None,
    entry: str | None = None,
    check: bool = True,
) -> TraceResult:
    """Run the program from its entry and assign an ordinal below ``w_3`` to every term.

    With ``check`` on, any failure of descent, safety or tag invariants raises.
    """
    if any(fd.arity == 0 for fd in p.defs):
        raise TracerError("nullary functions are not supported by the tracer")
    _require_isct(d)
    params = tracer_params(p, d)
    a = params.a

    def weight(tag: SubtermTag, head: str, gamma: Ordinal) -> Ordinal:
        base = O.omega_pow(gamma)
        return O.mul_nat(base, a) if tag.proper else base

    eng = _Engine(p, d, params, weight, ops, check)
    return eng.run(entry or p.entry.name, entry_args, fuel)


# the illustrative Ackermann assignment -----------------------------------


def ackermann_example_ordinals(x: int, y: int, steps: int, p: Program | None = None) -> list[Ordinal]:
    """Direct assignment ``w^(w*u+v)`` per Ackermann subterm, doubled when proper.

    A subterm still waiting for its argument inherits the exponent of the
    application whose unfolding created it.
    """
    if p is None:
        from .corpus import load_program

        p = load_program("ackermann")
    if len(p.defs) != 1 or p.defs[0].arity != 2 or p.primitives:
        raise ShapeError("expected a single binary function")
    name = p.entry.name

    def exponent(u: int, v: int) -> Ordinal:
        return O.add(O.mul_nat(O.OMEGA, u), Ordinal.of(v))

    t: Term = App(name, (Num(x), Num(y)))
    out: list[Ordinal] = []
    while len(out) < steps:
        parts = []
        for _, node in term_positions(t):
            if not isinstance(node, App):
                continue
            if all(isinstance(a, Num) for a in node.args):
                parts.append(O.mul_nat(O.omega_pow(exponent(*(a.value for a in node.args))), 2))
            elif node.origin is not None:
                parts.append(O.omega_pow(exponent(*node.origin[1])))
            else:
                raise ShapeError("non-numeric subterm without a creating step")
        out.append(O.nat_sum(*parts) if parts else O.ZERO)
        r = find_redex(t, p)
        if r is None:
            break
        t = replace_at(t, r.position, _contract(r, p, {}))
    return out


# tail recursion ----------------------------------------------------------


@dataclass(frozen=True)
class TailOrder:
    order: tuple[str, ...]
    entry_index: int

    def index(self, name: str) -> int:
        return self.order.index(name)


def tail_order(p: Program) -> TailOrder:
    """Order functions so that each body only mentions itself and earlier functions."""
    deps: dict[str, set[str]] = {fd.name: set() for fd in p.defs}
    for fd in p.defs:
        for tau, node in positions(fd.body):
            if not (isinstance(node, Apply) and p.is_function(node.head)):
                continue
            if node.head != fd.name:
                deps[fd.name].add(node.head)
                continue
            parent = fd.body
            for step in tau:
                if isinstance(parent, Apply):
                    raise NotTailRecursive(fd.name, tau)
                parent = (parent.then, parent.else_)[step] if isinstance(parent, IfThenElse) else parent
    sorter = graphlib.TopologicalSorter(deps)
    try:
        sorter.prepare()
    except graphlib.CycleError as exc:
        raise MutualRecursion(exc.args[1]) from None
    rank = {name: i for i, name in enumerate(p.functions)}
    order: list[str] = []
    while sorter.is_active():
        ready = sorted(sorter.get_ready(), key=rank.__getitem__)
        order.extend(ready)
        sorter.done(*ready)
    return TailOrder(tuple(order), order.index(p.entry.name))


def trace_tail_ordinals(
    p: Program,
    d: Description,
    entry_args: Sequence[int],
    fuel: int = 10_000,
    ops: Ops | None = None,
    check: bool = True,
) -> TraceResult:
    """Tracer for tail-recursive programs: level ``j`` functions weigh ``w^((p+1)*j) * (w*gamma + [proper])``.

    The result's ``extra`` records the entry level and whether every ordinal
    stayed below ``w^(p*i+1)`` and below ``w^((p+1)*(i+1)+1)``.
    """
    order = tail_order(p)
    _require_isct(d)
    params = tracer_params(p, d)
    spacing = params.p_len + 1
    level = {name: Ordinal.of(spacing * order.index(name)) for name in order.order}

    def weight(tag: SubtermTag, head: str, gamma: Ordinal) -> Ordinal:
        inner = O.mul(O.OMEGA, gamma)
        if tag.proper:
            inner = O.add(inner, O.ONE)
        return O.mul(O.omega_pow(level[head]), inner)

    eng = _Engine(p, d, params, weight, ops, check)
    res = eng.run(p.entry.name, entry_args, fuel)
    i = order.entry_index
    top = res.max_alpha()
    stated = O.omega_pow(Ordinal.of(params.p_len * i + 1))
    internal = O.omega_pow(Ordinal.of(spacing * (i + 1) + 1))
    res.extra.update(
        entry_index=i,
        below_stated_bound=top < stated,
        below_internal_bound=top < internal,
        order=order.order,
    )
    if check and not top < internal:
        raise MonotonicityViolation("tail ordinals exceeded their level bound")
    return res


@dataclass(frozen=True)
class TailBound:
    level: int  # entry index i in the tail order
    ordinal_index: int  # p*i + 2
    base_offset: int  # f(x) = 2x + 2 + base_offset
    bound: int | None  # F_{p*i+2, f}(0), None when the budget ran out
    observed_proper_steps: int | None

    @property
    def holds(self) -> bool | None:
        if self.bound is None or self.observed_proper_steps is None:
            return None
        return self.observed_proper_steps < self.bound

    def describe(self) -> str:
        bound = str(self.bound) if self.bound is not None else f"F_{{{self.ordinal_index},f}}(0) (budget exhausted)"
        return f"observed {self.observed_proper_steps} proper steps; bound {bound}"


def tail_length_bound(
    p: Program,
    d: Description,
    entry_args: Sequence[int],
    step_budget: int = 10**6,
    fuel: int = 10**6,
    ops: Ops | None = None,
) -> TailBound:
    order = tail_order(p)
    params = tracer_params(p, d)
    i = order.entry_index
    offset = max(list(entry_args) + [params.p_len])

    def f(x: int) -> int:
        return 2 * x + 2 + offset

    idx = params.p_len * i + 2
    res = compute_F(f, idx, 0, step_budget)
    run = reduce(App(p.entry.name, tuple(Num(v) for v in entry_args)), p, fuel, ops)
    observed = run.proper_steps if isinstance(run, Value) else None
    return TailBound(i, idx, offset, res.value if isinstance(res, FValue) else None, observed)


__all__ = [
    "TracerError", "StemNotFound", "UnsafeDescription", "MonotonicityViolation", "ShapeError",
    "NotTailRecursive", "MutualRecursion", "DISJOINT", "STRICTLY_ABOVE", "EQUAL", "stem_of",
    "SubtermTag", "TracerParams", "tracer_params", "FoldEvent", "TraceStep", "TraceResult",
    "trace_ordinals", "ackermann_example_ordinals", "TailOrder", "tail_order",
    "trace_tail_ordinals", "TailBound", "tail_length_bound", "calls_of",
]
