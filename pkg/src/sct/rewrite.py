"""Leftmost reduction of ground terms, state transitions and activation trees.

A redex is the leftmost application whose arguments are all numerals, so the
reduction order is call-by-value, left to right.  :func:`reduce` runs the same
order on an explicit stack instead of re-searching the whole term every step.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Union

from .lang import Call, Position, Program, calls_of, format_position, instantiate
from .terms import App, Num, Term, format_term, replace_at, subterm_at, term_size

__all__ = [
    "App", "Num", "Term", "Redex", "MissingOpInterpretation", "STANDARD_OPS",
    "resolve_ops", "find_redex", "one_step", "Value", "OutOfFuel", "reduce",
    "trace_lines", "StateTransition", "state_transitions", "TreeNode",
    "ActivationTree", "activation_tree", "Terminates", "Unknown", "terminates_on",
    "innermost_eval", "format_term", "subterm_at", "replace_at", "term_size",
]

Ops = Mapping[str, Callable[..., int]]


class MissingOpInterpretation(LookupError):
    pass


def _tsub(a: int, b: int) -> int:
    return a - b if a > b else 0


STANDARD_OPS: dict[str, Callable[..., int]] = {
    "add": lambda a, b: a + b,
    "sub": _tsub,
    "mul": lambda a, b: a * b,
    "max": max,
    "min": min,
    "succ": lambda a: a + 1,
    "pred": lambda a: _tsub(a, 1),
}


def resolve_ops(p: Program, ops: Ops | None = None) -> dict[str, Callable[..., int]]:
    """Interpretations for every declared primitive, falling back on :data:`STANDARD_OPS`."""
    table = {}
    for name in p.primitives:
        if ops is not None and name in ops:
            table[name] = ops[name]
        elif name in STANDARD_OPS:
            table[name] = STANDARD_OPS[name]
        else:
            raise MissingOpInterpretation(f"no interpretation supplied for primitive {name!r}")
    return table


@dataclass(frozen=True, slots=True)
class Redex:
    position: Position
    head: str
    args: tuple[int, ...]
    kind: str  # "fun" or "op"

    @property
    def proper(self) -> bool:
        return self.kind == "fun"


def find_redex(t: Term, p: Program | None = None) -> Redex | None:
    if isinstance(t, Num):
        return None
    pos: list[int] = []
    while True:
        for i, a in enumerate(t.args):
            if isinstance(a, App):
                pos.append(i)
                t = a
                break
        else:
            kind = "op" if p is not None and p.is_primitive(t.head) else "fun"
            return Redex(tuple(pos), t.head, tuple(a.value for a in t.args), kind)


def _contract(r: Redex, p: Program, ops: Ops) -> Term:
    if p.is_function(r.head):
        return instantiate(p, r.head, r.args)
    try:
        fn = ops[r.head]
    except KeyError:
        raise MissingOpInterpretation(f"no interpretation for primitive {r.head!r}") from None
    return Num(int(fn(*r.args)))


def one_step(t: Term, p: Program, ops: Ops | None = None) -> Term | None:
    r = find_redex(t, p)
    if r is None:
        return None
    table = ops if ops is not None else resolve_ops(p)
    return replace_at(t, r.position, _contract(r, p, table))


@dataclass(frozen=True, slots=True)
class Value:
    value: int
    steps: int
    proper_steps: int


@dataclass(frozen=True, slots=True)
class OutOfFuel:
    last: Term
    steps: int
    proper_steps: int


Outcome = Union[Value, OutOfFuel]
# called with (origin of the redex node, head, numeral args) before each proper step
CallHook = Callable[[object, str, tuple[int, ...]], None]


def reduce(
    t: Term,
    p: Program,
    fuel: int,
    ops: Ops | None = None,
    on_call: CallHook | None = None,
) -> Outcome:
    """Reduce ``t`` for at most ``fuel`` steps, counting proper (defined-function) steps apart."""
    table = resolve_ops(p, ops)
    steps = proper = 0
    # frames: [node, evaluated argument values, index of the next argument]
    stack: list[list] = []
    cur: Term | None = t
    while True:
        while isinstance(cur, App):
            stack.append([cur, [], 0])
            cur = cur.args[0] if cur.args else None
        while True:
            if cur is not None:
                if not stack:
                    return Value(cur.value, steps, proper)
                frame = stack[-1]
                frame[1].append(cur.value)
                frame[2] += 1
            frame = stack[-1]
            node = frame[0]
            if frame[2] < len(node.args):
                cur = node.args[frame[2]]
                break
            if steps >= fuel:
                return OutOfFuel(_rebuild(stack), steps, proper)
            stack.pop()
            args = tuple(frame[1])
            steps += 1
            if p.is_function(node.head):
                proper += 1
                if on_call is not None:
                    on_call(node.origin, node.head, args)
                cur = instantiate(p, node.head, args)
                break
            cur = Num(int(table[node.head](*args)))


def _rebuild(stack: list[list]) -> Term:
    """Reassemble the current term from machine frames (innermost frame last)."""
    result = None
    for node, done, idx in reversed(stack):
        if result is None:
            result = App(node.head, tuple(Num(v) for v in done) + node.args[idx:], node.origin)
        else:
            args = tuple(Num(v) for v in done) + (result,) + node.args[idx + 1 :]
            result = App(node.head, args, node.origin)
    return result


def trace_lines(
    t: Term, p: Program, fuel: int, ops: Ops | None = None, width: int = 100
) -> tuple[list[str], Term]:
    """One line per step: index, P (proper) or O (operator), redex position, resulting term."""
    table = resolve_ops(p, ops)
    lines = []
    for i in range(fuel):
        r = find_redex(t, p)
        if r is None:
            break
        t = replace_at(t, r.position, _contract(r, p, table))
        flag = "P" if r.proper else "O"
        lines.append(f"{i}\t{flag}\t{format_position(r.position)}\t{format_term(t, width)}")
    return lines, t


def innermost_eval(t: Term, p: Program, ops: Ops | None = None, depth: int = 10_000) -> int:
    """Plain recursive evaluator, used as an independent reference for :func:`reduce`."""
    table = resolve_ops(p, ops)

    def ev(x: Term, d: int) -> int:
        if d > depth:
            raise RecursionError("evaluation too deep")
        if isinstance(x, Num):
            return x.value
        vals = [ev(a, d + 1) for a in x.args]
        if p.is_function(x.head):
            return ev(instantiate(p, x.head, vals), d + 1)
        return int(table[x.head](*vals))

    return ev(t, 0)


# state transitions -----------------------------------------------------


@dataclass(frozen=True, slots=True)
class StateTransition:
    source: tuple[str, tuple[int, ...]]
    call: Call
    target: tuple[str, tuple]
    resolved: bool = True

    @property
    def kind(self) -> str:
        return "Resolved" if self.resolved else "Unresolved"


def state_transitions(
    f: str, u: Sequence[int], p: Program, fuel: int, ops: Ops | None = None
) -> list[StateTransition]:
    """Transitions out of ``(f, u)``; argument normalization shares one fuel budget."""
    table = resolve_ops(p, ops)
    u = tuple(u)
    body = instantiate(p, f, u)
    by_tau: dict[Position, App] = {}
    stack = [body]
    while stack:
        x = stack.pop()
        if isinstance(x, App):
            if x.origin is not None and p.is_function(x.head):
                by_tau[x.origin[2]] = x
            stack.extend(x.args)
    out = []
    budget = fuel
    for call in calls_of(p):
        if call.source != f or call.tau not in by_tau:
            continue
        node = by_tau[call.tau]
        values: list = []
        resolved = True
        for a in node.args:
            res = reduce(a, p, budget, table)
            budget -= res.steps
            if isinstance(res, Value):
                values.append(res.value)
            else:
                resolved = False
                values.append(res.last)
        if resolved:
            target = tuple(values)
        else:
            target = tuple(Num(v) if isinstance(v, int) else v for v in values)
        out.append(StateTransition((f, u), call, (call.target, target), resolved))
    return out


# activation trees ------------------------------------------------------


@dataclass(frozen=True, slots=True)
class TreeNode:
    state: tuple[str, tuple]
    path: tuple[StateTransition, ...]
    parent: int | None
    children: tuple[int, ...] = ()
    label: str | None = None  # Exhausted | DepthCut | FuelCut for frontier nodes


@dataclass(frozen=True)
class ActivationTree:
    root: tuple[str, tuple[int, ...]]
    nodes: tuple[TreeNode, ...]

    @property
    def fully_exhausted(self) -> bool:
        return all(n.label in (None, "Exhausted") for n in self.nodes)

    def leaves(self) -> list[TreeNode]:
        return [n for n in self.nodes if n.label is not None]

    def __len__(self) -> int:
        return len(self.nodes)


def activation_tree(
    f: str,
    u: Sequence[int],
    p: Program,
    depth: int,
    fuel: int,
    ops: Ops | None = None,
    max_nodes: int = 100_000,
) -> ActivationTree:
    """Breadth-first activation tree; ``fuel`` is charged per node expansion."""
    table = resolve_ops(p, ops)
    nodes: list[dict] = [dict(state=(f, tuple(u)), path=(), parent=None, children=[], label=None)]
    queue = deque([0])
    while queue:
        idx = queue.popleft()
        node = nodes[idx]
        if node["label"] is not None:
            continue
        if len(node["path"]) >= depth:
            node["label"] = "DepthCut"
            continue
        g, v = node["state"]
        trans = state_transitions(g, v, p, fuel, table)
        if not trans:
            node["label"] = "Exhausted"
            continue
        for st in trans:
            child = dict(state=st.target, path=node["path"] + (st,), parent=idx, children=[], label=None)
            if not st.resolved:
                child["label"] = "FuelCut"
            elif len(nodes) >= max_nodes:
                child["label"] = "FuelCut"
            nodes.append(child)
            node["children"].append(len(nodes) - 1)
            queue.append(len(nodes) - 1)
    frozen = tuple(
        TreeNode(n["state"], n["path"], n["parent"], tuple(n["children"]), n["label"]) for n in nodes
    )
    return ActivationTree((f, tuple(u)), frozen)


# termination -----------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Terminates:
    value: int
    steps: int


@dataclass(frozen=True, slots=True)
class Unknown:
    steps: int


def terminates_on(
    p: Program, f: str, u: Sequence[int], fuel: int, ops: Ops | None = None
) -> Terminates | Unknown:
    res = reduce(App(f, tuple(Num(x) for x in u)), p, fuel, ops)
    if isinstance(res, Value):
        return Terminates(res.value, res.steps)
    return Unknown(res.steps)
