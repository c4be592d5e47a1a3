"""Size-change graphs, their composition closure, and the ISCT check.

Parameters are referred to by their index in the function's parameter list.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Union

from .lang import (
    And, Apply, BoolExpr, Call, EqOne, EqZero, IfThenElse, Le, Lt, Not, Or, ParamPred, ParamRef,
    PathCondition, Program, ProgramSyntaxError, calls_of, format_position, parse_position,
    path_condition, subexpr_at,
)
from .rewrite import Ops, StateTransition, Value, reduce
from .terms import App, Num


class CompositionMismatch(ValueError):
    pass


class RamseyOverflow(OverflowError):
    pass


class DescriptionError(ValueError):
    pass


@dataclass(frozen=True, order=True, slots=True)
class Arc:
    src: int
    dst: int
    strict: bool

    def __str__(self) -> str:
        return f"x{self.src} {'->>' if self.strict else '->'} x{self.dst}"


@dataclass(frozen=True)
class SizeChangeGraph:
    source: str
    target: str
    arcs: frozenset[Arc] = frozenset()

    def __post_init__(self):
        arcs = frozenset(self.arcs)
        strict = {(a.src, a.dst) for a in arcs if a.strict}
        kept = frozenset(a for a in arcs if a.strict or (a.src, a.dst) not in strict)
        object.__setattr__(self, "arcs", kept)

    @classmethod
    def of(cls, source: str, target: str, strict=(), weak=()) -> SizeChangeGraph:
        arcs = [Arc(i, j, True) for i, j in strict] + [Arc(i, j, False) for i, j in weak]
        return cls(source, target, frozenset(arcs))

    def sort_key(self):
        return (self.source, self.target, tuple(sorted(self.arcs)))

    def has_strict_self_arc(self) -> bool:
        return any(a.strict and a.src == a.dst for a in self.arcs)

    def arc(self, i: int, j: int) -> Arc | None:
        for a in self.arcs:
            if a.src == i and a.dst == j:
                return a
        return None

    def describe(self, src_names: Sequence[str] | None = None, dst_names: Sequence[str] | None = None) -> str:
        def nm(names, i):
            return names[i] if names is not None and i < len(names) else f"x{i}"

        parts = [
            f"{nm(src_names, a.src)}{' ->> ' if a.strict else ' -> '}{nm(dst_names, a.dst)}"
            for a in sorted(self.arcs)
        ]
        return f"{self.source} -> {self.target} {{{', '.join(parts)}}}"

    def __str__(self) -> str:
        return self.describe()


def compose(g0: SizeChangeGraph, g1: SizeChangeGraph) -> SizeChangeGraph:
    if g0.target != g1.source:
        raise CompositionMismatch(f"cannot compose {g0.source}->{g0.target} with {g1.source}->{g1.target}")
    out_of: dict[int, list[Arc]] = {}
    for b in g1.arcs:
        out_of.setdefault(b.src, []).append(b)
    best: dict[tuple[int, int], bool] = {}
    for a in g0.arcs:
        for b in out_of.get(a.dst, ()):
            key = (a.src, b.dst)
            best[key] = best.get(key, False) or a.strict or b.strict
    return SizeChangeGraph(g0.source, g1.target, frozenset(Arc(i, j, s) for (i, j), s in best.items()))


def compose_all(gs: Sequence[SizeChangeGraph]) -> SizeChangeGraph:
    if not gs:
        raise ValueError("empty multipath has no composition")
    acc = gs[0]
    for g in gs[1:]:
        acc = compose(acc, g)
    return acc


def canonical(gs: Iterable[SizeChangeGraph]) -> list[SizeChangeGraph]:
    return sorted(set(gs), key=SizeChangeGraph.sort_key)


def closure(gs: Iterable[SizeChangeGraph]) -> list[SizeChangeGraph]:
    """Least superset closed under composition of composable pairs, canonically ordered."""
    known = set(gs)
    by_source: dict[str, set[SizeChangeGraph]] = {}
    by_target: dict[str, set[SizeChangeGraph]] = {}
    for g in known:
        by_source.setdefault(g.source, set()).add(g)
        by_target.setdefault(g.target, set()).add(g)
    work = list(known)
    while work:
        g = work.pop()
        fresh = [compose(g, h) for h in list(by_source.get(g.target, ()))]
        fresh += [compose(h, g) for h in list(by_target.get(g.source, ()))]
        for c in fresh:
            if c not in known:
                known.add(c)
                by_source.setdefault(c.source, set()).add(c)
                by_target.setdefault(c.target, set()).add(c)
                work.append(c)
    return canonical(known)


def is_idempotent(g: SizeChangeGraph) -> bool:
    return g.source == g.target and compose(g, g) == g


# descriptions -----------------------------------------------------------


@dataclass(frozen=True)
class Description:
    """Assignment of a graph to each call; iteration follows insertion order."""

    graphs: Mapping[Call, SizeChangeGraph] = field(default_factory=dict)

    def __post_init__(self):
        graphs = dict(self.graphs)
        for call, g in graphs.items():
            if (g.source, g.target) != (call.source, call.target):
                raise DescriptionError(f"graph {g} does not match call {call}")
        object.__setattr__(self, "graphs", graphs)

    def __getitem__(self, call: Call) -> SizeChangeGraph:
        return self.graphs[call]

    def __iter__(self) -> Iterator[Call]:
        return iter(self.graphs)

    def __len__(self) -> int:
        return len(self.graphs)

    def __eq__(self, other):
        if not isinstance(other, Description):
            return NotImplemented
        return self.graphs == other.graphs

    def __hash__(self):
        return hash(frozenset(self.graphs.items()))

    def items(self):
        return self.graphs.items()

    def range(self) -> list[SizeChangeGraph]:
        return canonical(self.graphs.values())

    def validate(self, p: Program) -> None:
        expected = calls_of(p)
        missing = [c for c in expected if c not in self.graphs]
        extra = [c for c in self.graphs if c not in expected]
        if missing or extra:
            raise DescriptionError(
                f"description does not match the program's calls (missing {len(missing)}, extra {len(extra)})"
            )
        for call, g in self.graphs.items():
            n, k = p.get(call.source).arity, p.get(call.target).arity
            for a in g.arcs:
                if not (0 <= a.src < n and 0 <= a.dst < k):
                    raise DescriptionError(f"arc {a} out of range for call {call}")


@dataclass(frozen=True)
class Isct:
    closure_size: int

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class NotIsct:
    witness: SizeChangeGraph
    closure_size: int

    def __bool__(self) -> bool:
        return False


def check_isct(d: Description) -> Union[Isct, NotIsct]:
    cl = closure(d.graphs.values())
    for g in cl:
        if is_idempotent(g) and not g.has_strict_self_arc():
            return NotIsct(g, len(cl))
    return Isct(len(cl))


# guard entailment ------------------------------------------------------


def _facts(cond: PathCondition) -> tuple[set[str], list[tuple[str, str, bool]]]:
    """Positivity facts and order edges ``(a, b, strict)`` meaning ``a < b`` or ``a <= b``."""
    pos: set[str] = set()
    edges: list[tuple[str, str, bool]] = []

    def add(b: BoolExpr, polarity: bool) -> None:
        if isinstance(b, EqZero):
            if not polarity:
                pos.add(b.var)
        elif isinstance(b, EqOne):
            if polarity:
                pos.add(b.var)
        elif isinstance(b, Lt):
            edges.append((b.left, b.right, True) if polarity else (b.right, b.left, False))
        elif isinstance(b, Le):
            edges.append((b.left, b.right, False) if polarity else (b.right, b.left, True))
        elif isinstance(b, Not):
            add(b.arg, not polarity)
        elif isinstance(b, And) and polarity:
            add(b.left, True)
            add(b.right, True)
        elif isinstance(b, Or) and not polarity:
            add(b.left, False)
            add(b.right, False)
        # a positive disjunction or a negated conjunction yields nothing definite

    for lit, polarity in cond:
        add(lit, polarity)
    changed = True
    while changed:
        changed = False
        for a, b, strict in edges:
            if b not in pos and (strict or a in pos):
                pos.add(b)
                changed = True
    return pos, edges


def entails_positive(cond: PathCondition, var: str) -> bool:
    """Whether the branch decisions force ``var > 0`` (sound, incomplete)."""
    return var in _facts(cond)[0]


def extract_description(p: Program) -> Description:
    graphs = {}
    for call in calls_of(p):
        fdef = p.get(call.source)
        node = subexpr_at(fdef.body, call.tau)
        assert isinstance(node, Apply)
        pos = _facts(path_condition(fdef, call.tau))[0]
        index = {name: i for i, name in enumerate(fdef.params)}
        arcs = []
        for j, arg in enumerate(node.args):
            if isinstance(arg, ParamRef):
                arcs.append(Arc(index[arg.name], j, False))
            elif isinstance(arg, ParamPred) and arg.name in pos:
                arcs.append(Arc(index[arg.name], j, True))
        graphs[call] = SizeChangeGraph(call.source, call.target, frozenset(arcs))
    return Description(graphs)


# runtime safety ----------------------------------------------------------


def graph_holds(g: SizeChangeGraph, u: Sequence[int], v: Sequence[int]) -> bool:
    for a in g.arcs:
        if a.strict and not u[a.src] > v[a.dst]:
            return False
        if not a.strict and not u[a.src] >= v[a.dst]:
            return False
    return True


def check_safety_runtime(d: Description, t: StateTransition) -> bool:
    if not t.resolved:
        raise ValueError("safety can only be checked on numeral targets")
    return graph_holds(d[t.call], t.source[1], t.target[1])


@dataclass(frozen=True)
class MonitorReport:
    checked: int
    violations: tuple[StateTransition, ...]
    value: int | None
    steps: int

    @property
    def ok(self) -> bool:
        return not self.violations


def monitor(
    p: Program,
    d: Description,
    entry: str,
    args: Sequence[int],
    fuel: int,
    ops: Ops | None = None,
    max_violations: int = 20,
) -> MonitorReport:
    """Run the program and check every observed state transition against ``d``."""
    call_at = {(c.source, c.tau): c for c in calls_of(p)}
    checked = 0
    violations: list[StateTransition] = []

    def hook(origin, head, vals):
        nonlocal checked
        if origin is None:
            return
        f, u, tau = origin
        st = StateTransition((f, u), call_at[(f, tau)], (head, vals))
        checked += 1
        if not check_safety_runtime(d, st) and len(violations) < max_violations:
            violations.append(st)

    res = reduce(App(entry, tuple(Num(v) for v in args)), p, fuel, ops, on_call=hook)
    return MonitorReport(checked, tuple(violations), res.value if isinstance(res, Value) else None, res.steps)


# multipaths, Ramsey bound and folding ---------------------------------


Multipath = Sequence[SizeChangeGraph]


def is_multipath(gs: Multipath) -> bool:
    return all(a.target == b.source for a, b in zip(gs, gs[1:]))


def ramsey_bound(c: int) -> int:
    """Length from which every multipath over ``c`` graphs contains a monochromatic triangle.

    This is the classical upper bound ``floor(e * c!) + 1`` on ``R(3; c)``.
    """
    if c < 1:
        raise ValueError("need at least one colour")
    if c > 8:
        raise RamseyOverflow(f"Ramsey bound for {c} graphs is too large to use")
    return sum(math.factorial(c) // math.factorial(k) for k in range(c + 1)) + 1


@dataclass(frozen=True)
class Folding:
    """``B = gs[i:j]`` and ``C = gs[j:end]`` compose to the idempotent ``H``, as does ``BC``.

    ``end`` is ``None`` when ``C`` runs to the end of the multipath.
    """

    split: tuple[int, int]
    H: SizeChangeGraph
    end: int | None = None

    def stop(self, length: int) -> int:
        return length if self.end is None else self.end


def _segments(gs: Multipath, i: int) -> list[SizeChangeGraph | None]:
    """``out[j]`` is the composition of ``gs[i:j]`` (``None`` for the empty segment)."""
    out: list[SizeChangeGraph | None] = [None]
    acc = None
    for g in gs[i:]:
        acc = g if acc is None else compose(acc, g)
        out.append(acc)
    return out


def find_folding(gs: Multipath) -> Folding | None:
    """First split ``(i, j)`` in lexicographic order whose middle and suffix both compose to the whole tail."""
    L = len(gs)
    suffix: list[SizeChangeGraph | None] = [None] * (L + 1)
    for k in range(L - 1, -1, -1):
        suffix[k] = gs[k] if suffix[k + 1] is None else compose(gs[k], suffix[k + 1])
    for i in range(L):
        seg = _segments(gs, i)
        for j in range(i + 1, L):
            H = suffix[i]
            if seg[j - i] == H and suffix[j] == H:
                return Folding((i, j), H)
    return None


def find_inner_folding(gs: Multipath) -> Folding | None:
    """First ``(i, j, k)`` in lexicographic order with ``gs[i:j]``, ``gs[j:k]`` and ``gs[i:k]`` all composing to one graph.

    Unlike :func:`find_folding` the second block need not reach the end, and
    a Ramsey-length multipath always has one.
    """
    L = len(gs)
    segs = [_segments(gs, i) for i in range(L)]
    for i in range(L):
        for j in range(i + 1, L):
            B = segs[i][j - i]
            for k in range(j + 1, L + 1):
                if segs[j][k - j] == B and segs[i][k - i] == B:
                    return Folding((i, j), B, k)
    return None


# threads ---------------------------------------------------------------


@dataclass(frozen=True)
class Thread:
    params: tuple[int, ...]
    strict_count: int


def descent_search(gs: Multipath) -> Thread | None:
    """Full-length thread through ``gs`` with the largest number of strict arcs."""
    if not gs:
        return None
    # best[x] = (strict count, thread so far) for threads ending at parameter x
    best: dict[int, tuple[int, tuple[int, ...]]] = {}
    for a in sorted(gs[0].arcs):
        cand = (int(a.strict), (a.src, a.dst))
        if a.dst not in best or cand[0] > best[a.dst][0]:
            best[a.dst] = cand
    for g in gs[1:]:
        nxt: dict[int, tuple[int, tuple[int, ...]]] = {}
        for a in sorted(g.arcs):
            if a.src not in best:
                continue
            count, path = best[a.src]
            cand = (count + int(a.strict), path + (a.dst,))
            if a.dst not in nxt or cand[0] > nxt[a.dst][0]:
                nxt[a.dst] = cand
        best = nxt
        if not best:
            return None
    if not best:
        return None
    count, path = max(best.values(), key=lambda cp: (cp[0], [-x for x in cp[1]]))
    return Thread(path, count)


# the generalized Ackermann description ----------------------------------


def ackermann_graph(name: str, j: int) -> SizeChangeGraph:
    """Strict self-arc on coordinate ``j`` and weak self-arcs below it (coordinates 1-based)."""
    return SizeChangeGraph.of(name, name, strict=[(j - 1, j - 1)], weak=[(i - 1, i - 1) for i in range(1, j)])


def ackermann_description(n: int) -> tuple[Program, Description]:
    from .fgh import gen_ackermann_program

    p = gen_ackermann_program(n)
    calls = calls_of(p)
    name = p.entry.name
    # program order of the calls: tau_1 .. tau_n, then tau_0 and the nested tau_{n+1}
    indices = list(range(1, n + 1)) + [n, n + 1]
    return p, Description({c: ackermann_graph(name, j) for c, j in zip(calls, indices)})


# text format -------------------------------------------------------------


def format_description(d: Description) -> str:
    ids: dict[SizeChangeGraph, str] = {}
    lines = []
    for g in d.range():
        gid = f"G{len(ids)}"
        ids[g] = gid
        lines.append(f"graph {gid} : {g.source} -> {g.target}")
        lines.extend(f"  {a}" for a in sorted(g.arcs))
    for call, g in d.items():
        lines.append(f"call {format_position(call.tau)} {call.source} {call.target} uses {ids[g]}")
    return "\n".join(lines) + "\n"


def parse_description(text: str) -> Description:
    graphs: dict[str, tuple[str, str, list[Arc]]] = {}
    calls: dict[Call, SizeChangeGraph] = {}
    current: list[Arc] | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        try:
            if words[0] == "graph":
                # graph <id> : f -> g
                if len(words) != 6 or words[2] != ":" or words[4] != "->":
                    raise ValueError
                current = []
                if words[1] in graphs:
                    raise DescriptionError(f"line {lineno}: graph {words[1]!r} defined twice")
                graphs[words[1]] = (words[3], words[5], current)
            elif words[0] == "call":
                # call <pos> f g uses <id>
                if len(words) != 6 or words[4] != "uses":
                    raise ValueError
                if words[5] not in graphs:
                    raise DescriptionError(f"line {lineno}: unknown graph {words[5]!r}")
                src, dst, arcs = graphs[words[5]]
                call = Call(parse_position(words[1]), words[2], words[3])
                calls[call] = SizeChangeGraph(src, dst, frozenset(arcs))
                current = None
            elif len(words) == 3 and words[1] in ("->", "->>") and current is not None:
                i, j = (int(w[1:]) for w in (words[0], words[2]) if w.startswith("x"))
                current.append(Arc(i, j, words[1] == "->>"))
            else:
                raise ValueError
        except (ValueError, ProgramSyntaxError) as exc:
            if isinstance(exc, DescriptionError):
                raise
            raise DescriptionError(f"line {lineno}: cannot parse {raw.strip()!r}") from None
    return Description(calls)
