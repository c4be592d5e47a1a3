"""Reference implementations written independently of the package.

Each one takes the slow, obvious route so that the library can be checked
against it rather than against itself.
"""

from __future__ import annotations

import itertools
import random
from functools import lru_cache

from sct import ordinal as O
from sct.ordinal import Ordinal
from sct.scg import Arc, SizeChangeGraph


# ordinals below w^3 as triples ---------------------------------------------


def embed_small(a: Ordinal) -> tuple[int, int, int]:
    """``w^2*c2 + w*c1 + c0`` as ``(c2, c1, c0)``; lexicographic order is ordinal order."""
    out = [0, 0, 0]
    for e, c in a.terms:
        assert e.is_finite() and e < Ordinal.of(3), "oracle only covers ordinals below w^3"
        out[2 - (e.terms[0][1] if e.terms else 0)] = c
    return tuple(out)


def small_from_triple(t) -> Ordinal:
    return Ordinal.from_terms((Ordinal.of(2 - i), c) for i, c in enumerate(t) if c)


def as_integer(t, base: int = 10) -> int:
    """Injective, order-preserving map of a triple with entries below ``base`` into the naturals."""
    return (t[0] * base + t[1]) * base + t[2]


def random_small(rng: random.Random, cmax: int = 5) -> Ordinal:
    return small_from_triple(tuple(rng.randint(0, cmax) for _ in range(3)))


def random_ordinal(rng: random.Random, depth: int = 2, width: int = 3, cmax: int = 6) -> Ordinal:
    """Random normal form with nesting ``depth`` and at most ``width`` terms per level."""
    if depth == 0:
        return Ordinal.of(rng.randint(0, cmax))
    exps = {random_ordinal(rng, depth - 1, width, cmax) for _ in range(rng.randint(0, width))}
    return Ordinal.from_terms((e, rng.randint(1, cmax)) for e in sorted(exps, reverse=True))


def below_omega_omega3(rng: random.Random, cmax: int = 6) -> Ordinal:
    """Random ordinal below ``w^(w*3)``: exponents are ``w*a + b`` with ``a < 3``."""
    exps = {(rng.randint(0, 2), rng.randint(0, cmax)) for _ in range(rng.randint(0, 3))}
    terms = []
    for a, b in sorted(exps, reverse=True):
        e = Ordinal.from_terms([(O.ONE, a)] * bool(a) + [(O.ZERO, b)] * bool(b))
        terms.append((e, rng.randint(1, cmax)))
    return Ordinal.from_terms(terms)


# sequence coding as exponent vectors ---------------------------------------


def gamma_vector(u, p: int) -> tuple[int, ...]:
    """Coefficients of ``gamma_p(u)`` from ``w^p`` down to ``w^0``, read straight off the definition."""
    vec = [0] * (p + 1)
    for i in range(p):
        if i < len(u):
            vec[p - (p - 1 - i)] += 2 * u[i]
        else:
            vec[p - (p - i)] += 1  # w^(p-1-i) * (2*w) = w^(p-i)
    return tuple(vec)


def vector_ordinal(vec) -> Ordinal:
    p = len(vec) - 1
    return Ordinal.from_terms((Ordinal.of(p - k), c) for k, c in enumerate(vec) if c)


# fast-growing hierarchy ------------------------------------------------------


def F_finite(k: int, x: int, f=lambda y: y + 1) -> int:
    """``F_0 = f`` and ``F_(k+1)(x) = F_k`` iterated ``x+1`` times on 1."""
    if k == 0:
        return f(x)
    y = 1
    for _ in range(x + 1):
        y = F_finite(k - 1, y, f)
    return y


def ackermann_ref(x: int, y: int, f=lambda v: v + 1) -> int:
    @lru_cache(maxsize=None)
    def A(a: int, b: int) -> int:
        if a == 0:
            return f(b)
        if b == 0:
            return A(a - 1, 1)
        return A(a - 1, A(a, b - 1))

    return A(x, y)


def power_ref(x: int, y: int) -> int:
    return x**y


# size-change graphs ------------------------------------------------------------


def random_graph(rng: random.Random, n: int, k: int | None = None, src="f", dst="f", density=0.4) -> SizeChangeGraph:
    k = n if k is None else k
    arcs = [Arc(i, j, rng.random() < 0.5) for i in range(n) for j in range(k) if rng.random() < density]
    return SizeChangeGraph(src, dst, frozenset(arcs))


def holds_ref(g: SizeChangeGraph, u, v) -> bool:
    return all((u[a.src] > v[a.dst]) if a.strict else (u[a.src] >= v[a.dst]) for a in g.arcs)


def compose_ref(g0: SizeChangeGraph, g1: SizeChangeGraph) -> SizeChangeGraph:
    """Path-enumeration reading of composition: x -> z whenever some y links them."""
    n = 1 + max([a.src for a in g0.arcs] + [0])
    k = 1 + max([a.dst for a in g1.arcs] + [0])
    mids = {a.dst for a in g0.arcs} | {b.src for b in g1.arcs}
    arcs = []
    for x, z in itertools.product(range(n), range(k)):
        labels = []
        for y in mids:
            a = next((e for e in g0.arcs if (e.src, e.dst) == (x, y) and e.strict), None) or next(
                (e for e in g0.arcs if (e.src, e.dst) == (x, y)), None
            )
            b = next((e for e in g1.arcs if (e.src, e.dst) == (y, z) and e.strict), None) or next(
                (e for e in g1.arcs if (e.src, e.dst) == (y, z)), None
            )
            if a and b:
                labels.append(a.strict or b.strict)
        if labels:
            arcs.append(Arc(x, z, any(labels)))
    return SizeChangeGraph(g0.source, g1.target, frozenset(arcs))


def closure_ref(gs) -> set[SizeChangeGraph]:
    """Pairwise saturation until nothing new appears."""
    known = set(gs)
    while True:
        new = {compose_ref(a, b) for a in known for b in known if a.target == b.source} - known
        if not new:
            return known
        known |= new


def isct_ref(gs) -> bool:
    for g in closure_ref(gs):
        if g.source == g.target and compose_ref(g, g) == g:
            if not any(a.strict and a.src == a.dst for a in g.arcs):
                return False
    return True


def triangle_fold_exists(gs) -> bool:
    """Brute force over all ``i < j < k``: ``gs[i:j]``, ``gs[j:k]`` and ``gs[i:k]`` compose alike."""

    def comp(seg):
        acc = seg[0]
        for g in seg[1:]:
            acc = compose_ref(acc, g)
        return acc

    L = len(gs)
    return any(
        comp(gs[i:j]) == comp(gs[j:k]) == comp(gs[i:k])
        for i in range(L)
        for j in range(i + 1, L)
        for k in range(j + 1, L + 1)
    )


def ramsey_recursive(c: int) -> int:
    """Upper bound for ``R(3,...,3)`` with ``c`` colours via ``R_c <= c*(R_(c-1) - 1) + 2``."""
    return 3 if c == 1 else c * (ramsey_recursive(c - 1) - 1) + 2


def has_mono_triangle_free_colouring(n: int, colours: int) -> bool:
    """Exhaustive search for a colouring of K_n's edges with no monochromatic triangle."""
    edges = list(itertools.combinations(range(n), 2))
    idx = {e: k for k, e in enumerate(edges)}
    col = [0] * len(edges)

    def ok(k: int) -> bool:
        a, b = edges[k]
        for c in range(n):
            if c in (a, b):
                continue
            e1, e2 = idx[tuple(sorted((a, c)))], idx[tuple(sorted((b, c)))]
            if e1 < k and e2 < k and col[e1] == col[e2] == col[k]:
                return False
        return True

    def go(k: int) -> bool:
        if k == len(edges):
            return True
        for c in range(colours):
            col[k] = c
            if ok(k) and go(k + 1):
                return True
        return False

    return go(0)
