"""Ordinal notations below epsilon_0 in Cantor normal form.

An ordinal is stored as a tuple of ``(exponent, coefficient)`` pairs with
strictly decreasing exponents and positive coefficients; the empty tuple is 0.
Exponents are themselves :class:`Ordinal` values.

Textual notation: ``0``, ``w``, ``w^2``, ``w^(w*2+3)*2``, terms joined by ``+``.
"""

from __future__ import annotations

import functools
import math
import re
from collections.abc import Iterable, Sequence

MAX_NESTING = 32
MAX_TOWER = 4


class OrdinalError(ValueError):
    pass


class LengthError(OrdinalError):
    pass


@functools.total_ordering
class Ordinal:
    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Iterable[tuple[Ordinal, int]] = ()):
        self.terms: tuple[tuple[Ordinal, int], ...] = tuple(terms)
        self._hash: int | None = None

    # construction -----------------------------------------------------

    @classmethod
    def of(cls, n: int) -> Ordinal:
        if n < 0:
            raise OrdinalError(f"negative natural {n}")
        if n < len(_SMALL):
            return _SMALL[n]
        return cls(((ZERO, n),))

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[Ordinal, int]]) -> Ordinal:
        """Normalize an arbitrary bag of ``omega^e * c`` monomials (natural sum)."""
        acc: dict[Ordinal, int] = {}
        for e, c in terms:
            if c < 0:
                raise OrdinalError("negative coefficient")
            if c:
                acc[e] = acc.get(e, 0) + c
        items = sorted(acc.items(), key=lambda ec: _Key(ec[0]), reverse=True)
        return cls(items)

    # predicates -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_finite(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not self.terms[0][0].terms)

    def is_successor(self) -> bool:
        return bool(self.terms) and not self.terms[-1][0].terms

    def is_limit(self) -> bool:
        return bool(self.terms) and bool(self.terms[-1][0].terms)

    def to_int(self) -> int:
        if not self.is_finite():
            raise OrdinalError(f"{self} is not finite")
        return self.terms[0][1] if self.terms else 0

    @property
    def depth(self) -> int:
        """Nesting depth of exponents (0 for naturals)."""
        if not self.terms or self.is_finite():
            return 0
        # depth is monotone in the ordinal, so the leading exponent decides it
        return 1 + self.terms[0][0].depth

    def leading_exponent(self) -> Ordinal:
        if not self.terms:
            raise OrdinalError("0 has no leading exponent")
        return self.terms[0][0]

    # protocol ---------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Ordinal):
            return NotImplemented
        return self.terms == other.terms

    def __lt__(self, other: Ordinal) -> bool:
        return compare(self, other) < 0

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.terms)
        return self._hash

    def __add__(self, other: Ordinal) -> Ordinal:
        return add(self, other)

    def __mul__(self, other: Ordinal | int) -> Ordinal:
        if isinstance(other, int):
            return mul_nat(self, other)
        return mul(self, other)

    def __rmul__(self, other: int) -> Ordinal:
        return mul(Ordinal.of(other), self)

    def __str__(self) -> str:
        return format_ordinal(self)

    def __repr__(self) -> str:
        return f"Ordinal({format_ordinal(self)!r})"


class _Key:
    """Sort key wrapper so ``sorted`` can order ordinals without cmp_to_key overhead."""

    __slots__ = ("o",)

    def __init__(self, o: Ordinal):
        self.o = o

    def __lt__(self, other: _Key) -> bool:
        return compare(self.o, other.o) < 0


ZERO = Ordinal()
_SMALL: list[Ordinal] = [ZERO]
_SMALL.extend(Ordinal(((ZERO, n),)) for n in range(1, 256))
ONE = _SMALL[1]
OMEGA = Ordinal(((ONE, 1),))


def compare(a: Ordinal, b: Ordinal) -> int:
    """Three-way comparison: -1, 0 or 1."""
    if a is b:
        return 0
    for (ea, ca), (eb, cb) in zip(a.terms, b.terms):
        if ea is not eb:
            c = compare(ea, eb)
            if c:
                return c
        if ca != cb:
            return -1 if ca < cb else 1
    la, lb = len(a.terms), len(b.terms)
    return (la > lb) - (la < lb)


# arithmetic -------------------------------------------------------------


def add(a: Ordinal, b: Ordinal) -> Ordinal:
    """Ordinary (left-absorbing) ordinal addition."""
    if not b.terms:
        return a
    if not a.terms:
        return b
    lead, lc = b.terms[0]
    kept: list[tuple[Ordinal, int]] = []
    for e, c in a.terms:
        cmp = compare(e, lead)
        if cmp > 0:
            kept.append((e, c))
        elif cmp == 0:
            kept.append((e, c + lc))
            return Ordinal(kept + list(b.terms[1:]))
        else:
            break
    return Ordinal(kept + list(b.terms))


def nat_sum(*ords: Ordinal) -> Ordinal:
    """Hessenberg natural sum: merge normal forms adding like coefficients."""
    live = [o for o in ords if o.terms]
    if not live:
        return ZERO
    if len(live) == 1:
        return live[0]
    if len(live) == 2:
        return _merge(live[0], live[1])
    return Ordinal.from_terms(t for o in live for t in o.terms)


def _merge(a: Ordinal, b: Ordinal) -> Ordinal:
    out: list[tuple[Ordinal, int]] = []
    i = j = 0
    ta, tb = a.terms, b.terms
    while i < len(ta) and j < len(tb):
        c = compare(ta[i][0], tb[j][0])
        if c > 0:
            out.append(ta[i])
            i += 1
        elif c < 0:
            out.append(tb[j])
            j += 1
        else:
            out.append((ta[i][0], ta[i][1] + tb[j][1]))
            i += 1
            j += 1
    out.extend(ta[i:])
    out.extend(tb[j:])
    return Ordinal(out)


def mul_nat(a: Ordinal, k: int) -> Ordinal:
    if k < 0:
        raise OrdinalError("negative multiplier")
    if k == 0 or not a.terms:
        return ZERO
    (e0, c0), rest = a.terms[0], a.terms[1:]
    return Ordinal(((e0, c0 * k),) + rest)


def mul(a: Ordinal, b: Ordinal) -> Ordinal:
    """Ordinal multiplication ``a * b`` on normal forms."""
    if not a.terms or not b.terms:
        return ZERO
    lead = a.terms[0][0]
    out: list[tuple[Ordinal, int]] = []
    # b's exponents decrease and lead + e is strictly increasing in e, so the
    # products of the infinite terms are already in normal form order
    for e, c in b.terms:
        if e.terms:
            out.append((add(lead, e), c))
        else:
            (e0, c0), rest = a.terms[0], a.terms[1:]
            out.append((e0, c0 * c))
            out.extend(rest)
    return Ordinal(out)


def omega_pow(a: Ordinal) -> Ordinal:
    if a.depth >= MAX_NESTING:
        raise OrdinalError("exponent nesting too deep")
    return Ordinal(((a, 1),))


def omega_tower(d: int) -> Ordinal:
    """``omega_0 = 1`` and ``omega_{d+1} = omega ** omega_d``."""
    if not 0 <= d <= MAX_TOWER:
        raise OrdinalError(f"tower height {d} outside 0..{MAX_TOWER}")
    o = ONE
    for _ in range(d):
        o = omega_pow(o)
    return o


def predecessor(a: Ordinal) -> Ordinal:
    if not a.is_successor():
        raise OrdinalError(f"{a} is not a successor")
    *head, (e, c) = a.terms
    return Ordinal(head + ([(e, c - 1)] if c > 1 else []))


def fund_seq(a: Ordinal, x: int) -> Ordinal:
    """Canonical fundamental sequence ``a[x]``; ``0[x] = 0`` and ``(b+1)[x] = b``."""
    if not a.terms:
        return ZERO
    if a.is_successor():
        return predecessor(a)
    *head, (e, c) = a.terms
    rest = Ordinal(head + ([(e, c - 1)] if c > 1 else []))
    if e.is_successor():
        return add(rest, mul_nat(omega_pow(predecessor(e)), x))
    return add(rest, omega_pow(fund_seq(e, x)))


def mc(a: Ordinal) -> int:
    """Maximal coefficient occurring anywhere in the notation."""
    best = 0
    for e, c in a.terms:
        best = max(best, c, mc(e))
    return best


def to_repetition(a: Ordinal) -> list[Ordinal]:
    """Exponent list of ``omega^a0 + ... + omega^an`` (coefficients expanded)."""
    return [e for e, c in a.terms for _ in range(c)]


def from_repetition(exps: Sequence[Ordinal]) -> Ordinal:
    out = ZERO
    for e in exps:
        out = add(out, omega_pow(e))
    return out


# sequence coding --------------------------------------------------------


def gamma_p(u: Sequence[int], p: int) -> Ordinal:
    """Natural sum of ``omega^(p-1-i) * (2 * u_p(i))`` over the omega-padded sequence.

    A padded entry contributes ``omega^(p-1-i) * (2*omega) = omega^(p-i)``.
    """
    n = len(u)
    if n > p:
        raise LengthError(f"sequence of length {n} needs p >= {n}, got {p}")
    coeffs: dict[int, int] = {}
    for i, x in enumerate(u):
        if x < 0:
            raise OrdinalError("negative entry")
        if x:
            coeffs[p - 1 - i] = coeffs.get(p - 1 - i, 0) + 2 * x
    for i in range(n, p):
        coeffs[p - i] = coeffs.get(p - i, 0) + 1
    return Ordinal((Ordinal.of(e), coeffs[e]) for e in sorted(coeffs, reverse=True))


def padded(u: Sequence[int], p: int) -> tuple[float, ...]:
    if len(u) > p:
        raise LengthError(f"sequence of length {len(u)} needs p >= {len(u)}, got {p}")
    return tuple(u) + (math.inf,) * (p - len(u))


def is_above(u: Sequence[int], v: Sequence[int], p: int) -> bool:
    """Lexicographic order on omega-padded sequences (every natural below omega)."""
    return padded(u, p) > padded(v, p)


# notation ---------------------------------------------------------------


def format_ordinal(a: Ordinal) -> str:
    if not a.terms:
        return "0"
    parts = []
    for e, c in a.terms:
        if not e.terms:
            parts.append(str(c))
            continue
        if e == ONE:
            base = "w"
        elif e == OMEGA:
            base = "w^w"
        elif e.is_finite():
            base = f"w^{e.to_int()}"
        else:
            base = f"w^({format_ordinal(e)})"
        parts.append(base if c == 1 else f"{base}*{c}")
    return "+".join(parts)


_TOKEN = re.compile(r"\s*(?:(\d+)|([wω])|(\S))")


def parse_ordinal(text: str) -> Ordinal:
    """Parse the textual notation; input need not be in normal form."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            break
        num, w, sym = m.groups()
        tokens.append(("num", int(num)) if num else ("w", None) if w else ("sym", sym))
        pos = m.end()
    parser = _OrdParser(tokens, text)
    out = parser.ordinal(0)
    if parser.i != len(tokens):
        raise OrdinalError(f"trailing input in ordinal {text!r}")
    return out


class _OrdParser:
    def __init__(self, tokens, text):
        self.tokens = tokens
        self.text = text
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self, kind, value=None):
        k, v = self.peek()
        if k != kind or (value is not None and v != value):
            raise OrdinalError(f"malformed ordinal {self.text!r}")
        self.i += 1
        return v

    def ordinal(self, depth):
        if depth > MAX_NESTING:
            raise OrdinalError("ordinal nesting too deep")
        out = self.term(depth)
        while self.peek() == ("sym", "+"):
            self.i += 1
            out = add(out, self.term(depth))
        return out

    def term(self, depth):
        kind, val = self.peek()
        if kind == "num":
            self.i += 1
            return Ordinal.of(val)
        self.take("w")
        exp = ONE
        if self.peek() == ("sym", "^"):
            self.i += 1
            kind, val = self.peek()
            if kind == "num":
                self.i += 1
                exp = Ordinal.of(val)
            elif kind == "w":
                self.i += 1
                exp = OMEGA
            else:
                self.take("sym", "(")
                exp = self.ordinal(depth + 1)
                self.take("sym", ")")
        coeff = 1
        if self.peek() == ("sym", "*"):
            self.i += 1
            coeff = self.take("num")
        return mul_nat(omega_pow(exp), coeff)
