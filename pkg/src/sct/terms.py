"""Ground terms over naturals and function symbols."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Union


@dataclass(frozen=True, slots=True)
class Num:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, slots=True)
class App:
    """``head(args...)``; ``origin`` optionally records ``(function, args, position)``
    of the rule instance that created this node and takes no part in equality."""

    head: str
    args: tuple[Term, ...]
    origin: Any = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return format_term(self)


Term = Union[Num, App]


def format_term(t: Term, width: int | None = None) -> str:
    parts: list[str] = []

    def go(x: Term) -> None:
        if isinstance(x, Num):
            parts.append(str(x.value))
            return
        parts.append(x.head)
        parts.append("(")
        for i, a in enumerate(x.args):
            if i:
                parts.append(", ")
            go(a)
        parts.append(")")

    go(t)
    s = "".join(parts)
    if width is not None and len(s) > width:
        s = s[: max(width - 3, 0)] + "..."
    return s


def subterm_at(t: Term, pos) -> Term:
    for i in pos:
        if not isinstance(t, App) or not 0 <= i < len(t.args):
            raise IndexError(f"no subterm at {tuple(pos)}")
        t = t.args[i]
    return t


def replace_at(t: Term, pos, new: Term) -> Term:
    if not pos:
        return new
    assert isinstance(t, App)
    i = pos[0]
    args = t.args[:i] + (replace_at(t.args[i], pos[1:], new),) + t.args[i + 1 :]
    return App(t.head, args, t.origin)


def term_positions(t: Term, prefix: tuple[int, ...] = ()):
    """Preorder ``(position, subterm)`` pairs."""
    yield prefix, t
    if isinstance(t, App):
        for i, a in enumerate(t.args):
            yield from term_positions(a, prefix + (i,))


def term_size(t: Term) -> int:
    return sum(1 for _ in term_positions(t))


def is_numeral_args(t: App) -> bool:
    return all(isinstance(a, Num) for a in t.args)
