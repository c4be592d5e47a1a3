"""First-order functional programs: AST, concrete syntax, positions, evaluation.

Surface syntax (one definition per ``=``, layout-insensitive)::

    # comment
    primitive add/2
    f(x, y) = if x = 0 then y + 1
              else if y = 0 then f(x - 1, 1)
              else f(x - 1, f(x, y - 1))

Boolean atoms are ``x = 0``, ``x = 1``, ``x < y``, ``x <= y`` combined with
``&&``, ``||`` and ``!``.  ``*`` is a wildcard argument and reads as ``0``.
"""

from __future__ import annotations

import re
from collections.abc import Callable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Union

from .terms import App, Num, Term

Position = tuple[int, ...]


class ProgramError(Exception):
    """Base class for program diagnostics; carries an optional source location."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + message)


class ProgramSyntaxError(ProgramError):
    pass


class ArityMismatch(ProgramError):
    pass


class DuplicateDefinition(ProgramError):
    pass


class UnknownIdentifier(ProgramError):
    pass


class InvalidPosition(ProgramError):
    pass


# boolean expressions ----------------------------------------------------


@dataclass(frozen=True, slots=True)
class EqZero:
    var: str


@dataclass(frozen=True, slots=True)
class EqOne:
    var: str


@dataclass(frozen=True, slots=True)
class Lt:
    left: str
    right: str


@dataclass(frozen=True, slots=True)
class Le:
    left: str
    right: str


@dataclass(frozen=True, slots=True)
class And:
    left: BoolExpr
    right: BoolExpr


@dataclass(frozen=True, slots=True)
class Or:
    left: BoolExpr
    right: BoolExpr


@dataclass(frozen=True, slots=True)
class Not:
    arg: BoolExpr


BoolExpr = Union[EqZero, EqOne, Lt, Le, And, Or, Not]


# expressions ------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ParamRef:
    name: str


@dataclass(frozen=True, slots=True)
class ParamSucc:
    name: str


@dataclass(frozen=True, slots=True)
class ParamPred:
    name: str


@dataclass(frozen=True, slots=True)
class NumLit:
    value: int


@dataclass(frozen=True, slots=True)
class Apply:
    head: str
    args: tuple[Expr, ...]


@dataclass(frozen=True, slots=True)
class IfThenElse:
    cond: BoolExpr
    then: Expr
    else_: Expr


Expr = Union[ParamRef, ParamSucc, ParamPred, NumLit, Apply, IfThenElse]


@dataclass(frozen=True, slots=True)
class FunctionDef:
    name: str
    params: tuple[str, ...]
    body: Expr

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class Program:
    defs: tuple[FunctionDef, ...]
    primitives: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "primitives", dict(self.primitives))
        object.__setattr__(self, "_by_name", {d.name: d for d in self.defs})

    def __eq__(self, other):
        if not isinstance(other, Program):
            return NotImplemented
        return self.defs == other.defs and self.primitives == other.primitives

    def __hash__(self):
        return hash((self.defs, tuple(sorted(self.primitives.items()))))

    @property
    def entry(self) -> FunctionDef:
        return self.defs[0]

    @property
    def functions(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.defs)

    def is_function(self, name: str) -> bool:
        return name in self._by_name

    def is_primitive(self, name: str) -> bool:
        return name in self.primitives

    def get(self, name: str) -> FunctionDef:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownIdentifier(f"no function named {name!r}") from None

    def arity(self, name: str) -> int:
        if name in self._by_name:
            return self._by_name[name].arity
        if name in self.primitives:
            return self.primitives[name]
        raise UnknownIdentifier(f"unknown identifier {name!r}")


@dataclass(frozen=True, slots=True)
class Call:
    tau: Position
    source: str
    target: str

    def __str__(self) -> str:
        return f"{format_position(self.tau)}: {self.source} -> {self.target}"


@dataclass(frozen=True, slots=True)
class PathCondition:
    literals: tuple[tuple[BoolExpr, bool], ...] = ()

    def __iter__(self):
        return iter(self.literals)

    def __len__(self):
        return len(self.literals)


def format_position(tau: Position) -> str:
    return ".".join(map(str, tau)) if tau else "<>"


def parse_position(text: str) -> Position:
    text = text.strip()
    if text in ("<>", ""):
        return ()
    try:
        return tuple(int(part) for part in text.split("."))
    except ValueError:
        raise ProgramSyntaxError(f"bad position {text!r}") from None


# lexer ------------------------------------------------------------------

_TOKEN_SPEC = [
    ("comment", r"#[^\n]*"),
    ("ws", r"[ \t\r\f]+"),
    ("nl", r"\n"),
    ("num", r"\d+"),
    ("ident", r"[A-Za-z_][A-Za-z0-9_']*"),
    ("op", r"<=|&&|\|\||[()=<,!+\-*/;]"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pat})" for name, pat in _TOKEN_SPEC))
_KEYWORDS = {"if", "then", "else", "primitive"}


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ProgramSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            word = m.group()
            if kind == "ident" and word in _KEYWORDS:
                kind = "kw"
            out.append(Token(kind, word, line, pos - line_start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


# parser -----------------------------------------------------------------


class _Parser:
    def __init__(self, text: str, strict: bool):
        self.tokens = tokenize(text)
        self.i = 0
        self.strict = strict
        self.params: tuple[str, ...] = ()
        # (head, nargs, token) for every application, checked once all defs are known
        self.applications: list[tuple[str, int, Token]] = []

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def error(self, expected: str, tok: Token | None = None) -> ProgramSyntaxError:
        tok = tok or self.tok
        found = tok.text or "end of input"
        return ProgramSyntaxError(f"expected {expected}, found {found!r}", tok.line, tok.col)

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind in ("op", "kw"):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.tok
        if not self.accept(text):
            raise self.error(repr(text))
        return tok

    def ident(self) -> Token:
        tok = self.tok
        if tok.kind != "ident":
            raise self.error("identifier")
        self.i += 1
        return tok

    def number(self) -> int:
        tok = self.tok
        if tok.kind != "num":
            raise self.error("number")
        self.i += 1
        return int(tok.text)

    def program(self) -> Program:
        primitives: dict[str, int] = {}
        defs: list[FunctionDef] = []
        def_tokens: dict[str, Token] = {}
        while self.tok.kind != "eof":
            if self.accept(";"):
                continue
            if self.accept("primitive"):
                name = self.ident()
                self.expect("/")
                arity = self.number()
                if name.text in primitives:
                    raise DuplicateDefinition(f"primitive {name.text!r} declared twice", name.line, name.col)
                primitives[name.text] = arity
                continue
            fdef, tok = self.definition()
            if fdef.name in def_tokens:
                raise DuplicateDefinition(f"function {fdef.name!r} defined twice", tok.line, tok.col)
            def_tokens[fdef.name] = tok
            defs.append(fdef)
        if not defs:
            raise self.error("a function definition")
        for name, tok in def_tokens.items():
            if name in primitives:
                raise DuplicateDefinition(f"{name!r} is both a primitive and a function", tok.line, tok.col)
        arities = {d.name: d.arity for d in defs}
        arities.update(primitives)
        for head, nargs, tok in self.applications:
            if head not in arities:
                raise UnknownIdentifier(f"unknown function or primitive {head!r}", tok.line, tok.col)
            if arities[head] != nargs:
                raise ArityMismatch(
                    f"{head!r} expects {arities[head]} argument(s), got {nargs}", tok.line, tok.col
                )
        return Program(tuple(defs), primitives)

    def definition(self) -> tuple[FunctionDef, Token]:
        name = self.ident()
        self.expect("(")
        params: list[str] = []
        if not self.accept(")"):
            while True:
                p = self.ident()
                if p.text in params:
                    raise DuplicateDefinition(f"parameter {p.text!r} repeated", p.line, p.col)
                params.append(p.text)
                if self.accept(")"):
                    break
                self.expect(",")
        self.expect("=")
        self.params = tuple(params)
        body = self.expr()
        return FunctionDef(name.text, self.params, body), name

    def expr(self) -> Expr:
        if self.accept("if"):
            cond = self.bexpr()
            self.expect("then")
            then = self.expr()
            self.expect("else")
            else_ = self.expr()
            return IfThenElse(cond, then, else_)
        if self.tok.text == "(" and self.tok.kind == "op":
            self.i += 1
            inner = self.expr()
            self.expect(")")
            return inner
        return self.aexpr()

    def aexpr(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return NumLit(int(tok.text))
        if self.accept("*"):
            return NumLit(0)
        if tok.kind != "ident":
            raise self.error("expression")
        self.i += 1
        if self.accept("("):
            args: list[Expr] = []
            if not self.accept(")"):
                while True:
                    args.append(self.argument())
                    if self.accept(")"):
                        break
                    self.expect(",")
            self.applications.append((tok.text, len(args), tok))
            return Apply(tok.text, tuple(args))
        if tok.text not in self.params:
            raise UnknownIdentifier(f"unknown parameter {tok.text!r}", tok.line, tok.col)
        for sign, ctor in (("+", ParamSucc), ("-", ParamPred)):
            if self.tok.text == sign and self.tok.kind == "op":
                one = self.peek()
                if one.kind != "num" or one.text != "1":
                    raise self.error("1", one)
                self.i += 2
                return ctor(tok.text)
        return ParamRef(tok.text)

    def argument(self) -> Expr:
        if self.strict:
            if self.tok.text == "if" and self.tok.kind == "kw":
                raise ProgramSyntaxError(
                    "conditional inside an argument (strict grammar)", self.tok.line, self.tok.col
                )
            return self.aexpr()
        return self.expr()

    def bexpr(self) -> BoolExpr:
        left = self.band()
        while self.accept("||"):
            left = Or(left, self.band())
        return left

    def band(self) -> BoolExpr:
        left = self.bnot()
        while self.accept("&&"):
            left = And(left, self.bnot())
        return left

    def bnot(self) -> BoolExpr:
        if self.accept("!"):
            return Not(self.bnot())
        if self.accept("("):
            inner = self.bexpr()
            self.expect(")")
            return inner
        x = self.param()
        if self.accept("="):
            tok = self.tok
            n = self.number()
            if n == 0:
                return EqZero(x)
            if n == 1:
                return EqOne(x)
            raise ProgramSyntaxError("only x = 0 and x = 1 tests are allowed", tok.line, tok.col)
        if self.accept("<="):
            return Le(x, self.param())
        if self.accept("<"):
            return Lt(x, self.param())
        raise self.error("'=', '<' or '<='")

    def param(self) -> str:
        tok = self.ident()
        if tok.text not in self.params:
            raise UnknownIdentifier(f"unknown parameter {tok.text!r}", tok.line, tok.col)
        return tok.text


def parse_program(text: str, strict: bool = True) -> Program:
    """Parse program source; raises a :class:`ProgramError` subclass with line/column."""
    return _Parser(text, strict).program()


# pretty printing --------------------------------------------------------


def format_bool(b: BoolExpr, prec: int = 0) -> str:
    if isinstance(b, EqZero):
        return f"{b.var} = 0"
    if isinstance(b, EqOne):
        return f"{b.var} = 1"
    if isinstance(b, Lt):
        return f"{b.left} < {b.right}"
    if isinstance(b, Le):
        return f"{b.left} <= {b.right}"
    if isinstance(b, Not):
        return "!" + format_bool(b.arg, 3)
    if isinstance(b, And):
        s = f"{format_bool(b.left, 2)} && {format_bool(b.right, 3)}"
        return f"({s})" if prec > 2 else s
    s = f"{format_bool(b.left, 1)} || {format_bool(b.right, 2)}"
    return f"({s})" if prec > 1 else s


def format_expr(e: Expr, nested: bool = False) -> str:
    if isinstance(e, ParamRef):
        return e.name
    if isinstance(e, ParamSucc):
        return f"{e.name} + 1"
    if isinstance(e, ParamPred):
        return f"{e.name} - 1"
    if isinstance(e, NumLit):
        return str(e.value)
    if isinstance(e, Apply):
        return f"{e.head}({', '.join(format_expr(a, True) for a in e.args)})"
    s = f"if {format_bool(e.cond)} then {format_expr(e.then, True)} else {format_expr(e.else_)}"
    return f"({s})" if nested else s


def format_program(p: Program) -> str:
    lines = [f"primitive {name}/{arity}" for name, arity in p.primitives.items()]
    for d in p.defs:
        lines.append(f"{d.name}({', '.join(d.params)}) = {format_expr(d.body)}")
    return "\n".join(lines) + "\n"


# positions --------------------------------------------------------------


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, Apply):
        return e.args
    if isinstance(e, IfThenElse):
        return (e.then, e.else_)
    return ()


def subexpr_at(e: Expr, tau: Sequence[int]) -> Expr:
    cur = e
    for depth, i in enumerate(tau):
        kids = children(cur)
        if not 0 <= i < len(kids):
            raise InvalidPosition(f"position {format_position(tuple(tau))} invalid at depth {depth}")
        cur = kids[i]
    return cur


def positions(e: Expr, prefix: Position = ()) -> Iterator[tuple[Position, Expr]]:
    """All ``(position, subexpression)`` pairs in preorder (leftmost-outermost first)."""
    yield prefix, e
    for i, kid in enumerate(children(e)):
        yield from positions(kid, prefix + (i,))


def calls_of(p: Program) -> list[Call]:
    out = []
    for d in p.defs:
        for tau, sub in positions(d.body):
            if isinstance(sub, Apply) and p.is_function(sub.head):
                out.append(Call(tau, d.name, sub.head))
    return out


def path_condition(f: FunctionDef, tau: Sequence[int]) -> PathCondition:
    lits = []
    cur = f.body
    for depth, i in enumerate(tau):
        kids = children(cur)
        if not 0 <= i < len(kids):
            raise InvalidPosition(f"position {format_position(tuple(tau))} invalid at depth {depth}")
        if isinstance(cur, IfThenElse):
            lits.append((cur.cond, i == 0))
        cur = kids[i]
    return PathCondition(tuple(lits))


def body_size(e: Expr) -> int:
    """Number of application nodes (defined functions and primitives alike)."""
    return sum(1 for _, sub in positions(e) if isinstance(sub, Apply))


# evaluation -------------------------------------------------------------


def eval_bool(b: BoolExpr, env: Mapping[str, int]) -> bool:
    if isinstance(b, EqZero):
        return env[b.var] == 0
    if isinstance(b, EqOne):
        return env[b.var] == 1
    if isinstance(b, Lt):
        return env[b.left] < env[b.right]
    if isinstance(b, Le):
        return env[b.left] <= env[b.right]
    if isinstance(b, And):
        return eval_bool(b.left, env) and eval_bool(b.right, env)
    if isinstance(b, Or):
        return eval_bool(b.left, env) or eval_bool(b.right, env)
    return not eval_bool(b.arg, env)


BoolInterp = Callable[[BoolExpr, Mapping[str, int]], bool]


def eval_expr(
    e: Expr,
    params: Sequence[str],
    u: Sequence[int],
    bool_interp: BoolInterp | None = None,
    origin: str | None = None,
) -> Term:
    """The term ``e(u)``: substitute ``u`` for ``params`` and resolve every conditional.

    With ``origin`` set to the enclosing function name, each application node of the
    result records ``(origin, u, tau)`` where ``tau`` is its position in ``e``.
    """
    if len(params) != len(u):
        raise ValueError(f"expected {len(params)} argument(s), got {len(u)}")
    env = dict(zip(params, u))
    interp = bool_interp or eval_bool
    state = tuple(u)

    def go(x: Expr, tau: Position) -> Term:
        while isinstance(x, IfThenElse):
            if interp(x.cond, env):
                x, tau = x.then, tau + (0,)
            else:
                x, tau = x.else_, tau + (1,)
        if isinstance(x, ParamRef):
            return Num(env[x.name])
        if isinstance(x, ParamSucc):
            return Num(env[x.name] + 1)
        if isinstance(x, ParamPred):
            v = env[x.name]
            return Num(v - 1 if v > 0 else 0)
        if isinstance(x, NumLit):
            return Num(x.value)
        args = tuple(go(a, tau + (i,)) for i, a in enumerate(x.args))
        return App(x.head, args, (origin, state, tau) if origin is not None else None)

    return go(e, ())


def instantiate(p: Program, name: str, u: Sequence[int]) -> Term:
    """Right-hand side of the rule for ``name(u)``, with call origins recorded."""
    d = p.get(name)
    return eval_expr(d.body, d.params, u, origin=d.name)
