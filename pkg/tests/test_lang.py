import pytest
from hypothesis import given, strategies as st

from sct.corpus import load_program, names, source
from sct.lang import (
    And,
    Apply,
    ArityMismatch,
    Call,
    DuplicateDefinition,
    EqZero,
    IfThenElse,
    InvalidPosition,
    Not,
    NumLit,
    ParamPred,
    ParamRef,
    ParamSucc,
    ProgramSyntaxError,
    UnknownIdentifier,
    body_size,
    calls_of,
    eval_expr,
    format_position,
    format_program,
    parse_position,
    parse_program,
    path_condition,
    subexpr_at,
)
from sct.terms import App, Num

ACK = load_program("ackermann")


def if_depth(e) -> int:
    return 1 + max(if_depth(e.then), if_depth(e.else_)) if isinstance(e, IfThenElse) else 0


class TestParse:
    def test_ackermann_shape(self):
        assert ACK.functions == ("A",)
        assert ACK.entry.arity == 2
        assert if_depth(ACK.entry.body) == 2

    def test_identity(self):
        p = parse_program("f(x) = x")
        assert len(p.defs) == 1 and p.entry.body == ParamRef("x")

    def test_toy(self):
        for name in ("toy_power", "toy_verbatim"):
            p = load_program(name)
            assert p.functions == ("f", "g")
            assert [d.arity for d in p.defs] == [5, 5]
            assert p.primitives == {"add": 2}

    def test_star_is_zero(self):
        p = parse_program("f(x) = f(*)")
        assert p.entry.body == Apply("f", (NumLit(0),))

    def test_succ_and_pred(self):
        p = parse_program("f(x, y) = f(x + 1, y - 1)")
        assert p.entry.body.args == (ParamSucc("x"), ParamPred("y"))

    def test_guard_forms(self):
        p = parse_program("f(x, y) = if !(x = 0) && y = 0 then 1 else 0")
        assert p.entry.body.cond == And(Not(EqZero("x")), EqZero("y"))

    @pytest.mark.parametrize(
        "text, exc",
        [
            ("f(x) = g(x)", UnknownIdentifier),
            ("f(x) = f(x, x)", ArityMismatch),
            ("f(x) = x\nf(y) = y", DuplicateDefinition),
            ("f(x) = x + 2", ProgramSyntaxError),
            ("f(x) = z", UnknownIdentifier),
            ("f(x) = ", ProgramSyntaxError),
            ("f(x) = f(if x = 0 then 0 else 1)", ProgramSyntaxError),
        ],
    )
    def test_errors(self, text, exc):
        with pytest.raises(exc):
            parse_program(text)

    def test_error_carries_location(self):
        with pytest.raises(ProgramSyntaxError) as info:
            parse_program("f(x) =\n  x +")
        assert info.value.line == 2

    def test_lenient_mode_allows_conditional_arguments(self):
        p = parse_program("f(x) = f(if x = 0 then 0 else 1)", strict=False)
        assert isinstance(p.entry.body.args[0], IfThenElse)

    @pytest.mark.parametrize("name", names())
    def test_corpus_round_trips(self, name):
        p = load_program(name)
        assert parse_program(format_program(p)) == p
        assert source(name).strip()


class TestPositions:
    def test_innermost_call(self):
        assert subexpr_at(ACK.entry.body, (1, 1, 1)) == Apply("A", (ParamRef("x"), ParamPred("y")))

    def test_root(self):
        assert subexpr_at(ACK.entry.body, ()) is ACK.entry.body

    def test_out_of_range(self):
        with pytest.raises(InvalidPosition):
            subexpr_at(ACK.entry.body, (5,))

    @given(st.lists(st.integers(0, 20), max_size=6))
    def test_format_parse(self, tau):
        assert parse_position(format_position(tuple(tau))) == tuple(tau)


class TestCalls:
    def test_ackermann(self):
        assert calls_of(ACK) == [Call((1, 0), "A", "A"), Call((1, 1), "A", "A"), Call((1, 1, 1), "A", "A")]

    def test_identity_has_none(self):
        assert calls_of(parse_program("f(x) = x")) == []

    def test_toy(self):
        pairs = sorted((c.source, c.target) for c in calls_of(load_program("toy_power")))
        assert pairs == [("f", "f"), ("f", "g"), ("g", "g")]

    def test_path_conditions(self):
        assert path_condition(ACK.entry, (1, 0)).literals == ((EqZero("x"), False), (EqZero("y"), True))
        assert path_condition(ACK.entry, (1, 1, 1)).literals == ((EqZero("x"), False), (EqZero("y"), False))
        assert len(path_condition(parse_program("f(x) = f(x)").entry, ())) == 0

    def test_body_size(self):
        assert body_size(ACK.entry.body) == 3
        assert body_size(parse_program("f(x) = x").entry.body) == 0


class TestEval:
    def body(self, u):
        return eval_expr(ACK.entry.body, ACK.entry.params, u)

    def test_base_branch(self):
        assert self.body((0, 3)) == Num(4)

    def test_nested_branch(self):
        assert self.body((2, 3)) == App("A", (Num(1), App("A", (Num(2), Num(2)))))

    def test_truncated_predecessor(self):
        assert eval_expr(ParamPred("x"), ("x",), (0,)) == Num(0)

    def test_origin_is_recorded_but_ignored_by_equality(self):
        t = eval_expr(ACK.entry.body, ACK.entry.params, (2, 3), origin="A")
        assert t.origin == ("A", (2, 3), (1, 1))
        assert t.args[1].origin == ("A", (2, 3), (1, 1, 1))
        assert t == self.body((2, 3))

    @given(st.integers(0, 50), st.integers(0, 50))
    def test_branch_selection(self, x, y):
        t = self.body((x, y))
        if x == 0:
            assert t == Num(y + 1)
        elif y == 0:
            assert t == App("A", (Num(x - 1), Num(1)))
        else:
            assert t == App("A", (Num(x - 1), App("A", (Num(x), Num(y - 1)))))
