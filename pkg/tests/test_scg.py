import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from sct.corpus import load_program
from sct.lang import Call, calls_of, parse_program
from sct.rewrite import StateTransition
from sct.scg import (
    CompositionMismatch,
    Description,
    DescriptionError,
    Isct,
    NotIsct,
    RamseyOverflow,
    SizeChangeGraph,
    ackermann_description,
    ackermann_graph,
    check_isct,
    check_safety_runtime,
    closure,
    compose,
    compose_all,
    descent_search,
    extract_description,
    find_folding,
    find_inner_folding,
    format_description,
    graph_holds,
    is_idempotent,
    is_multipath,
    monitor,
    parse_description,
    ramsey_bound,
)

G = SizeChangeGraph.of
G1 = G("A", "A", strict=[(0, 0)])
G2 = G("A", "A", strict=[(1, 1)], weak=[(0, 0)])
SWAPG = G("swap", "swap", weak=[(0, 1), (1, 0)])
seeds = st.integers(0, 2**32 - 1)


class TestGraph:
    def test_strict_shadows_weak(self):
        g = G("f", "f", strict=[(0, 0)], weak=[(0, 0), (0, 1)])
        assert {(a.src, a.dst, a.strict) for a in g.arcs} == {(0, 0, True), (0, 1, False)}

    def test_text(self):
        assert str(G2) == "A -> A {x0 -> x0, x1 ->> x1}"
        assert G2.describe(["x", "y"], ["x", "y"]) == "A -> A {x -> x, y ->> y}"


class TestCompose:
    def test_examples(self):
        assert compose(G2, G2) == G2
        assert compose(G1, G2) == G1
        assert compose(G("f", "g", weak=[(0, 1)]), G("g", "h", strict=[(1, 2)])) == G("f", "h", strict=[(0, 2)])

    def test_mismatch(self):
        with pytest.raises(CompositionMismatch):
            compose(G("f", "g"), G("f", "g"))

    @given(seeds)
    def test_matches_path_oracle(self, seed):
        rng = random.Random(seed)
        n, k, l = (rng.randint(1, 3) for _ in range(3))
        a = oracles.random_graph(rng, n, k, "f", "g")
        b = oracles.random_graph(rng, k, l, "g", "h")
        assert compose(a, b) == oracles.compose_ref(a, b)

    @given(seeds)
    def test_valuation_transfer(self, seed):
        rng = random.Random(seed)
        n, k, l = (rng.randint(1, 3) for _ in range(3))
        a = oracles.random_graph(rng, n, k, "f", "g")
        b = oracles.random_graph(rng, k, l, "g", "h")
        ab = compose(a, b)
        for u, v, w in itertools.product(
            itertools.product(range(3), repeat=n), itertools.product(range(3), repeat=k), itertools.product(range(3), repeat=l)
        ):
            if graph_holds(a, u, v) and graph_holds(b, v, w):
                assert graph_holds(ab, u, w)

    @given(seeds)
    def test_associative(self, seed):
        rng = random.Random(seed)
        n = rng.randint(1, 3)
        a, b, c = (oracles.random_graph(rng, n) for _ in range(3))
        assert compose(compose(a, b), c) == compose(a, compose(b, c))


class TestClosure:
    def test_ackermann(self):
        assert set(closure([G1, G2])) == {G1, G2}

    def test_empty(self):
        assert closure([]) == []

    def test_generalized_binary(self):
        _, d = ackermann_description(2)
        assert len(closure(d.range())) == len(oracles.closure_ref(d.range()))

    @settings(max_examples=80)
    @given(seeds)
    def test_matches_saturation(self, seed):
        rng = random.Random(seed)
        gs = [oracles.random_graph(rng, rng.randint(1, 2)) for _ in range(rng.randint(1, 3))]
        assert set(closure(gs)) == oracles.closure_ref(gs)

    def test_idempotence(self):
        assert is_idempotent(G1) and is_idempotent(G2)
        assert not is_idempotent(SWAPG)
        assert not is_idempotent(G("f", "g"))


class TestIsct:
    def desc(self, g, src="A"):
        return Description({Call((0,), src, src): g})

    def test_ackermann(self):
        assert isinstance(check_isct(extract_description(load_program("ackermann"))), Isct)

    def test_swap(self):
        v = check_isct(self.desc(SWAPG, "swap"))
        assert isinstance(v, NotIsct) and v.witness == G("swap", "swap", weak=[(0, 0), (1, 1)])

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_generalized_ackermann(self, n):
        assert check_isct(ackermann_description(n)[1])

    @settings(max_examples=80)
    @given(seeds)
    def test_matches_oracle(self, seed):
        rng = random.Random(seed)
        gs = [oracles.random_graph(rng, rng.randint(1, 2)) for _ in range(rng.randint(1, 3))]
        d = Description({Call((i,), "f", "f"): g for i, g in enumerate(gs)})
        assert bool(check_isct(d)) == oracles.isct_ref(gs)

    @settings(max_examples=80)
    @given(seeds)
    def test_negative_verdict_descent_is_bounded(self, seed):
        """Repeating a strict-free idempotent never yields more strict arcs than there are parameters."""
        rng = random.Random(seed)
        gs = [oracles.random_graph(rng, rng.randint(1, 3)) for _ in range(rng.randint(1, 3))]
        v = check_isct(Description({Call((i,), "f", "f"): g for i, g in enumerate(gs)}))
        if not v:
            arity = 1 + max([a.src for a in v.witness.arcs] + [a.dst for a in v.witness.arcs] + [0])
            for k in (1, 2, 5, 50):
                thread = descent_search([v.witness] * k)
                assert thread is None or thread.strict_count <= arity


class TestExtract:
    def test_ackermann(self):
        d = extract_description(load_program("ackermann"))
        assert list(d.items()) == [
            (Call((1, 0), "A", "A"), G1),
            (Call((1, 1), "A", "A"), G1),
            (Call((1, 1, 1), "A", "A"), G2),
        ]

    @pytest.mark.parametrize("name", ["toy_power", "toy_verbatim"])
    def test_toy(self, name):
        d = extract_description(load_program(name))
        by_pair = {(c.source, c.target): g for c, g in d.items()}
        assert by_pair[("g", "g")] == G("g", "g", strict=[(4, 4)], weak=[(3, 3)])
        assert by_pair[("f", "f")] == G("f", "f", strict=[(1, 1)], weak=[(0, 0)])
        assert by_pair[("f", "g")] == G("f", "g", weak=[(0, 0), (1, 1), (0, 4), (3, 3)])
        assert check_isct(d)

    def test_successor_argument(self):
        d = extract_description(parse_program("f(x) = f(x + 1)"))
        assert list(d.range()) == [G("f", "f")]

    def test_unguarded_predecessor_gets_no_arc(self):
        d = extract_description(parse_program("f(x) = f(x - 1)"))
        assert list(d.range()) == [G("f", "f")]

    def test_guard_from_comparison(self):
        d = extract_description(parse_program("f(x, y) = if y < x then f(x - 1, y) else 0"))
        assert list(d.range()) == [G("f", "f", strict=[(0, 0)], weak=[(1, 1)])]

    @pytest.mark.parametrize("name", ["ackermann", "toy_power", "countdown"])
    def test_safe_on_runs(self, name):
        p = load_program(name)
        d = extract_description(p)
        args = {"ackermann": (2, 2), "toy_power": (2, 3, 0, 1, 0), "countdown": (6,)}[name]
        rep = monitor(p, d, p.entry.name, args, 10**5)
        assert rep.ok and rep.checked > 0 and rep.value is not None


class TestSafety:
    def st(self, u, v, g_tau=(1, 1, 1)):
        return StateTransition(("A", u), Call(g_tau, "A", "A"), ("A", v))

    def test_examples(self):
        d = extract_description(load_program("ackermann"))
        assert check_safety_runtime(d, self.st((2, 3), (2, 2)))
        assert check_safety_runtime(d, self.st((2, 3), (1, 9), (1, 1)))
        assert not check_safety_runtime(d, self.st((2, 3), (2, 3)))

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_generalized_monitor(self, n):
        p, d = ackermann_description(n)
        for tup in itertools.product(range(2), repeat=n + 1):
            rep = monitor(p, d, "A", tup, 20_000, {"f": lambda y: y + 1})
            assert rep.ok

    def test_wrong_description_is_caught(self):
        p = load_program("ackermann")
        bad = Description({c: G("A", "A", strict=[(1, 1)]) for c in calls_of(p)})
        rep = monitor(p, bad, "A", (1, 1), 1000)
        assert not rep.ok


class TestRamsey:
    def test_values(self):
        assert [ramsey_bound(c) for c in range(1, 7)] == [3, 6, 17, 66, 327, 1958]

    def test_matches_recursive_bound(self):
        for c in range(1, 9):
            assert ramsey_bound(c) == oracles.ramsey_recursive(c)

    def test_guard(self):
        with pytest.raises(RamseyOverflow):
            ramsey_bound(9)

    @pytest.mark.parametrize("c", [1, 2])
    def test_tight_for_small_c(self, c):
        m = ramsey_bound(c)
        assert oracles.has_mono_triangle_free_colouring(m - 1, c)
        assert not oracles.has_mono_triangle_free_colouring(m, c)


class TestFolding:
    def test_idempotent_run(self):
        f = find_folding([G2, G2, G2])
        assert f is not None and f.split == (0, 1) and f.H == G2 and f.end is None

    def test_no_split(self):
        toy = extract_description(load_program("toy_power"))
        fg = next(g for c, g in toy.items() if c.source != c.target)
        assert find_folding([fg]) is None

    def test_suffix_split_can_be_missing(self):
        weak, empty = G("f", "f", weak=[(0, 0)]), G("f", "f")
        mp = [weak] * 5 + [empty]
        assert len(mp) == ramsey_bound(len(closure(mp)))
        assert find_folding(mp) is None
        fold = find_inner_folding(mp)
        assert fold is not None and fold.H == weak

    @settings(max_examples=60)
    @given(seeds)
    def test_interior_fold_at_ramsey_length(self, seed):
        rng = random.Random(seed)
        gs = [oracles.random_graph(rng, rng.randint(1, 2)) for _ in range(rng.randint(1, 2))]
        c = len(closure(gs))
        if c > 3:
            return
        mp = [rng.choice(gs) for _ in range(ramsey_bound(c))]
        fold = find_inner_folding(mp)
        assert fold is not None
        i, j = fold.split
        k = fold.stop(len(mp))
        assert compose_all(mp[i:j]) == compose_all(mp[j:k]) == compose_all(mp[i:k]) == fold.H
        assert is_idempotent(fold.H)
        assert oracles.triangle_fold_exists(mp)

    def test_multipath(self):
        assert is_multipath([G("f", "g"), G("g", "f")])
        assert not is_multipath([G("f", "g"), G("f", "g")])


class TestThreads:
    def test_examples(self):
        t = descent_search([G1] * 3)
        assert t.params == (0, 0, 0, 0) and t.strict_count == 3
        t = descent_search([G2] * 2)
        assert t.params == (1, 1, 1) and t.strict_count == 2
        t = descent_search([SWAPG] * 4)
        assert t.strict_count == 0

    def test_none(self):
        assert descent_search([G("f", "f")]) is None


class TestGeneralizedAckermann:
    def test_unary(self):
        _, d = ackermann_description(1)
        assert set(d.range()) == {G1, G2}

    def test_binary_top_graph(self):
        assert ackermann_graph("A", 3) == G("A", "A", strict=[(2, 2)], weak=[(0, 0), (1, 1)])

    def test_description_matches_program(self):
        for n in range(1, 5):
            p, d = ackermann_description(n)
            d.validate(p)


class TestTextFormat:
    @pytest.mark.parametrize("name", ["ackermann", "toy_power", "swap", "true_stages"])
    def test_round_trip(self, name):
        d = extract_description(load_program(name))
        assert parse_description(format_description(d)) == d

    def test_comments_and_errors(self):
        text = "# c\ngraph G0 : f -> f\n  x0 ->> x0\ncall <> f f uses G0\n"
        assert parse_description(text)[Call((), "f", "f")] == G("f", "f", strict=[(0, 0)])
        with pytest.raises(DescriptionError):
            parse_description("call <> f f uses G9\n")
        with pytest.raises(DescriptionError):
            parse_description("graph G0 : f -> f\n  x0 => x0\n")

    def test_validate(self):
        p = load_program("ackermann")
        with pytest.raises(DescriptionError):
            Description({Call((0,), "A", "A"): G1}).validate(p)
        with pytest.raises(DescriptionError):
            Description({Call((0,), "A", "B"): G1})
