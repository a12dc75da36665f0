"""Transition systems, observable steps, lassos, and the text formats."""
import random

import pytest

from hypersafe.errors import InputError, ParseError
from hypersafe.lts import Event, Lasso, Lts, parse_event, parse_lasso, parse_lts

from conftest import random_lts


def ev(name):
    return Event.sym(name)


class TestObsSuccessors:
    def test_branching_target(self, sim_pair):
        _, ts2 = sim_pair
        assert ts2.obs_successors(0) == ((ev("a"), 1),)

    def test_silent_then_loop(self, align_pair):
        left, _ = align_pair
        assert left.obs_successors(0) == ((ev("a"), 1),)

    def test_isolated_state(self):
        lts = Lts("L", ["s0", "s1"], 0, [(0, None, 0)])
        assert lts.obs_successors(1) == ()

    def test_unknown_state(self, sim_pair):
        with pytest.raises(InputError):
            sim_pair[0].obs_successors(99)

    def test_agrees_with_path_search(self):
        # oracle: silent-closure BFS followed by one labeled edge
        rng = random.Random(7)
        for _ in range(60):
            lts = random_lts(rng, "R", max_states=8)
            for s in range(lts.n_states):
                reach = {s}
                frontier = [s]
                while frontier:
                    cur = frontier.pop()
                    for lab, dst in lts.outgoing(cur):
                        if lab is None and dst not in reach:
                            reach.add(dst)
                            frontier.append(dst)
                expected = {(lab, dst) for q in reach
                            for lab, dst in lts.outgoing(q) if lab is not None}
                assert set(lts.obs_successors(s)) == expected


class TestDetStep:
    def test_single_silent_edge(self, align_pair):
        assert align_pair[0].det_step(0) == 1

    def test_labeled_self_loop(self):
        lts = Lts("L", ["s0"], 0, [(0, ev("a"), 0)])
        assert lts.det_step(0) is None

    def test_two_silent_targets(self, flip_system):
        assert flip_system.det_step(0) is None

    def test_preserves_observable_words(self):
        # a deterministic silent step changes no observable behavior; fixed-bound
        # lasso sets can differ (a cycle through the start closes later), so the
        # oracle compares word-prefix languages instead
        def words(lts, s, depth):
            if depth == 0:
                return {()}
            return {(e,) + w for e, dst in lts.obs_successors(s)
                    for w in words(lts, dst, depth - 1)}

        rng = random.Random(11)
        checked = 0
        for _ in range(150):
            lts = random_lts(rng, "R", max_states=6)
            for s in range(lts.n_states):
                t = lts.det_step(s)
                if t is None:
                    continue
                checked += 1
                assert words(lts, s, 5) == words(lts, t, 5)
        assert checked > 10


class TestHasTrace:
    def test_live_state(self, sim_pair):
        assert sim_pair[1].has_trace(0)

    def test_deadlock(self):
        lts = Lts("L", ["s0"], 0, [])
        assert not lts.has_trace(0)

    def test_silent_cycle_only(self):
        lts = Lts("L", ["s0", "s1"], 0, [(0, None, 1), (1, None, 0)])
        assert not lts.has_trace(0)

    def test_matches_lasso_emptiness(self):
        rng = random.Random(13)
        for _ in range(60):
            lts = random_lts(rng, "R", max_states=6)
            for s in range(lts.n_states):
                lassos = lts.enumerate_lassos(s, lts.n_states + 1)
                assert lts.has_trace(s) == bool(lassos)


class TestEnumerateLassos:
    def test_branching_cycles(self, sim_pair):
        _, ts2 = sim_pair
        got = ts2.enumerate_lassos(0, 2)
        assert got == [Lasso((ev("a"),), (ev("b"),)), Lasso((ev("a"),), (ev("c"),))]

    def test_deadlock(self):
        lts = Lts("L", ["s0"], 0, [])
        assert lts.enumerate_lassos(0, 4) == []

    def test_silent_branch_prefixes_folded(self, flip_system):
        got = flip_system.enumerate_lassos(0, 3)
        assert Lasso((), (ev("a"),)) in got
        assert Lasso((), (ev("b"),)) in got
        assert all(not l.prefix for l in got)


class TestLasso:
    def test_indexing_and_suffix(self):
        l = parse_lasso("a b (c d)^w")
        assert [str(l.at(i)) for i in range(6)] == ["a", "b", "c", "d", "c", "d"]
        assert l.suffix(3).at(0) == ev("d")
        assert l.suffix(4) == l.suffix(2)

    def test_normalize_trims_and_reduces(self):
        a, b = ev("a"), ev("b")
        assert Lasso((a, b, a), (b, a)).normalize() == Lasso((), (a, b))
        assert Lasso((), (a, a)).normalize() == Lasso((), (a,))
        n = Lasso((a,), (b, b)).normalize()
        assert n == Lasso((a,), (b,))

    def test_normalize_preserves_word(self):
        rng = random.Random(3)
        letters = [ev("a"), ev("b")]
        for _ in range(300):
            pre = tuple(rng.choice(letters) for _ in range(rng.randint(0, 3)))
            cyc = tuple(rng.choice(letters) for _ in range(rng.randint(1, 4)))
            l = Lasso(pre, cyc)
            n = l.normalize()
            assert n.letters(24) == l.letters(24)
            assert n.normalize() == n

    def test_literals_roundtrip(self):
        for text in ("a b (c d)^w", "in(1) (out(2))^w", "a^w", "(a b)^w"):
            l = parse_lasso(text)
            assert parse_lasso(str(l)) == l

    def test_bad_literals(self):
        for text in ("a b c", "( )^w", "a ^w ^w"):
            with pytest.raises(ParseError):
                parse_lasso(text)

    def test_empty_cycle_rejected(self):
        with pytest.raises(InputError):
            Lasso((), ())


class TestParser:
    def test_roundtrip_structure(self, sim_pair):
        ts1, _ = sim_pair
        assert ts1.n_states == 3
        assert ts1.init == 0
        assert len(ts1.transitions) == 4
        assert ts1.alphabet == (ev("a"), ev("b"), ev("c"))

    def test_undeclared_state(self):
        with pytest.raises(ParseError):
            parse_lts("lts X { states q0; init q0; q0 -a-> q9; }")

    def test_undeclared_init(self):
        with pytest.raises(ParseError):
            parse_lts("lts X { states q0; init q7; }")

    def test_comments_and_io_labels(self):
        lts = parse_lts("""lts X { states q0; init q0;  # a comment
            q0 -in(3)-> q0;   # input edge
            q0 -out(1)-> q0; }""")
        labels = {lab for _, lab, _ in lts.transitions}
        assert labels == {Event.inp(3), Event.out(1)}

    def test_parse_event(self):
        assert parse_event("in(4)") == Event.inp(4)
        assert parse_event("hello") == ev("hello")
        with pytest.raises(ParseError):
            parse_event("4x")


class TestEventOrder:
    def test_total_order(self):
        events = [Event.out(1), Event.inp(2), ev("z"), ev("a"), Event.inp(0)]
        ordered = sorted(events)
        assert ordered == [ev("a"), ev("z"), Event.inp(0), Event.inp(2), Event.out(1)]
