"""Program frontend: parsing, reactivity, semantics, compilation."""
import pytest

from hypersafe.errors import ParseError, ResourceError
from hypersafe.imp import (Assign, BinOp, Config, Const, Havoc, If, Input,
                           Loop, Output, Seq, Var, compile_lts, eval_cond,
                           eval_expr, parse_program, seq, step, stmt_str)
from hypersafe.imp import BoolLit, Cmp
from hypersafe.lts import Event
from hypersafe.solver import check_simulation


ECHO = "loop { input x; output x; }"
INCR = "x := 0; loop { x := x + 1; output x; }"
NDET = "x := 0; loop { havoc y; x := x + y; output x; }"


class TestParser:
    def test_echo_shape(self):
        prog = parse_program(ECHO)
        assert prog == Loop(Seq(Input("x"), Output(Var("x"))))

    def test_reactivity_rejects_trailing_output(self):
        with pytest.raises(ParseError) as err:
            parse_program("output 1")
        assert "output 1" in str(err.value)

    def test_reactivity_rejects_trailing_branch(self):
        with pytest.raises(ParseError):
            parse_program("if x < 1 then loop output 0 else x := 2")

    def test_loop_single_statement(self):
        assert parse_program("loop output 0") == Loop(Output(Const(0)))

    def test_seq_right_nested(self):
        prog = parse_program("x := 1; y := 2; loop output x")
        assert isinstance(prog, Seq)
        assert isinstance(prog.rest, Seq)
        assert prog.rest.rest == Loop(Output(Var("x")))

    def test_comments_and_syntax_errors(self):
        parse_program("# nothing\nloop output 0  # tail")
        with pytest.raises(ParseError) as err:
            parse_program("loop { output }")
        assert str(err.value).startswith("1:")


class TestEval:
    def test_increment(self):
        assert eval_expr(BinOp("+", Var("x"), Const(1)), (("x", 1),), 8) == 2

    def test_wraparound(self):
        assert eval_expr(BinOp("+", Var("x"), Var("y")), (("x", 6), ("y", 3)), 8) == 1

    def test_subtraction_wraps(self):
        assert eval_expr(BinOp("-", Const(0), Const(1)), (), 8) == 7

    def test_default_zero_and_compare(self):
        assert eval_cond(Cmp("<", Var("x"), Const(2)), (), 8)
        assert not eval_cond(Cmp("<", Var("x"), Const(2)), (("x", 5),), 8)


class TestStep:
    def test_output(self):
        cfg = Config(Seq(Output(Var("x")), Loop(Output(Const(0)))), (("x", 3),))
        [(label, nxt)] = step(cfg, 8, range(8))
        assert label == Event.out(3)
        assert nxt.mem == (("x", 3),)

    def test_havoc_silent_fanout(self):
        cfg = Config(Seq(Havoc("y"), Loop(Output(Const(0)))), ())
        results = step(cfg, 8, (0, 1))
        assert [lab for lab, _ in results] == [None, None]
        assert {nxt.mem for _, nxt in results} == {(), (("y", 1),)}

    def test_loop_unfolds_silently(self):
        body = Seq(Input("x"), Output(Var("x")))
        cfg = Config(Loop(body), ())
        [(label, nxt)] = step(cfg, 8, range(8))
        assert label is None
        assert nxt.prog == Seq(Input("x"), Seq(Output(Var("x")), Loop(body)))

    def test_if_under_continuation(self):
        prog = seq(If(BoolLit(True), Assign("x", Const(1)), Assign("x", Const(2))),
                   Loop(Output(Var("x"))))
        [(label, nxt)] = step(Config(prog, ()), 8, range(8))
        assert label is None
        assert nxt.prog == Seq(Assign("x", Const(1)), Loop(Output(Var("x"))))

    def test_stuck_basic_instruction(self):
        assert step(Config(Output(Const(1)), ()), 8, range(8)) == []


class TestCompile:
    def test_echo_shape(self):
        lts = compile_lts(parse_program(ECHO), 2, name="echo")
        init_moves = lts.obs_successors(lts.init)
        assert [str(e) for e, _ in init_moves] == ["in(0)", "in(1)"]
        for _, mid in init_moves:
            outs = lts.obs_successors(mid)
            assert len(outs) == 1 and outs[0][0].kind == "out"
            # after the output we are back at an init-equivalent state
            assert lts.obs_successors(outs[0][1]) == init_moves

    def test_single_output_loop(self):
        lts = compile_lts(parse_program("loop output 0"), 2, name="P")
        assert lts.enumerate_lassos(lts.init, 2) == [
            __import__("hypersafe.lts", fromlist=["Lasso"]).Lasso((), (Event.out(0),))]

    def test_incr_visits_all_residues(self):
        lts = compile_lts(parse_program(INCR), 8, name="incr")
        values = set()
        for _, label, _ in lts.transitions:
            if label is not None:
                values.add(label.value)
        assert values == set(range(8))

    def test_alphabet_is_full_event_set(self):
        lts = compile_lts(parse_program(ECHO), 2, name="echo")
        assert set(lts.alphabet) == {Event.inp(0), Event.inp(1),
                                     Event.out(0), Event.out(1)}

    def test_state_cap(self):
        with pytest.raises(ResourceError):
            compile_lts(parse_program(INCR), 8, max_states=3, name="incr")


class TestSemanticsProperties:
    def test_determinism_partition(self):
        # every reachable config: deterministic silent, all-emitting, or havoc fanout
        for source in (ECHO, INCR, NDET):
            lts = compile_lts(parse_program(source), 4, name="P")
            for sid in range(lts.n_states):
                out = lts.outgoing(sid)
                if not out:
                    continue
                silent = [dst for lab, dst in out if lab is None]
                labeled = [dst for lab, dst in out if lab is not None]
                assert not (silent and labeled), "mixed silent/labeled successors"
                if silent:
                    head = lts.configs[sid].prog
                    head = head.first if isinstance(head, Seq) else head
                    if len(set(silent)) > 1:
                        assert isinstance(head, Havoc)
                    else:
                        assert isinstance(head, (Assign, If, Loop, Havoc))

    def test_output_and_if_preserve_memory(self):
        for source in (ECHO, INCR, NDET,
                       "loop { if x < 1 then output 0 else output 1 }"):
            lts = compile_lts(parse_program(source), 4, name="P")
            for src, label, dst in lts.transitions:
                head = lts.configs[src].prog
                head = head.first if isinstance(head, Seq) else head
                if isinstance(head, (Output, If)):
                    assert lts.configs[src].mem == lts.configs[dst].mem

    def test_reassociation_confluence(self):
        # left-nested and right-nested sequencing compile to bisimilar systems
        left_nested = Seq(Seq(Assign("x", Const(1)), Assign("y", Const(2))),
                          Loop(Output(Var("x"))))
        right_nested = seq(Assign("x", Const(1)),
                           seq(Assign("y", Const(2)), Loop(Output(Var("x")))))
        a = compile_lts(left_nested, 4, name="A")
        b = compile_lts(right_nested, 4, name="B")
        assert check_simulation(a, b).proved
        assert check_simulation(b, a).proved

    def test_condition_branching(self):
        prog = parse_program(
            "loop { if x < 2 then { x := x + 1; output x } else output 0 }")
        lts = compile_lts(prog, 4, name="P")
        seen = set()
        for _, label, _ in lts.transitions:
            if label is not None:
                seen.add(label.value)
        assert seen == {0, 1, 2}
