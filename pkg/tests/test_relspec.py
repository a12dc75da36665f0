"""Trace-relation algebra: atoms, canonical terms, derivatives, evaluators."""
import random
from itertools import product

import pytest

from hypersafe.errors import InputError, ParseError, ResourceError
from hypersafe.lts import Event, Lasso, parse_lasso
from hypersafe.relspec import (FALSE, TRUE, AtomTable, always, atom,
                               canonicalize, closure, conj, derive, disj,
                               formula_included, lasso_models_derivative,
                               lasso_models_direct, nxt, parse_atom_decl,
                               parse_formula, weak_until)

from conftest import double_atoms, random_atom_def, random_formula, random_lasso

A, B = Event.sym("a"), Event.sym("b")


class TestAtoms:
    def test_double_on_outputs(self):
        atoms = double_atoms(8)
        assert atoms.eval("double", (Event.out(1), Event.out(2)))
        assert not atoms.eval("double", (Event.out(1), Event.out(3)))

    def test_double_ignores_inputs(self):
        atoms = double_atoms(8)
        assert atoms.eval("double", (Event.inp(5), Event.inp(9)))

    def test_eq_on_distinct_symbols(self, sym_atoms):
        assert not sym_atoms.eval("eq", (A, B))
        assert sym_atoms.eval("eq", (A, A))

    def test_arity_mismatch(self, sym_atoms):
        with pytest.raises(InputError):
            sym_atoms.eval("eq", (A, A, A))

    def test_modular_payloads(self):
        atoms = double_atoms(4)
        # 2*3 wraps to 2 at modulus 4
        assert atoms.eval("double", (Event.out(3), Event.out(2)))

    def test_binding_flows_through_and(self):
        atoms = AtomTable(modulus=8)
        atoms.declare_text(
            "atom same_out(e1, e2) := (e1 is out(x)) and (e2 == out(x));")
        assert atoms.eval("same_out", (Event.out(3), Event.out(3)))
        assert not atoms.eval("same_out", (Event.out(3), Event.out(4)))
        assert not atoms.eval("same_out", (Event.inp(3), Event.inp(3)))

    def test_unbound_variable_rejected(self):
        with pytest.raises(ParseError):
            parse_atom_decl("atom bad(e1, e2) := (e1 is out(x)) or (x == 2);")

    def test_shape_tests(self):
        atoms = AtomTable()
        atoms.declare_text("atom isin(e1, e2) := e1 is in;")
        atoms.declare_text("atom issym(e1, e2) := e1 is sym(a);")
        assert atoms.eval("isin", (Event.inp(0), A))
        assert not atoms.eval("isin", (A, A))
        assert atoms.eval("issym", (A, B))
        assert not atoms.eval("issym", (B, B))


class TestCanonical:
    def test_unit_laws(self, sym_atoms):
        p = atom("eq")
        assert conj([TRUE, p]) is p
        assert disj([FALSE, p]) is p
        assert conj([FALSE, p]) is FALSE
        assert disj([TRUE, p]) is TRUE

    def test_idempotence(self):
        p = atom("eq")
        assert disj([p, p]) is p
        assert conj([p, p]) is p

    def test_commutativity_shares_object(self):
        p, q = atom("eq"), atom("flip")
        assert conj([p, q]) is conj([q, p])
        assert disj([p, q]) is disj([q, p])

    def test_flattening(self):
        p, q, r = atom("p1"), atom("p2"), atom("p3")
        assert conj([p, conj([q, r])]) is conj([conj([p, q]), r])

    def test_canonicalize_idempotent(self):
        rng = random.Random(5)
        names = ("eq", "flip")
        for _ in range(200):
            f = random_formula(rng, names, 3)
            assert canonicalize(f) is f

    def test_empty_connectives(self):
        assert conj([]) is TRUE
        assert disj([]) is FALSE


class TestDerive:
    def test_weak_until_hold_branch(self, sym_atoms):
        w = weak_until(atom("botha"), atom("b2"))
        assert derive(w, (A, A), sym_atoms) is w

    def test_weak_until_discharge_branch(self, sym_atoms):
        w = weak_until(atom("botha"), atom("b2"))
        assert derive(w, (A, B), sym_atoms) is TRUE

    def test_true_false_fixed(self, sym_atoms):
        for events in ((A, A), (A, B), (B, B)):
            assert derive(TRUE, events, sym_atoms) is TRUE
            assert derive(FALSE, events, sym_atoms) is FALSE

    def test_next_drops_modality(self, sym_atoms):
        f = atom("eq")
        assert derive(nxt(f), (A, B), sym_atoms) is f

    def test_always_unfolds(self, sym_atoms):
        f = always(atom("eq"))
        assert derive(f, (A, A), sym_atoms) is f
        assert derive(f, (A, B), sym_atoms) is FALSE


class TestClosure:
    def test_double_invariant_two_nodes(self):
        atoms = double_atoms(2)
        alpha = [Event.inp(0), Event.inp(1), Event.out(0), Event.out(1)]
        g = closure(always(atom("double")), [alpha, alpha], atoms)
        assert sorted(str(n) for n in g.nodes) == ["always double", "false"]

    def test_weak_until_three_nodes(self, sym_atoms):
        w = weak_until(atom("botha"), atom("b2"))
        g = closure(w, [(A, B), (A, B)], sym_atoms)
        assert {str(n) for n in g.nodes} <= {str(w), "true", "false"}

    def test_true_single_node(self, sym_atoms):
        g = closure(TRUE, [(A,), (A,)], sym_atoms)
        assert len(g) == 1

    def test_cap_exceeded(self, sym_atoms):
        w = weak_until(atom("botha"), atom("b2"))
        with pytest.raises(ResourceError) as err:
            closure(w, [(A, B), (A, B)], sym_atoms, cap=1)
        assert "cap 1" in str(err.value)


class TestNonempty:
    def test_constants(self, sym_atoms):
        g = closure(disj([TRUE, FALSE]), [(A,), (A,)], sym_atoms)
        assert g.nonempty(g.node_id(TRUE))

    def test_false_is_empty(self, sym_atoms):
        g = closure(FALSE, [(A, B), (A, B)], sym_atoms)
        assert not g.nonempty(g.node_id(FALSE))

    def test_conflicting_atoms_empty(self):
        atoms = AtomTable(modulus=4)
        atoms.declare_text("atom is1(e1, e2) := e1 == out(1);")
        atoms.declare_text("atom is2(e1, e2) := e1 == out(2);")
        both = conj([atom("is1"), atom("is2")])
        alpha = [Event.out(v) for v in range(4)]
        g = closure(both, [alpha, alpha], atoms)
        assert not g.nonempty(g.node_id(g.root))
        # oracle: no lasso tuple over the alphabet models the conjunction
        lassos = [Lasso((), (e,)) for e in alpha]
        assert not any(lasso_models_direct((l1, l2), both, atoms)
                       for l1 in lassos for l2 in lassos)

    def test_matches_bounded_lasso_search(self):
        # over one-letter positions: nonempty iff a small lasso tuple models it
        rng = random.Random(23)
        letters = [A, B]
        singles = [Lasso((), (x,)) for x in letters]
        pairs = [Lasso((), (x, y)) for x in letters for y in letters]
        mixed = [Lasso((x,), (y,)) for x in letters for y in letters]
        candidates = singles + pairs + mixed
        for i in range(40):
            atoms = AtomTable()
            atoms.declare(random_atom_def(rng, "p", 2, 2))
            f = random_formula(rng, ("p",), 2)
            g = closure(f, [letters, letters], atoms)
            found = any(lasso_models_direct((l1, l2), f, atoms)
                        for l1 in candidates for l2 in candidates)
            assert g.nonempty(g.node_id(g.root)) == found, f"instance {i}: {f}"


class TestEvaluators:
    def test_flip_invariant(self, sym_atoms):
        la, lb = parse_lasso("a^w"), parse_lasso("b^w")
        assert lasso_models_direct((la, lb), always(atom("flip")), sym_atoms)

    def test_weak_until_discharged_later(self, sym_atoms):
        w = weak_until(atom("botha"), atom("b2"))
        assert lasso_models_direct(
            (parse_lasso("a^w"), parse_lasso("a (b)^w")), w, sym_atoms)

    def test_weak_until_holds_forever(self, sym_atoms):
        w = weak_until(atom("botha"), atom("b2"))
        la = parse_lasso("a^w")
        assert lasso_models_direct((la, la), w, sym_atoms)

    def test_eq_fails_at_first_position(self, sym_atoms):
        l1 = parse_lasso("a (x)^w")
        l2 = parse_lasso("b (x)^w")
        assert not lasso_models_direct((l1, l2), always(atom("eq")), sym_atoms)

    def test_false_never_modeled(self, sym_atoms):
        la = parse_lasso("a^w")
        assert not lasso_models_derivative((la, la), FALSE, sym_atoms)

    def test_next_shifts(self, sym_atoms):
        f = nxt(atom("eq"))
        assert lasso_models_direct((parse_lasso("a (b)^w"), parse_lasso("x (b)^w")),
                                   f, sym_atoms)

    def test_derivative_agrees_on_examples(self, sym_atoms):
        w = weak_until(atom("botha"), atom("b2"))
        cases = [
            ((parse_lasso("a^w"), parse_lasso("b^w")), always(atom("flip"))),
            ((parse_lasso("a^w"), parse_lasso("a (b)^w")), w),
            ((parse_lasso("a^w"), parse_lasso("a^w")), w),
        ]
        for lassos, f in cases:
            assert (lasso_models_direct(lassos, f, sym_atoms)
                    == lasso_models_derivative(lassos, f, sym_atoms))


class TestDerivativeLaw:
    """The defining equation: e.G models f iff G models derive(f, e)."""

    def _corpus(self, seed, count):
        rng = random.Random(seed)
        for i in range(count):
            n_letters = rng.randint(1, 3)
            atoms = AtomTable()
            names = []
            for k in range(rng.randint(1, 2)):
                name = f"q{i}_{k}"
                atoms.declare(random_atom_def(rng, name, 2, n_letters))
                names.append(name)
            f = random_formula(rng, names, rng.randint(1, 3))
            lassos = (random_lasso(rng, n_letters), random_lasso(rng, n_letters))
            letters = [Event.sym(x) for x in ("a", "b", "c")[:n_letters]]
            events = (rng.choice(letters), rng.choice(letters))
            yield atoms, f, lassos, events

    def test_law_sample(self):
        for atoms, f, lassos, events in self._corpus(101, 250):
            extended = tuple(Lasso((e,) + l.prefix, l.cycle)
                             for e, l in zip(events, lassos))
            lhs = lasso_models_direct(extended, f, atoms)
            rhs = lasso_models_direct(lassos, derive(f, events, atoms), atoms)
            assert lhs == rhs, f"law fails for {f} under {events}"

    def test_evaluator_agreement_sample(self):
        for atoms, f, lassos, _ in self._corpus(102, 250):
            assert (lasso_models_direct(lassos, f, atoms)
                    == lasso_models_derivative(lassos, f, atoms)), str(f)

    def test_canonicalization_preserves_semantics(self):
        for atoms, f, lassos, _ in self._corpus(103, 150):
            g = canonicalize(f)
            assert lasso_models_direct(lassos, f, atoms) == lasso_models_direct(
                lassos, g, atoms)


class TestInclusion:
    def test_conjunction_included_in_parts(self, sym_atoms):
        both = conj([atom("botha"), atom("b2")])
        alphabets = [(A, B), (A, B)]
        assert formula_included(both, atom("botha"), alphabets, sym_atoms)
        assert not formula_included(atom("botha"), both, alphabets, sym_atoms)

    def test_reflexive(self, sym_atoms):
        w = weak_until(atom("botha"), atom("b2"))
        assert formula_included(w, w, [(A, B), (A, B)], sym_atoms)

    def test_false_included_everywhere(self, sym_atoms):
        assert formula_included(FALSE, atom("eq"), [(A,), (A,)], sym_atoms)


class TestFormulaParser:
    def test_shapes(self, sym_atoms):
        names = sym_atoms.names()
        assert parse_formula("always eq", names) is always(atom("eq"))
        assert parse_formula("botha weakuntil b2", names) is weak_until(
            atom("botha"), atom("b2"))
        assert parse_formula("eq and flip or ab", names) is disj(
            [conj([atom("eq"), atom("flip")]), atom("ab")])
        assert parse_formula("next (eq or true)", names) is nxt(TRUE)

    def test_undeclared_atom(self, sym_atoms):
        with pytest.raises(ParseError):
            parse_formula("always nosuch", sym_atoms.names())

    def test_location_in_error(self):
        with pytest.raises(ParseError) as err:
            parse_formula("always )", set())
        assert str(err.value).startswith("1:")
