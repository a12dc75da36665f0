"""Shared builders: paper-style example systems and random-instance generators."""
import os
import random

import pytest

from hypersafe.lts import Event, Lasso, Lts, parse_lts
from hypersafe.relspec import (FALSE, TRUE, AtomTable, atom, always, conj,
                               disj, nxt, weak_until)
from hypersafe.relspec.atoms import AtomDef, BConst, BOr, BAnd, BShape
from hypersafe.solver import HyperQuery

DATA = os.path.join(os.path.dirname(__file__), "data")


def data_path(name: str) -> str:
    return os.path.join(DATA, name)


def read_data(name: str) -> str:
    with open(data_path(name), "r", encoding="utf-8") as fh:
        return fh.read()


# --- example systems -------------------------------------------------------

@pytest.fixture
def sim_pair():
    """Branching system refined by a permissive one (trace inclusion holds)."""
    ts1 = parse_lts("""lts TS1 { states q0 q1 q2; init q0;
        q0 -a-> q1; q0 -a-> q2; q1 -b-> q1; q2 -c-> q2; }""")
    ts2 = parse_lts("""lts TS2 { states s0 s1; init s0;
        s0 -a-> s1; s1 -b-> s1; s1 -c-> s1; }""")
    return ts1, ts2


@pytest.fixture
def flip_system():
    """Silent initial choice between an a-loop and a b-loop."""
    return parse_lts("""lts F { states s0 s1 s2; init s0;
        s0 -> s1; s0 -> s2; s1 -a-> s1; s2 -b-> s2; }""")


@pytest.fixture
def align_pair():
    """Left system needs one silent step before its a-loop; right loops on b."""
    left = parse_lts("lts A { states s0 s1; init s0; s0 -> s1; s1 -a-> s1; }")
    right = parse_lts("lts B { states q0; init q0; q0 -b-> q0; }")
    return left, right


@pytest.fixture
def w_pair():
    """a-loop against a system that switches from a to a b-loop."""
    t1 = parse_lts("lts T1 { states q0; init q0; q0 -a-> q0; }")
    t2 = parse_lts("lts T2 { states s0 s1; init s0; s0 -a-> s1; s1 -b-> s1; }")
    return t1, t2


@pytest.fixture
def sym_atoms():
    table = AtomTable()
    table.declare_text("atom eq(e1, e2) := e1 == e2;")
    table.declare_text(
        "atom flip(e1, e2) := ((e1 is a) and (e2 is b)) or ((e1 is b) and (e2 is a));")
    table.declare_text("atom ab(e1, e2) := (e1 is a) and (e2 is b);")
    table.declare_text("atom botha(e1, e2) := (e1 is a) and (e2 is a);")
    table.declare_text("atom b2(e1, e2) := e2 is b;")
    return table


def double_atoms(modulus):
    table = AtomTable(modulus=modulus)
    table.declare_text(
        "atom double(e1, e2) := (e1 is out(x)) implies (e2 == out(2*x));")
    return table


# --- random generators ------------------------------------------------------

LETTERS = ("a", "b", "c")


def random_lts(rng: random.Random, name: str, max_states: int = 5,
               n_letters: int = 3) -> Lts:
    n = rng.randint(1, max_states)
    k = rng.randint(1, n_letters)
    alphabet = [Event.sym(x) for x in LETTERS[:k]]
    transitions = []
    for s in range(n):
        for _ in range(rng.randint(0, 3)):
            dst = rng.randrange(n)
            label = None if rng.random() < 0.2 else alphabet[rng.randrange(k)]
            transitions.append((s, label, dst))
    return Lts(name, [f"s{i}" for i in range(n)], 0, transitions, alphabet)


def random_atom_def(rng: random.Random, name: str, arity: int, n_letters: int) -> AtomDef:
    """Random event relation given as an explicit union of letter tuples."""
    letters = LETTERS[:n_letters]
    universe = [()]
    for _ in range(arity):
        universe = [t + (x,) for t in universe for x in letters]
    chosen = [t for t in universe if rng.random() < 0.45]
    params = tuple(f"e{i + 1}" for i in range(arity))
    body = BConst(False)
    first = True
    for t in chosen:
        clause = BShape(1, "sym", expect=t[0])
        for pos in range(1, arity):
            clause = BAnd(clause, BShape(pos + 1, "sym", expect=t[pos]))
        body = clause if first else BOr(body, clause)
        first = False
    return AtomDef(name, params, body)


def random_formula(rng: random.Random, names, depth: int):
    if depth == 0 or rng.random() < 0.3:
        roll = rng.random()
        if roll < 0.1:
            return TRUE
        if roll < 0.2:
            return FALSE
        return atom(rng.choice(names))
    op = rng.choice(("and", "or", "W", "always", "next"))
    if op == "and":
        return conj([random_formula(rng, names, depth - 1),
                     random_formula(rng, names, depth - 1)])
    if op == "or":
        return disj([random_formula(rng, names, depth - 1),
                     random_formula(rng, names, depth - 1)])
    if op == "W":
        return weak_until(random_formula(rng, names, depth - 1),
                          random_formula(rng, names, depth - 1))
    if op == "always":
        return always(random_formula(rng, names, depth - 1))
    return nxt(random_formula(rng, names, depth - 1))


def random_lasso(rng: random.Random, n_letters: int, max_prefix: int = 2,
                 max_cycle: int = 3) -> Lasso:
    letters = [Event.sym(x) for x in LETTERS[:n_letters]]
    prefix = tuple(rng.choice(letters) for _ in range(rng.randint(0, max_prefix)))
    cycle = tuple(rng.choice(letters) for _ in range(rng.randint(1, max_cycle)))
    return Lasso(prefix, cycle)


def random_instance(rng: random.Random, idx: int) -> HyperQuery:
    """A random solver query: two systems, quantifier split, small formula."""
    n_letters = rng.randint(1, 3)
    atoms = AtomTable()
    names = []
    for a in range(rng.randint(1, 2)):
        name = f"p{idx}_{a}"
        atoms.declare(random_atom_def(rng, name, 2, n_letters))
        names.append(name)
    formula = random_formula(rng, names, rng.randint(1, 3))
    s1 = random_lts(rng, "S1", 5, n_letters)
    s2 = random_lts(rng, "S2", 5, n_letters)
    roll = rng.random()
    if roll < 0.8:
        return HyperQuery((s1,), (s2,), formula, atoms)
    if roll < 0.9:
        return HyperQuery((s1, s2), (), formula, atoms)
    return HyperQuery((), (s1, s2), formula, atoms)
