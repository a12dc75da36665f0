"""Two independent membership checkers for lasso tuples.

``lasso_models_direct`` evaluates the modality semantics recursively on
the folded position space of the joint lasso word.  ``lasso_models_
derivative`` instead runs the derivative automaton along the word and
accepts iff no visited formula is empty.  For the safety fragment the two
agree, which the test suite checks on a large random corpus.
"""
from __future__ import annotations

from math import lcm

from ..errors import InputError
from .atoms import AtomTable
from .closure import DEFAULT_CLOSURE_CAP, closure
from .formula import Formula


class _Folded:
    """Joint lasso tuple folded onto finitely many positions.

    Positions 0..P+L-1 where P is the common prefix length and L the lcm
    of the cycle lengths; the successor of the last position wraps to P.
    """

    def __init__(self, lassos):
        self.lassos = tuple(lassos)
        if not self.lassos:
            raise InputError("empty lasso tuple")
        self.pre = max(len(l.prefix) for l in self.lassos)
        self.cyc = lcm(*(len(l.cycle) for l in self.lassos))
        self.size = self.pre + self.cyc

    def events(self, p: int) -> tuple:
        return tuple(l.at(p) for l in self.lassos)

    def succ(self, p: int) -> int:
        q = p + 1
        return self.pre if q >= self.size else q


def _eval(fold: _Folded, p: int, f: Formula, atoms: AtomTable, memo: dict) -> bool:
    key = (p, id(f))
    got = memo.get(key)
    if got is not None:
        return got
    tag = f.tag
    if tag == "true":
        result = True
    elif tag == "false":
        result = False
    elif tag == "atom":
        result = atoms.eval(f.name, fold.events(p))
    elif tag == "and":
        result = all(_eval(fold, p, c, atoms, memo) for c in f.children)
    elif tag == "or":
        result = any(_eval(fold, p, c, atoms, memo) for c in f.children)
    elif tag == "next":
        result = _eval(fold, fold.succ(p), f.children[0], atoms, memo)
    elif tag == "always":
        result = True
        q, seen = p, set()
        while q not in seen:
            seen.add(q)
            if not _eval(fold, q, f.children[0], atoms, memo):
                result = False
                break
            q = fold.succ(q)
    else:  # weak-until: scan forward, discharge on the right argument
        left, right = f.children
        q, seen = p, set()
        while True:
            if q in seen:
                result = True  # looped with the left argument holding throughout
                break
            seen.add(q)
            if _eval(fold, q, right, atoms, memo):
                result = True
                break
            if not _eval(fold, q, left, atoms, memo):
                result = False
                break
            q = fold.succ(q)
    memo[key] = result
    return result


def lasso_models_direct(lassos, f: Formula, atoms: AtomTable) -> bool:
    """Direct recursive evaluation of the modality semantics on a lasso tuple."""
    fold = _Folded(lassos)
    return _eval(fold, 0, f, atoms, {})


def lasso_models_derivative(lassos, f: Formula, atoms: AtomTable,
                            cap: int = DEFAULT_CLOSURE_CAP) -> bool:
    """Run the derivative automaton along the lasso tuple.

    Accepts iff every formula visited before the (phase, formula) run
    repeats is nonempty relative to the letters the lassos use.
    """
    fold = _Folded(lassos)
    alphabets = [set(l.prefix) | set(l.cycle) for l in fold.lassos]
    graph = closure(f, alphabets, atoms, cap)
    node = graph.node_id(graph.root)
    p = 0
    seen = set()
    while (p, node) not in seen:
        seen.add((p, node))
        if not graph.nonempty(node):
            return False
        node = graph.derive_node(node, fold.events(p))
        p = fold.succ(p)
    return graph.nonempty(node)
