"""Trace-relation algebra: formulas, atoms, derivatives, evaluators."""

from .atoms import AtomDef, AtomTable, eval_atom, parse_atom_decl
from .closure import (DEFAULT_CLOSURE_CAP, ClosureGraph, closure, derive,
                      formula_included, nonempty)
from .evaluate import lasso_models_derivative, lasso_models_direct
from .formula import (FALSE, TRUE, Formula, always, atom, canonicalize, conj,
                      disj, nxt, parse_formula, subformula_atoms, weak_until)

__all__ = [
    "AtomDef", "AtomTable", "eval_atom", "parse_atom_decl",
    "DEFAULT_CLOSURE_CAP", "ClosureGraph", "closure", "derive",
    "formula_included", "nonempty",
    "lasso_models_derivative", "lasso_models_direct",
    "FALSE", "TRUE", "Formula", "always", "atom", "canonicalize", "conj",
    "disj", "nxt", "parse_formula", "subformula_atoms", "weak_until",
]
