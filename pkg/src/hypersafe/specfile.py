"""Problem-description files: atoms, systems, a quantified query, options.

::

    atom double(e1, e2) := (e1 is out(x)) implies (e2 == out(2*x));
    system L = imp "echo.imp";
    system S = lts { states q0 q1; init q0; q0 -a-> q1; q1 -a-> q1; };
    query forall L exists L : always double;
    option modulus 4;
    option domain 0..3;

The quantifier prefix must be universals followed by existentials.
Programs are compiled at the configured modulus and input domain; inline
transition systems are used as written.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

from .errors import ParseError
from .imp import compile_lts, parse_program
from .kernel.script import _scan
from .lts import parse_lts
from .relspec import (DEFAULT_CLOSURE_CAP, AtomTable, parse_atom_decl,
                      parse_formula)
from .solver import DEFAULT_NODE_CAP, HyperQuery


@dataclass
class SpecFile:
    """A parsed and compiled problem description."""

    query: HyperQuery
    universal_names: tuple
    existential_names: tuple
    modulus: int
    domain: tuple
    max_nodes: int
    max_closure: int


def load_specfile(text: str, base_dir: str = ".", modulus: int = 0,
                  input_domain=(), max_nodes: int = 0, max_closure: int = 0) -> SpecFile:
    """Parse a spec file; nonzero keyword arguments override file options."""
    tokens = _scan(text)
    i = 0

    def take(expected=None, kind=None):
        nonlocal i
        if i >= len(tokens):
            raise ParseError("unexpected end of spec file", 1, 0)
        k, v, ln, co = tokens[i]
        if expected is not None and v != expected:
            raise ParseError(f"expected {expected!r}, got {v!r}", ln, co)
        if kind is not None and k != kind:
            raise ParseError(f"expected a {kind}, got {v!r}", ln, co)
        i += 1
        return v, ln, co

    atom_texts = []
    system_decls = []  # (name, kind, payload)
    prefix = []  # ("forall"|"exists", system name)
    formula_text = None
    options = {"modulus": 8, "max_nodes": DEFAULT_NODE_CAP, "max_closure": DEFAULT_CLOSURE_CAP}
    domain_opt = ()
    while i < len(tokens):
        head, ln, co = take(kind="word")
        if head == "atom":
            parts = ["atom"]
            while i < len(tokens) and tokens[i][1] != ";":
                k, v, _, _ = tokens[i]
                parts.append(f"({v})" if k == "group" else v)
                i += 1
            take(";")
            atom_texts.append(" ".join(parts) + ";")
        elif head == "system":
            name, _, _ = take(kind="word")
            take("=")
            kind, kln, kco = take(kind="word")
            if kind == "imp":
                path, _, _ = take(kind="string")
                system_decls.append((name, "imp", path))
            elif kind == "lts":
                body, _, _ = take(kind="bgroup")
                system_decls.append((name, "lts", body))
            else:
                raise ParseError(f"system must be 'imp' or 'lts', got {kind!r}", kln, kco)
            take(";")
        elif head == "query":
            while i < len(tokens) and tokens[i][1] in ("forall", "exists"):
                quant, _, _ = take(kind="word")
                sysname, qln, qco = take(kind="word")
                if quant == "forall" and any(q == "exists" for q, _ in prefix):
                    raise ParseError("universal quantifier after an existential one",
                                     qln, qco)
                prefix.append((quant, sysname))
            take(":")
            parts = []
            while i < len(tokens) and tokens[i][1] != ";":
                k, v, _, _ = tokens[i]
                parts.append(f"({v})" if k == "group" else v)
                i += 1
            take(";")
            formula_text = " ".join(parts)
        elif head == "option":
            key, kln, kco = take(kind="word")
            if key == "modulus":
                v, _, _ = take(kind="int")
                options["modulus"] = int(v)
            elif key == "domain":
                lo, _, _ = take(kind="int")
                take("..")
                hi, _, _ = take(kind="int")
                domain_opt = tuple(range(int(lo), int(hi) + 1))
            elif key == "max_nodes":
                v, _, _ = take(kind="int")
                options["max_nodes"] = int(v)
            elif key == "max_closure":
                v, _, _ = take(kind="int")
                options["max_closure"] = int(v)
            else:
                raise ParseError(f"unknown option {key!r}", kln, kco)
            take(";")
        else:
            raise ParseError(f"unknown declaration {head!r}", ln, co)
    if formula_text is None:
        raise ParseError("spec file has no query", 1, 1)
    if not prefix:
        raise ParseError("query needs at least one quantifier", 1, 1)
    m = modulus or options["modulus"]
    domain = tuple(input_domain) or domain_opt or tuple(range(m))
    nodes_cap = max_nodes or options["max_nodes"]
    closure_cap = max_closure or options["max_closure"]
    atoms = AtomTable(modulus=m)
    for decl in atom_texts:
        atoms.declare(parse_atom_decl(decl))
    systems = {}
    for name, kind, payload in system_decls:
        if kind == "imp":
            path = payload if os.path.isabs(payload) else os.path.join(base_dir, payload)
            with open(path, "r", encoding="utf-8") as fh:
                prog = parse_program(fh.read())
            systems[name] = compile_lts(prog, m, domain, name=name)
        else:
            systems[name] = parse_lts(f"lts {name} {{ {payload} }}")
    universal, existential = [], []
    uni_names, exi_names = [], []
    for quant, sysname in prefix:
        if sysname not in systems:
            raise ParseError(f"query references undeclared system {sysname!r}", 1, 1)
        if quant == "forall":
            universal.append(systems[sysname])
            uni_names.append(sysname)
        else:
            existential.append(systems[sysname])
            exi_names.append(sysname)
    formula = parse_formula(formula_text, atoms.names())
    query = HyperQuery(tuple(universal), tuple(existential), formula, atoms)
    return SpecFile(query, tuple(uni_names), tuple(exi_names), m, domain,
                    nodes_cap, closure_cap)
