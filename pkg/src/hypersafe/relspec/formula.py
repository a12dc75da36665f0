"""Canonical trace-relation terms with hash-consing.

Terms are built exclusively through the smart constructors below, which
flatten, deduplicate, sort and collapse units so that semantically-equal
boolean combinations share one interned object.  Identity comparison is
therefore sufficient everywhere in the solver's inner loops.

The intern pool is append-only and only mutated under the GIL; all
exported operations are pure functions of their inputs.
"""
from __future__ import annotations

import re
from typing import Iterable

from ..errors import ParseError


class Formula:
    """Interned node of the safety fragment: true/false/atom/and/or/W/always/next."""

    __slots__ = ("tag", "name", "children", "key", "fid")

    def __init__(self, tag, name, children, key, fid):
        self.tag = tag
        self.name = name
        self.children = children
        self.key = key
        self.fid = fid

    def __repr__(self) -> str:
        return f"Formula<{self}>"

    def __str__(self) -> str:
        if self.tag in ("true", "false"):
            return self.tag
        if self.tag == "atom":
            return self.name
        if self.tag == "and":
            return "(" + " and ".join(str(c) for c in self.children) + ")"
        if self.tag == "or":
            return "(" + " or ".join(str(c) for c in self.children) + ")"
        if self.tag == "W":
            return f"({self.children[0]} weakuntil {self.children[1]})"
        if self.tag == "always":
            return f"always {self.children[0]}"
        return f"next {self.children[0]}"


_pool: dict = {}


def _intern(tag: str, name: str, children: tuple) -> Formula:
    key = (tag, name, tuple(c.key for c in children))
    got = _pool.get(key)
    if got is None:
        got = Formula(tag, name, children, key, len(_pool))
        _pool[key] = got
    return got


TRUE = _intern("true", "", ())
FALSE = _intern("false", "", ())


def atom(name: str) -> Formula:
    return _intern("atom", name, ())


def _clauses(f: Formula) -> set:
    """Disjunctive clause view: a set of frozensets of non-boolean nodes."""
    if f.tag == "false":
        return set()
    if f.tag == "true":
        return {frozenset()}
    if f.tag == "or":
        out = set()
        for c in f.children:
            out |= _clauses(c)
        return out
    if f.tag == "and":
        return {frozenset(f.children)}
    return {frozenset((f,))}


def _build(clauses) -> Formula:
    # minimal antichain: drop every clause that contains another
    keep: list = []
    for c in sorted(clauses, key=len):
        if not any(k <= c for k in keep):
            keep.append(c)
    if not keep:
        return FALSE
    if keep[0] == frozenset():
        return TRUE
    parts = []
    for c in keep:
        elems = sorted(c, key=lambda g: g.key)
        parts.append(elems[0] if len(elems) == 1 else _intern("and", "", tuple(elems)))
    parts.sort(key=lambda g: g.key)
    if len(parts) == 1:
        return parts[0]
    return _intern("or", "", tuple(parts))


def conj(parts: Iterable[Formula]) -> Formula:
    """Conjunction, normalized to minimal or-of-and form over base nodes.

    Boolean layers are kept in the unique irredundant monotone normal
    form; this is what keeps derivative closures finite (every closure
    node is a monotone combination of the root's temporal subterms).
    """
    result = {frozenset()}
    for p in parts:
        pcl = _clauses(p)
        if not pcl:
            return FALSE
        result = {a | b for a in result for b in pcl}
    return _build(result)


def disj(parts: Iterable[Formula]) -> Formula:
    """Disjunction, normalized like :func:`conj`."""
    result = set()
    for p in parts:
        result |= _clauses(p)
    return _build(result)


def weak_until(left: Formula, right: Formula) -> Formula:
    return _intern("W", "", (left, right))


def always(child: Formula) -> Formula:
    return _intern("always", "", (child,))


def nxt(child: Formula) -> Formula:
    return _intern("next", "", (child,))


def canonicalize(f: Formula) -> Formula:
    """Rebuild a term bottom-up through the smart constructors (idempotent)."""
    if f.tag in ("true", "false", "atom"):
        return f
    kids = [canonicalize(c) for c in f.children]
    if f.tag == "and":
        return conj(kids)
    if f.tag == "or":
        return disj(kids)
    if f.tag == "W":
        return weak_until(kids[0], kids[1])
    if f.tag == "always":
        return always(kids[0])
    return nxt(kids[0])


def subformula_atoms(f: Formula) -> set:
    names = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g.tag == "atom":
            names.add(g.name)
        stack.extend(g.children)
    return names


_FTOKEN = re.compile(r"\s*(?:(?P<word>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[()])|(?P<bad>\S))")

_KEYWORDS = {"always", "next", "weakuntil", "and", "or", "true", "false"}


def parse_formula(text: str, atom_names=None) -> Formula:
    """Parse formula syntax: ``always P``, ``P weakuntil Q``, ``P and Q``, ...

    Precedence, loosest first: weakuntil, or, and, prefix always/next.
    When ``atom_names`` is given, atom references are checked against it.
    """
    tokens = []
    pos = 0
    while pos < len(text):
        m = _FTOKEN.match(text, pos)
        if not m or m.group().strip() == "":
            if text[pos:].strip() == "":
                break
            raise ParseError(f"bad formula character {text[pos]!r}", 1, pos + 1)
        pos = m.end()
        if m.group("bad"):
            raise ParseError(f"bad formula character {m.group('bad')!r}", 1, m.start() + 1)
        tokens.append((m.group().strip(), m.start() + 1))
    i = 0

    def peek():
        return tokens[i][0] if i < len(tokens) else None

    def take():
        nonlocal i
        tok = tokens[i]
        i += 1
        return tok

    def parse_w():
        left = parse_or()
        if peek() == "weakuntil":
            take()
            right = parse_w()
            return weak_until(left, right)
        return left

    def parse_or():
        parts = [parse_and()]
        while peek() == "or":
            take()
            parts.append(parse_and())
        return disj(parts) if len(parts) > 1 else parts[0]

    def parse_and():
        parts = [parse_unary()]
        while peek() == "and":
            take()
            parts.append(parse_unary())
        return conj(parts) if len(parts) > 1 else parts[0]

    def parse_unary():
        tok = peek()
        if tok == "always":
            take()
            return always(parse_unary())
        if tok == "next":
            take()
            return nxt(parse_unary())
        return parse_atomic()

    def parse_atomic():
        if i >= len(tokens):
            raise ParseError("unexpected end of formula", 1, len(text))
        tok, col = take()
        if tok == "(":
            f = parse_w()
            if peek() != ")":
                raise ParseError("missing closing parenthesis", 1, col)
            take()
            return f
        if tok == "true":
            return TRUE
        if tok == "false":
            return FALSE
        if tok in _KEYWORDS or tok in "()":
            raise ParseError(f"unexpected token {tok!r}", 1, col)
        if atom_names is not None and tok not in atom_names:
            raise ParseError(f"undeclared atom {tok!r}", 1, col)
        return atom(tok)

    result = parse_w()
    if i != len(tokens):
        raise ParseError(f"trailing input after formula: {tokens[i][0]!r}", 1, tokens[i][1])
    return result
