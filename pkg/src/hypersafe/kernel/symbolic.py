"""Symbolic values and the side-condition discharger for proof goals.

Proof symbols stand for universally-introduced machine integers (inputs
and left havocs) or invariant-generalized memory contents.  All symbolic
values are linear expressions with coefficients reduced modulo the
session modulus.  Side conditions are boolean combinations of linear
comparisons and atom applications on symbolic events; they are decided by
exhaustive enumeration of the symbols over [0, M), restricted to
assignments satisfying the hypothesis constraints.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product
from typing import Optional

from ..errors import InputError, ParseError
from ..lts import Event
from ..relspec import AtomTable


@dataclass(frozen=True)
class LinExpr:
    """c0 + sum(ci * sym_i) with coefficients in [0, M)."""

    const: int
    terms: tuple = ()  # sorted ((symbol, coeff), ...), coeff != 0

    @property
    def symbols(self):
        return tuple(s for s, _ in self.terms)

    def is_const(self) -> bool:
        return not self.terms

    def __str__(self) -> str:
        parts = [str(self.const)] if (self.const or not self.terms) else []
        for s, c in self.terms:
            parts.append(s if c == 1 else f"{c}*{s}")
        return " + ".join(parts)


def lin_const(value: int, m: int) -> LinExpr:
    return LinExpr(value % m)


def lin_var(name: str, m: int) -> LinExpr:
    return LinExpr(0, ((name, 1 % m),)) if 1 % m else LinExpr(0)


def _normalize(const: int, terms: dict, m: int) -> LinExpr:
    kept = tuple(sorted((s, c % m) for s, c in terms.items() if c % m))
    return LinExpr(const % m, kept)


def lin_add(a: LinExpr, b: LinExpr, m: int) -> LinExpr:
    terms = dict(a.terms)
    for s, c in b.terms:
        terms[s] = terms.get(s, 0) + c
    return _normalize(a.const + b.const, terms, m)


def lin_sub(a: LinExpr, b: LinExpr, m: int) -> LinExpr:
    terms = dict(a.terms)
    for s, c in b.terms:
        terms[s] = terms.get(s, 0) - c
    return _normalize(a.const - b.const, terms, m)


def lin_scale(a: LinExpr, k: int, m: int) -> LinExpr:
    return _normalize(a.const * k, {s: c * k for s, c in a.terms}, m)


def lin_eval(a: LinExpr, assignment: dict, m: int) -> int:
    total = a.const
    for s, c in a.terms:
        total += c * assignment[s]
    return total % m


@dataclass(frozen=True)
class SymEvent:
    """An input/output event whose payload is a symbolic linear expression."""

    kind: str  # in | out
    payload: LinExpr

    def ground(self, assignment: dict, m: int) -> Event:
        return Event(self.kind, value=lin_eval(self.payload, assignment, m))

    def __str__(self) -> str:
        return f"{self.kind}({self.payload})"


def ground_event(term, assignment: dict, m: int) -> Event:
    if isinstance(term, Event):
        return term
    return term.ground(assignment, m)


# --- side conditions -------------------------------------------------------

@dataclass(frozen=True)
class SCBool:
    value: bool


@dataclass(frozen=True)
class SCCmp:
    op: str  # == != < <= > >=
    left: LinExpr
    right: LinExpr


@dataclass(frozen=True)
class SCNot:
    body: object


@dataclass(frozen=True)
class SCAnd:
    parts: tuple


@dataclass(frozen=True)
class SCOr:
    parts: tuple


@dataclass(frozen=True)
class SCAtom:
    """Application of a declared atom to (possibly symbolic) event terms."""

    name: str
    events: tuple


def cond_symbols(cond) -> set:
    if isinstance(cond, SCCmp):
        return set(cond.left.symbols) | set(cond.right.symbols)
    if isinstance(cond, SCNot):
        return cond_symbols(cond.body)
    if isinstance(cond, (SCAnd, SCOr)):
        out = set()
        for p in cond.parts:
            out |= cond_symbols(p)
        return out
    if isinstance(cond, SCAtom):
        out = set()
        for t in cond.events:
            if isinstance(t, SymEvent):
                out |= set(t.payload.symbols)
        return out
    return set()


def cond_eval(cond, assignment: dict, atoms: AtomTable, m: int) -> bool:
    if isinstance(cond, SCBool):
        return cond.value
    if isinstance(cond, SCCmp):
        a = lin_eval(cond.left, assignment, m)
        b = lin_eval(cond.right, assignment, m)
        return {"==": a == b, "!=": a != b, "<": a < b,
                "<=": a <= b, ">": a > b, ">=": a >= b}[cond.op]
    if isinstance(cond, SCNot):
        return not cond_eval(cond.body, assignment, atoms, m)
    if isinstance(cond, SCAnd):
        return all(cond_eval(p, assignment, atoms, m) for p in cond.parts)
    if isinstance(cond, SCOr):
        return any(cond_eval(p, assignment, atoms, m) for p in cond.parts)
    events = tuple(ground_event(t, assignment, m) for t in cond.events)
    return atoms.eval(cond.name, events)


def cond_str(cond) -> str:
    if isinstance(cond, SCBool):
        return "true" if cond.value else "false"
    if isinstance(cond, SCCmp):
        return f"{cond.left} {cond.op} {cond.right}"
    if isinstance(cond, SCNot):
        return f"not ({cond_str(cond.body)})"
    if isinstance(cond, SCAnd):
        return "(" + " and ".join(cond_str(p) for p in cond.parts) + ")"
    if isinstance(cond, SCOr):
        return "(" + " or ".join(cond_str(p) for p in cond.parts) + ")"
    return cond.name + "(" + ", ".join(str(t) for t in cond.events) + ")"


DEFAULT_BUDGET = 1 << 16


@dataclass
class DischargeResult:
    """Outcome of a side-condition decision."""

    proven: bool
    counter: Optional[dict] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.proven


def discharge(goal, hypotheses, atoms: AtomTable, modulus: int,
              budget: int = DEFAULT_BUDGET) -> DischargeResult:
    """Decide a side condition under hypothesis constraints.

    Enumerates every assignment of the occurring symbols over [0, M);
    proven only when the goal holds on all assignments satisfying the
    hypotheses.  A falsifying assignment is reported when found.
    """
    all_syms = cond_symbols(goal)
    for h in hypotheses:
        all_syms |= cond_symbols(h)
    symbols = sorted(all_syms)
    if not symbols:
        if all(cond_eval(h, {}, atoms, modulus) for h in hypotheses):
            if cond_eval(goal, {}, atoms, modulus):
                return DischargeResult(True)
            return DischargeResult(False, counter={}, reason="condition is false")
        return DischargeResult(True, reason="hypotheses unsatisfiable")
    count = modulus ** len(symbols)
    if count > budget:
        return DischargeResult(False, reason=f"enumeration budget exceeded ({count} > {budget})")
    for values in product(range(modulus), repeat=len(symbols)):
        assignment = dict(zip(symbols, values))
        if not all(cond_eval(h, assignment, atoms, modulus) for h in hypotheses):
            continue
        if not cond_eval(goal, assignment, atoms, modulus):
            return DischargeResult(False, counter=assignment,
                                   reason="falsified at " + ", ".join(
                                       f"{s}={v}" for s, v in assignment.items()))
    return DischargeResult(True)


# --- symbolic memories -----------------------------------------------------

@dataclass(frozen=True)
class SymMemory:
    """Variables mapped to linear expressions; absent variables read 0."""

    items: tuple = ()  # sorted ((var, LinExpr), ...)

    def get(self, var: str) -> LinExpr:
        for name, value in self.items:
            if name == var:
                return value
        return LinExpr(0)

    def set(self, var: str, value: LinExpr) -> "SymMemory":
        kept = [(n, v) for n, v in self.items if n != var]
        if value != LinExpr(0):
            kept.append((var, value))
        return SymMemory(tuple(sorted(kept)))

    def is_concrete(self) -> bool:
        return all(v.is_const() for _, v in self.items)

    def __str__(self) -> str:
        return ", ".join(f"{n}={v}" for n, v in self.items) or "0"


# --- expression and invariant syntax --------------------------------------

_VTOKEN = re.compile(
    r"\s*(?:(?P<qvar>[lr]\.[A-Za-z_][A-Za-z0-9_]*)|(?P<num>\d+)"
    r"|(?P<word>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>==|!=|<=|>=|[-+*()<>])|(?P<bad>\S))")


def _tokenize_values(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _VTOKEN.match(text, pos)
        if not m or m.group().strip() == "":
            if text[pos:].strip() == "":
                break
            raise ParseError(f"bad character {text[pos]!r}", 1, pos + 1)
        pos = m.end()
        if m.group("bad"):
            raise ParseError(f"bad character {m.group('bad')!r}", 1, m.start() + 1)
        for kind in ("qvar", "num", "word", "op"):
            if m.group(kind):
                tokens.append((kind, m.group().strip(), m.start() + 1))
                break
    return tokens


class _ValueParser:
    """Linear expressions over symbol names or qualified memory variables."""

    def __init__(self, tokens, resolve):
        self.tokens = tokens
        self.i = 0
        self.resolve = resolve  # (kind, name, col) -> LinExpr builder

    def peek(self):
        return self.tokens[self.i][1] if self.i < len(self.tokens) else None

    def take(self, expected=None):
        if self.i >= len(self.tokens):
            raise ParseError("unexpected end of expression", 1, 0)
        tok = self.tokens[self.i]
        if expected is not None and tok[1] != expected:
            raise ParseError(f"expected {expected!r}, got {tok[1]!r}", 1, tok[2])
        self.i += 1
        return tok

    def expr(self, m):
        node = self.mul(m)
        while self.peek() in ("+", "-"):
            _, op, _ = self.take()
            rhs = self.mul(m)
            node = lin_add(node, rhs, m) if op == "+" else lin_sub(node, rhs, m)
        return node

    def mul(self, m):
        node = self.factor(m)
        while self.peek() == "*":
            _, _, col = self.take()
            rhs = self.factor(m)
            if node.is_const():
                node = lin_scale(rhs, node.const, m)
            elif rhs.is_const():
                node = lin_scale(node, rhs.const, m)
            else:
                raise ParseError("nonlinear product of two symbolic values", 1, col)
        return node

    def factor(self, m):
        kind, val, col = self.take()
        if kind == "num":
            return lin_const(int(val), m)
        if val == "(":
            node = self.expr(m)
            self.take(")")
            return node
        if kind in ("word", "qvar"):
            return self.resolve(kind, val, col)
        raise ParseError(f"bad value expression at {val!r}", 1, col)


@dataclass(frozen=True)
class ValueExpr:
    """Unresolved linear expression text, evaluated against visible symbols."""

    text: str

    def resolve(self, visible: dict, m: int) -> LinExpr:
        def resolver(kind, name, col):
            if kind == "qvar":
                raise ParseError("memory-qualified variables are only valid in invariants",
                                 1, col)
            if name not in visible:
                raise ParseError(f"unknown symbol {name!r}", 1, col)
            return visible[name]

        parser = _ValueParser(_tokenize_values(self.text), resolver)
        result = parser.expr(m)
        if parser.i != len(parser.tokens):
            raise ParseError("trailing input in value expression", 1, 1)
        return result


@dataclass(frozen=True)
class MemoryInvariant:
    """Predicate over two memories, written with l.<var> / r.<var> leaves."""

    text: str

    def instantiate(self, lmem: SymMemory, rmem: SymMemory, m: int):
        def resolver(kind, name, col):
            if kind != "qvar":
                raise ParseError(
                    f"invariant may only mention l.<var>/r.<var>, got {name!r}", 1, col)
            side, var = name.split(".", 1)
            return (lmem if side == "l" else rmem).get(var)

        tokens = _tokenize_values(self.text)
        parser = _ValueParser(tokens, resolver)

        def pred():
            node = conj()
            while parser.peek() == "or":
                parser.take()
                node = SCOr((node, conj()))
            return node

        def conj():
            node = unary()
            while parser.peek() == "and":
                parser.take()
                node = SCAnd((node, unary()))
            return node

        def unary():
            if parser.peek() == "not":
                parser.take()
                return SCNot(unary())
            if parser.peek() == "true":
                parser.take()
                return SCBool(True)
            if parser.peek() == "false":
                parser.take()
                return SCBool(False)
            if parser.peek() == "(":
                mark = parser.i
                parser.take("(")
                inner = pred()
                if parser.peek() == ")":
                    parser.take(")")
                    if parser.peek() not in ("==", "!=", "<", "<=", ">", ">="):
                        return inner
                parser.i = mark
            return cmp()

        def cmp():
            left = parser.expr(m)
            _, op, col = parser.take()
            if op not in ("==", "!=", "<", "<=", ">", ">="):
                raise ParseError(f"expected comparison, got {op!r}", 1, col)
            return SCCmp(op, left, parser.expr(m))

        node = pred()
        if parser.i != len(parser.tokens):
            raise ParseError("trailing input in invariant", 1, 1)
        return node

    def __str__(self) -> str:
        return self.text
