"""Event-relation atoms: declaration syntax, static scoping, evaluation.

An atom is an n-ary predicate over event tuples, written as a boolean
expression over event-shape tests, payload variables bound by patterns,
and linear arithmetic.  Integer arithmetic is reduced modulo the table's
modulus so payload reasoning matches the bounded-integer machine model.

Declaration example::

    atom double(e1, e2) := (e1 is out(x)) implies (e2 == out(2*x));

Variable binding flows left-to-right through ``and`` and from the
antecedent into the consequent of ``implies``; it never escapes ``or``,
``not`` or a completed ``implies``.  A static check rejects uses of
possibly-unbound variables, which keeps evaluation total.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from ..errors import InputError, ParseError
from ..lts import Event


@dataclass(frozen=True)
class IConst:
    value: int


@dataclass(frozen=True)
class IVar:
    name: str


@dataclass(frozen=True)
class IBin:
    op: str  # + - *
    left: object
    right: object


@dataclass(frozen=True)
class EParam:
    pos: int  # 1-based tuple position


@dataclass(frozen=True)
class EMake:
    kind: str  # in | out | sym
    arg: object  # int expr for in/out, name for sym


@dataclass(frozen=True)
class BConst:
    value: bool


@dataclass(frozen=True)
class BNot:
    body: object


@dataclass(frozen=True)
class BAnd:
    left: object
    right: object


@dataclass(frozen=True)
class BOr:
    left: object
    right: object


@dataclass(frozen=True)
class BImplies:
    left: object
    right: object


@dataclass(frozen=True)
class BCmp:
    op: str  # == != < <= > >=
    left: object
    right: object
    events: bool  # operands are event-typed


@dataclass(frozen=True)
class BShape:
    pos: int
    kind: str  # in | out | sym
    bind: Optional[str] = None  # fresh payload variable
    expect: object = None  # int expr (in/out) or name (sym)


@dataclass(frozen=True)
class AtomDef:
    """Named n-ary event relation with its predicate body."""

    name: str
    params: tuple
    body: object

    @property
    def arity(self) -> int:
        return len(self.params)


class AtomTable:
    """Declared atoms plus the payload modulus; immutable once populated."""

    def __init__(self, modulus: int = 8):
        if modulus < 1:
            raise InputError("modulus must be >= 1")
        self.modulus = modulus
        self.defs: dict = {}
        self._cache: dict = {}

    def declare(self, definition: AtomDef):
        if definition.name in self.defs:
            raise InputError(f"atom {definition.name!r} already declared")
        self.defs[definition.name] = definition

    def declare_text(self, text: str):
        self.declare(parse_atom_decl(text))

    def arity(self, name: str) -> int:
        if name not in self.defs:
            raise InputError(f"undeclared atom {name!r}")
        return self.defs[name].arity

    def names(self):
        return set(self.defs)

    def eval(self, name: str, events: tuple) -> bool:
        key = (name, events)
        got = self._cache.get(key)
        if got is None:
            got = eval_atom(self, name, events)
            self._cache[key] = got
        return got


def _ieval(expr, env, m):
    if isinstance(expr, IConst):
        return expr.value % m
    if isinstance(expr, IVar):
        return env[expr.name] % m
    a = _ieval(expr.left, env, m)
    b = _ieval(expr.right, env, m)
    if expr.op == "+":
        return (a + b) % m
    if expr.op == "-":
        return (a - b) % m
    return (a * b) % m


def _eeval(expr, events, env, m):
    if isinstance(expr, EParam):
        ev = events[expr.pos - 1]
        if ev.kind == "sym":
            return ev
        return Event(ev.kind, value=ev.value % m)
    if expr.kind == "sym":
        return Event.sym(expr.arg)
    return Event(expr.kind, value=_ieval(expr.arg, env, m))


def _beval(expr, events, env, m):
    if isinstance(expr, BConst):
        return expr.value
    if isinstance(expr, BNot):
        return not _beval(expr.body, events, dict(env), m)
    if isinstance(expr, BAnd):
        return _beval(expr.left, events, env, m) and _beval(expr.right, events, env, m)
    if isinstance(expr, BOr):
        return _beval(expr.left, events, dict(env), m) or _beval(expr.right, events, dict(env), m)
    if isinstance(expr, BImplies):
        inner = dict(env)
        if not _beval(expr.left, events, inner, m):
            return True
        return _beval(expr.right, events, inner, m)
    if isinstance(expr, BCmp):
        if expr.events:
            a = _eeval(expr.left, events, env, m)
            b = _eeval(expr.right, events, env, m)
        else:
            a = _ieval(expr.left, env, m)
            b = _ieval(expr.right, env, m)
        if expr.op == "==":
            return a == b
        if expr.op == "!=":
            return a != b
        if expr.op == "<":
            return a < b
        if expr.op == "<=":
            return a <= b
        if expr.op == ">":
            return a > b
        return a >= b
    # BShape
    ev = events[expr.pos - 1]
    if ev.kind != expr.kind:
        return False
    if expr.kind == "sym":
        return expr.expect is None or ev.name == expr.expect
    if expr.bind is not None:
        env[expr.bind] = ev.value % m
        return True
    if expr.expect is not None:
        return ev.value % m == _ieval(expr.expect, env, m)
    return True


def eval_atom(atoms: AtomTable, name: str, events: tuple) -> bool:
    """Truth of the named atom on an event tuple of matching arity."""
    if name not in atoms.defs:
        raise InputError(f"undeclared atom {name!r}")
    definition = atoms.defs[name]
    if len(events) != definition.arity:
        raise InputError(
            f"atom {name!r} has arity {definition.arity}, got {len(events)} events")
    return _beval(definition.body, tuple(events), {}, atoms.modulus)


_ATOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<word>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>:=|==|!=|<=|>=|[<>()+\-*,;])|(?P<bad>\S))")

_RESERVED = {"is", "in", "out", "sym", "and", "or", "not", "implies", "true", "false", "atom"}


class _PredParser:
    """Recursive-descent parser for atom bodies, tracking bound variables."""

    def __init__(self, tokens, params):
        self.tokens = tokens
        self.i = 0
        self.params = list(params)

    def peek(self):
        return self.tokens[self.i][1] if self.i < len(self.tokens) else None

    def take(self, expected=None):
        if self.i >= len(self.tokens):
            raise ParseError("unexpected end of atom expression", 1, 0)
        kind, val, col = self.tokens[self.i]
        if expected is not None and val != expected:
            raise ParseError(f"expected {expected!r}, got {val!r}", 1, col)
        self.i += 1
        return kind, val, col

    def parse(self):
        body, _ = self.implies(frozenset())
        if self.i < len(self.tokens):
            _, val, col = self.tokens[self.i]
            raise ParseError(f"trailing input in atom expression: {val!r}", 1, col)
        return body

    def implies(self, bound):
        left, lb = self.disj(bound)
        if self.peek() == "implies":
            self.take()
            right, _ = self.implies(lb)  # antecedent bindings visible
            return BImplies(left, right), bound
        return left, lb

    def disj(self, bound):
        left, lb = self.conj(bound)
        saw = False
        while self.peek() == "or":
            saw = True
            self.take()
            right, _ = self.conj(bound)
            left = BOr(left, right)
        return left, (bound if saw else lb)

    def conj(self, bound):
        left, bound2 = self.unary(bound)
        while self.peek() == "and":
            self.take()
            right, bound2 = self.unary(bound2)
            left = BAnd(left, right)
        return left, bound2

    def unary(self, bound):
        if self.peek() == "not":
            self.take()
            body, _ = self.unary(bound)
            return BNot(body), bound
        if self.peek() == "(":
            mark = self.i
            self.take()
            body, b2 = self.implies(bound)
            if self.peek() == ")":
                self.take()
                # parenthesized boolean unless followed by a comparator
                if self.peek() not in ("==", "!=", "<", "<=", ">", ">="):
                    return body, b2
            self.i = mark  # reparse as arithmetic comparison
        return self.atom_or_cmp(bound)

    def atom_or_cmp(self, bound):
        if self.peek() == "true":
            self.take()
            return BConst(True), bound
        if self.peek() == "false":
            self.take()
            return BConst(False), bound
        # shape test: <param> is ...
        if (self.i + 1 < len(self.tokens) and self.tokens[self.i][1] in self.params
                and self.tokens[self.i + 1][1] == "is"):
            return self.shape(bound)
        left, ltype = self.operand(bound)
        kind, op, col = self.take()
        if op not in ("==", "!=", "<", "<=", ">", ">="):
            raise ParseError(f"expected comparison operator, got {op!r}", 1, col)
        right, rtype = self.operand(bound)
        if ltype != rtype:
            raise ParseError("cannot compare events with integers", 1, col)
        if ltype == "event" and op not in ("==", "!="):
            raise ParseError(f"operator {op!r} not defined on events", 1, col)
        return BCmp(op, left, right, events=(ltype == "event")), bound

    def shape(self, bound):
        _, pname, _ = self.take()
        pos = self.params.index(pname) + 1
        self.take("is")
        kind, val, col = self.take()
        if val in ("in", "out"):
            if self.peek() != "(":
                return BShape(pos, val), bound
            self.take("(")
            if (self.i + 1 < len(self.tokens)
                    and self.tokens[self.i][0] == "word"
                    and self.tokens[self.i][1] not in self.params
                    and self.tokens[self.i][1] not in _RESERVED
                    and self.tokens[self.i][1] not in bound
                    and self.tokens[self.i + 1][1] == ")"):
                _, var, _ = self.take()
                self.take(")")
                return BShape(pos, val, bind=var), bound | {var}
            expr = self.int_expr(bound)
            self.take(")")
            return BShape(pos, val, expect=expr), bound
        if val == "sym":
            self.take("(")
            _, name, _ = self.take()
            self.take(")")
            return BShape(pos, "sym", expect=name), bound
        if kind == "word" and val not in _RESERVED:
            return BShape(pos, "sym", expect=val), bound
        raise ParseError(f"bad shape test {val!r}", 1, col)

    def operand(self, bound):
        """An event-typed or integer-typed comparison operand."""
        tok = self.peek()
        if tok in self.params:
            self.take()
            return EParam(self.params.index(tok) + 1), "event"
        if tok in ("in", "out"):
            _, kind, _ = self.take()
            self.take("(")
            expr = self.int_expr(bound)
            self.take(")")
            return EMake(kind, expr), "event"
        if tok == "sym":
            self.take()
            self.take("(")
            _, name, _ = self.take()
            self.take(")")
            return EMake("sym", name), "event"
        return self.int_expr(bound), "int"

    def int_expr(self, bound):
        expr = self.int_term(bound)
        while self.peek() in ("+", "-"):
            _, op, _ = self.take()
            expr = IBin(op, expr, self.int_term(bound))
        return expr

    def int_term(self, bound):
        expr = self.int_factor(bound)
        while self.peek() == "*":
            self.take()
            expr = IBin("*", expr, self.int_factor(bound))
        return expr

    def int_factor(self, bound):
        kind, val, col = self.take()
        if kind == "num":
            return IConst(int(val))
        if val == "(":
            expr = self.int_expr(bound)
            self.take(")")
            return expr
        if kind == "word":
            if val in self.params:
                raise ParseError(f"event parameter {val!r} used as integer", 1, col)
            if val in _RESERVED:
                raise ParseError(f"unexpected keyword {val!r}", 1, col)
            if val not in bound:
                raise ParseError(f"possibly-unbound variable {val!r}", 1, col)
            return IVar(val)
        raise ParseError(f"bad integer expression at {val!r}", 1, col)


def _tokenize_atom(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _ATOKEN.match(text, pos)
        if not m or m.group().strip() == "":
            if text[pos:].strip() == "":
                break
            raise ParseError(f"bad character {text[pos]!r}", 1, pos + 1)
        pos = m.end()
        if m.group("bad"):
            raise ParseError(f"bad character {m.group('bad')!r}", 1, m.start() + 1)
        kind = "num" if m.group("num") else ("word" if m.group("word") else "op")
        tokens.append((kind, m.group().strip(), m.start() + 1))
    return tokens


def parse_atom_decl(text: str) -> AtomDef:
    """Parse ``atom name(e1, e2) := <pred> ;`` (trailing semicolon optional)."""
    tokens = _tokenize_atom(text)
    if not tokens or tokens[0][1] != "atom":
        raise ParseError("atom declaration must start with 'atom'", 1, 1)
    if len(tokens) < 2 or tokens[1][0] != "word":
        raise ParseError("missing atom name", 1, 1)
    name = tokens[1][1]
    if name in _RESERVED:
        raise ParseError(f"reserved word {name!r} cannot name an atom", 1, tokens[1][2])
    i = 2
    if i >= len(tokens) or tokens[i][1] != "(":
        raise ParseError("missing parameter list", 1, 1)
    i += 1
    params = []
    while i < len(tokens) and tokens[i][1] != ")":
        if tokens[i][0] != "word":
            raise ParseError(f"bad parameter {tokens[i][1]!r}", 1, tokens[i][2])
        if tokens[i][1] in _RESERVED:
            raise ParseError(f"reserved word {tokens[i][1]!r} as parameter", 1, tokens[i][2])
        params.append(tokens[i][1])
        i += 1
        if i < len(tokens) and tokens[i][1] == ",":
            i += 1
    if i >= len(tokens):
        raise ParseError("unterminated parameter list", 1, 1)
    i += 1  # ')'
    if len(set(params)) != len(params) or not params:
        raise ParseError("atom parameters must be distinct and nonempty", 1, 1)
    if i >= len(tokens) or tokens[i][1] != ":=":
        raise ParseError("missing ':=' in atom declaration", 1, 1)
    i += 1
    body_tokens = tokens[i:]
    if body_tokens and body_tokens[-1][1] == ";":
        body_tokens = body_tokens[:-1]
    if not body_tokens:
        raise ParseError("empty atom body", 1, 1)
    body = _PredParser(body_tokens, params).parse()
    return AtomDef(name, tuple(params), body)
