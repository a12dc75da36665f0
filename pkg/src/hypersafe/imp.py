"""Small reactive imperative language: parser, small-step semantics, compilation.

Programs are loops, conditionals, assignments, integer input/output and
silent nondeterministic assignment (havoc).  All arithmetic is reduced
modulo a configured bound so compiled transition systems stay finite;
``0 - 1`` therefore wraps to the modulus minus one.  Sequencing is kept
right-nested canonically, so the reassociation step of the operational
semantics never surfaces as a separate transition.

Every control path must end in a loop (the reactivity check): a basic
instruction with no continuation has no successors and is rejected at
parse time.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .errors import InputError, ParseError, ResourceError
from .lts import Event, Lts

DEFAULT_MODULUS = 8
DEFAULT_STATE_CAP = 1_000_000


# --- expressions ---------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class BinOp:
    op: str  # + -
    left: object
    right: object


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Cmp:
    op: str  # == != < <= > >=
    left: object
    right: object


@dataclass(frozen=True)
class CNot:
    body: object


@dataclass(frozen=True)
class CAnd:
    left: object
    right: object


@dataclass(frozen=True)
class COr:
    left: object
    right: object


# --- statements ----------------------------------------------------------

@dataclass(frozen=True)
class Loop:
    body: object
    loc: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class If:
    cond: object
    then_branch: object
    else_branch: object
    loc: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Input:
    var: str
    loc: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Output:
    expr: object
    loc: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Havoc:
    var: str
    loc: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Assign:
    var: str
    expr: object
    loc: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Seq:
    first: object
    rest: object
    loc: tuple = field(default=(0, 0), compare=False)


def seq(first, rest):
    """Sequence two statements, keeping the spine right-nested."""
    if isinstance(first, Seq):
        return seq(first.first, seq(first.rest, rest))
    return Seq(first, rest)


def canonical_program(p):
    """Right-nest every sequencing spine, recursing into loop and branch bodies."""
    if isinstance(p, Seq):
        return seq(canonical_program(p.first), canonical_program(p.rest))
    if isinstance(p, Loop):
        return Loop(canonical_program(p.body), loc=p.loc)
    if isinstance(p, If):
        return If(p.cond, canonical_program(p.then_branch),
                  canonical_program(p.else_branch), loc=p.loc)
    return p


def expr_str(e) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Const):
        return str(e.value)
    return f"({expr_str(e.left)} {e.op} {expr_str(e.right)})"


def cond_str(c) -> str:
    if isinstance(c, BoolLit):
        return "true" if c.value else "false"
    if isinstance(c, Cmp):
        return f"{expr_str(c.left)} {c.op} {expr_str(c.right)}"
    if isinstance(c, CNot):
        return f"not ({cond_str(c.body)})"
    op = "and" if isinstance(c, CAnd) else "or"
    return f"({cond_str(c.left)} {op} {cond_str(c.right)})"


def stmt_str(p) -> str:
    if isinstance(p, Loop):
        return f"loop {{ {stmt_str(p.body)} }}"
    if isinstance(p, If):
        return (f"if {cond_str(p.cond)} then {{ {stmt_str(p.then_branch)} }}"
                f" else {{ {stmt_str(p.else_branch)} }}")
    if isinstance(p, Input):
        return f"input {p.var}"
    if isinstance(p, Output):
        return f"output {expr_str(p.expr)}"
    if isinstance(p, Havoc):
        return f"havoc {p.var}"
    if isinstance(p, Assign):
        return f"{p.var} := {expr_str(p.expr)}"
    return f"{stmt_str(p.first)}; {stmt_str(p.rest)}"


def program_vars(p) -> tuple:
    seen = set()

    def expr_vars(e):
        if isinstance(e, Var):
            seen.add(e.name)
        elif isinstance(e, BinOp):
            expr_vars(e.left)
            expr_vars(e.right)

    def cond_vars(c):
        if isinstance(c, Cmp):
            expr_vars(c.left)
            expr_vars(c.right)
        elif isinstance(c, CNot):
            cond_vars(c.body)
        elif isinstance(c, (CAnd, COr)):
            cond_vars(c.left)
            cond_vars(c.right)

    def walk(s):
        if isinstance(s, Loop):
            walk(s.body)
        elif isinstance(s, If):
            cond_vars(s.cond)
            walk(s.then_branch)
            walk(s.else_branch)
        elif isinstance(s, (Input, Havoc)):
            seen.add(s.var)
        elif isinstance(s, Output):
            expr_vars(s.expr)
        elif isinstance(s, Assign):
            seen.add(s.var)
            expr_vars(s.expr)
        elif isinstance(s, Seq):
            walk(s.first)
            walk(s.rest)

    walk(p)
    return tuple(sorted(seen))


# --- memories and configurations -----------------------------------------

def mem_get(mem: tuple, var: str) -> int:
    for name, value in mem:
        if name == var:
            return value
    return 0


def mem_set(mem: tuple, var: str, value: int) -> tuple:
    # zero entries are dropped so the all-zero memory is the empty tuple
    items = [(n, v) for n, v in mem if n != var]
    if value != 0:
        items.append((var, value))
    return tuple(sorted(items))


@dataclass(frozen=True)
class Config:
    """A program continuation paired with a concrete memory."""

    prog: object
    mem: tuple

    def __str__(self) -> str:
        binds = ", ".join(f"{n}={v}" for n, v in self.mem) or "0"
        return f"<{stmt_str(self.prog)} | {binds}>"


def eval_expr(e, mem: tuple, modulus: int) -> int:
    if isinstance(e, Const):
        return e.value % modulus
    if isinstance(e, Var):
        return mem_get(mem, e.name) % modulus
    a = eval_expr(e.left, mem, modulus)
    b = eval_expr(e.right, mem, modulus)
    return (a + b) % modulus if e.op == "+" else (a - b) % modulus


def eval_cond(c, mem: tuple, modulus: int) -> bool:
    if isinstance(c, BoolLit):
        return c.value
    if isinstance(c, CNot):
        return not eval_cond(c.body, mem, modulus)
    if isinstance(c, CAnd):
        return eval_cond(c.left, mem, modulus) and eval_cond(c.right, mem, modulus)
    if isinstance(c, COr):
        return eval_cond(c.left, mem, modulus) or eval_cond(c.right, mem, modulus)
    a = eval_expr(c.left, mem, modulus)
    b = eval_expr(c.right, mem, modulus)
    return {"==": a == b, "!=": a != b, "<": a < b,
            "<=": a <= b, ">": a > b, ">=": a >= b}[c.op]


def step(config: Config, modulus: int, input_domain) -> list:
    """All successors of a configuration: (event or None, next config).

    Stuck configurations (a basic instruction with no continuation)
    return the empty list.
    """
    prog, mem = config.prog, config.mem
    if isinstance(prog, Seq) and isinstance(prog.first, Seq):
        prog = canonical_program(prog)
    if isinstance(prog, Seq):
        head, rest = prog.first, prog.rest
    else:
        head, rest = prog, None
    if isinstance(head, Loop):
        unfolded = seq(head.body, head if rest is None else Seq(head, rest))
        return [(None, Config(unfolded, mem))]
    if isinstance(head, If):
        branch = head.then_branch if eval_cond(head.cond, mem, modulus) else head.else_branch
        nxt = branch if rest is None else seq(branch, rest)
        return [(None, Config(nxt, mem))]
    if rest is None:
        return []  # basic instruction without continuation: no successors
    if isinstance(head, Input):
        return [(Event.inp(v % modulus), Config(rest, mem_set(mem, head.var, v % modulus)))
                for v in sorted(set(input_domain))]
    if isinstance(head, Output):
        return [(Event.out(eval_expr(head.expr, mem, modulus)), Config(rest, mem))]
    if isinstance(head, Havoc):
        return [(None, Config(rest, mem_set(mem, head.var, v % modulus)))
                for v in sorted(set(input_domain))]
    if isinstance(head, Assign):
        return [(None, Config(rest, mem_set(mem, head.var, eval_expr(head.expr, mem, modulus))))]
    raise InputError(f"cannot step {stmt_str(head)}")


def compile_lts(prog, modulus: int = DEFAULT_MODULUS, input_domain=None,
                max_states: int = DEFAULT_STATE_CAP, name: str = "P",
                init_mem: tuple = ()) -> Lts:
    """Explicit LTS of all configurations reachable from the zero memory."""
    if modulus < 1:
        raise InputError("modulus must be >= 1")
    domain = tuple(sorted({v % modulus for v in
                           (range(modulus) if input_domain is None else input_domain)}))
    if not domain:
        raise InputError("input domain must be nonempty")
    init = Config(canonical_program(prog),
                  tuple(sorted((n, v % modulus) for n, v in init_mem if v % modulus)))
    configs = [init]
    index = {init: 0}
    transitions = []
    frontier = [0]
    while frontier:
        sid = frontier.pop(0)
        for label, nxt in step(configs[sid], modulus, domain):
            tid = index.get(nxt)
            if tid is None:
                if len(configs) >= max_states:
                    raise ResourceError(f"state cap {max_states} exceeded compiling {name}")
                tid = len(configs)
                index[nxt] = tid
                configs.append(nxt)
                frontier.append(tid)
            transitions.append((sid, label, tid))
    alphabet = [Event.inp(v) for v in range(modulus)] + [Event.out(v) for v in range(modulus)]
    lts = Lts(name, tuple(f"c{i}" for i in range(len(configs))), 0, transitions, alphabet)
    lts.configs = tuple(configs)  # kept for diagnostics
    return lts


# --- parsing --------------------------------------------------------------

_ITOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<comment>#[^\n]*)|(?P<num>\d+)|(?P<word>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>:=|==|!=|<=|>=|[-+<>=;(){}])|(?P<bad>\S)")

_IKEYWORDS = {"loop", "if", "then", "else", "input", "output", "havoc",
              "true", "false", "and", "or", "not"}


def _tokenize_imp(text: str):
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _ITOKEN.match(text, pos)
        if m is None:
            break
        newlines = text.count("\n", pos, m.end())
        col = m.start() - line_start + 1
        if m.group("bad"):
            raise ParseError(f"unexpected character {m.group()!r}", line, col)
        if not (m.group("ws") or m.group("comment")):
            kind = "num" if m.group("num") else ("word" if m.group("word") else "op")
            tokens.append((kind, m.group(), line, col))
        if newlines:
            line += newlines
            line_start = text.rfind("\n", pos, m.end()) + 1
        pos = m.end()
    return tokens


class _ImpParser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def error(self, message):
        if self.i < len(self.tokens):
            _, _, ln, co = self.tokens[self.i]
        elif self.tokens:
            _, _, ln, co = self.tokens[-1]
        else:
            ln, co = 1, 1
        raise ParseError(message, ln, co)

    def peek(self):
        return self.tokens[self.i][1] if self.i < len(self.tokens) else None

    def take(self, expected=None):
        if self.i >= len(self.tokens):
            self.error("unexpected end of program")
        kind, val, ln, co = self.tokens[self.i]
        if expected is not None and val != expected:
            self.error(f"expected {expected!r}, got {val!r}")
        self.i += 1
        return kind, val, (ln, co)

    def parse_program(self):
        prog = self.stmtseq(stop=None)
        if self.i < len(self.tokens):
            self.error(f"trailing input {self.tokens[self.i][1]!r}")
        return prog

    def stmtseq(self, stop):
        stmts = [self.stmt()]
        while self.peek() == ";":
            self.take(";")
            if self.peek() is None or self.peek() == stop:
                break
            stmts.append(self.stmt())
        prog = stmts[-1]
        for s in reversed(stmts[:-1]):
            prog = seq(s, prog)
        return prog

    def stmt(self):
        tok = self.peek()
        if tok == "{":
            self.take("{")
            inner = self.stmtseq(stop="}")
            self.take("}")
            return inner
        if tok == "loop":
            _, _, loc = self.take("loop")
            return Loop(self.stmt(), loc=loc)
        if tok == "if":
            _, _, loc = self.take("if")
            cond = self.cond()
            self.take("then")
            then_branch = self.stmt()
            self.take("else")
            else_branch = self.stmt()
            return If(cond, then_branch, else_branch, loc=loc)
        if tok == "input":
            _, _, loc = self.take("input")
            return Input(self.ident(), loc=loc)
        if tok == "output":
            _, _, loc = self.take("output")
            return Output(self.expr(), loc=loc)
        if tok == "havoc":
            _, _, loc = self.take("havoc")
            return Havoc(self.ident(), loc=loc)
        kind, name, loc = self.take()
        if kind != "word" or name in _IKEYWORDS:
            raise ParseError(f"expected a statement, got {name!r}", *loc)
        self.take(":=")
        return Assign(name, self.expr(), loc=loc)

    def ident(self):
        kind, name, loc = self.take()
        if kind != "word" or name in _IKEYWORDS:
            raise ParseError(f"expected a variable name, got {name!r}", *loc)
        return name

    def expr(self):
        node = self.term()
        while self.peek() in ("+", "-"):
            _, op, _ = self.take()
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        kind, val, loc = self.take()
        if kind == "num":
            return Const(int(val))
        if val == "(":
            node = self.expr()
            self.take(")")
            return node
        if kind == "word" and val not in _IKEYWORDS:
            return Var(val)
        raise ParseError(f"expected an expression, got {val!r}", *loc)

    def cond(self):
        node = self.cand()
        while self.peek() == "or":
            self.take("or")
            node = COr(node, self.cand())
        return node

    def cand(self):
        node = self.cnot()
        while self.peek() == "and":
            self.take("and")
            node = CAnd(node, self.cnot())
        return node

    def cnot(self):
        if self.peek() == "not":
            self.take("not")
            return CNot(self.cnot())
        if self.peek() == "true":
            self.take()
            return BoolLit(True)
        if self.peek() == "false":
            self.take()
            return BoolLit(False)
        if self.peek() == "(":
            mark = self.i
            self.take("(")
            inner = self.cond()
            self.take(")")
            if self.peek() in ("==", "!=", "<", "<=", ">", ">=", "=", "+", "-"):
                self.i = mark  # actually an arithmetic comparison
            else:
                return inner
        left = self.expr()
        kind, op, loc = self.take()
        if op == "=":
            op = "=="
        if op not in ("==", "!=", "<", "<=", ">", ">="):
            raise ParseError(f"expected a comparison, got {op!r}", *loc)
        return Cmp(op, left, self.expr())


def _finishing_stmt(p) -> Optional[object]:
    """A statement ending some control path, or None if no path finishes."""
    if isinstance(p, Loop):
        return None
    if isinstance(p, Seq):
        if _finishing_stmt(p.first) is None:
            return None
        return _finishing_stmt(p.rest)
    if isinstance(p, If):
        return _finishing_stmt(p.then_branch) or _finishing_stmt(p.else_branch)
    return p  # basic instruction: the path ends here


def parse_program(text: str):
    """Parse program text and enforce the reactivity restriction."""
    prog = _ImpParser(_tokenize_imp(text)).parse_program()
    offender = _finishing_stmt(prog)
    if offender is not None:
        raise ParseError(
            f"program is not reactive: control may end at {stmt_str(offender)!r}"
            " (every path must end in a loop)", *offender.loc)
    return prog
