"""Proof-script text format and its interpreter.

::

    system L = imp "incr.imp";   system R = imp "ndet_add.imp";
    atom double(e1, e2) := (e1 is out(x)) implies (e2 == out(2*x));
    goal forall L exists R : always double;
    proof
      init. left 1. right 1.
      invariant (2 * l.x == r.x).
      left 2. right 1. havoc_r 2. right 1.
      step. deriv. cycle.
    qed

Tactics run depth-first against a goal stack; each applies to the top
goal.  ``sync`` repeats silent alignment steps (including automatic left
havoc resolution) until both heads are I/O instructions.  Input symbols
introduced by ``step (in: ...)`` and ``havoc_l`` are named v1, v2, ... in
order of introduction and can be referenced in later value expressions.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

from ..errors import EngineError, ParseError, RuleError
from ..imp import Havoc, If, Input, Loop, Output, Assign, parse_program
from ..relspec import AtomTable, parse_atom_decl, parse_formula
from ..solver import HyperQuery
from .core import GUARDED, Goal, ImpConfig, ImpSystem, ProofKernel
from .symbolic import MemoryInvariant, ValueExpr

_SYNC_FUEL = 10_000


@dataclass
class ProofResult:
    """Outcome of running a script: closed, failed, or stuck."""

    status: str  # "closed" | "failed" | "stuck"
    reason: str = ""
    open_goals: tuple = ()
    trace: tuple = ()

    @property
    def exit_code(self) -> int:
        return {"closed": 0, "failed": 1, "stuck": 2}[self.status]

    def __str__(self) -> str:
        if self.status == "closed":
            return "CLOSED"
        if self.status == "failed":
            return f"FAILED: {self.reason}"
        goals = "; ".join(str(g) for g in self.open_goals)
        return f"STUCK: {len(self.open_goals)} open goal(s): {goals}" + (
            f" ({self.reason})" if self.reason else "")


def _scan(text: str):
    """Tokens: words, ints, strings, (groups), {groups}, punctuation."""
    tokens = []
    i, line, line_start = 0, 1, 0
    n = len(text)
    while i < n:
        ch = text[i]
        col = i - line_start + 1
        if ch == "\n":
            line += 1
            line_start = i + 1
            i += 1
        elif ch.isspace():
            i += 1
        elif ch == "#":
            while i < n and text[i] != "\n":
                i += 1
        elif ch == '"':
            j = text.find('"', i + 1)
            if j < 0:
                raise ParseError("unterminated string", line, col)
            tokens.append(("string", text[i + 1:j], line, col))
            i = j + 1
        elif ch in "({":
            close = ")" if ch == "(" else "}"
            depth, j = 1, i + 1
            while j < n and depth:
                if text[j] == ch:
                    depth += 1
                elif text[j] == close:
                    depth -= 1
                j += 1
            if depth:
                raise ParseError(f"unbalanced {ch!r}", line, col)
            kind = "group" if ch == "(" else "bgroup"
            tokens.append((kind, text[i + 1:j - 1].strip(), line, col))
            line += text.count("\n", i, j)
            if "\n" in text[i:j]:
                line_start = text.rfind("\n", i, j) + 1
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("word", text[i:j], line, col))
            i = j
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(("int", text[i:j], line, col))
            i = j
        else:
            for op in ("..", ":=", "==", "!=", "<=", ">="):
                if text.startswith(op, i):
                    tokens.append(("op", op, line, col))
                    i += len(op)
                    break
            else:
                if ch in ".;:=<>+-*,":
                    tokens.append(("op", ch, line, col))
                    i += 1
                else:
                    raise ParseError(f"unexpected character {ch!r}", line, col)
    return tokens


@dataclass
class ScriptAst:
    systems: dict
    atom_texts: list
    forall_name: str
    exists_name: str
    formula_text: str
    tactics: list  # (name, arg, line)
    modulus: int = 0  # 0 = unspecified
    domain: tuple = ()


def parse_script(text: str) -> ScriptAst:
    tokens = _scan(text)
    i = 0

    def take(expected=None, kind=None):
        nonlocal i
        if i >= len(tokens):
            raise ParseError("unexpected end of script", 1, 0)
        k, v, ln, co = tokens[i]
        if expected is not None and v != expected:
            raise ParseError(f"expected {expected!r}, got {v!r}", ln, co)
        if kind is not None and k != kind:
            raise ParseError(f"expected a {kind}, got {v!r}", ln, co)
        i += 1
        return v, ln, co

    systems: dict = {}
    atom_texts: list = []
    forall_name = exists_name = formula_text = None
    modulus, domain = 0, ()
    while i < len(tokens) and tokens[i][1] != "proof":
        head, ln, co = take(kind="word")
        if head == "system":
            name, _, _ = take(kind="word")
            take("=")
            take("imp")
            path, _, _ = take(kind="string")
            take(";")
            systems[name] = path
        elif head == "atom":
            # capture raw declaration text up to the semicolon
            parts = ["atom"]
            while i < len(tokens) and tokens[i][1] != ";":
                k, v, _, _ = tokens[i]
                parts.append(f"({v})" if k == "group" else v)
                i += 1
            take(";")
            atom_texts.append(" ".join(parts) + ";")
        elif head == "modulus":
            v, _, _ = take(kind="int")
            take(";")
            modulus = int(v)
        elif head == "domain":
            lo, _, _ = take(kind="int")
            take("..")
            hi, _, _ = take(kind="int")
            take(";")
            domain = tuple(range(int(lo), int(hi) + 1))
        elif head == "goal":
            take("forall")
            forall_name, _, _ = take(kind="word")
            take("exists")
            exists_name, _, _ = take(kind="word")
            take(":")
            parts = []
            while i < len(tokens) and tokens[i][1] != ";":
                k, v, _, _ = tokens[i]
                parts.append(f"({v})" if k == "group" else v)
                i += 1
            take(";")
            formula_text = " ".join(parts)
        else:
            raise ParseError(f"unknown header {head!r}", ln, co)
    take("proof")
    if formula_text is None:
        raise ParseError("script has no goal declaration", 1, 1)
    if forall_name not in systems or exists_name not in systems:
        raise ParseError("goal references an undeclared system", 1, 1)
    tactics = []
    while i < len(tokens) and tokens[i][1] != "qed":
        name, ln, co = take(kind="word")
        arg = None
        if i < len(tokens) and tokens[i][1] not in (".",) and tokens[i][0] in (
                "group", "bgroup", "int", "string"):
            arg = tokens[i][:2]
            i += 1
        take(".")
        tactics.append((name, arg, ln))
    take("qed")
    if i != len(tokens):
        _, v, ln, co = tokens[i]
        raise ParseError(f"trailing input after qed: {v!r}", ln, co)
    return ScriptAst(systems, atom_texts, forall_name, exists_name,
                     formula_text, tactics, modulus, domain)


class _SyncStuck(EngineError):
    pass


def _is_io(config: ImpConfig) -> bool:
    head, rest = config.head()
    return isinstance(head, (Input, Output)) and rest is not None


def _sync(kernel: ProofKernel, goal: Goal) -> Goal:
    """Silent-align both sides until both heads are I/O instructions."""
    for _ in range(_SYNC_FUEL):
        if not isinstance(goal.left, ImpConfig):
            raise _SyncStuck("sync only applies to program goals")
        lhead, _ = goal.left.head()
        rhead, _ = goal.right.head()
        if isinstance(lhead, (Loop, If, Assign)):
            goal = kernel.apply_steps_l(goal, 1)
            continue
        if isinstance(lhead, Havoc):
            goal = kernel.apply_havoc_l(goal)
            continue
        if isinstance(rhead, (Loop, If, Assign)):
            goal = kernel.apply_steps_r(goal, 1)
            continue
        if _is_io(goal.left) and _is_io(goal.right):
            return goal
        raise _SyncStuck(f"sync stopped before I/O heads at {goal}")
    raise _SyncStuck("sync exceeded its step budget without reaching I/O heads")


def run_script(text: str, base_dir: str = ".", modulus: int = 0,
               input_domain=(), budget: int = 0) -> ProofResult:
    """Interpret a proof script; returns closed/failed/stuck plus the rule trace.

    A modulus declared in the script wins over the ``modulus`` argument;
    the engine default is 8.
    """
    ast = parse_script(text)
    m = ast.modulus or modulus or 8
    atoms = AtomTable(modulus=m)
    for decl in ast.atom_texts:
        atoms.declare(parse_atom_decl(decl))
    formula = parse_formula(ast.formula_text, atoms.names())
    loaded = {}
    for name, path in ast.systems.items():
        full = path if os.path.isabs(path) else os.path.join(base_dir, path)
        with open(full, "r", encoding="utf-8") as fh:
            loaded[name] = ImpSystem(name, parse_program(fh.read()))
    domain = ast.domain or input_domain or None
    kernel = ProofKernel(atoms, modulus=m, input_domain=domain,
                         budget=budget or (1 << 16))
    query = HyperQuery((loaded[ast.forall_name],), (loaded[ast.exists_name],),
                       formula, atoms)
    stack: list = []
    inited = False
    for name, arg, line in ast.tactics:
        top = None
        try:
            if name == "init":
                if inited:
                    raise RuleError("init", "proof already initialized")
                stack.append(kernel.apply_init(query))
                inited = True
                continue
            if not stack:
                raise RuleError(name, "no goal on the stack")
            top = stack.pop()
            if name == "sync":
                stack.append(_sync(kernel, top))
            elif name == "step":
                choice = None
                if arg is not None:
                    kind, raw = arg
                    if kind != "group" or not raw.replace(" ", "").startswith("in:"):
                        raise RuleError("step", "step argument must be (in: <expr>)")
                    choice = ValueExpr(raw.split(":", 1)[1].strip())
                stack.append(kernel.apply_io(top, choice))
            elif name == "deriv":
                stack.append(kernel.apply_deriv(top))
            elif name == "cycle":
                kernel.apply_cycle(top)  # closes the branch
            elif name == "invariant":
                if arg is None or arg[0] != "group":
                    raise RuleError("invariant", "invariant needs a (predicate) argument")
                children = kernel.apply_invariant(top, MemoryInvariant(arg[1]))
                stack.extend(reversed(children))
            elif name in ("left", "right"):
                if arg is None or arg[0] != "int":
                    raise RuleError(name, f"{name} needs a step count")
                fn = kernel.apply_steps_l if name == "left" else kernel.apply_steps_r
                stack.append(fn(top, int(arg[1])))
            elif name == "havoc_l":
                stack.append(kernel.apply_havoc_l(top))
            elif name == "havoc_r":
                if arg is None:
                    raise RuleError("havoc_r", "havoc_r needs a value expression")
                value = ValueExpr(arg[1]) if arg[0] in ("group", "int") else None
                if value is None:
                    raise RuleError("havoc_r", "havoc_r needs a value expression")
                stack.append(kernel.apply_havoc_r(top, value))
            elif name == "strengthen":
                if arg is None or arg[0] != "group":
                    raise RuleError("strengthen", "strengthen needs a (formula) argument")
                stack.append(kernel.apply_strengthen(
                    top, parse_formula(arg[1], atoms.names())))
            elif name in ("sim_l", "sim_r"):
                if arg is None or arg[0] != "bgroup":
                    raise RuleError(name, f"{name} needs a {{program}} argument")
                prog = parse_program(arg[1])
                side = "left" if name == "sim_l" else "right"
                current = top.left if side == "left" else top.right
                stack.append(kernel.apply_sim(
                    top, side, ImpConfig(prog, current.mem)))
            else:
                raise RuleError(name, f"unknown tactic {name!r}")
        except _SyncStuck as stuck:
            remaining = tuple(stack) + ((top,) if top is not None else ())
            return ProofResult("stuck", str(stuck), remaining, tuple(kernel.trace))
        except RuleError as err:
            remaining = tuple(stack) + ((top,) if top is not None else ())
            return ProofResult("failed", f"line {line}: {err}", remaining,
                               tuple(kernel.trace))
    if stack:
        return ProofResult("stuck", "script ended with open goals", tuple(stack),
                           tuple(kernel.trace))
    return ProofResult("closed", trace=tuple(kernel.trace))
