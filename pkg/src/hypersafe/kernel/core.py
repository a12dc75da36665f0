"""Incremental proof kernel: goals, guarded hypotheses, and the rule set.

A goal is a quadruple (hypotheses, left configuration, right
configuration, formula) plus a guard flag; stepping suspends it into a
sextuple carrying the pending event pair until the derivative rule
discharges the pair.  The guard is released only by the derivative rule;
the cycle rule closes a branch only on unguarded goals whose triple is
covered by a hypothesis.  Hypotheses over programs are memory invariants;
membership is entailment, decided by the discharger.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Union

from ..errors import InputError, RuleError
from ..lts import Event, Lts
from ..relspec import (FALSE, TRUE, AtomTable, Formula, closure, derive,
                       formula_included)
from .. import imp
from ..imp import (Assign, Havoc, If, Input, Loop, Output, Seq,
                   canonical_program, program_vars, seq, stmt_str)
from ..solver import check_simulation
from .symbolic import (DEFAULT_BUDGET, LinExpr, MemoryInvariant, SCAtom,
                       SCBool, SCCmp, SCNot, SCAnd, SCOr, SymEvent, SymMemory,
                       ValueExpr, cond_str, discharge, lin_add, lin_const,
                       lin_sub, lin_var)

GUARDED = "GUARDED"
UNGUARDED = "UNGUARDED"


@dataclass(frozen=True)
class LtsConfig:
    """A concrete state of an explicit transition system."""

    lts: Lts
    state: int

    def __str__(self) -> str:
        return f"{self.lts.name}.{self.lts.state_name(self.state)}"


@dataclass(frozen=True)
class ImpConfig:
    """A program continuation with a (possibly symbolic) memory."""

    prog: object
    mem: SymMemory

    def head(self):
        if isinstance(self.prog, Seq):
            return self.prog.first, self.prog.rest
        return self.prog, None

    def __str__(self) -> str:
        return f"<{stmt_str(self.prog)} | {self.mem}>"


@dataclass(frozen=True)
class ImpSystem:
    """A program bound as a quantified system in a kernel proof."""

    name: str
    prog: object

    @property
    def alphabet(self):  # unused by the kernel; parity with Lts
        return ()

    def initial_config(self) -> ImpConfig:
        return ImpConfig(canonical_program(self.prog), SymMemory())


@dataclass(frozen=True)
class LtsHyp:
    left_state: int
    right_state: int
    formula: Formula


@dataclass(frozen=True)
class ImpHyp:
    left_prog: object
    right_prog: object
    formula: Formula
    inv: MemoryInvariant


@dataclass(frozen=True)
class Goal:
    """One proof obligation; ``pending`` marks the sextuple form."""

    guard: str
    hyp: tuple
    left: Union[LtsConfig, ImpConfig]
    right: Union[LtsConfig, ImpConfig]
    formula: Formula
    pending: Optional[tuple] = None
    constraints: tuple = ()

    def __str__(self) -> str:
        box = "[H]" if self.guard == GUARDED else "<H>"
        if self.pending:
            e1, e2 = self.pending
            return (f"({box}{len(self.hyp)} | {e1} > {self.left},"
                    f" {e2} > {self.right} | {self.formula})")
        return f"({box}{len(self.hyp)} | {self.left}, {self.right} | {self.formula})"


def _ground(term):
    if isinstance(term, SymEvent) and term.payload.is_const():
        return Event(term.kind, value=term.payload.const)
    return term


def _sym_expr(e, mem: SymMemory, m: int) -> LinExpr:
    if isinstance(e, imp.Const):
        return lin_const(e.value, m)
    if isinstance(e, imp.Var):
        return mem.get(e.name)
    a = _sym_expr(e.left, mem, m)
    b = _sym_expr(e.right, mem, m)
    return lin_add(a, b, m) if e.op == "+" else lin_sub(a, b, m)


def _sym_cond(c, mem: SymMemory, m: int):
    if isinstance(c, imp.BoolLit):
        return SCBool(c.value)
    if isinstance(c, imp.CNot):
        return SCNot(_sym_cond(c.body, mem, m))
    if isinstance(c, imp.CAnd):
        return SCAnd((_sym_cond(c.left, mem, m), _sym_cond(c.right, mem, m)))
    if isinstance(c, imp.COr):
        return SCOr((_sym_cond(c.left, mem, m), _sym_cond(c.right, mem, m)))
    return SCCmp(c.op, _sym_expr(c.left, mem, m), _sym_expr(c.right, mem, m))


class ProofKernel:
    """Owns the proof context: atoms, modulus, symbols, and the rule trace."""

    def __init__(self, atoms: AtomTable, modulus: Optional[int] = None,
                 input_domain=None, budget: int = DEFAULT_BUDGET,
                 closure_cap: int = 100_000):
        self.atoms = atoms
        self.modulus = atoms.modulus if modulus is None else modulus
        self.domain = tuple(range(self.modulus) if input_domain is None
                            else sorted({v % self.modulus for v in input_domain}))
        self.budget = budget
        self.closure_cap = closure_cap
        self.visible: dict = {}  # script-visible symbol names
        self._counter = 0
        self._visible_counter = 0
        self._alphabets = None
        self._nonempty_cache: dict = {}
        self.trace: list = []  # (rule, guard_before, guard_after)

    # -- bookkeeping --------------------------------------------------------

    def _record(self, rule: str, before: Optional[str], after: Optional[str]):
        self.trace.append((rule, before, after))

    def fresh_symbol(self, visible: bool = True) -> LinExpr:
        if visible:
            self._visible_counter += 1
            name = f"v{self._visible_counter}"
            expr = lin_var(name, self.modulus)
            self.visible[name] = expr
            return expr
        self._counter += 1
        return lin_var(f"_g{self._counter}", self.modulus)

    def _resolve(self, value) -> LinExpr:
        if isinstance(value, LinExpr):
            return value
        if isinstance(value, int):
            return lin_const(value, self.modulus)
        if isinstance(value, ValueExpr):
            return value.resolve(self.visible, self.modulus)
        raise InputError(f"cannot interpret {value!r} as a symbolic value")

    def _imp_alphabet(self):
        return ([Event.inp(v) for v in range(self.modulus)]
                + [Event.out(v) for v in range(self.modulus)])

    def _nonempty(self, f: Formula) -> bool:
        if self._alphabets is None:
            raise InputError("kernel not initialized: apply the init rule first")
        got = self._nonempty_cache.get(id(f))
        if got is None:
            graph = closure(f, self._alphabets, self.atoms, self.closure_cap)
            got = graph.nonempty(graph.node_id(graph.root))
            self._nonempty_cache[id(f)] = got
        return got

    def discharge(self, goal_cond, hypotheses=()):
        return discharge(goal_cond, tuple(hypotheses), self.atoms, self.modulus,
                         self.budget)

    # -- rules ---------------------------------------------------------------

    def apply_init(self, query) -> Goal:
        """Open the root goal at the initial configurations with no hypotheses."""
        if len(query.universal) != 1 or len(query.existential) != 1:
            raise RuleError("init", "the kernel proves exactly forall-1 exists-1 goals")
        lsys, rsys = query.universal[0], query.existential[0]
        if isinstance(lsys, Lts) and isinstance(rsys, Lts):
            left = LtsConfig(lsys, lsys.init)
            right = LtsConfig(rsys, rsys.init)
            self._alphabets = (lsys.alphabet, rsys.alphabet)
        elif isinstance(lsys, ImpSystem) and isinstance(rsys, ImpSystem):
            left = lsys.initial_config()
            right = rsys.initial_config()
            alpha = self._imp_alphabet()
            self._alphabets = (alpha, alpha)
        else:
            raise RuleError("init", "both systems must be of the same kind")
        self._record("init", None, GUARDED)
        return Goal(GUARDED, (), left, right, query.formula)

    def apply_step(self, goal: Goal, reply: Callable) -> list:
        """One sextuple child per left observable move, via the reply choice."""
        if goal.pending is not None:
            raise RuleError("step", "goal already has a pending event pair")
        if not isinstance(goal.left, LtsConfig):
            raise RuleError("step", "explicit-state step needs transition-system goals;"
                                    " use io/havoc rules for programs")
        children = []
        right = goal.right
        rmoves = set(right.lts.obs_successors(right.state))
        for e1, s1 in goal.left.lts.obs_successors(goal.left.state):
            e2, s2 = reply(e1, s1)
            if (e2, s2) not in rmoves:
                raise RuleError("step", f"reply ({e2},{right.lts.state_name(s2)}) is not"
                                        f" an observable move of {right.lts.name}")
            children.append(replace(
                goal, guard=GUARDED,
                left=LtsConfig(goal.left.lts, s1), right=LtsConfig(right.lts, s2),
                pending=(e1, e2)))
        self._record("step", goal.guard, GUARDED)
        return children

    def apply_io(self, goal: Goal, right_choice=None) -> Goal:
        """Paired input/output step of two programs (sextuple result)."""
        if goal.pending is not None:
            raise RuleError("io", "goal already has a pending event pair")
        if not isinstance(goal.left, ImpConfig):
            raise RuleError("io", "io rules need program goals")
        lhead, lrest = goal.left.head()
        rhead, rrest = goal.right.head()
        if lrest is None or rrest is None:
            raise RuleError("io", "basic instruction without continuation cannot step")
        if isinstance(lhead, Input) and isinstance(rhead, Input):
            fresh = self.fresh_symbol(visible=True)
            if right_choice is None:
                raise RuleError("io", "input-input needs the right input value")
            chosen = self._resolve(right_choice)
            lmem = goal.left.mem.set(lhead.var, fresh)
            rmem = goal.right.mem.set(rhead.var, chosen)
            pending = (_ground(SymEvent("in", fresh)), _ground(SymEvent("in", chosen)))
            child = replace(goal, guard=GUARDED,
                            left=ImpConfig(lrest, lmem), right=ImpConfig(rrest, rmem),
                            pending=pending)
        elif isinstance(lhead, Output) and isinstance(rhead, Output):
            e1 = SymEvent("out", _sym_expr(lhead.expr, goal.left.mem, self.modulus))
            e2 = SymEvent("out", _sym_expr(rhead.expr, goal.right.mem, self.modulus))
            child = replace(goal, guard=GUARDED,
                            left=ImpConfig(lrest, goal.left.mem),
                            right=ImpConfig(rrest, goal.right.mem),
                            pending=(_ground(e1), _ground(e2)))
        else:
            raise RuleError("io", f"heads {stmt_str(lhead)} / {stmt_str(rhead)} are not"
                                  " a matching input-input or output-output pair")
        self._record("step", goal.guard, GUARDED)
        return child

    def apply_deriv(self, goal: Goal) -> Goal:
        """Discharge the pending pair: derivative nonempty, formula advanced.

        This is the only rule that releases the guard.
        """
        if goal.pending is None:
            raise RuleError("deriv", "no pending event pair")
        t1, t2 = goal.pending
        f = goal.formula
        if isinstance(t1, Event) and isinstance(t2, Event):
            nf = derive(f, (t1, t2), self.atoms)
            if not self._nonempty(nf):
                raise RuleError("deriv", f"derivative of {f} under ({t1}, {t2}) is empty")
            result = nf
        else:
            result = self._symbolic_deriv(goal, f, (t1, t2))
        child = replace(goal, guard=UNGUARDED, formula=result, pending=None)
        self._record("deriv", GUARDED, UNGUARDED)
        return child

    def _symbolic_deriv(self, goal: Goal, f: Formula, events: tuple) -> Formula:
        def prove_atom(name):
            return self.discharge(SCAtom(name, events), goal.constraints)

        if f.tag == "true":
            return TRUE
        if f.tag == "atom":
            res = prove_atom(f.name)
            if not res:
                raise RuleError("deriv", f"atom {f.name} refuted on"
                                         f" ({events[0]}, {events[1]}): {res.reason}")
            return TRUE
        if f.tag == "always" and f.children[0].tag == "atom":
            name = f.children[0].name
            res = prove_atom(name)
            if not res:
                raise RuleError("deriv", f"invariant atom {name} refuted on"
                                         f" ({events[0]}, {events[1]}): {res.reason}")
            return f
        if f.tag == "W" and all(c.tag == "atom" for c in f.children):
            now = prove_atom(f.children[1].name)
            if now:
                return TRUE
            later = prove_atom(f.children[0].name)
            if later:
                return f
            raise RuleError("deriv", f"neither branch of {f} holds on"
                                     f" ({events[0]}, {events[1]}): {later.reason}")
        if f.tag == "next":
            body = f.children[0]
            if not self._nonempty(body):
                raise RuleError("deriv", f"{body} is empty")
            return body
        raise RuleError("deriv", f"symbolic events cannot derive {f}; strengthen first")

    def apply_invariant(self, goal: Goal, newhyp) -> list:
        """Extend the hypotheses and generalize; the guard is restored."""
        if goal.pending is not None:
            raise RuleError("invariant", "cannot generalize a pending goal")
        if isinstance(newhyp, MemoryInvariant):
            if not isinstance(goal.left, ImpConfig):
                raise RuleError("invariant", "memory invariants need program goals")
            inst = newhyp.instantiate(goal.left.mem, goal.right.mem, self.modulus)
            res = self.discharge(inst, goal.constraints)
            if not res:
                raise RuleError("invariant",
                                f"current memories do not satisfy {newhyp}: {res.reason}")
            lmem = SymMemory()
            for v in program_vars(goal.left.prog):
                lmem = lmem.set(v, self.fresh_symbol(visible=False))
            rmem = SymMemory()
            for v in program_vars(goal.right.prog):
                rmem = rmem.set(v, self.fresh_symbol(visible=False))
            entry = ImpHyp(goal.left.prog, goal.right.prog, goal.formula, newhyp)
            child = replace(goal, guard=GUARDED, hyp=goal.hyp + (entry,),
                            left=ImpConfig(goal.left.prog, lmem),
                            right=ImpConfig(goal.right.prog, rmem),
                            constraints=(newhyp.instantiate(lmem, rmem, self.modulus),))
            self._record("invariant", goal.guard, GUARDED)
            return [child]
        pairs = sorted(set(newhyp))
        if not isinstance(goal.left, LtsConfig):
            raise RuleError("invariant", "state-pair invariants need transition-system goals")
        if (goal.left.state, goal.right.state) not in set(pairs):
            raise RuleError("invariant", "current state pair is not in the invariant")
        entries = tuple(LtsHyp(a, b, goal.formula) for a, b in pairs)
        children = [replace(goal, guard=GUARDED, hyp=goal.hyp + entries,
                            left=LtsConfig(goal.left.lts, a),
                            right=LtsConfig(goal.right.lts, b))
                    for a, b in pairs]
        self._record("invariant", goal.guard, GUARDED)
        return children

    def apply_cycle(self, goal: Goal) -> None:
        """Close the branch from an unguarded hypothesis containing the triple."""
        if goal.guard != UNGUARDED:
            raise RuleError("cycle", "guarded hypothesis: a deriv step must come first")
        if goal.pending is not None:
            raise RuleError("cycle", "cannot cycle on a pending goal")
        if isinstance(goal.left, LtsConfig):
            target = LtsHyp(goal.left.state, goal.right.state, goal.formula)
            if target in goal.hyp:
                self._record("cycle", UNGUARDED, None)
                return
            near = [h for h in goal.hyp if isinstance(h, LtsHyp)
                    and (h.left_state, h.right_state) == (target.left_state, target.right_state)]
            extra = (f"; nearest miss has formula {near[0].formula}" if near else "")
            raise RuleError("cycle", f"triple ({goal.left}, {goal.right}, {goal.formula})"
                                     f" is not in the hypothesis set{extra}")
        misses = []
        for h in goal.hyp:
            if not isinstance(h, ImpHyp):
                continue
            if h.left_prog != goal.left.prog or h.right_prog != goal.right.prog:
                misses.append("different program position")
                continue
            if h.formula is not goal.formula:
                misses.append(f"hypothesis formula {h.formula} != {goal.formula}")
                continue
            inst = h.inv.instantiate(goal.left.mem, goal.right.mem, self.modulus)
            res = self.discharge(inst, goal.constraints)
            if res:
                self._record("cycle", UNGUARDED, None)
                return
            misses.append(f"memories do not entail {h.inv}: {res.reason}")
        detail = "; ".join(misses) if misses else "hypothesis set is empty"
        raise RuleError("cycle", f"no hypothesis covers the goal ({detail})")

    # -- alignment ------------------------------------------------------------

    def _imp_silent(self, config: ImpConfig, rule: str, side: str) -> ImpConfig:
        head, rest = config.head()
        if isinstance(head, Loop):
            unfolded = seq(head.body, head if rest is None else Seq(head, rest))
            return ImpConfig(unfolded, config.mem)
        if isinstance(head, If):
            cond = _sym_cond(head.cond, config.mem, self.modulus)
            if self.discharge(cond):
                branch = head.then_branch
            elif self.discharge(SCNot(cond)):
                branch = head.else_branch
            else:
                raise RuleError(rule, f"branch condition {imp.cond_str(head.cond)}"
                                      " is undecided under the constraints")
            nxt = branch if rest is None else seq(branch, rest)
            return ImpConfig(nxt, config.mem)
        if rest is None:
            raise RuleError(rule, "basic instruction without continuation cannot step")
        if isinstance(head, Assign):
            value = _sym_expr(head.expr, config.mem, self.modulus)
            return ImpConfig(rest, config.mem.set(head.var, value))
        if isinstance(head, Havoc):
            raise RuleError(rule, f"havoc head: use havoc_{side} instead")
        raise RuleError(rule, f"head {stmt_str(head)} performs I/O: use the step rule")

    def apply_steps_l(self, goal: Goal, n: int) -> Goal:
        """Advance the left side by n deterministic silent steps."""
        if goal.pending is not None:
            raise RuleError("steps_l", "cannot align a pending goal")
        left = goal.left
        for _ in range(n):
            if isinstance(left, LtsConfig):
                nxt = left.lts.det_step(left.state)
                if nxt is None:
                    raise RuleError("steps_l",
                                    f"state {left} has no deterministic silent step")
                left = LtsConfig(left.lts, nxt)
            else:
                left = self._imp_silent(left, "steps_l", "l")
        self._record("steps_l", goal.guard, goal.guard)
        return replace(goal, left=left)

    def apply_steps_r(self, goal: Goal, n: int) -> Goal:
        """Advance the right side by n silent steps (deterministic path only)."""
        if goal.pending is not None:
            raise RuleError("steps_r", "cannot align a pending goal")
        right = goal.right
        for _ in range(n):
            if isinstance(right, LtsConfig):
                silent = [dst for lab, dst in right.lts.outgoing(right.state) if lab is None]
                if not silent:
                    raise RuleError("steps_r", f"state {right} has no silent step")
                if len(set(silent)) > 1:
                    raise RuleError("steps_r", f"state {right} has branching silent steps")
                right = LtsConfig(right.lts, silent[0])
            else:
                right = self._imp_silent(right, "steps_r", "r")
        self._record("steps_r", goal.guard, goal.guard)
        return replace(goal, right=right)

    def apply_havoc_l(self, goal: Goal) -> Goal:
        """Resolve a left havoc with a fresh universally-quantified symbol."""
        if not isinstance(goal.left, ImpConfig):
            raise RuleError("havoc_l", "havoc rules need program goals")
        head, rest = goal.left.head()
        if not isinstance(head, Havoc) or rest is None:
            raise RuleError("havoc_l", "left head is not a havoc with continuation")
        fresh = self.fresh_symbol(visible=True)
        self._record("havoc_l", goal.guard, goal.guard)
        return replace(goal, left=ImpConfig(rest, goal.left.mem.set(head.var, fresh)))

    def apply_havoc_r(self, goal: Goal, value) -> Goal:
        """Resolve a right havoc with a chosen symbolic value."""
        if not isinstance(goal.right, ImpConfig):
            raise RuleError("havoc_r", "havoc rules need program goals")
        head, rest = goal.right.head()
        if not isinstance(head, Havoc) or rest is None:
            raise RuleError("havoc_r", "right head is not a havoc with continuation")
        chosen = self._resolve(value)
        self._record("havoc_r", goal.guard, goal.guard)
        return replace(goal, right=ImpConfig(rest, goal.right.mem.set(head.var, chosen)))

    # -- up-to rules ------------------------------------------------------------

    def apply_strengthen(self, goal: Goal, stronger: Formula) -> Goal:
        """Replace the goal formula by a nonempty included one; guard unchanged."""
        if goal.pending is not None:
            raise RuleError("strengthen", "cannot strengthen a pending goal")
        if not self._nonempty(stronger):
            raise RuleError("strengthen", f"{stronger} is empty over the alphabets")
        if not formula_included(stronger, goal.formula, self._alphabets, self.atoms,
                                self.closure_cap):
            raise RuleError("strengthen",
                            f"inclusion {stronger} <= {goal.formula} not established")
        self._record("strengthen", goal.guard, goal.guard)
        return replace(goal, formula=stronger)

    def apply_sim(self, goal: Goal, side: str, replacement) -> Goal:
        """Swap one side for a similar configuration; obligation auto-checked.

        The left side may be replaced by something that simulates it; the
        right side by something it simulates.
        """
        if side not in ("left", "right"):
            raise InputError("side must be 'left' or 'right'")
        current = goal.left if side == "left" else goal.right
        cur_lts = self._as_lts(current, "current")
        new_lts = self._as_lts(replacement, "replacement")
        if side == "left":
            verdict = check_simulation(cur_lts, new_lts)
        else:
            verdict = check_simulation(new_lts, cur_lts)
        if not verdict.proved:
            raise RuleError("sim", f"simulation obligation between {current} and"
                                   f" {replacement} not established")
        self._record("sim_" + side[0], goal.guard, goal.guard)
        if side == "left":
            return replace(goal, left=replacement)
        return replace(goal, right=replacement)

    def _as_lts(self, config, what: str) -> Lts:
        if isinstance(config, LtsConfig):
            return config.lts.reroot(config.state)
        if isinstance(config, ImpConfig):
            if not config.mem.is_concrete():
                raise RuleError("sim", f"{what} configuration has symbolic memory;"
                                       " the obligation is not automatically dischargeable")
            mem = tuple((n, v.const) for n, v in config.mem.items)
            return imp.compile_lts(config.prog, self.modulus, self.domain,
                                   init_mem=mem, name=what)
        raise InputError(f"bad configuration {config!r}")
