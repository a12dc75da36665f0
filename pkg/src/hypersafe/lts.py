"""Labeled transition systems with silent steps, and lasso-shaped traces.

An observable step chains any number of silent transitions with exactly one
labeled transition.  All values here are immutable after construction and
safe to share across threads.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import total_ordering
from typing import Iterable, Optional, Sequence

from .errors import InputError, ParseError

_KIND_RANK = {"sym": 0, "in": 1, "out": 2}


@total_ordering
@dataclass(frozen=True)
class Event:
    """An observable event: a named symbol, or an integer input/output."""

    kind: str  # "sym" | "in" | "out"
    name: str = ""
    value: int = 0

    @staticmethod
    def sym(name: str) -> "Event":
        return Event("sym", name=name)

    @staticmethod
    def inp(value: int) -> "Event":
        return Event("in", value=value)

    @staticmethod
    def out(value: int) -> "Event":
        return Event("out", value=value)

    def sort_key(self):
        return (_KIND_RANK[self.kind], self.name, self.value)

    def __lt__(self, other: "Event") -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        if self.kind == "sym":
            return self.name
        return f"{self.kind}({self.value})"


# Silent transitions carry None instead of an Event.
SILENT = None


@dataclass(frozen=True)
class Lasso:
    """Ultimately periodic event word: ``prefix . cycle^omega``."""

    prefix: tuple
    cycle: tuple

    def __post_init__(self):
        if len(self.cycle) < 1:
            raise InputError("lasso cycle must be nonempty")

    def at(self, i: int) -> Event:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.cycle[(i - len(self.prefix)) % len(self.cycle)]

    def suffix(self, i: int) -> "Lasso":
        """The lasso denoting the word with the first ``i`` letters dropped."""
        if i <= len(self.prefix):
            return Lasso(self.prefix[i:], self.cycle)
        k = (i - len(self.prefix)) % len(self.cycle)
        return Lasso((), self.cycle[k:] + self.cycle[:k])

    def letters(self, n: int) -> list:
        return [self.at(i) for i in range(n)]

    def normalize(self) -> "Lasso":
        """Canonical minimal representation of the denoted word.

        Reduces the cycle to its primitive root, then folds prefix letters
        that coincide with the cycle tail back into the cycle rotation.
        """
        cycle = list(self.cycle)
        for d in range(1, len(cycle)):
            if len(cycle) % d == 0 and cycle == cycle[:d] * (len(cycle) // d):
                cycle = cycle[:d]
                break
        prefix = list(self.prefix)
        while prefix and prefix[-1] == cycle[-1]:
            cycle = [cycle[-1]] + cycle[:-1]
            prefix.pop()
        return Lasso(tuple(prefix), tuple(cycle))

    def sort_key(self):
        return (
            len(self.prefix) + len(self.cycle),
            tuple(e.sort_key() for e in self.prefix),
            tuple(e.sort_key() for e in self.cycle),
        )

    def __str__(self) -> str:
        head = " ".join(str(e) for e in self.prefix)
        body = " ".join(str(e) for e in self.cycle)
        return (head + " " if head else "") + f"({body})^w"


class Lts:
    """Finite LTS: states are dense integers, names kept for reporting.

    Immutable after construction; the silent closure of every state is
    cached because observable-step queries dominate solver time.
    """

    def __init__(self, name: str, state_names: Sequence[str], init: int,
                 transitions: Iterable[tuple], alphabet: Optional[Iterable[Event]] = None):
        self.name = name
        self.state_names = tuple(state_names)
        self.n_states = len(self.state_names)
        self.init = init
        def tkey(t):
            src, label, dst = t
            return (src, (0,) if label is None else (1,) + label.sort_key(), dst)

        self.transitions = tuple(sorted(set(transitions), key=tkey))
        if not (0 <= init < self.n_states):
            raise InputError(f"initial state {init} out of range")
        used = set()
        for src, label, dst in self.transitions:
            if not (0 <= src < self.n_states) or not (0 <= dst < self.n_states):
                raise InputError(f"transition endpoint out of range: {src}->{dst}")
            if label is not None:
                used.add(label)
        if alphabet is None:
            self.alphabet = tuple(sorted(used))
        else:
            self.alphabet = tuple(sorted(set(alphabet)))
            missing = used - set(self.alphabet)
            if missing:
                raise InputError(f"labels outside alphabet: {sorted(map(str, missing))}")
        self._out = [[] for _ in range(self.n_states)]
        for src, label, dst in self.transitions:
            self._out[src].append((label, dst))
        self._silent_closure = [self._closure(s) for s in range(self.n_states)]
        self._obs = [self._obs_from(s) for s in range(self.n_states)]

    def _closure(self, s: int) -> tuple:
        seen = {s}
        stack = [s]
        while stack:
            cur = stack.pop()
            for label, dst in self._out[cur]:
                if label is None and dst not in seen:
                    seen.add(dst)
                    stack.append(dst)
        return tuple(sorted(seen))

    def _obs_from(self, s: int) -> tuple:
        result = set()
        for mid in self._silent_closure[s]:
            for label, dst in self._out[mid]:
                if label is not None:
                    result.add((label, dst))
        return tuple(sorted(result, key=lambda p: (p[0].sort_key(), p[1])))

    def _check_state(self, s: int):
        if not (0 <= s < self.n_states):
            raise InputError(f"unknown state id {s} in {self.name}")

    def state_name(self, s: int) -> str:
        self._check_state(s)
        return self.state_names[s]

    def state_id(self, name: str) -> int:
        try:
            return self.state_names.index(name)
        except ValueError:
            raise InputError(f"unknown state {name!r} in {self.name}") from None

    def outgoing(self, s: int) -> tuple:
        self._check_state(s)
        return tuple(self._out[s])

    def obs_successors(self, s: int) -> tuple:
        """All (event, target) pairs reachable by silent steps then one labeled edge."""
        self._check_state(s)
        return self._obs[s]

    def det_step(self, s: int) -> Optional[int]:
        """Target of the unique silent transition out of ``s``, if it is the only edge."""
        self._check_state(s)
        out = set(self._out[s])
        if len(out) == 1:
            label, dst = next(iter(out))
            if label is None:
                return dst
        return None

    def has_trace(self, s: int) -> bool:
        """Whether an infinite observable-step sequence exists from ``s``."""
        self._check_state(s)
        alive = set(range(self.n_states))
        changed = True
        while changed:
            changed = False
            for q in list(alive):
                if not any(dst in alive for _, dst in self._obs[q]):
                    alive.discard(q)
                    changed = True
        return s in alive

    def enumerate_lassos(self, s: int, max_len: int) -> list:
        """All distinct lassos of total length <= max_len realizable from ``s``."""
        self._check_state(s)
        if max_len < 1:
            raise InputError("max_len must be >= 1")
        found = set()

        def dfs(state, path_states, path_events):
            for event, dst in self._obs[state]:
                events = path_events + [event]
                if dst in path_states:
                    i = path_states.index(dst)
                    found.add(Lasso(tuple(events[:i]), tuple(events[i:])).normalize())
                if len(events) < max_len:
                    dfs(dst, path_states + [dst], events)

        dfs(s, [s], [])
        return sorted(found, key=Lasso.sort_key)

    def reroot(self, s: int) -> "Lts":
        """A copy of this system whose initial state is ``s``."""
        self._check_state(s)
        return Lts(self.name, self.state_names, s, self.transitions, self.alphabet)

    def __repr__(self) -> str:
        return f"Lts({self.name}, {self.n_states} states, {len(self.transitions)} transitions)"


_TOKEN = re.compile(
    r"\s*(?:(?P<comment>#[^\n]*)"
    r"|(?P<arrow>->|-(?:[A-Za-z_][A-Za-z0-9_]*|in\(\s*-?\d+\s*\)|out\(\s*-?\d+\s*\))->)"
    r"|(?P<word>[A-Za-z_][A-Za-z0-9_]*(\(\s*-?\d+\s*\))?)|(?P<punct>[{};])|(?P<bad>\S))"
)


def _parse_event_text(text: str, line: int, col: int) -> Event:
    m = re.fullmatch(r"(in|out)\(\s*(-?\d+)\s*\)", text)
    if m:
        v = int(m.group(2))
        return Event.inp(v) if m.group(1) == "in" else Event.out(v)
    if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", text):
        return Event.sym(text)
    raise ParseError(f"bad event label {text!r}", line, col)


def parse_lts(text: str) -> Lts:
    """Parse the LTS text format.

    ::

        lts TS1 { states q0 q1; init q0;
                  q0 -> q1;        # silent
                  q1 -a-> q1; }
    """
    tokens = []
    line = 1
    line_start = 0
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            break
        newlines = text.count("\n", pos, m.start())
        if newlines:
            line += newlines
            line_start = text.rfind("\n", pos, m.start()) + 1
        pos = m.end()
        if m.lastgroup == "comment" or m.group().strip() == "":
            continue
        col = m.start() - line_start + 1
        if m.group("bad"):
            raise ParseError(f"unexpected character {m.group()!r}", line, col)
        kind = "arrow" if m.group("arrow") else ("word" if m.group("word") else "punct")
        tokens.append((kind, m.group().strip(), line, col))
    i = 0

    def expect(value=None, kind=None):
        nonlocal i
        if i >= len(tokens):
            raise ParseError("unexpected end of input", line, 0)
        k, v, ln, co = tokens[i]
        if value is not None and v != value:
            raise ParseError(f"expected {value!r}, got {v!r}", ln, co)
        if kind is not None and k != kind:
            raise ParseError(f"expected {kind}, got {v!r}", ln, co)
        i += 1
        return v, ln, co

    expect(value="lts")
    name, _, _ = expect(kind="word")
    expect(value="{")
    expect(value="states")
    state_names = []
    while i < len(tokens) and tokens[i][1] != ";":
        w, ln, co = expect(kind="word")
        if "(" in w:
            raise ParseError(f"bad state name {w!r}", ln, co)
        state_names.append(w)
    expect(value=";")
    if not state_names:
        raise ParseError("no states declared", 1, 1)
    ids = {n: k for k, n in enumerate(state_names)}
    if len(ids) != len(state_names):
        raise ParseError("duplicate state name", 1, 1)
    expect(value="init")
    initname, ln, co = expect(kind="word")
    if initname not in ids:
        raise ParseError(f"undeclared state {initname!r}", ln, co)
    expect(value=";")
    transitions = []
    while i < len(tokens) and tokens[i][1] != "}":
        src, ln, co = expect(kind="word")
        if src not in ids:
            raise ParseError(f"undeclared state {src!r}", ln, co)
        arrow, aln, aco = expect(kind="arrow")
        inner = arrow[1:-2]
        label = _parse_event_text(inner, aln, aco) if inner else None
        dst, ln2, co2 = expect(kind="word")
        if dst not in ids:
            raise ParseError(f"undeclared state {dst!r}", ln2, co2)
        expect(value=";")
        transitions.append((ids[src], label, ids[dst]))
    expect(value="}")
    return Lts(name, state_names, ids[initname], transitions)


def parse_event(text: str) -> Event:
    """Parse one event literal: an identifier, ``in(<int>)`` or ``out(<int>)``."""
    return _parse_event_text(text.strip(), 1, 1)


def parse_lasso(text: str) -> Lasso:
    """Parse a lasso literal such as ``a b (c d)^w``, ``a^w`` or ``in(1) (out(2))^w``."""
    toks = re.findall(r"in\(\s*-?\d+\s*\)|out\(\s*-?\d+\s*\)|[A-Za-z_][A-Za-z0-9_]*|\(|\)|\^w|\S", text)
    prefix: list = []
    cycle: list = []
    i = 0
    while i < len(toks):
        tok = toks[i]
        if tok == "(":
            i += 1
            while i < len(toks) and toks[i] != ")":
                cycle.append(_parse_event_text(toks[i], 1, 1))
                i += 1
            if i >= len(toks):
                raise ParseError("unterminated lasso cycle", 1, 1)
            i += 1  # ')'
            if i >= len(toks) or toks[i] != "^w":
                raise ParseError("lasso cycle must be followed by ^w", 1, 1)
            i += 1
            break
        if i + 1 < len(toks) and toks[i + 1] == "^w":
            cycle = [_parse_event_text(tok, 1, 1)]
            i += 2
            break
        prefix.append(_parse_event_text(tok, 1, 1))
        i += 1
    if i != len(toks):
        raise ParseError("trailing input after lasso", 1, 1)
    if not cycle:
        raise ParseError("lasso needs a (cycle)^w part", 1, 1)
    return Lasso(tuple(prefix), tuple(cycle))
