"""Automatic solving of forall*exists* safety hyperqueries on finite systems.

The product arena pairs joint system states with a derivative-closure
formula node.  The winning region is the greatest fixed point of "every
universal move tuple has an existential reply with a nonempty derivative
that stays inside"; it is computed by worklist deletion and certified
against an independent attractor-based solver.  A winning strategy drives
witness extraction: universal lassos in, existential lassos out.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Optional, Sequence

from .errors import EngineError, InputError, ResourceError
from .lts import Lasso, Lts
from .relspec import (DEFAULT_CLOSURE_CAP, AtomTable, Formula, always, atom,
                      closure, lasso_models_direct, subformula_atoms)

DEFAULT_NODE_CAP = 1_000_000


@dataclass(frozen=True)
class HyperQuery:
    """forall over ``universal`` systems, exists over ``existential`` ones."""

    universal: tuple
    existential: tuple
    formula: Formula
    atoms: AtomTable

    def __post_init__(self):
        if len(self.universal) + len(self.existential) < 1:
            raise InputError("query needs at least one quantified system")
        arity = len(self.universal) + len(self.existential)
        for name in subformula_atoms(self.formula):
            if self.atoms.arity(name) != arity:
                raise InputError(
                    f"atom {name!r} has arity {self.atoms.arity(name)}, query has {arity} systems")


@dataclass(frozen=True)
class GameNode:
    """Joint arena position: universal states, existential states, formula node."""

    ustates: tuple
    estates: tuple
    fid: int


class Arena:
    """Reachable game graph of a query; immutable once built."""

    def __init__(self, query: HyperQuery, graph, nodes, moves, root_id: int):
        self.query = query
        self.graph = graph  # derivative ClosureGraph
        self.nodes = nodes  # tuple[GameNode]
        self.moves = moves  # moves[nid] = tuple[(umove, tuple[(emove, succ_id)])]
        self.root_id = root_id
        self.index = {n: k for k, n in enumerate(nodes)}

    def describe_node(self, nid: int) -> str:
        node = self.nodes[nid]
        systems = self.query.universal + self.query.existential
        states = node.ustates + node.estates
        names = [systems[i].state_name(s) for i, s in enumerate(states)]
        return "(" + ",".join(names + [str(self.graph.nodes[node.fid])]) + ")"

    def __len__(self):
        return len(self.nodes)


def build_arena(query: HyperQuery, max_nodes: int = DEFAULT_NODE_CAP,
                closure_cap: int = DEFAULT_CLOSURE_CAP, roots=None) -> Arena:
    """Explore all nodes reachable from the initial node (or given roots).

    Edges pair every universal observable-move tuple with every
    existential reply whose event tuple keeps the derivative nonempty.
    """
    systems = query.universal + query.existential
    graph = closure(query.formula, [s.alphabet for s in systems], query.atoms, closure_cap)
    m = len(query.universal)
    root_fid = graph.node_id(graph.root)
    if roots is None:
        root_nodes = [GameNode(tuple(s.init for s in query.universal),
                               tuple(s.init for s in query.existential), root_fid)]
    else:
        root_nodes = list(roots)
    nodes: list = []
    index: dict = {}
    moves: list = []
    frontier = []

    def discover(node: GameNode) -> int:
        got = index.get(node)
        if got is None:
            if len(nodes) >= max_nodes:
                raise ResourceError(f"arena node cap {max_nodes} exceeded")
            got = len(nodes)
            index[node] = got
            nodes.append(node)
            moves.append(None)
            frontier.append(got)
        return got

    for r in root_nodes:
        discover(r)
    while frontier:
        nid = frontier.pop(0)
        node = nodes[nid]
        uopts = [query.universal[i].obs_successors(node.ustates[i]) for i in range(m)]
        eopts = [query.existential[j].obs_successors(node.estates[j])
                 for j in range(len(query.existential))]
        node_moves = []
        for umove in product(*uopts):
            replies = []
            for emove in product(*eopts):
                events = tuple(e for e, _ in umove) + tuple(e for e, _ in emove)
                nfid = graph.derive_node(node.fid, events)
                if not graph.nonempty(nfid):
                    continue
                succ = GameNode(tuple(s for _, s in umove), tuple(s for _, s in emove), nfid)
                replies.append((emove, discover(succ)))
            node_moves.append((umove, tuple(replies)))
        moves[nid] = tuple(node_moves)
    return Arena(query, graph, tuple(nodes), tuple(moves), 0)


def winning_region(arena: Arena):
    """Greatest fixed point by worklist deletion.

    Returns (survivor ids, strategy, deletions) where the strategy maps
    (node id, universal move) to the smallest surviving reply.
    """
    n = len(arena.nodes)
    survivors = set(range(n))
    preds = [set() for _ in range(n)]
    for nid in range(n):
        for _, replies in arena.moves[nid]:
            for _, succ in replies:
                preds[succ].add(nid)
    pending = list(range(n))
    queued = [True] * n
    deletions = 0
    while pending:
        nid = pending.pop()
        queued[nid] = False
        if nid not in survivors:
            continue
        dead = any(not any(succ in survivors for _, succ in replies)
                   for _, replies in arena.moves[nid])
        if dead:
            survivors.discard(nid)
            deletions += 1
            for p in preds[nid]:
                if p in survivors and not queued[p]:
                    queued[p] = True
                    pending.append(p)
    strategy = {}
    for nid in survivors:
        for umove, replies in arena.moves[nid]:
            for emove, succ in replies:
                if succ in survivors:
                    strategy[(nid, umove)] = (emove, succ)
                    break
    return frozenset(survivors), strategy, deletions


def oracle_region(arena: Arena) -> frozenset:
    """Independent solver: complement of the attractor of losing nodes."""
    n = len(arena.nodes)
    losing = set()
    changed = True
    while changed:
        changed = False
        for nid in range(n):
            if nid in losing:
                continue
            if any(all(succ in losing for _, succ in replies)
                   for _, replies in arena.moves[nid]):
                losing.add(nid)
                changed = True
    return frozenset(set(range(n)) - losing)


@dataclass
class Verdict:
    """Outcome of a solve: proved with a strategy, or unknown with a frontier.

    Unknown never means refuted: the method is sound but incomplete.
    """

    proved: bool
    arena: Arena
    region: frozenset
    iterations: int
    strategy: Optional[dict] = None
    frontier: tuple = field(default_factory=tuple)

    @property
    def status(self) -> str:
        return "PROVED" if self.proved else "UNKNOWN"


def check_hyper(query: HyperQuery, max_nodes: int = DEFAULT_NODE_CAP,
                closure_cap: int = DEFAULT_CLOSURE_CAP) -> Verdict:
    """Solve the query; PROVED iff the initial node is in the winning region."""
    arena = build_arena(query, max_nodes, closure_cap)
    survivors, strategy, deletions = winning_region(arena)
    if arena.root_id in survivors:
        return Verdict(True, arena, survivors, deletions, strategy=strategy)
    frontier = tuple(sorted(set(range(len(arena.nodes))) - survivors))
    return Verdict(False, arena, survivors, deletions, frontier=frontier)


def check_simulation(l1: Lts, l2: Lts, max_nodes: int = DEFAULT_NODE_CAP,
                     closure_cap: int = DEFAULT_CLOSURE_CAP) -> Verdict:
    """Trace refinement l1 <= l2 as the forall-exists query with event equality."""
    shared = tuple(sorted(set(l1.alphabet) | set(l2.alphabet)))
    payloads = [e.value for e in shared if e.kind != "sym"]
    modulus = max(payloads, default=0) + 1
    atoms = AtomTable(modulus=modulus)
    atoms.declare_text("atom eq(e1, e2) := e1 == e2;")
    left = Lts(l1.name, l1.state_names, l1.init, l1.transitions, shared)
    right = Lts(l2.name, l2.state_names, l2.init, l2.transitions, shared)
    query = HyperQuery((left,), (right,), always(atom("eq")), atoms)
    return check_hyper(query, max_nodes, closure_cap)


class _PairPath:
    """Ultimately periodic path of (lasso phase, state) pairs."""

    def __init__(self, prefix, cycle):
        self.prefix = tuple(prefix)
        self.cycle = tuple(cycle)

    def at(self, k: int):
        if k < len(self.prefix):
            return self.prefix[k]
        return self.cycle[(k - len(self.prefix)) % len(self.cycle)]

    def fold(self, k: int) -> int:
        if k < len(self.prefix):
            return k
        return len(self.prefix) + (k - len(self.prefix)) % len(self.cycle)


def realize_lasso(lts: Lts, lasso: Lasso, start: Optional[int] = None) -> _PairPath:
    """State-annotate a lasso as an observable path of ``lts`` from its init."""
    start = lts.init if start is None else start
    pre, cyc = len(lasso.prefix), len(lasso.cycle)
    total = pre + cyc

    def phase_succ(ph):
        q = ph + 1
        return pre if q >= total else q

    # alive = product nodes admitting an infinite matching path
    reachable = set()
    frontier = [(0, start)]
    succs = {}
    while frontier:
        cur = frontier.pop()
        if cur in reachable:
            continue
        reachable.add(cur)
        ph, s = cur
        letter = lasso.at(ph)
        nxts = [(phase_succ(ph), t) for e, t in lts.obs_successors(s) if e == letter]
        succs[cur] = nxts
        frontier.extend(nxts)
    alive = set(reachable)
    changed = True
    while changed:
        changed = False
        for node in list(alive):
            if not any(t in alive for t in succs[node]):
                alive.discard(node)
                changed = True
    if (0, start) not in alive:
        raise InputError(f"lasso {lasso} is not realizable in {lts.name}")
    walk = [(0, start)]
    seen = {(0, start): 0}
    while True:
        cur = walk[-1]
        nxt = min(t for t in succs[cur] if t in alive)
        if nxt in seen:
            j = seen[nxt]
            return _PairPath(walk[:j], walk[j:])
        seen[nxt] = len(walk)
        walk.append(nxt)


def extract_witness(verdict: Verdict, lassos: Sequence[Lasso]) -> list:
    """Drive the winning strategy along universal lassos; emit existential lassos.

    The returned tuple is self-validated: each output is a trace of its
    system and the combined tuple satisfies the query formula.
    """
    if not verdict.proved or verdict.strategy is None:
        raise InputError("witness extraction requires a PROVED verdict")
    arena = verdict.arena
    query = arena.query
    m, n = len(query.universal), len(query.existential)
    if len(lassos) != m:
        raise InputError(f"expected {m} universal lassos, got {len(lassos)}")
    node = arena.nodes[arena.root_id]
    paths = [realize_lasso(query.universal[i], lassos[i], node.ustates[i])
             for i in range(m)]
    nid = arena.root_id
    emitted = [[] for _ in range(n)]
    seen = {}
    k = 0
    while True:
        key = (nid,) + tuple(p.fold(k) for p in paths)
        if key in seen:
            j = seen[key]
            break
        seen[key] = k
        umove = tuple((lassos[i].at(paths[i].at(k)[0]), paths[i].at(k + 1)[1])
                      for i in range(m))
        try:
            emove, nid = verdict.strategy[(nid, umove)]
        except KeyError:
            raise EngineError(
                f"strategy has no reply at {arena.describe_node(nid)}") from None
        for jdx, (event, _) in enumerate(emove):
            emitted[jdx].append(event)
        k += 1
    witnesses = [Lasso(tuple(ev[:j]), tuple(ev[j:])).normalize() for ev in emitted]
    for jdx, w in enumerate(witnesses):
        realize_lasso(query.existential[jdx], w)  # trace validation
    joint = tuple(lassos) + tuple(witnesses)
    if not lasso_models_direct(joint, query.formula, query.atoms):
        raise EngineError("internal error: extracted witness fails the formula")
    return witnesses


def format_strategy(verdict: Verdict) -> str:
    """Deterministic text dump of the winning strategy."""
    if verdict.strategy is None:
        return ""
    arena = verdict.arena
    query = arena.query
    lines = []
    for (nid, umove), (emove, succ) in sorted(
            verdict.strategy.items(),
            key=lambda kv: (kv[0][0], tuple((e.sort_key(), s) for e, s in kv[0][1]))):
        u = " ".join(f"{e}->{query.universal[i].state_name(s)}"
                     for i, (e, s) in enumerate(umove))
        e = " ".join(f"{ev}->{query.existential[j].state_name(s)}"
                     for j, (ev, s) in enumerate(emove))
        lines.append(f"{arena.describe_node(nid)} | [{u}] => [{e}] | {arena.describe_node(succ)}")
    return "\n".join(lines)
