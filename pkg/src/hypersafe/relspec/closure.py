"""Syntactic derivatives of trace relations and their finite closure graphs.

The derivative of a relation under an event tuple is the relation the
suffixes must satisfy once the tuple has been consumed.  Closing a root
formula under derivatives over a finite alphabet product yields a finite
graph on which nonemptiness is a greatest fixed point: a formula denotes
some infinite word tuple iff an infinite derivative path avoids ``false``.
"""
from __future__ import annotations

from itertools import product

from ..errors import InputError, ResourceError
from .atoms import AtomTable
from .formula import FALSE, TRUE, Formula, canonicalize, conj, disj

DEFAULT_CLOSURE_CAP = 100_000


def derive(f: Formula, events: tuple, atoms: AtomTable) -> Formula:
    """Structural derivative under one event tuple, canonicalized."""
    if f.tag in ("true", "false"):
        return f
    if f.tag == "atom":
        return TRUE if atoms.eval(f.name, tuple(events)) else FALSE
    if f.tag == "and":
        return conj(derive(c, events, atoms) for c in f.children)
    if f.tag == "or":
        return disj(derive(c, events, atoms) for c in f.children)
    if f.tag == "always":
        return conj([derive(f.children[0], events, atoms), f])
    if f.tag == "next":
        return f.children[0]
    # weak-until: discharge now, or hold and carry the obligation
    left, right = f.children
    return disj([derive(right, events, atoms),
                 conj([derive(left, events, atoms), f])])


class ClosureGraph:
    """Derivative closure of one root formula over a fixed alphabet product."""

    def __init__(self, root: Formula, nodes, tuples, edges, nonempty_ids):
        self.root = root
        self.nodes = nodes  # tuple[Formula]
        self.tuples = tuples  # tuple of event tuples, sorted
        self.tuple_index = {t: k for k, t in enumerate(tuples)}
        self.edges = edges  # edges[node_id][tuple_id] -> node_id
        self.node_index = {id(f): k for k, f in enumerate(nodes)}
        self.nonempty_ids = nonempty_ids  # frozenset of node ids

    def node_id(self, f: Formula) -> int:
        got = self.node_index.get(id(f))
        if got is None:
            raise InputError(f"formula {f} not in closure")
        return got

    def derive_node(self, node_id: int, events: tuple) -> int:
        return self.edges[node_id][self.tuple_index[tuple(events)]]

    def nonempty(self, node_id: int) -> bool:
        if not (0 <= node_id < len(self.nodes)):
            raise InputError(f"node id {node_id} not in closure")
        return node_id in self.nonempty_ids

    @property
    def nonempty_set(self):
        return frozenset(self.nodes[k] for k in self.nonempty_ids)

    def __len__(self):
        return len(self.nodes)


def closure(f: Formula, alphabets, atoms: AtomTable,
            cap: int = DEFAULT_CLOSURE_CAP) -> ClosureGraph:
    """Smallest derivative-closed formula set containing ``f``.

    ``alphabets`` is one finite event collection per tuple position; the
    graph has an edge for every event tuple in their product.  Raises
    ResourceError when more than ``cap`` formulas appear.
    """
    if cap < 1:
        raise InputError("closure cap must be >= 1")
    per_position = [tuple(sorted(set(a))) for a in alphabets]
    if any(not a for a in per_position):
        raise InputError("every alphabet must be nonempty")
    tuples = tuple(product(*per_position))
    root = canonicalize(f)
    nodes = [root]
    index = {id(root): 0}
    edges = []
    frontier = [root]
    while frontier:
        current = frontier.pop(0)
        row = []
        for events in tuples:
            nxt_f = derive(current, events, atoms)
            got = index.get(id(nxt_f))
            if got is None:
                if len(nodes) >= cap:
                    raise ResourceError(
                        f"closure cap {cap} exceeded; last formula added: {nxt_f}")
                got = len(nodes)
                index[id(nxt_f)] = got
                nodes.append(nxt_f)
                frontier.append(nxt_f)
            row.append(got)
        edges.append(row)
    # greatest fixed point: a node is nonempty iff some derivative path
    # avoids false forever
    alive = {k for k, node in enumerate(nodes) if node is not FALSE}
    changed = True
    while changed:
        changed = False
        for k in sorted(alive):
            if not any(dst in alive for dst in edges[k]):
                alive.discard(k)
                changed = True
    return ClosureGraph(root, tuple(nodes), tuples, tuple(tuple(r) for r in edges),
                        frozenset(alive))


def nonempty(graph: ClosureGraph, node_id: int) -> bool:
    """Whether the formula at ``node_id`` has a model over the graph's alphabets."""
    return graph.nonempty(node_id)


def formula_included(small: Formula, big: Formula, alphabets, atoms: AtomTable,
                     cap: int = DEFAULT_CLOSURE_CAP) -> bool:
    """Language inclusion ``small <= big`` relative to the given alphabets.

    Runs the paired derivative walk; inclusion fails exactly when some
    reachable pair has a nonempty left side and an empty right side.
    """
    g1 = closure(small, alphabets, atoms, cap)
    g2 = closure(big, alphabets, atoms, cap)
    start = (g1.node_id(g1.root), g2.node_id(g2.root))
    seen = {start}
    frontier = [start]
    while frontier:
        a, b = frontier.pop()
        if g1.nonempty(a) and not g2.nonempty(b):
            return False
        for t in range(len(g1.tuples)):
            nxt_pair = (g1.edges[a][t], g2.edges[b][t])
            if nxt_pair not in seen:
                seen.add(nxt_pair)
                frontier.append(nxt_pair)
    return True


__all__ = ["derive", "closure", "nonempty", "ClosureGraph", "formula_included",
           "DEFAULT_CLOSURE_CAP"]
