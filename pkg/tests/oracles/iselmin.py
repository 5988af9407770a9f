"""Exhaustive minimum for instruction selection.

Every starred operation costs one target operation no matter how it is
covered.  A constant costs one more operation iff at least one of its users
does not absorb it as an immediate.  The search enumerates every legal choice
of absorbed operand per operation and keeps the cheapest.
"""

from __future__ import annotations

import itertools

from firmkit.ir import Graph, K

_BINARIES = {K.Add, K.Sub, K.Mul, K.Div, K.Mod, K.Shl, K.Shr, K.Shrs, K.And, K.Or, K.Eor, K.Cmp}
_STARRED = _BINARIES | {K.Jmp, K.Cond, K.Const, K.SymConst, K.Load, K.Store, K.Not}
_CONSTANTS = {K.Const, K.SymConst}


def fold_options(graph: Graph, op: int) -> list[int | None]:
    """Operand positions that may legally be absorbed (None = absorb nothing)."""
    node = graph.nodes[op]
    ops = dict((e.position, e.target) for e in graph.operand_edges(op))
    kinds = {p: graph.nodes[t].kind for p, t in ops.items()}
    options: list[int | None] = [None]
    if node.kind in _BINARIES:
        if kinds.get(1) is K.Const:
            options.append(1)
        if kinds.get(0) is K.Const and node.commutative:
            options.append(0)
    elif node.kind in (K.Load, K.Store):
        if kinds.get(1) is K.SymConst:
            options.append(1)
    return options


def starred_count(graph: Graph) -> int:
    return sum(1 for n in graph.nodes.values() if n.kind in _STARRED)


def minimum_ops(graph: Graph) -> int:
    ops = [n for n, node in graph.nodes.items() if node.kind in _STARRED and node.kind not in _CONSTANTS]
    constants = [n for n, node in graph.nodes.items() if node.kind in _CONSTANTS]
    choices = [fold_options(graph, n) for n in ops]
    uses = {c: [(e.source, e.position) for e in graph.in_edges(c) if e.position >= 0] for c in constants}
    best = None
    for combo in itertools.product(*choices):
        folded = {(op, pos) for op, pos in zip(ops, combo) if pos is not None}
        kept = sum(1 for c in constants if any(u not in folded for u in uses[c]))
        cost = len(ops) + kept
        if best is None or cost < best:
            best = cost
    return best if best is not None else 0
