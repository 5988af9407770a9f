"""Instruction selection into a RISC-like target representation.

Every selectable IR operation is rewritten in place into its register form
``TargetOp`` or, when a constant operand can be encoded as an immediate, into
``TargetOpI``.  Constants whose users all took the immediate disappear.
"""

from __future__ import annotations

import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .ir import (
    BINARY_KINDS, SELECTABLE_KINDS, TARGET_IMM_OF, TARGET_KINDS, TARGET_OF,
    Graph, K,
)
from .opt import VerificationError
from .verify import errors, verify

_CONSTANTS = (K.Const, K.SymConst)
_IMMEDIATE_CANDIDATES = BINARY_KINDS | {K.Load, K.Store}


@dataclass
class SelectionReport:
    selected: dict[str, int] = field(default_factory=dict)
    immediates_folded: int = 0
    constants_materialized: int = 0
    constants_eliminated: int = 0
    phase_times: dict[str, float] = field(default_factory=dict)
    nodes_before: int = 0
    nodes_after: int = 0
    parallel: bool = True

    @property
    def total_target_ops(self) -> int:
        return sum(self.selected.values())

    @property
    def wall_time(self) -> float:
        return sum(self.phase_times.values())

    def to_dict(self) -> dict:
        return {
            "phase": "isel",
            "rule_counts": dict(self.selected),
            "nodes_before": self.nodes_before,
            "nodes_after": self.nodes_after,
            "immediates_folded": self.immediates_folded,
            "constants_materialized": self.constants_materialized,
            "constants_eliminated": self.constants_eliminated,
            "total_target_ops": self.total_target_ops,
            "phase_ms": {k: round(v * 1000, 3) for k, v in self.phase_times.items()},
            "wall_ms": round(self.wall_time * 1000, 3),
        }

    def to_text(self) -> str:
        lines = [f"isel: {self.nodes_before} -> {self.nodes_after} nodes, {self.total_target_ops} target ops, "
                 f"{self.immediates_folded} immediates, {self.constants_materialized} constants kept, "
                 f"{self.constants_eliminated} eliminated, {self.wall_time * 1000:.1f} ms"]
        for kind, count in sorted(self.selected.items()):
            lines.append(f"  {kind:<10} {count}")
        return "\n".join(lines)


def can_fold_immediate(graph: Graph, op: int, index: int) -> bool:
    n = graph.node(op)
    target = graph.operand(op, index)
    if target is None:
        return False
    operand_kind = graph.nodes[target].kind
    if n.kind in BINARY_KINDS:
        if operand_kind is not K.Const:
            return False
        if index == 1:
            return True
        other = graph.operand(op, 1)
        return (index == 0 and bool(n.commutative) and other is not None
                and graph.nodes[other].kind is not K.Const)
    if n.kind in (K.Load, K.Store):
        return index == 1 and operand_kind is K.SymConst
    return False


def select_immediate(graph: Graph, op: int) -> bool:
    """Fold one constant operand into the operation as an immediate."""
    n = graph.node(op)
    if n.kind not in _IMMEDIATE_CANDIDATES:
        return False
    if can_fold_immediate(graph, op, 1):
        index = 1
    elif can_fold_immediate(graph, op, 0):
        index = 0
    else:
        return False
    edge = graph.edge_at(op, index)
    constant = graph.nodes[edge.target]
    graph.remove_edge(edge.id)
    for e in graph.operand_edges(op):
        if e.position > index:
            graph.set_edge_position(e.id, e.position - 1)
    if n.kind in BINARY_KINDS:
        n.value = constant.value
        n.associative = n.commutative = None
    else:
        n.symbol = constant.symbol
    n.kind = TARGET_IMM_OF[n.kind]
    return True


def select_plain(graph: Graph, op: int) -> bool:
    """Rewrite an operation into its register form, operands unchanged."""
    n = graph.node(op)
    if n.kind not in SELECTABLE_KINDS:
        return False
    n.kind = TARGET_OF[n.kind]
    n.associative = n.commutative = None
    return True


def sweep_dead_constants(graph: Graph) -> int:
    """Drop unused constants and materialize the rest; returns the number dropped."""
    removed = 0
    for c in graph.nodes_of_kind(*_CONSTANTS):
        if graph.user_count(c) == 0:
            graph.remove_node(c)
            removed += 1
        else:
            select_plain(graph, c)
    return removed


def _run(graph: Graph, fn, candidates: list[int], workers: Optional[int]) -> Counter:
    def chunk(nodes: Iterable[int]) -> Counter:
        done: Counter = Counter()
        for n in nodes:
            kind = graph.nodes[n].kind.name
            if fn(graph, n):
                done[kind] += 1
        return done

    if not workers or workers < 2 or len(candidates) < 2:
        return chunk(candidates)
    size = -(-len(candidates) // workers)
    parts = [candidates[i:i + size] for i in range(0, len(candidates), size)]
    total: Counter = Counter()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for done in pool.map(chunk, parts):
            total.update(done)
    return total


def select(graph: Graph, parallel: bool = True, workers: int = 4) -> SelectionReport:
    """Cover every selectable IR operation with target operations.

    Phases 1 (immediate forms) and 2 (register forms) touch only each
    candidate's own node and outgoing edges, so their candidates are split
    across worker threads when ``parallel`` is set.  Phase 3 runs alone.
    """
    problems = errors(verify(graph))
    if problems:
        raise VerificationError(problems)
    report = SelectionReport(nodes_before=len(graph), parallel=parallel)
    nworkers = workers if parallel else None

    t0 = time.perf_counter()
    candidates = [n for n, node in graph.nodes.items() if node.kind in _IMMEDIATE_CANDIDATES]
    immediate = _run(graph, select_immediate, candidates, nworkers)
    t1 = time.perf_counter()
    rest = [n for n, node in graph.nodes.items()
            if node.kind in SELECTABLE_KINDS and node.kind not in _CONSTANTS]
    plain = _run(graph, select_plain, rest, nworkers)
    t2 = time.perf_counter()
    kept = Counter(graph.nodes[c].kind.name for c in graph.nodes_of_kind(*_CONSTANTS)
                   if graph.user_count(c))
    removed = sweep_dead_constants(graph)
    t3 = time.perf_counter()

    report.selected = dict(immediate + plain + kept)
    report.immediates_folded = sum(immediate.values())
    report.constants_materialized = sum(kept.values())
    report.constants_eliminated = removed
    report.phase_times = {"immediate": t1 - t0, "plain": t2 - t1, "constants": t3 - t2}
    report.nodes_after = len(graph)
    return report


def target_op_count(graph: Graph) -> int:
    return sum(1 for n in graph.nodes.values() if n.kind in TARGET_KINDS)


def remaining_ir_ops(graph: Graph) -> list[int]:
    """Selectable IR operations still present (empty after a complete selection)."""
    return [n for n, node in graph.nodes.items() if node.kind in SELECTABLE_KINDS]


__all__ = [
    "SelectionReport", "can_fold_immediate", "remaining_ir_ops", "select", "select_immediate",
    "select_plain", "sweep_dead_constants", "target_op_count",
]
