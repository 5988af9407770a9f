"""Structural verifier for program graphs."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass, field

from .ir import (
    ALGEBRA, BINARY_KINDS, BLOCK_KINDS, CONST_KINDS, CONTROL_EDGES, EdgeKind,
    Graph, K, NodeKind, RELATION_ATTR_KINDS, SYMCONST_KINDS, TARGET_BINARY_KINDS,
    TARGET_IMM_KINDS, attr_problems,
)

ERROR = "error"
WARNING = "warning"

D, M = EdgeKind.Dataflow, EdgeKind.Memory

# Operand layout per kind: a tuple of edge kinds, or None when the operand
# count is checked elsewhere (Phi, Sync, End, blocks).
_LAYOUT: dict[NodeKind, tuple] = {
    K.Start: (), K.Argument: (), K.Const: (), K.SymConst: (), K.Jmp: (),
    K.TargetConst: (), K.TargetSymConst: (), K.TargetJmp: (),
    K.Cond: (D,), K.TargetCond: (D,),
    K.Return: (M, D),
    K.Load: (M, D), K.TargetLoad: (M, D), K.TargetLoadI: (M,),
    K.Store: (M, D, D), K.TargetStore: (M, D, D), K.TargetStoreI: (M, D),
    K.Not: (D,), K.TargetNot: (D,),
}
for _k in BINARY_KINDS | TARGET_BINARY_KINDS:
    _LAYOUT[_k] = (D, D)
for _k in TARGET_IMM_KINDS:
    _LAYOUT[_k] = (D,)

_BOOLEAN_PRODUCERS = RELATION_ATTR_KINDS


@dataclass
class Diagnostic:
    rule: str
    severity: str
    subjects: list[str] = field(default_factory=list)
    message: str = ""

    def sort_key(self) -> tuple:
        return (int(self.rule[1:]), [(s[0], int(s[1:])) for s in self.subjects], self.severity, self.message)

    def __str__(self) -> str:
        who = ",".join(str(s) for s in self.subjects) or "-"
        return f"{self.rule} {self.severity} {who}: {self.message}"


def _n(*ids: int) -> list[str]:
    return [f"n{i}" for i in ids]


def _e(*ids: int) -> list[str]:
    return [f"e{i}" for i in ids]


def errors(diagnostics: list[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diagnostics if d.severity == ERROR]


def to_json(diagnostics: list[Diagnostic]) -> str:
    return json.dumps([asdict(d) for d in diagnostics], indent=2)


def verify(graph: Graph) -> list[Diagnostic]:
    """Check every structural rule; never modifies the graph."""
    out: list[Diagnostic] = []
    for rule in (_r1_r2_r7, _r3, _r4, _r5_r6, _r8, _r9, _r10):
        rule(graph, out)
    return sorted(out, key=Diagnostic.sort_key)


def _count_rule(g: Graph, out: list, rule: str, kind: NodeKind) -> list[int]:
    found = sorted(g.nodes_of_kind(kind))
    if len(found) != 1:
        out.append(Diagnostic(rule, ERROR, _n(*found), f"expected exactly one {kind.name}, found {len(found)}"))
    return found


def _r1_r2_r7(g: Graph, out: list) -> None:
    _count_rule(g, out, "R1", K.Start)
    _count_rule(g, out, "R2", K.End)
    _count_rule(g, out, "R7", K.StartBlock)
    end_blocks = _count_rule(g, out, "R7", K.EndBlock)
    for eb in end_blocks:
        inside = sorted(n for n in g.contents(eb) if g.nodes[n].kind is K.End)
        if len(inside) != 1:
            out.append(Diagnostic("R7", ERROR, _n(eb, *inside),
                                  f"EndBlock must contain exactly one End, contains {len(inside)}"))


def _r3(g: Graph, out: list) -> None:
    for e in g.edges.values():
        src, dst = g.nodes[e.source].kind, g.nodes[e.target].kind
        if e.kind is D and dst in BLOCK_KINDS and src not in BLOCK_KINDS and e.position != -1:
            out.append(Diagnostic("R3", ERROR, _e(e.id),
                                  f"Dataflow edge to a block has position {e.position}, expected -1"))
        elif e.position == -1 and (e.kind is not D or dst not in BLOCK_KINDS or src in BLOCK_KINDS):
            out.append(Diagnostic("R3", ERROR, _e(e.id),
                                  "position -1 is reserved for Dataflow containment edges to blocks"))


def _r4(g: Graph, out: list) -> None:
    for n in g.nodes.values():
        if n.kind in CONST_KINDS or n.kind in SYMCONST_KINDS:
            blk = g.edge_at(n.id, -1)
            if blk is not None and g.nodes[blk.target].kind is not K.StartBlock:
                out.append(Diagnostic("R4", ERROR, _n(n.id), f"{n.kind.name} is not located in the StartBlock"))


def _r5_r6(g: Graph, out: list) -> None:
    for n in g.nodes.values():
        if n.kind not in BLOCK_KINDS:
            continue
        preds = [e.position for e in g.predecessors(n.id)]
        if preds != list(range(len(preds))):
            out.append(Diagnostic("R6", ERROR, _n(n.id),
                                  f"control-flow predecessor positions {preds} are not dense from 0"))
    for n in g.nodes.values():
        if n.kind is not K.Phi:
            continue
        blk = g.edge_at(n.id, -1)
        if blk is None or g.nodes[blk.target].kind not in BLOCK_KINDS:
            continue
        preds = [e.position for e in g.predecessors(blk.target)]
        ops = [e.position for e in g.operand_edges(n.id)]
        if len(ops) != len(preds):
            out.append(Diagnostic("R5", ERROR, _n(n.id, blk.target),
                                  f"Phi has {len(ops)} operands but its block has {len(preds)} predecessors"))
        elif ops != preds or ops != list(range(len(ops))):
            out.append(Diagnostic("R6", ERROR, _n(n.id, blk.target),
                                  f"Phi operand positions {ops} do not match predecessor positions {preds}"))


def _r8(g: Graph, out: list) -> None:
    for n in g.nodes.values():
        blk = g.edge_at(n.id, -1)
        if n.kind in BLOCK_KINDS:
            if blk is not None:
                out.append(Diagnostic("R8", ERROR, _n(n.id), f"{n.kind.name} must not be contained in a block"))
        elif blk is None:
            out.append(Diagnostic("R8", ERROR, _n(n.id), f"{n.kind.name} has no containment edge"))
        elif g.nodes[blk.target].kind not in BLOCK_KINDS:
            out.append(Diagnostic("R8", ERROR, _n(n.id, blk.target), "containment edge does not point to a block"))


def _r9(g: Graph, out: list) -> None:
    for n in g.nodes.values():
        problems = attr_problems(n.kind, n.attrs())
        if n.kind in BINARY_KINDS:
            assoc, comm = ALGEBRA[n.kind.name]
            if n.associative and not assoc:
                problems.append(f"{n.kind.name} is not associative")
            if n.commutative and not comm:
                problems.append(f"{n.kind.name} is not commutative")
        if problems:
            out.append(Diagnostic("R9", ERROR, _n(n.id), "; ".join(problems)))


def _r10(g: Graph, out: list) -> None:
    for n in g.nodes.values():
        ops = g.operand_edges(n.id)
        if n.kind in BLOCK_KINDS:
            bad = [e for e in ops if e.kind not in CONTROL_EDGES and e.kind is not EdgeKind.Keep]
            if bad:
                out.append(Diagnostic("R10", ERROR, _n(n.id) + _e(*(e.id for e in bad)),
                                      "block operands must be control-flow edges"))
            continue
        if n.kind is K.End:
            if any(e.kind is not EdgeKind.Keep for e in ops):
                out.append(Diagnostic("R10", ERROR, _n(n.id), "End may only have Keep operands"))
            continue
        if n.kind is K.Sync:
            if not ops or any(e.kind is not M for e in ops):
                out.append(Diagnostic("R10", ERROR, _n(n.id), "Sync needs one or more Memory operands"))
            continue
        if n.kind is K.Phi:
            if len({e.kind for e in ops}) > 1 or any(e.kind not in (D, M) for e in ops):
                out.append(Diagnostic("R10", ERROR, _n(n.id), "Phi operands must all be Dataflow or all Memory"))
            continue
        layout = _LAYOUT.get(n.kind)
        if layout is None:
            continue
        got = tuple(e.kind for e in ops)
        positions = [e.position for e in ops]
        if got != layout or positions != list(range(len(ops))):
            want = ", ".join(k.value for k in layout) or "no operands"
            have = ", ".join(f"{e.kind.value}@{e.position}" for e in ops) or "none"
            out.append(Diagnostic("R10", ERROR, _n(n.id), f"{n.kind.name} expects ({want}), has ({have})"))
            continue
        if n.kind in (K.Cond, K.TargetCond):
            producer = g.nodes[ops[0].target]
            if producer.kind in CONST_KINDS:
                if producer.value not in (0, 1):
                    out.append(Diagnostic("R10", ERROR, _n(n.id, producer.id),
                                          f"Cond selector constant {producer.value} is not 0 or 1"))
            elif producer.kind not in _BOOLEAN_PRODUCERS:
                out.append(Diagnostic("R10", WARNING, _n(n.id, producer.id),
                                      f"Cond selector {producer.kind.name} is not known to produce 0 or 1"))
    _r10_successors(g, out)


def _r10_successors(g: Graph, out: list) -> None:
    # each True/False edge must leave a Cond, plain control edges must not
    counts: Counter = Counter()
    for e in g.edges.values():
        if e.kind in CONTROL_EDGES and g.nodes[e.source].kind in BLOCK_KINDS:
            tk = g.nodes[e.target].kind
            is_cond = tk in (K.Cond, K.TargetCond)
            if is_cond != (e.kind is not EdgeKind.Controlflow):
                out.append(Diagnostic("R10", ERROR, _e(e.id),
                                      f"{e.kind.value} edge may not target {tk.name}"))
            elif tk not in (K.Start, K.Jmp, K.TargetJmp, K.Return, K.Cond, K.TargetCond):
                out.append(Diagnostic("R10", ERROR, _e(e.id), f"block predecessor {tk.name} is not a control node"))
            if is_cond:
                counts[(e.target, e.kind)] += 1
    for (cond, kind), c in sorted(counts.items(), key=lambda kv: (kv[0][0], kv[0][1].value)):
        if c > 1:
            out.append(Diagnostic("R10", ERROR, _n(cond), f"Cond has {c} {kind.value} successors"))
