"""Convenience constructor for well-formed program graphs."""

from __future__ import annotations

from typing import Union

from .ir import EdgeKind, Graph, K, NodeKind, Relation

Operand = Union[int, tuple[int, EdgeKind]]


class Builder:
    """Builds a graph with the fixed StartBlock/Start and EndBlock/End skeleton.

    Operands may be given as bare node ids (Dataflow edges) or as
    ``(node id, EdgeKind)`` pairs.  Memory operands of Load, Store, Return and
    Sync default to Memory edges.
    """

    def __init__(self, name: str = "graph") -> None:
        self.graph = Graph(name)
        g = self.graph
        self.start_block = g.add_node(K.StartBlock)
        self.end_block = g.add_node(K.EndBlock)
        self.start = self.place(K.Start, self.start_block)
        self.end = self.place(K.End, self.end_block)
        self._keeps = 0

    def place(self, kind: NodeKind, block: int, *operands: Operand, **attrs) -> int:
        g = self.graph
        n = g.add_node(kind, **attrs)
        g.add_edge(n, block, EdgeKind.Dataflow, -1)
        for pos, op in enumerate(operands):
            target, ekind = op if isinstance(op, tuple) else (op, EdgeKind.Dataflow)
            g.add_edge(n, target, ekind, pos)
        return n

    def block(self, *preds: Operand) -> int:
        """A new Block whose predecessors are the given control nodes."""
        b = self.graph.add_node(K.Block)
        for pred in preds:
            self.add_pred(b, pred)
        return b

    def add_pred(self, block: int, pred: Operand) -> int:
        target, ekind = pred if isinstance(pred, tuple) else (pred, EdgeKind.Controlflow)
        position = len(self.graph.predecessors(block))
        return self.graph.add_edge(block, target, ekind, position)

    def const(self, value: int) -> int:
        return self.place(K.Const, self.start_block, value=value)

    def symconst(self, symbol: str) -> int:
        return self.place(K.SymConst, self.start_block, symbol=symbol)

    def arg(self, position: int) -> int:
        return self.place(K.Argument, self.start_block, arg_position=position)

    def binop(self, kind: Union[NodeKind, str], block: int, left: int, right: int, **attrs) -> int:
        if isinstance(kind, str):
            kind = K[kind]
        return self.place(kind, block, left, right, **attrs)

    def cmp(self, relation: Relation, block: int, left: int, right: int) -> int:
        return self.place(K.Cmp, block, left, right, relation=relation)

    def not_(self, block: int, value: int) -> int:
        return self.place(K.Not, block, value)

    def phi(self, block: int, *values: int, memory: bool = False) -> int:
        ekind = EdgeKind.Memory if memory else EdgeKind.Dataflow
        return self.place(K.Phi, block, *((v, ekind) for v in values))

    def jmp(self, block: int) -> int:
        return self.place(K.Jmp, block)

    def cond(self, block: int, selector: int) -> int:
        return self.place(K.Cond, block, selector)

    def load(self, block: int, mem: int, addr: int, volatile: bool = False) -> int:
        return self.place(K.Load, block, (mem, EdgeKind.Memory), addr, volatile=volatile)

    def store(self, block: int, mem: int, addr: int, value: int, volatile: bool = False) -> int:
        return self.place(K.Store, block, (mem, EdgeKind.Memory), addr, value, volatile=volatile)

    def sync(self, block: int, *mems: int) -> int:
        return self.place(K.Sync, block, *((m, EdgeKind.Memory) for m in mems))

    def ret(self, block: int, mem: int, value: int) -> int:
        """A Return in ``block``; it becomes a predecessor of the EndBlock."""
        r = self.place(K.Return, block, (mem, EdgeKind.Memory), value)
        self.add_pred(self.end_block, r)
        return r

    def keep(self, node: int) -> int:
        e = self.graph.add_edge(self.end, node, EdgeKind.Keep, self._keeps)
        self._keeps += 1
        return e
