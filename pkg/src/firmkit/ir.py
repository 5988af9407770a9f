"""Graph-based SSA intermediate representation.

Nodes are operations, edges point from a node to what it depends on.  Every
edge carries an integer ``position``: operands start at 0 and the edge to the
containing block has position -1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Optional

INT32_MIN = -(2**31)
INT32_MAX = 2**31 - 1


class GraphError(Exception):
    """Raised on a structural violation of the graph model."""


class Relation(enum.Enum):
    FALSE = "FALSE"
    GREATER = "GREATER"
    EQUAL = "EQUAL"
    GREATER_EQUAL = "GREATER_EQUAL"
    LESS = "LESS"
    NOT_EQUAL = "NOT_EQUAL"
    LESS_EQUAL = "LESS_EQUAL"
    TRUE = "TRUE"


class EdgeKind(enum.Enum):
    Dataflow = "Dataflow"
    Memory = "Memory"
    Controlflow = "Controlflow"
    True_ = "True"
    False_ = "False"
    Keep = "Keep"

    @classmethod
    def from_name(cls, name: str) -> "EdgeKind":
        return cls(name)


CONTROL_EDGES = frozenset({EdgeKind.Controlflow, EdgeKind.True_, EdgeKind.False_})

BINARY_NAMES = ("Add", "Sub", "Mul", "Div", "Mod", "Shl", "Shr", "Shrs", "And", "Or", "Eor", "Cmp")

# (associative, commutative) as defined by the integer semantics of each kind.
ALGEBRA = {
    "Add": (True, True),
    "Sub": (False, False),
    "Mul": (True, True),
    "Div": (False, False),
    "Mod": (False, False),
    "Shl": (False, False),
    "Shr": (False, False),
    "Shrs": (False, False),
    "And": (True, True),
    "Or": (True, True),
    "Eor": (True, True),
    "Cmp": (False, False),
}

_UNARY_SELECTABLE = ("Jmp", "Cond", "Const", "SymConst", "Load", "Store", "Not")


def _kind_names() -> list[str]:
    names = [
        "Block", "StartBlock", "EndBlock", "Start", "End", "Argument", "Phi",
        "Jmp", "Cond", "Return", "Const", "SymConst", "Load", "Store", "Sync", "Not",
    ]
    names += BINARY_NAMES
    names += ["Target" + n for n in _UNARY_SELECTABLE]
    names += ["TargetLoadI", "TargetStoreI"]
    for b in BINARY_NAMES:
        names += ["Target" + b, "Target" + b + "I"]
    return names


NodeKind = enum.Enum("NodeKind", [(n, n) for n in _kind_names()], module=__name__)
NodeKind.__doc__ = "Node kinds of the IR and of the target representation."

K = NodeKind

BLOCK_KINDS = frozenset({K.Block, K.StartBlock, K.EndBlock})
BINARY_KINDS = frozenset(K[n] for n in BINARY_NAMES)
TARGET_BINARY_KINDS = frozenset(K["Target" + n] for n in BINARY_NAMES)
TARGET_IMM_KINDS = frozenset(K["Target" + n + "I"] for n in BINARY_NAMES)
CONTROL_KINDS = frozenset({K.Start, K.Jmp, K.Cond, K.Return, K.TargetJmp, K.TargetCond})
MEMORY_OP_KINDS = frozenset({K.Load, K.Store, K.TargetLoad, K.TargetLoadI, K.TargetStore, K.TargetStoreI})
CONST_KINDS = frozenset({K.Const, K.TargetConst})
SYMCONST_KINDS = frozenset({K.SymConst, K.TargetSymConst})

# IR kind -> register form; the kinds that instruction selection must cover.
TARGET_OF = {K[n]: K["Target" + n] for n in _UNARY_SELECTABLE + BINARY_NAMES}
# IR kind -> immediate form.
TARGET_IMM_OF = {K[n]: K["Target" + n + "I"] for n in BINARY_NAMES}
TARGET_IMM_OF[K.Load] = K.TargetLoadI
TARGET_IMM_OF[K.Store] = K.TargetStoreI
SELECTABLE_KINDS = frozenset(TARGET_OF)
TARGET_KINDS = frozenset(TARGET_OF.values()) | frozenset(TARGET_IMM_OF.values())

VALUE_ATTR_KINDS = CONST_KINDS | TARGET_IMM_KINDS
SYMBOL_ATTR_KINDS = SYMCONST_KINDS | {K.TargetLoadI, K.TargetStoreI}
RELATION_ATTR_KINDS = frozenset({K.Cmp, K.TargetCmp, K.TargetCmpI})
VOLATILE_ATTR_KINDS = MEMORY_OP_KINDS


def kind_class(kind: NodeKind) -> str:
    """Return one of ``block``, ``control``, ``memory`` or ``value``."""
    if kind in BLOCK_KINDS:
        return "block"
    if kind in (K.Jmp, K.Cond, K.Return, K.TargetJmp, K.TargetCond):
        return "control"
    if kind in MEMORY_OP_KINDS:
        return "memory"
    return "value"


ATTR_NAMES = ("value", "symbol", "relation", "volatile", "associative", "commutative", "arg_position")


def allowed_attrs(kind: NodeKind) -> frozenset[str]:
    allowed = set()
    if kind in VALUE_ATTR_KINDS:
        allowed.add("value")
    if kind in SYMBOL_ATTR_KINDS:
        allowed.add("symbol")
    if kind in RELATION_ATTR_KINDS:
        allowed.add("relation")
    if kind in VOLATILE_ATTR_KINDS:
        allowed.add("volatile")
    if kind in BINARY_KINDS:
        allowed |= {"associative", "commutative"}
    if kind is K.Argument:
        allowed.add("arg_position")
    return frozenset(allowed)


def attr_problems(kind: NodeKind, attrs: dict) -> list[str]:
    """Describe every way ``attrs`` violates the attribute rules for ``kind``."""
    problems = []
    allowed = allowed_attrs(kind)
    present = {k for k, v in attrs.items() if v is not None}
    for name in sorted(present - allowed):
        problems.append(f"attribute {name!r} not allowed for kind {kind.name}")
    for name in sorted(allowed - present):
        problems.append(f"attribute {name!r} required for kind {kind.name}")
    value = attrs.get("value")
    if value is not None and (isinstance(value, bool) or not isinstance(value, int)
                              or not INT32_MIN <= value <= INT32_MAX):
        problems.append(f"value {value!r} is not a 32-bit signed integer")
    symbol = attrs.get("symbol")
    if symbol is not None and not isinstance(symbol, str):
        problems.append(f"symbol {symbol!r} is not a string")
    relation = attrs.get("relation")
    if relation is not None and not isinstance(relation, Relation):
        problems.append(f"relation {relation!r} is not a Relation")
    for flag in ("volatile", "associative", "commutative"):
        v = attrs.get(flag)
        if v is not None and not isinstance(v, bool):
            problems.append(f"{flag} {v!r} is not a boolean")
    pos = attrs.get("arg_position")
    if pos is not None and (isinstance(pos, bool) or not isinstance(pos, int) or pos < 0):
        problems.append(f"argument position {pos!r} is not a non-negative integer")
    return problems


@dataclass(eq=False, slots=True)
class Node:
    id: int
    kind: NodeKind
    value: Optional[int] = None
    symbol: Optional[str] = None
    relation: Optional[Relation] = None
    volatile: Optional[bool] = None
    associative: Optional[bool] = None
    commutative: Optional[bool] = None
    arg_position: Optional[int] = None

    def attrs(self) -> dict:
        return {name: getattr(self, name) for name in ATTR_NAMES if getattr(self, name) is not None}

    def __repr__(self) -> str:
        extra = "".join(f" {k}={v.name if isinstance(v, Relation) else v!r}" for k, v in self.attrs().items())
        return f"<{self.kind.name} #{self.id}{extra}>"


@dataclass(eq=False, slots=True)
class Edge:
    id: int
    source: int
    target: int
    kind: EdgeKind
    position: int

    @property
    def is_containment(self) -> bool:
        return self.position == -1

    def __repr__(self) -> str:
        return f"<{self.kind.value} #{self.id} {self.source}->{self.target} @{self.position}>"


class Graph:
    """Mutable directed multigraph with ordered outgoing edges.

    Ids are never reused within one graph.  Mutation requires exclusive
    access; read-only queries may run concurrently.
    """

    def __init__(self, name: str = "graph") -> None:
        self.name = name
        self.nodes: dict[int, Node] = {}
        self.edges: dict[int, Edge] = {}
        self._out: dict[int, dict[int, int]] = {}
        # incoming edge ids per node, used as an ordered set
        self._in: dict[int, dict[int, None]] = {}
        self._next_node = 1
        self._next_edge = 1

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node_id: int) -> bool:
        return node_id in self.nodes

    def __repr__(self) -> str:
        return f"<Graph {self.name!r} nodes={len(self.nodes)} edges={len(self.edges)}>"

    # -- construction ------------------------------------------------------

    def add_node(self, kind: NodeKind, **attrs) -> int:
        """Create an edge-less node of ``kind``.

        Missing ``associative``/``commutative`` flags of binary kinds and the
        ``volatile`` flag of memory operations are filled in with their
        natural defaults; every other attribute must be given explicitly.
        """
        if kind in BINARY_KINDS:
            assoc, comm = ALGEBRA[kind.name]
            attrs.setdefault("associative", assoc)
            attrs.setdefault("commutative", comm)
        if kind in VOLATILE_ATTR_KINDS:
            attrs.setdefault("volatile", False)
        unknown = set(attrs) - set(ATTR_NAMES)
        if unknown:
            raise GraphError(f"unknown attribute(s) {sorted(unknown)} for kind {kind.name}")
        problems = attr_problems(kind, attrs)
        if problems:
            raise GraphError("; ".join(problems))
        nid = self._next_node
        self._next_node += 1
        self.nodes[nid] = Node(nid, kind, **attrs)
        self._out[nid] = {}
        self._in[nid] = {}
        return nid

    def add_edge(self, source: int, target: int, kind: EdgeKind, position: int) -> int:
        if source not in self.nodes:
            raise GraphError(f"unknown source node {source}")
        if target not in self.nodes:
            raise GraphError(f"unknown target node {target}")
        if position < -1:
            raise GraphError(f"invalid position {position}")
        out = self._out[source]
        if position in out:
            if position == -1:
                raise GraphError(f"node {source} already has a containment edge")
            raise GraphError(f"duplicate operand position {position} on node {source}")
        eid = self._next_edge
        self._next_edge += 1
        self.edges[eid] = Edge(eid, source, target, kind, position)
        out[position] = eid
        self._in[target][eid] = None
        return eid

    # -- queries -----------------------------------------------------------

    def node(self, node_id: int) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise GraphError(f"unknown node {node_id}") from None

    def kind(self, node_id: int) -> NodeKind:
        return self.node(node_id).kind

    def out_edges(self, node_id: int) -> list[Edge]:
        """All outgoing edges, containment first, then ascending position."""
        self.node(node_id)
        out = self._out[node_id]
        return [self.edges[out[p]] for p in sorted(out)]

    def operand_edges(self, node_id: int) -> list[Edge]:
        self.node(node_id)
        out = self._out[node_id]
        return [self.edges[out[p]] for p in sorted(out) if p >= 0]

    def operands(self, node_id: int) -> list[tuple[int, int]]:
        """Ordered ``(edge id, target node id)`` pairs, containment excluded."""
        return [(e.id, e.target) for e in self.operand_edges(node_id)]

    def operand(self, node_id: int, position: int) -> Optional[int]:
        eid = self._out[node_id].get(position)
        return None if eid is None else self.edges[eid].target

    def edge_at(self, node_id: int, position: int) -> Optional[Edge]:
        eid = self._out[node_id].get(position)
        return None if eid is None else self.edges[eid]

    def block_of(self, node_id: int) -> int:
        node = self.node(node_id)
        if node.kind in BLOCK_KINDS:
            raise GraphError(f"{node!r} is a block and has no containing block")
        eid = self._out[node_id].get(-1)
        if eid is None:
            raise GraphError(f"{node!r} has no containment edge")
        return self.edges[eid].target

    def in_edges(self, node_id: int) -> list[Edge]:
        self.node(node_id)
        return [self.edges[e] for e in self._in[node_id]]

    def users(self, node_id: int) -> list[tuple[int, int]]:
        """``(user node id, edge id)`` for every incoming edge."""
        return [(e.source, e.id) for e in self.in_edges(node_id)]

    def user_count(self, node_id: int) -> int:
        return len(self._in[node_id])

    def contents(self, block_id: int) -> list[int]:
        """Nodes contained in ``block_id`` (sources of its containment edges)."""
        return [e.source for e in self.in_edges(block_id) if e.position == -1]

    def predecessors(self, block_id: int) -> list[Edge]:
        """Control-flow predecessor edges of a block, ascending by position."""
        return [e for e in self.operand_edges(block_id) if e.kind in CONTROL_EDGES]

    def successor_edges(self, control_id: int) -> list[Edge]:
        """Block predecessor edges pointing at a control node."""
        return [e for e in self.in_edges(control_id)
                if e.kind in CONTROL_EDGES and e.position >= 0
                and self.nodes[e.source].kind in BLOCK_KINDS]

    def nodes_of_kind(self, *kinds: NodeKind) -> list[int]:
        wanted = set(kinds)
        return [n.id for n in self.nodes.values() if n.kind in wanted]

    def find_one(self, kind: NodeKind) -> int:
        found = self.nodes_of_kind(kind)
        if len(found) != 1:
            raise GraphError(f"expected exactly one {kind.name}, found {len(found)}")
        return found[0]

    def live_nodes(self) -> set[int]:
        """Nodes reachable from End and EndBlock along outgoing edges of any kind."""
        seeds = [self.find_one(K.End), self.find_one(K.EndBlock)]
        live = set(seeds)
        stack = list(seeds)
        edges, out = self.edges, self._out
        while stack:
            n = stack.pop()
            for eid in out[n].values():
                t = edges[eid].target
                if t not in live:
                    live.add(t)
                    stack.append(t)
        return live

    # -- mutation ----------------------------------------------------------

    def remove_edge(self, edge_id: int) -> None:
        e = self.edges.pop(edge_id)
        del self._out[e.source][e.position]
        del self._in[e.target][edge_id]

    def set_edge_target(self, edge_id: int, target: int) -> None:
        if target not in self.nodes:
            raise GraphError(f"unknown target node {target}")
        e = self.edges[edge_id]
        del self._in[e.target][edge_id]
        e.target = target
        self._in[target][edge_id] = None

    def set_edge_position(self, edge_id: int, position: int) -> None:
        e = self.edges[edge_id]
        if position == e.position:
            return
        out = self._out[e.source]
        if position in out:
            raise GraphError(f"duplicate operand position {position} on node {e.source}")
        del out[e.position]
        e.position = position
        out[position] = edge_id

    def replace_uses(self, old: int, new: int) -> int:
        """Redirect every edge targeting ``old`` to ``new``; return the count."""
        self.node(old)
        self.node(new)
        if old == new:
            return 0
        incoming = list(self._in[old])
        for eid in incoming:
            self.set_edge_target(eid, new)
        return len(incoming)

    def remove_node(self, node_id: int) -> int:
        """Remove a node and all incident edges; return the number of edges removed."""
        self.node(node_id)
        incident = list(self._out[node_id].values()) + [
            e for e in self._in[node_id] if self.edges[e].source != node_id]
        for eid in incident:
            self.remove_edge(eid)
        del self.nodes[node_id]
        del self._out[node_id]
        del self._in[node_id]
        return len(incident)

    def remove_nodes(self, node_ids: Iterable[int]) -> int:
        return sum(self.remove_node(n) for n in node_ids)

    # -- misc --------------------------------------------------------------

    def copy(self) -> "Graph":
        """Deep copy preserving ids and the id counters."""
        g = Graph(self.name)
        for n in self.nodes.values():
            g.nodes[n.id] = Node(n.id, n.kind, **n.attrs())
            g._out[n.id] = dict(self._out[n.id])
            g._in[n.id] = dict(self._in[n.id])
        for e in self.edges.values():
            g.edges[e.id] = Edge(e.id, e.source, e.target, e.kind, e.position)
        g._next_node = self._next_node
        g._next_edge = self._next_edge
        return g

    def stats(self) -> dict[str, int]:
        return {"nodes": len(self.nodes), "edges": len(self.edges)}
