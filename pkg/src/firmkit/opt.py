"""Local optimizations: constant folding including control flow, block cleanup
and reassociation, driven by a worklist fixpoint loop."""

from __future__ import annotations

import time
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Optional

from .ir import (
    BINARY_KINDS, BLOCK_KINDS, CONTROL_EDGES, CONTROL_KINDS, INT32_MIN, EdgeKind,
    Graph, GraphError, K, NodeKind, Relation,
)
from .verify import Diagnostic, errors, verify

CONST_FOLD = "const_fold"
COND_FOLD = "cond_fold"
PHI_FOLD = "phi_fold"
REASSOCIATE = "reassociate"
UNREACHABLE_BLOCK = "unreachable_block"
EMPTY_BLOCK = "empty_block"
DEAD_NODE = "dead_node"

RULES = (CONST_FOLD, COND_FOLD, PHI_FOLD, REASSOCIATE, UNREACHABLE_BLOCK, EMPTY_BLOCK, DEAD_NODE)

_KEEP_ALWAYS = (K.Start, K.StartBlock, K.End, K.EndBlock)
_NODE_RULE_KINDS = BINARY_KINDS | {K.Not, K.Cond, K.Phi}


class VerificationError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]) -> None:
        self.diagnostics = diagnostics
        lines = "\n".join(str(d) for d in diagnostics[:10])
        super().__init__(f"graph has {len(diagnostics)} verifier error(s):\n{lines}")


def to_int32(x: int) -> int:
    return ((x + 2**31) & 0xFFFFFFFF) - 2**31


def eval_binop(kind: NodeKind, a: int, b: int) -> Optional[int]:
    """Evaluate a binary operation on 32-bit two's-complement integers.

    Returns None where the operation must not be folded: division by zero,
    INT32_MIN / -1, and negative shift amounts.
    """
    name = kind.name
    if name == "Add":
        return to_int32(a + b)
    if name == "Sub":
        return to_int32(a - b)
    if name == "Mul":
        return to_int32(a * b)
    if name in ("Div", "Mod"):
        if b == 0 or (a == INT32_MIN and b == -1):
            return None
        q = abs(a) // abs(b)
        if (a < 0) != (b < 0):
            q = -q
        return to_int32(q if name == "Div" else a - b * q)
    if name in ("Shl", "Shr", "Shrs"):
        if b < 0:
            return None
        s = b & 31
        if name == "Shl":
            return to_int32(a << s)
        if name == "Shr":
            return to_int32((a & 0xFFFFFFFF) >> s)
        return a >> s
    if name == "And":
        return a & b
    if name == "Or":
        return a | b
    if name == "Eor":
        return a ^ b
    raise ValueError(f"{name} is not an arithmetic binary operation")


_RELATIONS = {
    Relation.FALSE: lambda a, b: False,
    Relation.TRUE: lambda a, b: True,
    Relation.LESS: lambda a, b: a < b,
    Relation.LESS_EQUAL: lambda a, b: a <= b,
    Relation.GREATER: lambda a, b: a > b,
    Relation.GREATER_EQUAL: lambda a, b: a >= b,
    Relation.EQUAL: lambda a, b: a == b,
    Relation.NOT_EQUAL: lambda a, b: a != b,
}


def eval_relation(relation: Relation, a: int, b: int) -> int:
    return int(_RELATIONS[relation](a, b))


class ConstPool:
    """Finds or creates the StartBlock Const for a value."""

    def __init__(self, graph: Graph) -> None:
        self.graph = graph
        self.start_block = graph.find_one(K.StartBlock)
        self._by_value: dict[int, int] = {}
        for n in sorted(graph.contents(self.start_block)):
            node = graph.nodes[n]
            if node.kind is K.Const:
                self._by_value.setdefault(node.value, n)

    def get(self, value: int) -> int:
        g = self.graph
        n = self._by_value.get(value)
        if n is not None and n in g.nodes and g.nodes[n].kind is K.Const and g.nodes[n].value == value:
            return n
        n = g.add_node(K.Const, value=value)
        g.add_edge(n, self.start_block, EdgeKind.Dataflow, -1)
        self._by_value[value] = n
        return n


def _const_value(g: Graph, node_id: int) -> Optional[int]:
    node = g.nodes[node_id]
    return node.value if node.kind is K.Const else None


# -- node rules --------------------------------------------------------------

def fold_constant_op(graph: Graph, node: int, pool: Optional[ConstPool] = None) -> bool:
    """Replace a binary, Not or Cmp over constants by the resulting Const."""
    n = graph.node(node)
    if n.kind not in BINARY_KINDS and n.kind is not K.Not:
        return False
    values = [_const_value(graph, t) for _, t in graph.operands(node)]
    if not values or None in values:
        return False
    if n.kind is K.Not:
        result = to_int32(~values[0])
    elif n.kind is K.Cmp:
        result = eval_relation(n.relation, *values)
    else:
        result = eval_binop(n.kind, *values)
        if result is None:
            return False
    const = (pool or ConstPool(graph)).get(result)
    graph.replace_uses(node, const)
    graph.remove_node(node)
    return True


def remove_block_predecessor(graph: Graph, block: int, position: int) -> None:
    """Drop a block's predecessor edge and the matching operand of its Phis,
    then close the gap in both position sequences."""
    edge = graph.edge_at(block, position)
    if edge is None or position < 0 or edge.kind not in CONTROL_EDGES:
        raise GraphError(f"block {block} has no predecessor at position {position}")
    graph.remove_edge(edge.id)
    phis = [n for n in graph.contents(block) if graph.nodes[n].kind is K.Phi]
    for phi in phis:
        operand = graph.edge_at(phi, position)
        if operand is not None:
            graph.remove_edge(operand.id)
    for n in [block] + phis:
        for e in graph.operand_edges(n):
            if e.position > position:
                graph.set_edge_position(e.id, e.position - 1)


def fold_cond(graph: Graph, cond: int) -> bool:
    """Turn a Cond over a constant into a Jmp to the taken successor."""
    if graph.node(cond).kind is not K.Cond:
        return False
    value = _const_value(graph, graph.operand(cond, 0))
    if value is None:
        return False
    if value not in (0, 1):
        raise GraphError(f"Cond {cond} selects on constant {value}, expected 0 or 1")
    taken_kind = EdgeKind.True_ if value == 1 else EdgeKind.False_
    succ = graph.successor_edges(cond)
    jmp = graph.add_node(K.Jmp)
    graph.add_edge(jmp, graph.block_of(cond), EdgeKind.Dataflow, -1)
    for e in succ:
        if e.kind is taken_kind:
            graph.set_edge_target(e.id, jmp)
            e.kind = EdgeKind.Controlflow
    for e in succ:
        if e.target == cond:
            remove_block_predecessor(graph, e.source, e.position)
    graph.remove_node(cond)
    return True


def fold_phi(graph: Graph, phi: int) -> bool:
    """Relink the users of a single-operand Phi to that operand."""
    if graph.node(phi).kind is not K.Phi:
        return False
    ops = graph.operands(phi)
    if len(ops) != 1 or ops[0][1] == phi:
        return False
    graph.replace_uses(phi, ops[0][1])
    graph.remove_node(phi)
    return True


def _is_unnormalized(graph: Graph, node: int) -> bool:
    n = graph.nodes[node]
    if n.kind not in BINARY_KINDS or not n.commutative:
        return False
    left, right = graph.operand(node, 0), graph.operand(node, 1)
    return (left is not None and right is not None
            and graph.nodes[left].kind is K.Const and graph.nodes[right].kind is not K.Const)


def normalize_commutative(graph: Graph, node: int) -> bool:
    """Move a lone constant operand of a commutative op to position 1."""
    if not _is_unnormalized(graph, node):
        return False
    left, right = graph.edge_at(node, 0), graph.edge_at(node, 1)
    lt, rt = left.target, right.target
    graph.set_edge_target(left.id, rt)
    graph.set_edge_target(right.id, lt)
    return True


def reassociate(graph: Graph, node: int, pool: Optional[ConstPool] = None) -> bool:
    """``Op(Op(y, c1), c2) => Op(y, c1 op c2)`` for associative ``Op``."""
    n = graph.node(node)
    if n.kind not in BINARY_KINDS or not n.associative:
        return False
    if normalize_commutative(graph, node):
        return True
    outer_left, outer_right = graph.edge_at(node, 0), graph.edge_at(node, 1)
    if outer_left is None or outer_right is None:
        return False
    c2 = _const_value(graph, outer_right.target)
    inner = outer_left.target
    m = graph.nodes[inner]
    if c2 is None or m.kind is not n.kind or not m.associative or graph.user_count(inner) != 1:
        return False
    y, c1_node = graph.operand(inner, 0), graph.operand(inner, 1)
    if y is None or c1_node is None:
        return False
    c1 = _const_value(graph, c1_node)
    if c1 is None or _const_value(graph, y) is not None:
        return False
    folded = eval_binop(n.kind, c1, c2)
    if folded is None:
        return False
    const = (pool or ConstPool(graph)).get(folded)
    graph.set_edge_target(outer_left.id, y)
    graph.set_edge_target(outer_right.id, const)
    graph.remove_node(inner)
    return True


# -- block and graph rules -----------------------------------------------------

def executable_blocks(graph: Graph) -> set[int]:
    start_block = graph.find_one(K.StartBlock)
    executable = {start_block}
    stack = [start_block]
    nodes = graph.nodes
    while stack:
        b = stack.pop()
        for n in graph.contents(b):
            if nodes[n].kind not in CONTROL_KINDS:
                continue
            for e in graph.successor_edges(n):
                if e.source not in executable:
                    executable.add(e.source)
                    stack.append(e.source)
    return executable


def _remove_unreachable(graph: Graph) -> tuple[int, set[int]]:
    executable = executable_blocks(graph)
    kept = executable | {graph.find_one(K.EndBlock)}
    dead = sorted(b for b in graph.nodes_of_kind(K.Block) if b not in executable)
    touched: set[int] = set()
    for b in dead:
        for n in graph.contents(b):
            if graph.nodes[n].kind not in CONTROL_KINDS:
                continue
            for e in graph.successor_edges(n):
                if e.source in kept:
                    touched.add(e.source)
                    remove_block_predecessor(graph, e.source, e.position)
    for b in dead:
        graph.remove_nodes(graph.contents(b))
        graph.remove_node(b)
    return len(dead), touched


def remove_unreachable_blocks(graph: Graph) -> int:
    """Remove blocks that no execution from the StartBlock can reach."""
    return _remove_unreachable(graph)[0]


def _has_phi(graph: Graph, block: int) -> bool:
    return any(graph.nodes[n].kind is K.Phi for n in graph.contents(block))


def remove_empty_block(graph: Graph, block: int) -> bool:
    """Bypass a block holding nothing but a Jmp and having one predecessor."""
    if graph.node(block).kind is not K.Block:
        return False
    contents = graph.contents(block)
    if len(contents) != 1 or graph.nodes[contents[0]].kind is not K.Jmp:
        return False
    jmp = contents[0]
    preds = graph.predecessors(block)
    # branch targets of a Cond are not part of a jump cascade
    if (len(preds) != 1 or preds[0].kind is not EdgeKind.Controlflow
            or preds[0].target == jmp or graph.user_count(block) != 1):
        return False
    pred = preds[0]
    target = pred.target
    succ = graph.successor_edges(jmp)
    if graph.user_count(jmp) != len(succ):
        return False
    target_block = graph.block_of(target)
    for e in succ:
        s = e.source
        if not _has_phi(graph, s):
            continue
        for other in graph.predecessors(s):
            if other.id != e.id and graph.block_of(other.target) == target_block:
                return False
    for e in succ:
        graph.set_edge_target(e.id, target)
    graph.remove_node(jmp)
    graph.remove_node(block)
    return True


def remove_dead_nodes(graph: Graph) -> int:
    """Remove every node the End cannot reach; blocks go last."""
    live = graph.live_nodes()
    dead = [n for n, node in graph.nodes.items() if n not in live and node.kind not in _KEEP_ALWAYS]
    dead.sort(key=lambda n: (graph.nodes[n].kind in BLOCK_KINDS, n))
    graph.remove_nodes(dead)
    return len(dead)


def termination_measure(graph: Graph) -> tuple[int, int, int]:
    """(non-Const nodes, edges, unnormalized commutative ops).

    Every rule application strictly decreases this lexicographically.
    """
    non_const = sum(1 for n in graph.nodes.values() if n.kind is not K.Const)
    unnormalized = sum(1 for n in graph.nodes if _is_unnormalized(graph, n))
    return non_const, len(graph.edges), unnormalized


# -- driver ------------------------------------------------------------------

@dataclass
class OptConfig:
    rules: frozenset[str] = frozenset(RULES)
    max_iterations: int = 100
    verify_each_round: bool = False
    trace: bool = False

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        unknown = set(self.rules) - set(RULES)
        if unknown:
            raise ValueError(f"unknown rule(s): {', '.join(sorted(unknown))}")
        self.rules = frozenset(self.rules)


@dataclass
class PassReport:
    applications: dict[str, int]
    nodes_before: int
    nodes_after: int
    rounds: int = 0
    wall_time: float = 0.0
    reached_fixpoint: bool = False
    trace: list[tuple[str, tuple[int, int, int]]] = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(self.applications.values())

    def to_dict(self) -> dict:
        return {
            "phase": "optimize",
            "rule_counts": dict(self.applications),
            "nodes_before": self.nodes_before,
            "nodes_after": self.nodes_after,
            "rounds": self.rounds,
            "reached_fixpoint": self.reached_fixpoint,
            "wall_ms": round(self.wall_time * 1000, 3),
        }

    def to_text(self) -> str:
        lines = [f"optimize: {self.nodes_before} -> {self.nodes_after} nodes in {self.rounds} round(s), "
                 f"{self.wall_time * 1000:.1f} ms, fixpoint={'yes' if self.reached_fixpoint else 'no'}"]
        for rule in RULES:
            if self.applications.get(rule):
                lines.append(f"  {rule:<18} {self.applications[rule]}")
        return "\n".join(lines)


class _Driver:
    def __init__(self, graph: Graph, config: OptConfig) -> None:
        self.g = graph
        self.config = config
        self.pool = ConstPool(graph)
        self.counts: Counter = Counter()
        self.trace: list = []
        self.worklist: deque[int] = deque()
        self.queued: set[int] = set()
        if config.trace:
            self.trace.append(("initial", termination_measure(graph)))

    def applied(self, rule: str, n: int = 1) -> None:
        self.counts[rule] += n
        if self.config.trace:
            self.trace.append((rule, termination_measure(self.g)))

    def push(self, node: int) -> None:
        g = self.g
        if node not in g.nodes:
            return
        if g.nodes[node].kind in BLOCK_KINDS:
            for n in g.contents(node):
                if g.nodes[n].kind is K.Phi:
                    self.push(n)
            return
        if node not in self.queued:
            self.queued.add(node)
            self.worklist.append(node)

    def node_rules(self, node: int) -> Optional[str]:
        g, rules = self.g, self.config.rules
        kind = g.nodes[node].kind
        if CONST_FOLD in rules and (kind in BINARY_KINDS or kind is K.Not):
            if fold_constant_op(g, node, self.pool):
                return CONST_FOLD
        if COND_FOLD in rules and kind is K.Cond:
            try:
                if fold_cond(g, node):
                    return COND_FOLD
            except GraphError:
                pass
        if PHI_FOLD in rules and kind is K.Phi and fold_phi(g, node):
            return PHI_FOLD
        if REASSOCIATE in rules and kind in BINARY_KINDS and reassociate(g, node, self.pool):
            return REASSOCIATE
        return None

    def drain(self) -> int:
        g = self.g
        applied = 0
        while self.worklist:
            node = self.worklist.popleft()
            self.queued.discard(node)
            if node not in g.nodes or g.nodes[node].kind not in _NODE_RULE_KINDS:
                continue
            neighbours = [u for u, _ in g.users(node)] + [t for _, t in g.operands(node)]
            rule = self.node_rules(node)
            if rule is None:
                continue
            applied += 1
            self.applied(rule)
            self.push(node)
            for n in neighbours:
                self.push(n)
        return applied

    def cleanup(self) -> int:
        g, rules = self.g, self.config.rules
        changed = 0
        if UNREACHABLE_BLOCK in rules:
            removed, touched = _remove_unreachable(g)
            if removed:
                changed += removed
                self.applied(UNREACHABLE_BLOCK, removed)
        if EMPTY_BLOCK in rules:
            for b in g.nodes_of_kind(K.Block):
                if b in g.nodes and remove_empty_block(g, b):
                    changed += 1
                    self.applied(EMPTY_BLOCK)
        if DEAD_NODE in rules:
            removed = remove_dead_nodes(g)
            if removed:
                changed += removed
                self.applied(DEAD_NODE, removed)
        return changed

    def check(self) -> None:
        problems = errors(verify(self.g))
        if problems:
            raise VerificationError(problems)


def optimize(graph: Graph, config: Optional[OptConfig] = None) -> PassReport:
    """Apply the enabled rules until nothing changes or the round cap is hit."""
    config = config or OptConfig()
    problems = errors(verify(graph))
    if problems:
        raise VerificationError(problems)
    started = time.perf_counter()
    report = PassReport(applications={}, nodes_before=len(graph), nodes_after=len(graph))
    driver = _Driver(graph, config)
    for rounds in range(1, config.max_iterations + 1):
        for n in sorted(graph.nodes):
            driver.push(n)
        changed = driver.drain() + driver.cleanup()
        if config.verify_each_round:
            driver.check()
        if not changed:
            report.reached_fixpoint = True
            break
    report.rounds = rounds
    report.applications = {r: driver.counts[r] for r in RULES if driver.counts[r]}
    report.trace = driver.trace
    report.nodes_after = len(graph)
    report.wall_time = time.perf_counter() - started
    return report
