import pytest
from hypothesis import given, strategies as st

from firmkit.build import Builder
from firmkit.ir import (
    BINARY_KINDS, BLOCK_KINDS, SELECTABLE_KINDS, TARGET_IMM_OF, TARGET_OF, EdgeKind, Graph,
    GraphError, K, NodeKind, Relation, kind_class,
)
from firmkit.samples import endless_loop

from oracles.randprog import random_program

STARRED = {"Jmp", "Cond", "Const", "SymConst", "Load", "Store", "Not", "Add", "Sub", "Mul", "Div", "Mod",
           "Shl", "Shr", "Shrs", "And", "Or", "Eor", "Cmp"}


def test_relation_and_edge_kind_members():
    assert [r.name for r in Relation] == [
        "FALSE", "GREATER", "EQUAL", "GREATER_EQUAL", "LESS", "NOT_EQUAL", "LESS_EQUAL", "TRUE"]
    assert [k.value for k in EdgeKind] == ["Dataflow", "Memory", "Controlflow", "True", "False", "Keep"]


def test_only_starred_kinds_have_target_forms():
    assert {k.name for k in SELECTABLE_KINDS} == STARRED
    for kind in NodeKind:
        if kind.name.startswith("Target"):
            continue
        assert (kind in TARGET_OF) == (kind.name in STARRED)
    assert set(TARGET_IMM_OF) == set(BINARY_KINDS) | {K.Load, K.Store}
    assert K.TargetCmpI in TARGET_IMM_OF.values()


def test_every_kind_has_one_class():
    classes = {kind_class(k) for k in NodeKind}
    assert classes == {"block", "control", "value", "memory"}
    assert kind_class(K.TargetLoadI) == "memory"
    assert kind_class(K.Return) == "control"
    assert kind_class(K.EndBlock) == "block"


def test_add_node_examples():
    g = Graph()
    c = g.add_node(K.Const, value=3)
    assert g.node(c).value == 3
    cmp = g.add_node(K.Cmp, relation=Relation.LESS, associative=False, commutative=False)
    assert cmp != c
    with pytest.raises(GraphError, match="not allowed"):
        g.add_node(K.Jmp, value=5)


@pytest.mark.parametrize("kind, attrs", [
    (K.Const, {}),
    (K.Const, {"value": 2**31}),
    (K.Const, {"value": True}),
    (K.SymConst, {"symbol": 3}),
    (K.Cmp, {"associative": False, "commutative": False}),
    (K.Argument, {"arg_position": -1}),
    (K.Load, {"volatile": 1}),
    (K.Add, {"relation": Relation.LESS}),
])
def test_add_node_rejects_bad_attributes(kind, attrs):
    with pytest.raises(GraphError):
        Graph().add_node(kind, **attrs)


def test_add_node_binary_defaults_follow_algebra():
    g = Graph()
    add = g.node(g.add_node(K.Add))
    sub = g.node(g.add_node(K.Sub))
    assert (add.associative, add.commutative) == (True, True)
    assert (sub.associative, sub.commutative) == (False, False)


def test_add_edge_examples():
    g = Graph()
    block = g.add_node(K.Block)
    add = g.add_node(K.Add)
    x, c = g.add_node(K.Argument, arg_position=0), g.add_node(K.Const, value=1)
    g.add_edge(add, c, EdgeKind.Dataflow, 1)
    g.add_edge(add, x, EdgeKind.Dataflow, 0)
    assert [t for _, t in g.operands(add)] == [x, c]
    assert g.operands(add)[1][1] == c
    g.add_edge(add, block, EdgeKind.Dataflow, -1)
    assert g.block_of(add) == block
    with pytest.raises(GraphError, match="duplicate operand position"):
        g.add_edge(add, x, EdgeKind.Dataflow, 0)
    with pytest.raises(GraphError, match="containment"):
        g.add_edge(add, g.add_node(K.Block), EdgeKind.Dataflow, -1)
    with pytest.raises(GraphError):
        g.add_edge(add, 999, EdgeKind.Dataflow, 2)


def test_operands_examples(fig1):
    g = fig1
    ret = g.find_one(K.Return)
    (e0, mem), (e1, value) = g.operands(ret)
    assert g.kind(mem) is K.Start and g.edges[e0].kind is EdgeKind.Memory
    assert g.kind(value) is K.Add
    const = g.nodes_of_kind(K.Const)[0]
    assert g.operands(const) == []
    b = Builder()
    blk = b.block(b.start)
    st_ = b.store(blk, b.start, b.symconst("g"), b.const(1))
    assert [g2 for _, g2 in b.graph.operands(st_)] == [b.start, b.graph.nodes_of_kind(K.SymConst)[0],
                                                        b.graph.nodes_of_kind(K.Const)[0]]
    with pytest.raises(GraphError):
        g.operands(12345)


def test_block_of_examples(fig1):
    g = fig1
    const = g.nodes_of_kind(K.Const)[0]
    assert g.block_of(const) == g.find_one(K.StartBlock)
    phi = g.find_one(K.Phi)
    assert g.kind(g.block_of(phi)) is K.Block
    loose = g.add_node(K.Const, value=9)
    with pytest.raises(GraphError):
        g.block_of(loose)


def test_users_examples(fig1):
    g = Graph()
    c = g.add_node(K.Const, value=1)
    a1, a2 = g.add_node(K.Add), g.add_node(K.Add)
    g.add_edge(a1, c, EdgeKind.Dataflow, 0)
    g.add_edge(a2, c, EdgeKind.Dataflow, 1)
    assert sorted(u for u, _ in g.users(c)) == [a1, a2]
    assert g.users(g.add_node(K.Not)) == []
    start = fig1.find_one(K.Start)
    user_kinds = {fig1.kind(u) for u, _ in fig1.users(start)}
    assert K.Return in user_kinds


def test_replace_uses_examples(fig1):
    g = fig1
    phi = g.find_one(K.Phi)
    const = g.add_node(K.Const, value=1)
    assert g.replace_uses(phi, const) == 1
    g.remove_node(phi)
    add = g.find_one(K.Add)
    assert g.operand(add, 0) == const
    assert g.replace_uses(const, const) == 0
    lonely = g.add_node(K.Const, value=4)
    assert g.replace_uses(lonely, const) == 0


def test_remove_node_examples(fig1):
    g = fig1
    cmp = g.find_one(K.Cmp)
    c = g.add_node(K.Const, value=1)
    g.replace_uses(cmp, c)
    assert g.remove_node(cmp) == 3
    assert g.remove_node(g.add_node(K.Const, value=7)) == 0
    block = g.block_of(g.find_one(K.Phi))
    g.remove_node(block)
    assert all(e.target in g.nodes and e.source in g.nodes for e in g.edges.values())


def test_live_nodes_examples(fig1):
    assert fig1.live_nodes() == set(fig1.nodes)
    dead = fig1.add_node(K.Const, value=3)
    fig1.add_edge(dead, fig1.find_one(K.StartBlock), EdgeKind.Dataflow, -1)
    assert dead not in fig1.live_nodes()
    loop = endless_loop()
    assert loop.live_nodes() == set(loop.nodes)
    broken = Graph()
    with pytest.raises(GraphError):
        broken.live_nodes()


def test_ids_are_never_reused():
    g = Graph()
    a = g.add_node(K.Block)
    g.remove_node(a)
    assert g.add_node(K.Block) != a


def test_copy_is_independent(fig1):
    h = fig1.copy()
    h.remove_node(h.find_one(K.Phi))
    assert fig1.find_one(K.Phi) in fig1.nodes
    assert len(h) < len(fig1)


def _dangling(g: Graph) -> bool:
    return any(e.source not in g.nodes or e.target not in g.nodes for e in g.edges.values())


seeds = st.integers(0, 10_000)


@given(seeds)
def test_operand_positions_strictly_ascend(seed):
    g = random_program(seed)
    for n in g.nodes:
        positions = [e.position for e in g.operand_edges(n)]
        assert positions == sorted(set(positions))
        assert all(p >= 0 for p in positions)


@given(seeds, st.data())
def test_replace_uses_preserves_user_shape(seed, data):
    g = random_program(seed)
    candidates = sorted(n for n in g.nodes if g.users(n) and g.kind(n) not in BLOCK_KINDS
                        and all(t != n for _, t in g.operands(n)))
    old = data.draw(st.sampled_from(candidates))
    new = g.add_node(K.Const, value=0)
    before = sorted((g.edges[e].source, g.edges[e].kind, g.edges[e].position) for _, e in g.users(old))
    g.replace_uses(old, new)
    g.remove_node(old)
    after = sorted((g.edges[e].source, g.edges[e].kind, g.edges[e].position) for _, e in g.users(new))
    assert before == after
    assert not _dangling(g)


@given(seeds, st.data())
def test_live_nodes_monotone_under_edge_addition(seed, data):
    g = random_program(seed)
    g.add_node(K.Const, value=5)
    before = g.live_nodes()
    nodes = sorted(g.nodes)
    src = data.draw(st.sampled_from(nodes))
    tgt = data.draw(st.sampled_from(nodes))
    g.add_edge(src, tgt, EdgeKind.Keep, 1000 + len(g.edges))
    assert before <= g.live_nodes()


@given(seeds, st.lists(st.integers(0, 10_000), max_size=15))
def test_mutations_never_leave_dangling_edges(seed, picks):
    g = random_program(seed)
    for i, pick in enumerate(picks):
        nodes = sorted(g.nodes)
        if not nodes:
            break
        n = nodes[pick % len(nodes)]
        if i % 3 == 0:
            g.remove_node(n)
        elif i % 3 == 1:
            other = nodes[(pick // 7) % len(nodes)]
            if other != n:
                g.replace_uses(n, other)
        else:
            edges = sorted(g.edges)
            if edges:
                g.remove_edge(edges[pick % len(edges)])
        assert not _dangling(g)
        for n2 in g.nodes:
            assert all(e.id in g.edges for e in g.out_edges(n2))
            assert all(e.id in g.edges for e in g.in_edges(n2))
