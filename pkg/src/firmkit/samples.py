"""Sample programs used by the corpus, the benchmarks and the tests."""

from __future__ import annotations

from typing import Optional

from .build import Builder
from .ir import EdgeKind, Graph, Relation

T, F = EdgeKind.True_, EdgeKind.False_


def min_plus_one(a: Optional[int] = None, b: Optional[int] = None) -> Graph:
    """``return (a < b ? a : b) + 1`` over two arguments, or over constants."""
    bld = Builder("min_plus_one" if a is None else "min_plus_one_const")
    x = bld.arg(0) if a is None else bld.const(a)
    y = bld.arg(1) if b is None else bld.const(b)
    one = bld.const(1)
    head = bld.block(bld.start)
    cmp = bld.cmp(Relation.LESS, head, x, y)
    cond = bld.cond(head, cmp)
    then = bld.block((cond, T))
    jt = bld.jmp(then)
    other = bld.block((cond, F))
    je = bld.jmp(other)
    join = bld.block(jt, je)
    phi = bld.phi(join, x, y)
    add = bld.binop("Add", join, phi, one)
    bld.ret(join, bld.start, add)
    return bld.graph


def nested_adds(k: int) -> Graph:
    """Straight line ``((1 + 1) + 1) ... + 1`` with ``k`` additions."""
    bld = Builder(f"nested_adds_{k}")
    body = bld.block(bld.start)
    acc = bld.const(1)
    for i in range(k):
        acc = bld.binop("Add", body, acc, bld.const(1))
    bld.ret(body, bld.start, acc)
    return bld.graph


def reassociation() -> Graph:
    """``((x + 1) + 2) * 3 * 4`` with constants on both sides."""
    bld = Builder("reassociation")
    x = bld.arg(0)
    body = bld.block(bld.start)
    inner = bld.binop("Add", body, x, bld.const(1))
    outer = bld.binop("Add", body, bld.const(2), inner)
    m1 = bld.binop("Mul", body, outer, bld.const(3))
    m2 = bld.binop("Mul", body, m1, bld.const(4))
    bld.ret(body, bld.start, m2)
    return bld.graph


def memory_ops() -> Graph:
    """Global stores and loads through symbolic addresses with immediates."""
    bld = Builder("memory_ops")
    x = bld.arg(0)
    g = bld.symconst("g")
    h = bld.symconst("h")
    body = bld.block(bld.start)
    st = bld.store(body, bld.start, g, x)
    ld = bld.load(body, st, g)
    plus = bld.binop("Add", body, ld, bld.const(42))
    minus = bld.binop("Sub", body, bld.const(5), plus)
    shifted = bld.binop("Shl", body, minus, bld.const(2))
    twice = bld.binop("Mul", body, bld.const(2), shifted)
    st2 = bld.store(body, ld, h, twice, volatile=True)
    ld2 = bld.load(body, st2, h, volatile=True)
    offset = bld.binop("Add", body, g, bld.const(4))
    st3 = bld.store(body, st2, offset, ld2)
    ld3 = bld.load(body, st3, g)
    sync = bld.sync(body, ld2, ld3)
    result = bld.binop("Eor", body, ld2, bld.not_(body, ld3))
    bld.ret(body, sync, result)
    return bld.graph


def counting_loop(n: int = 10) -> Graph:
    """``s = 0; for (i = 0; i < n; i++) s += i * 3; return s``."""
    bld = Builder(f"counting_loop_{n}")
    zero, one, three, limit = bld.const(0), bld.const(1), bld.const(3), bld.const(n)
    head = bld.block(bld.start)
    i = bld.phi(head, zero)
    s = bld.phi(head, zero)
    test = bld.cmp(Relation.LESS, head, i, limit)
    cond = bld.cond(head, test)
    body = bld.block((cond, T))
    s2 = bld.binop("Add", body, s, bld.binop("Mul", body, i, three))
    i2 = bld.binop("Add", body, i, one)
    back = bld.jmp(body)
    bld.add_pred(head, back)
    g = bld.graph
    g.add_edge(i, i2, EdgeKind.Dataflow, 1)
    g.add_edge(s, s2, EdgeKind.Dataflow, 1)
    exit_ = bld.block((cond, F))
    bld.ret(exit_, bld.start, s)
    return g


def endless_loop() -> Graph:
    """``if (x > 0) for (;;) {} return 7``: the loop is only held by a Keep edge."""
    bld = Builder("endless_loop")
    x = bld.arg(0)
    head = bld.block(bld.start)
    cond = bld.cond(head, bld.cmp(Relation.GREATER, head, x, bld.const(0)))
    loop = bld.block((cond, T))
    back = bld.jmp(loop)
    bld.add_pred(loop, back)
    bld.keep(loop)
    out = bld.block((cond, F))
    bld.ret(out, bld.start, bld.const(7))
    return bld.graph


def dead_branch_chain() -> Graph:
    """A folded condition whose dead side is a chain of two blocks."""
    bld = Builder("dead_branch_chain")
    x = bld.arg(0)
    head = bld.block(bld.start)
    cond = bld.cond(head, bld.cmp(Relation.EQUAL, head, bld.const(3), bld.const(4)))
    dead1 = bld.block((cond, T))
    d = bld.binop("Mul", dead1, x, bld.const(9))
    j1 = bld.jmp(dead1)
    dead2 = bld.block(j1)
    j2 = bld.jmp(dead2)
    live = bld.block((cond, F))
    jl = bld.jmp(live)
    join = bld.block(j2, jl)
    phi = bld.phi(join, d, x)
    bld.ret(join, bld.start, phi)
    return bld.graph


def chain_program(segments: int) -> Graph:
    """Long chain of blocks alternating straight-line code and foldable diamonds.

    Each segment adds 22 nodes; the argument keeps the data chain alive.
    """
    bld = Builder(f"chain_{segments}")
    acc = bld.arg(0)
    mem = bld.start
    pred = bld.start
    for k in range(segments):
        plain = bld.block(pred)
        acc = bld.binop("Add", plain, acc, bld.binop("Mul", plain, bld.const(k % 7), bld.const(3)))
        acc = bld.binop("Eor", plain, bld.const(k % 5), acc)
        jp = bld.jmp(plain)
        head = bld.block(jp)
        cond = bld.cond(head, bld.cmp(Relation.LESS, head, bld.const(k % 3), bld.const(1)))
        then = bld.block((cond, T))
        jt = bld.jmp(then)
        other = bld.block((cond, F))
        dec = bld.binop("Sub", other, acc, bld.const(1))
        je = bld.jmp(other)
        join = bld.block(jt, je)
        acc = bld.phi(join, acc, dec)
        pred = bld.jmp(join)
    last = bld.block(pred)
    bld.ret(last, mem, acc)
    return bld.graph


CORPUS = {
    "min_plus_one": lambda: min_plus_one(),
    "min_plus_one_const": lambda: min_plus_one(0, 1),
    "nested_adds": lambda: nested_adds(8),
    "reassociation": reassociation,
    "memory_ops": memory_ops,
    "counting_loop": lambda: counting_loop(10),
    "endless_loop": endless_loop,
    "dead_branch_chain": dead_branch_chain,
    "chain_small": lambda: chain_program(6),
}
