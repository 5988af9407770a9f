"""Random program graphs that are valid by construction.

Programs are assembled from straight-line operations, if/else diamonds with
value and memory Phis, and small counted loops.  Constants are biased towards
values that make conditions and operations foldable, so the optimizer has work
to do.  Every generated graph stays within ``max_nodes`` nodes.
"""

from __future__ import annotations

import random

from firmkit.build import Builder
from firmkit.ir import BINARY_NAMES, EdgeKind, Graph, Relation

T, F = EdgeKind.True_, EdgeKind.False_
INTERESTING = (0, 1, 2, 3, -1, 5, 7, 31, 32, -8, 2**31 - 1, -(2**31), 0x55, 100)
SYMBOLS = ("g", "h", "k")


class _Gen:
    def __init__(self, rng: random.Random, max_nodes: int, n_args: int) -> None:
        self.rng = rng
        self.max_nodes = max_nodes
        self.b = Builder("random")
        self.consts: dict[int, int] = {}
        self.syms: dict[str, int] = {}
        self.avail = [self.b.arg(i) for i in range(n_args)]

    def size(self) -> int:
        return len(self.b.graph.nodes)

    def room(self, n: int) -> bool:
        # two nodes are reserved for the final Return and a possible constant
        return self.size() + n + 2 <= self.max_nodes

    def const(self, value=None) -> int:
        if value is None:
            value = self.rng.choice(INTERESTING) if self.rng.random() < 0.7 else self.rng.randint(-20, 20)
        if value not in self.consts:
            self.consts[value] = self.b.const(value)
        return self.consts[value]

    def sym(self) -> int:
        s = self.rng.choice(SYMBOLS)
        if s not in self.syms:
            self.syms[s] = self.b.symconst(s)
        return self.syms[s]

    def value(self, local: list[int]) -> int:
        pool = self.avail + local
        if not pool or self.rng.random() < 0.35:
            return self.const()
        return self.rng.choice(pool)

    def straight(self, block: int, mem: int, local: list[int], budget: int) -> int:
        """Emit up to ``budget`` operations; returns the new memory state."""
        rng, b = self.rng, self.b
        for _ in range(budget):
            if not self.room(3):
                break
            r = rng.random()
            if r < 0.6:
                name = rng.choice(BINARY_NAMES)
                left, right = self.value(local), self.value(local)
                if name == "Cmp":
                    local.append(b.cmp(rng.choice(list(Relation)), block, left, right))
                else:
                    local.append(b.binop(name, block, left, right))
            elif r < 0.7:
                local.append(b.not_(block, self.value(local)))
            elif r < 0.85:
                mem = b.store(block, mem, self.sym(), self.value(local), volatile=rng.random() < 0.2)
            else:
                ld = b.load(block, mem, self.sym(), volatile=rng.random() < 0.2)
                mem = ld
                local.append(ld)
        return mem

    def selector(self, block: int, local: list[int]) -> int:
        r = self.rng.random()
        if r < 0.35:
            return self.const(self.rng.choice((0, 1)))
        left = self.const() if r < 0.6 else self.value(local)
        right = self.const() if self.rng.random() < 0.5 else self.value(local)
        return self.b.cmp(self.rng.choice(list(Relation)), block, left, right)

    def diamond(self, block: int, mem: int, local: list[int]):
        b, rng = self.b, self.rng
        cond = b.cond(block, self.selector(block, local))
        outer = self.avail
        self.avail = outer + local
        sides = []
        for kind in (T, F):
            side = b.block((cond, kind))
            side_local: list[int] = []
            side_mem = mem
            if rng.random() < 0.7:
                side_mem = self.straight(side, mem, side_local, rng.randint(1, 2))
            sides.append((b.jmp(side), side_mem, side_local))
        self.avail = outer
        join = b.block(sides[0][0], sides[1][0])
        new_local = list(local)
        if self.room(1):
            picks = [self.rng.choice(s[2]) if s[2] and rng.random() < 0.7 else self.value(local) for s in sides]
            new_local.append(b.phi(join, *picks))
        if sides[0][1] != sides[1][1]:
            mem = b.phi(join, sides[0][1], sides[1][1], memory=True)
        elif sides[0][1] != mem:
            mem = sides[0][1]
        return join, mem, new_local

    def loop(self, block: int, mem: int, local: list[int]):
        b, g = self.b, self.b.graph
        entry = b.jmp(block)
        header = b.block(entry)
        init = self.const(0)
        i = b.phi(header, init, init)
        mem_phi = b.phi(header, mem, mem, memory=True)
        bound = self.const(self.rng.randint(0, 4)) if self.rng.random() < 0.6 or not self.avail else self.rng.choice(self.avail)
        cond = b.cond(header, b.cmp(Relation.LESS, header, i, bound))
        body = b.block((cond, T))
        inc = b.binop("Add", body, i, self.const(1))
        body_mem = mem_phi
        if self.rng.random() < 0.5 and self.room(2):
            body_mem = b.store(body, mem_phi, self.sym(), inc)
        back = b.jmp(body)
        b.add_pred(header, back)
        g.set_edge_target(g.edge_at(i, 1).id, inc)
        g.set_edge_target(g.edge_at(mem_phi, 1).id, body_mem)
        exit_block = b.block((cond, F))
        self.avail = self.avail + local
        return exit_block, mem_phi, [i]

    def build(self) -> Graph:
        rng, b = self.rng, self.b
        block = b.block(b.start)
        mem = b.start
        local: list[int] = []
        while self.room(4):
            r = rng.random()
            if r < 0.5:
                mem = self.straight(block, mem, local, rng.randint(1, 3))
            elif r < 0.8 and self.room(8):
                block, mem, local = self.diamond(block, mem, local)
            elif self.room(12):
                block, mem, local = self.loop(block, mem, local)
            elif rng.random() < 0.3:
                break
        b.ret(block, mem, self.value(local))
        return b.graph


def random_program(seed: int, max_nodes: int = 30, n_args: int = 2) -> Graph:
    budget = max_nodes
    while True:
        graph = _Gen(random.Random(seed), budget, n_args).build()
        if len(graph.nodes) <= max_nodes:
            break
        budget -= 2
    graph.name = f"random_{seed}"
    return graph


ARG_VECTORS = ((0, 0), (1, 2), (-3, 5), (7, -1), (2**31 - 1, -(2**31)))
