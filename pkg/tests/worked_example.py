"""Hand-built snapshots of the constant minimum-plus-one program after each
folding step, and the sequence of individual rule invocations that produces
them.  The arguments are replaced by Const 0 and Const 1 so that ``0 < 1``."""

from firmkit.build import Builder
from firmkit.ir import EdgeKind, K
from firmkit.opt import fold_cond, fold_constant_op, fold_phi, remove_dead_nodes, remove_empty_block, \
    remove_unreachable_blocks

T, F = EdgeKind.True_, EdgeKind.False_


def _skeleton():
    b = Builder()
    return b, b.const(0), b.const(1), b.const(1)


def after_cmp_fold():
    b, x, y, one = _skeleton()
    head = b.block(b.start)
    cond = b.cond(head, y)
    jt = b.jmp(b.block((cond, T)))
    je = b.jmp(b.block((cond, F)))
    join = b.block(jt, je)
    b.ret(join, b.start, b.binop("Add", join, b.phi(join, x, y), one))
    return b.graph


def after_cond_fold():
    b, x, y, one = _skeleton()
    head = b.block(b.start)
    jt = b.jmp(b.block(b.jmp(head)))
    je = b.jmp(b.block())
    join = b.block(jt, je)
    b.ret(join, b.start, b.binop("Add", join, b.phi(join, x, y), one))
    return b.graph


def after_unreachable_removal():
    b, x, y, one = _skeleton()
    head = b.block(b.start)
    jt = b.jmp(b.block(b.jmp(head)))
    join = b.block(jt)
    b.ret(join, b.start, b.binop("Add", join, b.phi(join, x), one))
    return b.graph


def after_empty_block_removal():
    b, x, y, one = _skeleton()
    join = b.block(b.start)
    b.ret(join, b.start, b.binop("Add", join, b.phi(join, x), one))
    return b.graph


def after_phi_fold():
    b, x, y, one = _skeleton()
    join = b.block(b.start)
    b.ret(join, b.start, b.binop("Add", join, x, one))
    return b.graph


def after_add_fold():
    b, x, y, one = _skeleton()
    join = b.block(b.start)
    b.ret(join, b.start, y)
    return b.graph


def final_state():
    b = Builder()
    b.ret(b.block(b.start), b.start, b.const(1))
    return b.graph


def steps():
    """(label, rewrite, expected snapshot); each rewrite returns a truthy value."""

    def one_of(kind):
        return lambda g: g.find_one(kind)

    def empty_blocks(g):
        done = 0
        for blk in sorted(g.nodes_of_kind(K.Block)):
            if blk in g.nodes and remove_empty_block(g, blk):
                done += 1
        return done == 2

    return [
        ("Cmp folded", lambda g: fold_constant_op(g, one_of(K.Cmp)(g)), after_cmp_fold),
        ("Cond folded", lambda g: fold_cond(g, one_of(K.Cond)(g)), after_cond_fold),
        ("unreachable block removed, Phi compacted", lambda g: remove_unreachable_blocks(g) == 1,
         after_unreachable_removal),
        ("empty blocks removed", empty_blocks, after_empty_block_removal),
        ("Phi folded", lambda g: fold_phi(g, one_of(K.Phi)(g)), after_phi_fold),
        ("Add folded", lambda g: fold_constant_op(g, one_of(K.Add)(g)), after_add_fold),
        ("dead constants removed", lambda g: remove_dead_nodes(g) == 2, final_state),
    ]

