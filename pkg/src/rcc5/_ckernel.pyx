# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled propagation and search over behaviour tables.

Mirrors ``_pykernel`` step for step, so both return the same solution and
node count for the same problem.
"""
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy, memset

import numpy as np

cdef int MAXK = 8


cdef struct Tables:
    int n
    int k
    int size
    int ncells
    int nfam
    const int *weights
    const int *cell_atoms
    const int *tri_off
    const int *tri_q
    const int *tri_r
    const unsigned char *sup
    const int *link_off
    const int *link_cell
    const int *link_mode
    const unsigned char *mode_map


cdef inline int popcount(unsigned char x) nogil:
    cdef int c = 0
    while x:
        x &= x - 1
        c += 1
    return c


cdef inline int push(int *queue, int *qlen, int cap, unsigned char *inq, int c) nogil:
    if not inq[c]:
        inq[c] = 1
        queue[qlen[0] % cap] = c
        qlen[0] += 1
    return 0


cdef int propagate_c(Tables *t, unsigned char *dom, int *queue, int qhead0, int qlen0,
                     unsigned char *inq) nogil:
    """Circular queue of capacity ncells; every cell is enqueued at most once."""
    cdef int cap = t.ncells
    cdef int head = qhead0
    cdef int qlen = qlen0
    cdef int a, b, li, f, p, i, v, lo, hi, j, cq, cr, c0, c1, c2, kk
    cdef unsigned char da, nb, d0, d1, d2, n0, n1, n2
    cdef int idx[8]
    cdef int starts[8]
    cdef int ends[8]
    cdef const unsigned char *sup0
    cdef const unsigned char *sup1
    cdef const unsigned char *sup2
    cdef const int *offs
    cdef int size = t.size
    cdef int n = t.n
    kk = t.k
    while head < qlen:
        a = queue[head % cap]
        head += 1
        inq[a] = 0
        da = dom[a]
        for li in range(t.link_off[a], t.link_off[a + 1]):
            b = t.link_cell[li]
            nb = dom[b] & t.mode_map[t.link_mode[li] * size + da]
            if nb != dom[b]:
                if nb == 0:
                    return 0
                dom[b] = nb
                push(queue, &qlen, cap, inq, b)
        for f in range(t.nfam):
            sup0 = t.sup + (f * 3 + 0) * size * size
            sup1 = t.sup + (f * 3 + 1) * size * size
            sup2 = t.sup + (f * 3 + 2) * size * size
            for p in range(3):
                offs = t.tri_off + (f * 3 + p) * (n + 1)
                for i in range(kk):
                    v = t.cell_atoms[a * kk + i]
                    lo = offs[v]
                    hi = offs[v + 1]
                    if lo == hi:
                        break
                    starts[i] = lo
                    ends[i] = hi
                    idx[i] = lo
                else:
                    while True:
                        cq = 0
                        cr = 0
                        for i in range(kk):
                            j = idx[i]
                            cq += t.tri_q[j] * t.weights[i]
                            cr += t.tri_r[j] * t.weights[i]
                        if p == 0:
                            c0 = a; c1 = cq; c2 = cr
                        elif p == 1:
                            c0 = cq; c1 = a; c2 = cr
                        else:
                            c0 = cq; c1 = cr; c2 = a
                        d0 = dom[c0]; d1 = dom[c1]; d2 = dom[c2]
                        n2 = d2 & sup2[d0 * size + d1]
                        if n2 != d2:
                            if n2 == 0:
                                return 0
                            dom[c2] = n2
                            push(queue, &qlen, cap, inq, c2)
                            d0 = dom[c0]; d1 = dom[c1]; d2 = n2
                        n0 = d0 & sup0[d1 * size + d2]
                        if n0 != d0:
                            if n0 == 0:
                                return 0
                            dom[c0] = n0
                            push(queue, &qlen, cap, inq, c0)
                            d0 = n0; d1 = dom[c1]; d2 = dom[c2]
                        n1 = d1 & sup1[d0 * size + d2]
                        if n1 != d1:
                            if n1 == 0:
                                return 0
                            dom[c1] = n1
                            push(queue, &qlen, cap, inq, c1)
                        i = kk - 1
                        while i >= 0:
                            idx[i] += 1
                            if idx[i] < ends[i]:
                                break
                            idx[i] = starts[i]
                            i -= 1
                        if i < 0:
                            break
                    if dom[a] == 0:
                        return 0
    return 1


cdef class _Holder:
    cdef object arrays
    cdef Tables t


cdef _Holder _make(dict fz):
    cdef _Holder h = _Holder()
    arrs = {}
    for name in ("weights", "cell_atoms", "tri_off", "tri_q", "tri_r",
                 "link_off", "link_cell", "link_mode"):
        arrs[name] = np.ascontiguousarray(fz[name], dtype=np.int32)
    for name in ("sup", "mode_map"):
        arrs[name] = np.ascontiguousarray(fz[name], dtype=np.uint8)
    h.arrays = arrs
    cdef int[::1] w = arrs["weights"].reshape(-1)
    cdef int[::1] ca = arrs["cell_atoms"].reshape(-1)
    cdef int[::1] to = arrs["tri_off"].reshape(-1)
    cdef int[::1] tq = arrs["tri_q"].reshape(-1)
    cdef int[::1] tr = arrs["tri_r"].reshape(-1)
    cdef int[::1] lo = arrs["link_off"].reshape(-1)
    cdef int[::1] lc = arrs["link_cell"].reshape(-1)
    cdef int[::1] lm = arrs["link_mode"].reshape(-1)
    cdef unsigned char[::1] sp = arrs["sup"].reshape(-1)
    cdef unsigned char[::1] mm = arrs["mode_map"].reshape(-1)
    if fz["k"] > MAXK:
        raise ValueError("arity too large for the compiled kernel")
    h.t.n = fz["n"]
    h.t.k = fz["k"]
    h.t.size = fz["size"]
    h.t.ncells = fz["ncells"]
    h.t.nfam = fz["nfam"]
    h.t.weights = &w[0]
    h.t.cell_atoms = &ca[0]
    h.t.tri_off = &to[0]
    h.t.tri_q = &tq[0]
    h.t.tri_r = &tr[0]
    h.t.sup = &sp[0]
    h.t.link_off = &lo[0]
    h.t.link_cell = &lc[0]
    h.t.link_mode = &lm[0]
    h.t.mode_map = &mm[0]
    return h


def propagate(dict fz, domains, queue=None):
    """Arc-consistency fixpoint in place; ``False`` on a wipe-out."""
    cdef _Holder h = _make(fz)
    cdef int nc = h.t.ncells
    cdef unsigned char[::1] dom = domains
    cdef int *q = <int *> malloc(nc * sizeof(int))
    cdef unsigned char *inq = <unsigned char *> malloc(nc)
    cdef int qlen = 0
    cdef int c, ok
    memset(inq, 0, nc)
    try:
        for c in range(nc):
            if dom[c] == 0:
                return False
        cells = range(nc) if queue is None else queue
        for c in cells:
            if not inq[c]:
                inq[c] = 1
                q[qlen] = c
                qlen += 1
        with nogil:
            ok = propagate_c(&h.t, &dom[0], q, 0, qlen, inq)
        return bool(ok)
    finally:
        free(q)
        free(inq)


def search(dict fz, domains, long max_nodes=0):
    """Depth-first search with full propagation at every node.

    Returns ``(solution, nodes, exhausted)`` exactly like the Python kernel.
    """
    cdef _Holder h = _make(fz)
    cdef Tables *t = &h.t
    cdef int nc = t.ncells
    cdef int n = t.n
    cdef int depth_cap = nc + 2
    cdef unsigned char *stack_dom = <unsigned char *> malloc(depth_cap * nc)
    cdef int *stack_cell = <int *> malloc(depth_cap * sizeof(int))
    cdef int *stack_bit = <int *> malloc(depth_cap * sizeof(int))
    cdef int *q = <int *> malloc(nc * sizeof(int))
    cdef unsigned char *inq = <unsigned char *> malloc(nc)
    cdef int top, c, best, best_cnt, cnt, cell, bit, ok, found = 0
    cdef long nodes = 0
    cdef int exhausted = 1
    cdef unsigned char d
    cdef unsigned char *cur
    cdef unsigned char *child
    cdef bytearray init = bytearray(domains)
    cdef unsigned char[::1] iv = init
    try:
        memcpy(stack_dom, &iv[0], nc)
        memset(inq, 0, nc)
        for c in range(nc):
            q[c] = c
            inq[c] = 1
        for c in range(nc):
            if stack_dom[c] == 0:
                return None, 1, True
        with nogil:
            ok = propagate_c(t, stack_dom, q, 0, nc, inq)
        if not ok:
            return None, 1, True
        top = 0
        stack_cell[0] = -1
        stack_bit[0] = 0
        with nogil:
            while top >= 0:
                cur = stack_dom + top * nc
                if stack_cell[top] < 0:
                    best = -1
                    best_cnt = 99
                    for c in range(nc):
                        cnt = popcount(cur[c])
                        if 1 < cnt < best_cnt:
                            best = c
                            best_cnt = cnt
                            if cnt == 2:
                                break
                    if best < 0:
                        found = 1
                        break
                    stack_cell[top] = best
                    stack_bit[top] = 0
                cell = stack_cell[top]
                bit = stack_bit[top]
                d = cur[cell]
                while bit < n and not ((d >> bit) & 1):
                    bit += 1
                if bit >= n:
                    top -= 1
                    continue
                stack_bit[top] = bit + 1
                nodes += 1
                if max_nodes and nodes > max_nodes:
                    exhausted = 0
                    break
                child = stack_dom + (top + 1) * nc
                memcpy(child, cur, nc)
                child[cell] = <unsigned char> (1 << bit)
                memset(inq, 0, nc)
                q[0] = cell
                inq[cell] = 1
                if propagate_c(t, child, q, 0, 1, inq):
                    top += 1
                    stack_cell[top] = -1
                    stack_bit[top] = 0
        if found:
            sol = bytearray(nc)
            for c in range(nc):
                sol[c] = cur[c]
            return sol, nodes + 1, True
        return None, nodes, bool(exhausted)
    finally:
        free(stack_dom)
        free(stack_cell)
        free(stack_bit)
        free(q)
        free(inq)
