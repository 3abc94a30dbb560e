"""Pure-Python propagation and search over behaviour tables.

Reference implementation of the compiled kernel in ``_ckernel.pyx``; both
must return identical results, including the order of exploration.
"""
from __future__ import annotations


class _Tables:
    __slots__ = (
        "n", "k", "size", "ncells", "nfam", "weights", "cell_atoms", "tri_off",
        "tri_q", "tri_r", "sup", "link_off", "link_cell", "link_mode", "mode_map",
    )

    def __init__(self, fz):
        self.n = fz["n"]
        self.k = fz["k"]
        self.size = fz["size"]
        self.ncells = fz["ncells"]
        self.nfam = fz["nfam"]
        self.weights = fz["weights"].tolist()
        self.cell_atoms = fz["cell_atoms"].tolist()
        self.tri_off = fz["tri_off"].tolist()
        tq = fz["tri_q"].tolist()
        tr = fz["tri_r"].tolist()
        self.tri_q = tq
        self.tri_r = tr
        self.sup = [[row.tolist() for row in fam] for fam in fz["sup"]]
        lo = fz["link_off"].tolist()
        lc = fz["link_cell"].tolist()
        lm = fz["link_mode"].tolist()
        self.link_off = lo
        self.link_cell = lc
        self.link_mode = lm
        self.mode_map = fz["mode_map"].tolist()


_cache: dict[int, tuple[object, _Tables]] = {}


def _tables(fz) -> _Tables:
    key = id(fz)
    hit = _cache.get(key)
    if hit is not None and hit[0] is fz:
        return hit[1]
    t = _Tables(fz)
    _cache.clear()
    _cache[key] = (fz, t)
    return t


def _propagate(t: _Tables, dom: bytearray, queue: list[int]) -> bool:
    inq = bytearray(t.ncells)
    for c in queue:
        inq[c] = 1
    head = 0
    k = t.k
    weights = t.weights
    while head < len(queue):
        a = queue[head]
        head += 1
        inq[a] = 0
        if head > 4096:
            del queue[:head]
            head = 0
        # links
        da = dom[a]
        for li in range(t.link_off[a], t.link_off[a + 1]):
            b = t.link_cell[li]
            nb = dom[b] & t.mode_map[t.link_mode[li]][da]
            if nb != dom[b]:
                if not nb:
                    return False
                dom[b] = nb
                if not inq[b]:
                    inq[b] = 1
                    queue.append(b)
        atoms = t.cell_atoms[a]
        for f in range(t.nfam):
            sup = t.sup[f]
            sup0, sup1, sup2 = sup
            for p in range(3):
                offs = t.tri_off[f][p]
                ranges = []
                for i in range(k):
                    v = atoms[i]
                    lo, hi = offs[v], offs[v + 1]
                    if lo == hi:
                        break
                    ranges.append(range(lo, hi))
                else:
                    if not _revise_all(t, dom, queue, inq, a, p, ranges, weights, sup0, sup1, sup2):
                        return False
                    if dom[a] == 0:
                        return False
    return True


def _revise_all(t, dom, queue, inq, a, p, ranges, weights, sup0, sup1, sup2):
    tq, tr = t.tri_q, t.tri_r
    size = t.size
    k = len(ranges)
    # odometer over the product of per-coordinate triangle lists
    idx = [r.start for r in ranges]
    ends = [r.stop for r in ranges]
    while True:
        cq = 0
        cr = 0
        for i in range(k):
            j = idx[i]
            cq += tq[j] * weights[i]
            cr += tr[j] * weights[i]
        if p == 0:
            c0, c1, c2 = a, cq, cr
        elif p == 1:
            c0, c1, c2 = cq, a, cr
        else:
            c0, c1, c2 = cq, cr, a
        d0, d1, d2 = dom[c0], dom[c1], dom[c2]
        n2 = d2 & sup2[d0 * size + d1]
        if n2 != d2:
            if not n2:
                return False
            dom[c2] = n2
            d2 = n2
            if not inq[c2]:
                inq[c2] = 1
                queue.append(c2)
            d0, d1 = dom[c0], dom[c1]
        n0 = d0 & sup0[d1 * size + d2]
        if n0 != d0:
            if not n0:
                return False
            dom[c0] = n0
            d0 = n0
            if not inq[c0]:
                inq[c0] = 1
                queue.append(c0)
            d1, d2 = dom[c1], dom[c2]
        n1 = d1 & sup1[d0 * size + d2]
        if n1 != d1:
            if not n1:
                return False
            dom[c1] = n1
            if not inq[c1]:
                inq[c1] = 1
                queue.append(c1)
        # advance odometer
        i = k - 1
        while i >= 0:
            idx[i] += 1
            if idx[i] < ends[i]:
                break
            idx[i] = ranges[i].start
            i -= 1
        if i < 0:
            return True


def propagate(fz, domains: bytearray, queue=None) -> bool:
    """Arc-consistency fixpoint in place; ``False`` on a wipe-out."""
    t = _tables(fz)
    if queue is None:
        queue = list(range(t.ncells))
    else:
        queue = list(queue)
    if any(d == 0 for d in domains):
        return False
    return _propagate(t, domains, queue)


def search(fz, domains: bytearray, max_nodes: int = 0):
    """Depth-first search with full propagation at every node.

    Returns ``(solution, nodes, exhausted)``; ``solution`` is a bytearray of
    singleton masks or ``None``.  ``exhausted`` is ``False`` only when the
    node budget ran out before the tree was closed.
    """
    t = _tables(fz)
    dom = bytearray(domains)
    nodes = 0
    if not propagate(fz, dom):
        return None, 1, True
    stack = [(dom, None, 0)]
    # each frame: (domains after propagation, branch cell, next value bit)
    while stack:
        dom, cell, bit = stack[-1]
        if cell is None:
            best, best_cnt = -1, 99
            for c in range(t.ncells):
                cnt = bin(dom[c]).count("1")
                if 1 < cnt < best_cnt:
                    best, best_cnt = c, cnt
                    if cnt == 2:
                        break
            if best < 0:
                return dom, nodes + 1, True
            cell = best
            stack[-1] = (dom, cell, 0)
        d = dom[cell]
        while bit < t.n and not (d >> bit & 1):
            bit += 1
        if bit >= t.n:
            stack.pop()
            continue
        stack[-1] = (dom, cell, bit + 1)
        nodes += 1
        if max_nodes and nodes > max_nodes:
            return None, nodes, False
        child = bytearray(dom)
        child[cell] = 1 << bit
        if _propagate(t, child, [cell]):
            stack.append((child, None, 0))
    return None, nodes, True
