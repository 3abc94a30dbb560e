"""Flat constraint representation of a behaviour search.

A behaviour of arity ``k`` over a calculus with ``n`` atoms is a table with
one cell per ``k``-tuple of atoms.  Cells are numbered lexicographically
(first coordinate most significant).  A search problem carries:

* a domain mask per cell;
* triangle families: for every ``k``-tuple of input triangles drawn from a
  family, the three image cells must form a triangle allowed by the family;
* links between cells: ``value(b) in map[mode][value(a)]``, symmetric.

The arrays built here are consumed unchanged by both kernel
implementations.
"""
from __future__ import annotations

import itertools

import numpy as np

from .algebra import Calculus

# positions of a triangle: 0 = x-y, 1 = y-z, 2 = x-z
OTHER_POSITIONS = ((1, 2), (0, 2), (0, 1))

LINK_EQUAL = 0
LINK_CONVERSE = 1


class Family:
    """Input triangles paired with the allowed image triangles."""

    def __init__(self, inputs, outputs):
        self.inputs = sorted(set(inputs))
        self.outputs = frozenset(outputs)


class SearchProblem:
    def __init__(self, calc: Calculus, arity: int):
        self.calc = calc
        self.n = calc.n
        self.k = arity
        self.size = 1 << calc.n
        self.ncells = calc.n ** arity
        self.weights = [calc.n ** (arity - 1 - i) for i in range(arity)]
        self.cells = list(itertools.product(range(calc.n), repeat=arity))
        self.domains = bytearray([calc.full]) * self.ncells
        self.families: list[Family] = []
        self._links: list[list[tuple[int, int]]] = [[] for _ in range(self.ncells)]
        self.mode_maps: list[list[int]] = [
            list(range(self.size)),
            list(calc.converse_table()),
        ]
        self._frozen = None

    # construction -------------------------------------------------------
    def cell_index(self, atoms) -> int:
        return sum(a * w for a, w in zip(atoms, self.weights))

    def restrict(self, cell: int, mask: int) -> None:
        self.domains[cell] &= mask
        self._frozen = None

    def add_family(self, fam: Family) -> None:
        self.families.append(fam)
        self._frozen = None

    def add_mode(self, mapping) -> int:
        self.mode_maps.append(list(mapping))
        self._frozen = None
        return len(self.mode_maps) - 1

    def link(self, a: int, b: int, mode: int = LINK_EQUAL, inverse_mode: int | None = None) -> None:
        """Require ``value(b)`` in ``map[mode](value(a))`` and the reverse."""
        if a == b and mode == LINK_EQUAL:
            return
        self._links[a].append((b, mode))
        self._links[b].append((a, mode if inverse_mode is None else inverse_mode))
        self._frozen = None

    # flat arrays --------------------------------------------------------
    def frozen(self):
        if self._frozen is None:
            self._frozen = self._freeze()
        return self._frozen

    def _freeze(self):
        n, size = self.n, self.size
        nf = len(self.families)
        tri_off = np.zeros((max(nf, 1), 3, n + 1), dtype=np.int32)
        tri_q, tri_r = [], []
        sup = np.zeros((max(nf, 1), 3, size * size), dtype=np.uint8)
        for f, fam in enumerate(self.families):
            for p in range(3):
                q, r = OTHER_POSITIONS[p]
                for v in range(n):
                    tri_off[f, p, v] = len(tri_q)
                    for t in fam.inputs:
                        if t[p] == v:
                            tri_q.append(t[q])
                            tri_r.append(t[r])
                tri_off[f, p, n] = len(tri_q)
                # support of position p given the domains at q and r
                atom_sup = [[0] * n for _ in range(n)]
                for t in fam.outputs:
                    atom_sup[t[q]][t[r]] |= 1 << t[p]
                table = []
                for mq in range(size):
                    row_q = [0] * n
                    for bq in range(n):
                        if mq >> bq & 1:
                            for br in range(n):
                                row_q[br] |= atom_sup[bq][br]
                    row = [0] * size
                    for mr in range(1, size):
                        low = mr & -mr
                        row[mr] = row[mr ^ low] | row_q[low.bit_length() - 1]
                    table.extend(row)
                sup[f, p] = np.asarray(table, dtype=np.uint8)
        link_off = np.zeros(self.ncells + 1, dtype=np.int32)
        link_cell, link_mode = [], []
        for c in range(self.ncells):
            link_off[c] = len(link_cell)
            for other, mode in self._links[c]:
                link_cell.append(other)
                link_mode.append(mode)
        link_off[self.ncells] = len(link_cell)
        return {
            "n": n,
            "k": self.k,
            "size": size,
            "ncells": self.ncells,
            "nfam": nf,
            "weights": np.asarray(self.weights, dtype=np.int32),
            "cell_atoms": np.asarray(self.cells, dtype=np.int32).reshape(self.ncells, self.k),
            "tri_off": tri_off,
            "tri_q": np.asarray(tri_q or [0], dtype=np.int32),
            "tri_r": np.asarray(tri_r or [0], dtype=np.int32),
            "sup": sup,
            "link_off": link_off,
            "link_cell": np.asarray(link_cell or [0], dtype=np.int32),
            "link_mode": np.asarray(link_mode or [0], dtype=np.int32),
            "mode_map": np.asarray(self.mode_maps, dtype=np.uint8),
        }
