"""Exact relation algebra of RCC5 and of its order expansion.

Relations are encoded as bit masks over orbit indices.  The unordered
calculus has five basic relations (indices 0..4: EQ, PP, PPI, DR, PO); the
ordered calculus splits DR and PO by the linear extension of PP and has
seven orbits (EQ, PP, PPI, DR_LT, DR_GT, PO_LT, PO_GT).

Both calculi are exposed as :class:`Calculus` instances, :data:`RCC5` and
:data:`ORDERED`, sharing the same mask-level API so that the solver and the
behaviour search can run over either one.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce

BASIC_NAMES = ("EQ", "PP", "PPI", "DR", "PO")
ORDERED_NAMES = ("EQ", "PP", "PPI", "DR_LT", "DR_GT", "PO_LT", "PO_GT")

EQ, PP, PPI, DR, PO = (1 << i for i in range(5))
FULL = 0b11111
EMPTY = 0
INCOMPARABLE = DR | PO

# ordered orbit masks
O_EQ, O_PP, O_PPI, O_DR_LT, O_DR_GT, O_PO_LT, O_PO_GT = (1 << i for i in range(7))
O_FULL = 0b1111111
PRECEDES = O_PP | O_DR_LT | O_PO_LT
SUCCEEDS = O_PPI | O_DR_GT | O_PO_GT
PREC_INCOMPARABLE = O_DR_LT | O_PO_LT

# Composition of basic relations; row is the first factor.
_TABLE_ROWS = {
    "DR": {"DR": "EQ PP PPI DR PO", "PO": "PP DR PO", "PP": "PP DR PO", "PPI": "DR", "EQ": "DR"},
    # PO o PPI contains DR: a proper part of y may avoid x entirely
    "PO": {"DR": "PPI DR PO", "PO": "EQ PP PPI DR PO", "PP": "PP PO", "PPI": "PPI DR PO", "EQ": "PO"},
    "PP": {"DR": "DR", "PO": "PP DR PO", "PP": "PP", "PPI": "EQ PP PPI DR PO", "EQ": "PP"},
    "PPI": {"DR": "PPI DR PO", "PO": "PPI PO", "PP": "EQ PP PPI PO", "PPI": "PPI", "EQ": "PPI"},
    "EQ": {"DR": "DR", "PO": "PO", "PP": "PP", "PPI": "PPI", "EQ": "EQ"},
}


def parse_relation(text: str, ordered: bool = False) -> int:
    """Parse ``"PP,DR"`` style unions (also accepts ``1`` for the full relation)."""
    calc = ORDERED if ordered else RCC5
    text = text.strip()
    if text == "1":
        return calc.full
    mask = 0
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            mask |= 1 << calc.names.index(part)
        except ValueError:
            raise ValueError(f"unknown relation name {part!r}") from None
    return mask


def _names_to_mask(names: str) -> int:
    return reduce(lambda m, n: m | (1 << BASIC_NAMES.index(n)), names.split(), 0)


BASIC_TABLE: dict[tuple[str, str], int] = {
    (r1, r2): _names_to_mask(entry)
    for r1, row in _TABLE_ROWS.items()
    for r2, entry in row.items()
}

# ordered index -> unordered index
_PROJECT = (0, 1, 2, 3, 3, 4, 4)


def project_mask(omask: int) -> int:
    """Unordered relation covered by a set of ordered orbits."""
    out = 0
    for i in range(7):
        if omask >> i & 1:
            out |= 1 << _PROJECT[i]
    return out


def lift_mask(mask: int) -> int:
    """All ordered orbits contained in an unordered relation."""
    out = 0
    for i in range(7):
        if mask >> _PROJECT[i] & 1:
            out |= 1 << i
    return out


@dataclass(frozen=True)
class Calculus:
    """A finite binary relation algebra given by atoms, converse and composition."""

    names: tuple[str, ...]
    converse_index: tuple[int, ...]
    atom_compose: tuple[tuple[int, ...], ...]
    _mask_compose: list = field(default=None, repr=False, compare=False)
    _mask_converse: list = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.names)
        size = 1 << n
        conv = [0] * size
        for m in range(size):
            out = 0
            for i in range(n):
                if m >> i & 1:
                    out |= 1 << self.converse_index[i]
            conv[m] = out
        comp = [[0] * size for _ in range(size)]
        for a in range(size):
            row = comp[a]
            for b in range(size):
                out = 0
                for i in range(n):
                    if a >> i & 1:
                        ci = self.atom_compose[i]
                        for j in range(n):
                            if b >> j & 1:
                                out |= ci[j]
                row[b] = out
        object.__setattr__(self, "_mask_compose", comp)
        object.__setattr__(self, "_mask_converse", conv)

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    @property
    def identity(self) -> int:
        return 1

    def compose(self, r1: int, r2: int) -> int:
        return self._mask_compose[r1][r2]

    def converse(self, r: int) -> int:
        return self._mask_converse[r]

    def compose_table(self) -> list[list[int]]:
        """Full mask-by-mask composition table (shared, do not mutate)."""
        return self._mask_compose

    def converse_table(self) -> list[int]:
        return self._mask_converse

    def members(self, mask: int) -> list[int]:
        return [i for i in range(self.n) if mask >> i & 1]

    def format(self, mask: int) -> str:
        if mask == self.full:
            return "1"
        return ",".join(self.names[i] for i in self.members(mask)) or "0"

    def triangle_consistent(self, o12: int, o23: int, o13: int) -> bool:
        """Atoms (as indices) labelling x-y, y-z and x-z of a triangle."""
        return bool(self.atom_compose[o12][o23] >> o13 & 1)

    def triangles(self) -> list[tuple[int, int, int]]:
        """All consistent atom triangles, sorted."""
        n = self.n
        return [
            t for t in itertools.product(range(n), repeat=3) if self.triangle_consistent(*t)
        ]


def _basic_calculus() -> Calculus:
    comp = tuple(
        tuple(BASIC_TABLE[(BASIC_NAMES[i], BASIC_NAMES[j])] for j in range(5)) for i in range(5)
    )
    return Calculus(BASIC_NAMES, (0, 2, 1, 3, 4), comp)


RCC5 = _basic_calculus()


def _ordered_atom_compose(i: int, j: int) -> int:
    # EQ is the identity; it is neither below nor above the order.
    if i == 0:
        return 1 << j
    if j == 0:
        return 1 << i
    base = lift_mask(RCC5.atom_compose[_PROJECT[i]][_PROJECT[j]])
    oi, oj = 1 << i, 1 << j
    if oi & PRECEDES and oj & PRECEDES:
        return base & PRECEDES
    if oi & SUCCEEDS and oj & SUCCEEDS:
        return base & SUCCEEDS
    return base


ORDERED = Calculus(
    ORDERED_NAMES,
    (0, 2, 1, 4, 3, 6, 5),
    tuple(tuple(_ordered_atom_compose(i, j) for j in range(7)) for i in range(7)),
)


def compose(r1: int, r2: int) -> int:
    """Composition of two unions of basic RCC5 relations."""
    return RCC5.compose(r1, r2)


def converse(r: int) -> int:
    return RCC5.converse(r)


def compose_ordered(o1: int, o2: int) -> int:
    """Composition of two unions of ordered orbits."""
    return ORDERED.compose(o1, o2)


def converse_ordered(o: int) -> int:
    return ORDERED.converse(o)


def triangle_consistent(o12: int, o23: int, o13: int, ordered: bool = False) -> bool:
    """Consistency of a triangle labelled by atom indices.

    Labels containing EQ are handled by the identity rows of the table, so
    ``(EQ, r, s)`` is consistent exactly when ``r == s``.
    """
    return (ORDERED if ordered else RCC5).triangle_consistent(o12, o23, o13)


def triangle_presentations(t: tuple[int, int, int], ordered: bool = False):
    """The six presentations of a triangle under point permutations."""
    conv = (ORDERED if ordered else RCC5).converse_index
    a, b, c = t  # x-y, y-z, x-z
    # label(u, v) for points 0=x, 1=y, 2=z
    lab = {(0, 1): a, (1, 2): b, (0, 2): c}
    for (u, v), r in list(lab.items()):
        lab[(v, u)] = conv[r]
    out = []
    for p in itertools.permutations(range(3)):
        out.append((lab[(p[0], p[1])], lab[(p[1], p[2])], lab[(p[0], p[2])]))
    return out


def enumerate_orbits(k: int, ordered: bool = False, injective: bool = False) -> list:
    """Orbits of k-tuples: atoms for k=2, consistent triangles for k=3.

    With ``injective=True`` triangles carrying an EQ label are dropped.
    """
    calc = ORDERED if ordered else RCC5
    if k == 2:
        return [(i,) for i in range(calc.n)]
    if k == 3:
        tris = calc.triangles()
        if injective:
            tris = [t for t in tris if 0 not in t]
        return tris
    raise ValueError(f"orbit enumeration supports k in (2, 3), got {k}")


def format_table(ordered: bool = False) -> str:
    """Plain-text composition table of the atoms."""
    calc = ORDERED if ordered else RCC5
    width = max(len(calc.format(calc.compose(1 << i, 1 << j)))
                for i in range(calc.n) for j in range(calc.n))
    width = max(width, max(map(len, calc.names)))
    lines = ["o".ljust(7) + " ".join(n.ljust(width) for n in calc.names)]
    for i, name in enumerate(calc.names):
        cells = [calc.format(calc.compose(1 << i, 1 << j)).ljust(width) for j in range(calc.n)]
        lines.append(name.ljust(7) + " ".join(cells))
    return "\n".join(line.rstrip() for line in lines)
