"""Independent oracles shared by the test modules.

None of these consult the hard-coded composition table: they work directly
with finite sets.
"""
from __future__ import annotations

import functools
import itertools

import pytest

from rcc5.algebra import ORDERED, RCC5
from rcc5.network import relation_of_sets


def nonempty_subsets(ground: int) -> list[frozenset]:
    return [frozenset(s) for r in range(1, ground + 1)
            for s in itertools.combinations(range(ground), r)]


@functools.lru_cache(maxsize=None)
def set_model_composition(ground: int = 6):
    """``{(r1, r2): {r3: witness}}`` over all nonempty subsets of ``range(ground)``."""
    subs = nonempty_subsets(ground)
    rel = {}
    for a in subs:
        for b in subs:
            rel[(a, b)] = relation_of_sets(a, b)
    out: dict = {}
    for x in subs:
        for y in subs:
            r1 = rel[(x, y)]
            for z in subs:
                key = (r1, rel[(y, z)])
                row = out.setdefault(key, {})
                r3 = rel[(x, z)]
                if r3 not in row:
                    row[r3] = (x, y, z)
    return out


def antilex_rank(s: frozenset) -> int:
    return sum(1 << t for t in s)


def ordered_relation(x: frozenset, y: frozenset) -> int:
    """Ordered orbit of two sets when antilex order extends inclusion."""
    r = relation_of_sets(x, y)
    if r in (3, 4):
        base = 3 if r == 3 else 5
        return base + (0 if antilex_rank(x) < antilex_rank(y) else 1)
    return r


@functools.lru_cache(maxsize=None)
def ordered_set_model_composition(ground: int = 5):
    subs = nonempty_subsets(ground)
    out: dict = {}
    for x, y, z in itertools.product(subs, repeat=3):
        key = (ordered_relation(x, y), ordered_relation(y, z))
        out.setdefault(key, {}).setdefault(ordered_relation(x, z), (x, y, z))
    return out


@functools.lru_cache(maxsize=None)
def venn_labelings(n: int) -> frozenset:
    """All realizable complete labellings of ``n`` variables.

    A labelling is a tuple over ``combinations(range(n), 2)``.  Every choice of
    nonempty Venn regions gives one; every realizable labelling arises so.
    """
    regions = [frozenset(c) for r in range(1, n + 1) for c in itertools.combinations(range(n), r)]
    pairs = list(itertools.combinations(range(n), 2))
    out = set()
    for choice in range(1, 1 << len(regions)):
        chosen = [regions[i] for i in range(len(regions)) if choice >> i & 1]
        sets = [frozenset(k for k, reg in enumerate(chosen) if v in reg) for v in range(n)]
        if all(sets):
            out.add(tuple(relation_of_sets(sets[i], sets[j]) for i, j in pairs))
    return frozenset(out)


def direct_realizability_violations(b, spec_masks=(1, 2, 4, 8, 16), limit: int = 1):
    """Pure loop check of the realizability criterion for a binary behaviour."""
    calc = ORDERED if b.ordered else RCC5
    proj = (0, 1, 2, 3, 3, 4, 4) if b.ordered else (0, 1, 2, 3, 4)
    tris = calc.triangles()
    bad = []
    if b(*([0] * b.arity)) != 0:
        bad.append("diagonal")
    for cell in b.cells():
        conv = [calc.converse_index[a] for a in cell]
        if b(*conv) != calc.converse_index[b(*cell)]:
            bad.append(("converse", cell))
        for mask in spec_masks:
            if all(mask >> proj[a] & 1 for a in cell) and not mask >> proj[b(*cell)] & 1:
                bad.append(("relation", cell, mask))
    for combo in itertools.product(tris, repeat=b.arity):
        img = tuple(b(*(t[p] for t in combo)) for p in range(3))
        if not calc.triangle_consistent(*img):
            bad.append(("triangle", combo))
            if len(bad) >= limit:
                break
    return bad


@pytest.fixture(scope="session")
def basic_wedge():
    from rcc5.clone import find_wedge_behaviour

    return find_wedge_behaviour()


@pytest.fixture(scope="session")
def basic_cyclic():
    from rcc5.clone import find_cyclic_rho

    return find_cyclic_rho()


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
