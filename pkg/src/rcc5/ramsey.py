"""Finite combinatorics of RCC5 with a linear extension of PP.

Covers membership in the ordered age, one-point amalgamation, realizing the
order inside set models, and the embedding into a finite Boolean algebra
with an antilexicographic order.
"""
from __future__ import annotations

import functools
import itertools
import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from .algebra import BASIC_NAMES, RCC5
from .network import (I_DR, I_EQ, I_PO, I_PP, I_PPI, InstanceError,
                      ModelVerificationError, relation_of_sets)

_CONV = RCC5.converse_index


@dataclass
class OrderedStructure:
    """Points with a complete basic labelling and a strict linear order.

    ``labels`` maps ordered point pairs to basic relation indices; only one
    orientation needs to be given.  ``order`` lists the points from smallest
    to largest.
    """

    points: list[str]
    labels: dict[tuple[str, str], int]
    order: list[str]

    def __post_init__(self):
        full = {}
        for (x, y), r in self.labels.items():
            for key, val in (((x, y), r), ((y, x), _CONV[r])):
                if full.setdefault(key, val) != val:
                    raise InstanceError(f"conflicting labels for {x},{y}")
        self.labels = full

    def label(self, x: str, y: str) -> int:
        if x == y:
            return I_EQ
        try:
            return self.labels[(x, y)]
        except KeyError:
            raise InstanceError(f"pair {x},{y} unlabelled") from None

    def rank(self) -> dict[str, int]:
        return {p: i for i, p in enumerate(self.order)}

    def precedes(self, x: str, y: str) -> bool:
        r = self.rank()
        return r[x] < r[y]

    def restrict(self, points: Sequence[str]) -> "OrderedStructure":
        keep = set(points)
        return OrderedStructure(
            [p for p in self.points if p in keep],
            {(x, y): r for (x, y), r in self.labels.items() if x in keep and y in keep},
            [p for p in self.order if p in keep],
        )

    def same_as(self, other: "OrderedStructure") -> bool:
        if set(self.points) != set(other.points) or self.order != other.order:
            return False
        return all(self.label(x, y) == other.label(x, y)
                   for x, y in itertools.combinations(self.points, 2))

    # JSON ---------------------------------------------------------------
    def to_json(self) -> dict:
        labels = {f"{x},{y}": BASIC_NAMES[self.label(x, y)]
                  for x, y in itertools.combinations(self.points, 2)}
        return {"points": list(self.points), "labels": labels, "order": list(self.order)}

    @classmethod
    def from_json(cls, data: dict) -> "OrderedStructure":
        try:
            points = list(data["points"])
            order = list(data.get("order", points))
            raw = data.get("labels", {})
        except (TypeError, KeyError) as exc:
            raise InstanceError(f"bad ordered structure: {exc}") from None
        labels = {}
        for key, name in raw.items():
            parts = key.split(",")
            if len(parts) != 2 or name not in BASIC_NAMES:
                raise InstanceError(f"bad label entry {key!r}: {name!r}")
            labels[(parts[0].strip(), parts[1].strip())] = BASIC_NAMES.index(name)
        s = cls(points, labels, order)
        for x, y in itertools.combinations(points, 2):
            s.label(x, y)
        return s


def check_ordered_age(s: OrderedStructure) -> bool:
    """Linear order extending PP, no identified points, consistent triangles."""
    if len(set(s.points)) != len(s.points) or sorted(s.order) != sorted(s.points):
        return False
    rank = s.rank()
    for x, y in itertools.permutations(s.points, 2):
        r = s.labels.get((x, y))
        if r is None or r == I_EQ:
            return False
        if r == I_PP and rank[x] > rank[y]:
            return False
    for x, y, z in itertools.permutations(s.points, 3):
        if not RCC5.triangle_consistent(s.label(x, y), s.label(y, z), s.label(x, z)):
            return False
    return True


# --------------------------------------------------------------------------
# amalgamation

_PREFERENCE = (I_DR, I_PO, I_PPI, I_PP)


def amalgamate_one_point(a: OrderedStructure, b1: OrderedStructure,
                         b2: OrderedStructure) -> OrderedStructure:
    """Amalgam of ``B1 = A + {p}`` and ``B2 = A + {q}`` over ``A``."""
    base = set(a.points)
    extra1 = [p for p in b1.points if p not in base]
    extra2 = [p for p in b2.points if p not in base]
    if len(extra1) != 1 or len(extra2) != 1 or set(b1.points) - set(extra1) != base \
            or set(b2.points) - set(extra2) != base:
        raise InstanceError("B1 and B2 must each add exactly one point to A")
    p, q = extra1[0], extra2[0]
    if p == q:
        raise InstanceError("the new points must have distinct names")
    for s in (a, b1, b2):
        if not check_ordered_age(s):
            raise InstanceError("inputs must lie in the ordered age")
    for s in (b1, b2):
        if not s.restrict(a.points).same_as(a):
            raise InstanceError("B1 and B2 must agree with A")

    # order constraints between p and q coming through A
    r1, r2 = b1.rank(), b2.rank()
    p_before_q = any(r1[p] < r1[x] and r2[x] < r2[q] for x in base)
    q_before_p = any(r2[q] < r2[x] and r1[x] < r1[p] for x in base)
    label = None
    for cand in _PREFERENCE:
        if cand == I_PP and (q_before_p or not any(
                b1.label(p, x) == I_PP and b2.label(x, q) == I_PP for x in base)):
            continue
        if cand == I_PPI and (p_before_q or not any(
                b2.label(q, x) == I_PP and b1.label(x, p) == I_PP for x in base)):
            continue
        if all(RCC5.triangle_consistent(b1.label(p, x), b2.label(x, q), cand) for x in base):
            label = cand
            break
    if label is None:
        raise InstanceError("no consistent label for the new pair")
    if label == I_PP:
        first_p = True
    elif label == I_PPI:
        first_p = False
    else:
        first_p = not q_before_p

    # insert q into B1's order at the lowest position consistent with B2 and p
    order1 = list(b1.order)
    below_q = {x for x in base if r2[x] < r2[q]}
    above_q = base - below_q
    order = None
    for pos in range(len(order1) + 1):
        cand_order = order1[:pos] + [q] + order1[pos:]
        rank = {x: i for i, x in enumerate(cand_order)}
        if all(rank[x] < rank[q] for x in below_q) and all(rank[x] > rank[q] for x in above_q) \
                and (rank[p] < rank[q]) == first_p:
            order = cand_order
            break
    if order is None:
        raise InstanceError("no order extends both inputs")
    labels = dict(b1.labels)
    labels.update(b2.labels)
    labels[(p, q)] = label
    out = OrderedStructure(list(a.points) + [p, q], labels, order)
    if not check_ordered_age(out):
        raise ModelVerificationError("amalgam is not in the ordered age")
    return out


# --------------------------------------------------------------------------
# orders on finite Boolean algebras


def antilex_key(s) -> int:
    """Sort key for finite sets of naturals: larger top atoms weigh more."""
    return sum(1 << t for t in set(s))


def antilex_less(s, t) -> bool:
    """``s`` precedes ``t``: the largest atom of the symmetric difference lies in ``t``."""
    diff = set(s) ^ set(t)
    return bool(diff) and max(diff) in set(t)


def order_realize(s: OrderedStructure, g: Mapping[str, frozenset]) -> dict[str, frozenset]:
    """Enlarge a set model of the labels so that antilex order realizes ``s``'s order.

    Fresh disjoint tokens ``v_1 < ... < v_k`` above every token of ``g`` are
    attached in order to the points ``u_1 < ... < u_k``, and each point gets
    the tokens of all points below or equal to it in PP.
    """
    for x, y in itertools.combinations(s.points, 2):
        if relation_of_sets(frozenset(g[x]), frozenset(g[y])) != s.label(x, y):
            raise InstanceError(f"g does not realize the label of {x},{y}")
    top = max((t for v in g.values() for t in v), default=-1)
    fresh = {u: top + 1 + i for i, u in enumerate(s.order)}
    b = {}
    for u in s.points:
        extra = {fresh[w] for w in s.points if w == u or s.label(w, u) == I_PP}
        b[u] = frozenset(g[u]) | extra
    for x, y in itertools.combinations(s.points, 2):
        if relation_of_sets(b[x], b[y]) != s.label(x, y):
            raise ModelVerificationError(f"order_realize broke the label of {x},{y}")
    for x, y in zip(s.order, s.order[1:]):
        if not antilex_less(b[x], b[y]):
            raise ModelVerificationError(f"order_realize failed on {x} < {y}")
    return b


# --------------------------------------------------------------------------
# Boolean algebra embedding


@dataclass
class BoolAlgebraRep:
    """Subsets of an ordered atom list, stored as bit masks.

    Bit ``i`` stands for ``atoms[i]``; atoms are listed from smallest to
    largest, so antilex comparison of elements is integer comparison.
    """

    atoms: list[frozenset]

    @property
    def top(self) -> int:
        return (1 << len(self.atoms)) - 1

    def complement(self, x: int) -> int:
        return self.top & ~x

    def less(self, x: int, y: int) -> bool:
        return x < y

    def members(self, x: int) -> list[frozenset]:
        return [a for i, a in enumerate(self.atoms) if x >> i & 1]

    def to_json(self, elements: Mapping[str, int]) -> dict:
        return {
            "atoms": [sorted(a) for a in self.atoms],
            "elements": {p: [i for i in range(len(self.atoms)) if x >> i & 1]
                         for p, x in elements.items()},
        }


def overlap_family(s: OrderedStructure) -> list[frozenset]:
    """Sets of pairwise PO points, by size then in point order."""
    out = []
    for size in range(1, len(s.points) + 1):
        for combo in itertools.combinations(s.points, size):
            if all(s.label(x, y) == I_PO for x, y in itertools.combinations(combo, 2)):
                out.append(frozenset(combo))
    return out


def sqsubset(s: OrderedStructure, x: frozenset, y: frozenset) -> bool:
    """``x`` before ``y``: the order-smallest point of ``x + y`` lies in ``x``."""
    diff = x ^ y
    if not diff:
        return False
    rank = s.rank()
    return min(diff, key=rank.__getitem__) in x


def _below_eq(s: OrderedStructure, x: str, y: str) -> bool:
    return x == y or s.label(x, y) in (I_EQ, I_PP)


@dataclass
class Embedding:
    rep: BoolAlgebraRep
    f: dict[str, int]
    structure: OrderedStructure

    def index(self, x: frozenset) -> int:
        return self.rep.atoms.index(x)


def boolean_embed(s: OrderedStructure, m: Mapping[str, frozenset]) -> Embedding:
    """Embed ``s`` into the Boolean algebra over its overlap family."""
    if not check_ordered_age(s):
        raise InstanceError("structure is not in the ordered age")
    for x, y in itertools.combinations(s.points, 2):
        if relation_of_sets(frozenset(m[x]), frozenset(m[y])) != s.label(x, y):
            raise InstanceError(f"model does not realize the label of {x},{y}")
    fam = overlap_family(s)
    atoms = sorted(fam, key=functools.cmp_to_key(
        lambda x, y: -1 if sqsubset(s, x, y) else (1 if sqsubset(s, y, x) else 0)))
    rep = BoolAlgebraRep(atoms)
    f = {}
    for a in s.points:
        mask = 0
        for i, x in enumerate(atoms):
            if any(_below_eq(s, a2, a) for a2 in x):
                mask |= 1 << i
        f[a] = mask
    emb = Embedding(rep, f, s)
    problems = verify_embedding(emb)
    if problems:
        raise ModelVerificationError("; ".join(problems))
    return emb


def _mask_relation(x: int, y: int) -> int:
    if x == y:
        return I_EQ
    if x & y == x:
        return I_PP
    if x & y == y:
        return I_PPI
    if not x & y:
        return I_DR
    return I_PO


def verify_embedding(emb: Embedding) -> list[str]:
    """Label and order preservation, the linear order on atoms, and the maximality claim."""
    s, rep, f = emb.structure, emb.rep, emb.f
    problems = []
    for x, y in itertools.permutations(s.points, 2):
        if f[x] == 0:
            problems.append(f"{x} maps to the empty element")
        if _mask_relation(f[x], f[y]) != s.label(x, y):
            problems.append(f"label of {x},{y} not preserved")
        if s.precedes(x, y) and not rep.less(f[x], f[y]):
            problems.append(f"order of {x},{y} not preserved")
    fam = rep.atoms
    for x, y, z in itertools.permutations(fam, 3):
        if sqsubset(s, x, y) and sqsubset(s, y, z) and sqsubset(s, z, x):
            problems.append("atom order has a directed 3-cycle")
            break
    for x, y in itertools.combinations(fam, 2):
        if sqsubset(s, x, y) == sqsubset(s, y, x):
            problems.append("atom order is not total")
            break
    for i, x in enumerate(fam):
        inter = rep.top
        for a in x:
            inter &= f[a]
        if inter.bit_length() - 1 != i:
            problems.append(f"{sorted(x)} is not the largest atom below its members")
    return problems


def minimal_elements(s: OrderedStructure, pts: Sequence[str]) -> frozenset:
    pts = set(pts)
    return frozenset(a for a in pts if not any(b != a and s.label(b, a) == I_PP for b in pts))


def eval_Rkl(a_sets: Sequence, b_sets: Sequence) -> bool:
    """Intersection of the ``a`` sets is contained in the union of the ``b`` sets."""
    if not a_sets:
        raise ValueError("at least one set on the intersection side")
    inter = frozenset(a_sets[0])
    for a in a_sets[1:]:
        inter &= frozenset(a)
    union = frozenset().union(*map(frozenset, b_sets)) if b_sets else frozenset()
    return inter <= union


def eval_Rkl_masks(a_masks: Sequence[int], b_masks: Sequence[int]) -> bool:
    inter = -1
    for a in a_masks:
        inter &= a
    union = 0
    for b in b_masks:
        union |= b
    return inter & ~union == 0


def rkl_by_labels(s: OrderedStructure, a_pts: Sequence[str], b_pts: Sequence[str]) -> bool:
    """Label-level condition for ``R_kl`` on embedded points."""
    return any(_below_eq(s, a, b) for a in a_pts for b in b_pts) or any(
        s.label(a, a2) == I_DR for a, a2 in itertools.combinations(a_pts, 2))


def _twisted(rep: BoolAlgebraRep, elems: Sequence[int], bits: Sequence[int]) -> int:
    out = rep.top
    for x, b in zip(elems, bits):
        out &= rep.complement(x) if b else x
    return out


def eval_Okde(rep: BoolAlgebraRep, elems: Sequence[int], d: Sequence[int], e: Sequence[int]) -> bool:
    """The ``d``-twisted intersection antilex-precedes the ``e``-twisted one."""
    if not len(elems) == len(d) == len(e):
        raise ValueError("elements, d and e must have equal length")
    return rep.less(_twisted(rep, elems, d), _twisted(rep, elems, e))


def okde_by_cases(emb: Embedding, pts: Sequence[str], d: Sequence[int], e: Sequence[int]) -> bool:
    """Case analysis for ``O_kde`` via minimal elements and the atom order.

    Needs at least one zero in both ``d`` and ``e``.
    """
    s, rep = emb.structure, emb.rep
    elems = [emb.f[p] for p in pts]
    if _twisted(rep, elems, e) == 0:
        return False
    if _twisted(rep, elems, d) == 0:
        return True
    x = minimal_elements(s, [p for p, b in zip(pts, d) if b == 0])
    y = minimal_elements(s, [p for p, b in zip(pts, e) if b == 0])
    return sqsubset(s, x, y)


def claim3_conditions(emb: Embedding, a_pts: Sequence[str], b_pts: Sequence[str]) -> tuple[bool, ...]:
    """The four equivalent conditions for the ``a``/``b`` split of points."""
    s, rep, f = emb.structure, emb.rep, emb.f
    c1 = not eval_Rkl_masks([f[a] for a in a_pts], [f[b] for b in b_pts])
    c = rep.top
    for a in a_pts:
        c &= f[a]
    for b in b_pts:
        c &= rep.complement(f[b])
    c2 = c != 0
    c3 = all(s.label(x, y) != I_DR for x, y in itertools.combinations(a_pts, 2)) and \
        not any(_below_eq(s, a, b) for a in a_pts for b in b_pts)
    if c:
        top_atom = rep.atoms[c.bit_length() - 1]
        c4 = top_atom == minimal_elements(s, a_pts)
    else:
        c4 = False
    return c1, c2, c3, c4


# --------------------------------------------------------------------------
# generators


def random_ordered_structure(rng: random.Random, npoints: int, ground: int = 6,
                             prefix: str = "p") -> tuple[OrderedStructure, dict[str, frozenset]]:
    """Random member of the ordered age with a set model witnessing its labels."""
    names = [f"{prefix}{i}" for i in range(npoints)]
    sets: list[frozenset] = []
    while len(sets) < npoints:
        cand = frozenset(t for t in range(ground) if rng.random() < 0.5)
        if cand and cand not in sets:
            sets.append(cand)
    model = dict(zip(names, sets))
    labels = {(x, y): relation_of_sets(model[x], model[y])
              for x, y in itertools.combinations(names, 2)}
    # random linear extension of strict inclusion
    remaining = set(names)
    order = []
    while remaining:
        ready = sorted(x for x in remaining
                       if not any(model[y] < model[x] for y in remaining if y != x))
        pick = rng.choice(ready)
        order.append(pick)
        remaining.discard(pick)
    return OrderedStructure(names, labels, order), model


def small_ordered_structures(max_points: int = 3) -> list[OrderedStructure]:
    """All members of the ordered age on up to three points, up to isomorphism."""
    out = []
    for n in range(1, max_points + 1):
        pts = [f"p{i}" for i in range(n)]
        for combo in itertools.product((I_PP, I_DR, I_PO), repeat=n * (n - 1) // 2):
            labels = dict(zip(itertools.combinations(pts, 2), combo))
            s = OrderedStructure(list(pts), labels, list(pts))
            if check_ordered_age(s):
                out.append(s)
    return out


def random_one_point_extension(rng: random.Random, s: OrderedStructure,
                               model: Mapping[str, frozenset], name: str,
                               ground: int = 8) -> OrderedStructure:
    """Add a point with a fresh random set, placed at a random valid order position."""
    used = set(map(frozenset, model.values()))
    while True:
        cand = frozenset(t for t in range(ground) if rng.random() < 0.5)
        if cand and cand not in used:
            break
    labels = dict(s.labels)
    for x in s.points:
        labels[(x, name)] = relation_of_sets(frozenset(model[x]), cand)
    rank = s.rank()
    lo = max((rank[x] + 1 for x in s.points if labels[(x, name)] == I_PP), default=0)
    hi = min((rank[x] for x in s.points if labels[(x, name)] == I_PPI), default=len(s.order))
    pos = rng.randint(lo, hi)
    order = s.order[:pos] + [name] + s.order[pos:]
    return OrderedStructure(list(s.points) + [name], labels, order)
