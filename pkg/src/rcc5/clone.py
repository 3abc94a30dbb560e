"""Behaviour search and the tractability classifier.

A behaviour of arity ``k`` is a table from ``k``-tuples of orbits to orbits.
It is *realizable* for an expansion when the table is closed under every
``k``-tuple of consistent triangles, preserves every expansion relation,
commutes with converse and fixes the all-EQ diagonal.  Searches are posed as
finite CSPs over the table cells (see :mod:`rcc5.problem`) and solved by
the selected kernel.
"""
from __future__ import annotations

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import kernel
from .algebra import (BASIC_NAMES, ORDERED, ORDERED_NAMES, RCC5, Calculus,
                      lift_mask)
from .network import InstanceError, RelationSpec, relation_from_json
from .problem import LINK_CONVERSE, LINK_EQUAL, Family, SearchProblem

P_DATALOG = "P_DATALOG"
NP_COMPLETE = "NP_COMPLETE"

# ordered atom indices
_EQ, _PP, _PPI, _DRL, _DRG, _POL, _POG = range(7)
_PROJECT = (0, 1, 2, 3, 3, 4, 4)
_ETA_DOMAIN = (_PP, _DRL, _POL)
_RHO_DOMAIN = (_DRL, _POL)
_PREC_SIDE = frozenset({_PP, _DRL, _POL})
_PRECNSIM = frozenset({_DRL, _POL})
_NSIM = frozenset({_DRL, _DRG, _POL, _POG})


class ClassifierAlarm(RuntimeError):
    """Searches returned results that contradict each other."""


# --------------------------------------------------------------------------
# expansions


@dataclass(frozen=True)
class ExpansionSpec:
    """Named relations added to the five basic ones."""

    relations: tuple[RelationSpec, ...] = ()

    def binary_masks(self) -> list[int]:
        masks = [1 << i for i in range(5)]
        masks += [r.orbits for r in self.relations if r.arity == 2]
        return masks

    def ternary(self) -> list[RelationSpec]:
        return [r for r in self.relations if r.arity == 3]

    # JSON ---------------------------------------------------------------
    def to_json(self) -> dict:
        rels = []
        for r in self.relations:
            if r.arity == 2:
                rels.append({"name": r.name, "arity": 2,
                             "orbits": [BASIC_NAMES[i] for i in RCC5.members(r.orbits)]})
            else:
                rels.append({"name": r.name, "arity": 3,
                             "triangles": [[BASIC_NAMES[i] for i in t] for t in sorted(r.triangles)]})
        return {"relations": rels}

    @classmethod
    def from_json(cls, data: dict) -> "ExpansionSpec":
        if not isinstance(data, dict) or not isinstance(data.get("relations", []), list):
            raise InstanceError("expansion spec must be an object with a 'relations' list")
        rels = []
        for k, item in enumerate(data.get("relations", [])):
            rels.append(relation_from_json(item, default_name=f"R{k}"))
        return cls(tuple(rels))


BASIC = ExpansionSpec()


def all_binary_unions() -> ExpansionSpec:
    """All 30 nonempty unions of basic relations other than the full relation."""
    rels = [RelationSpec.binary(m, RCC5.format(m)) for m in range(1, 31)]
    return ExpansionSpec(tuple(rels))


# --------------------------------------------------------------------------
# behaviours and Boolean operations


@dataclass(frozen=True)
class Behaviour:
    """Table over ``arity``-tuples of atoms, lexicographic cell order."""

    arity: int
    table: tuple[int, ...]
    ordered: bool = True

    def __post_init__(self):
        n = self.calc.n
        if len(self.table) != n ** self.arity:
            raise ValueError(f"table has {len(self.table)} cells, expected {n ** self.arity}")
        if any(not 0 <= v < n for v in self.table):
            raise ValueError("table value out of range")

    @property
    def calc(self) -> Calculus:
        return ORDERED if self.ordered else RCC5

    def index(self, atoms: Sequence[int]) -> int:
        n = self.calc.n
        i = 0
        for a in atoms:
            i = i * n + a
        return i

    def __call__(self, *atoms: int) -> int:
        return self.table[self.index(atoms)]

    def cells(self):
        return itertools.product(range(self.calc.n), repeat=self.arity)

    @classmethod
    def projection(cls, i: int, arity: int, ordered: bool = True) -> "Behaviour":
        n = (ORDERED if ordered else RCC5).n
        return cls(arity, tuple(c[i] for c in itertools.product(range(n), repeat=arity)), ordered)

    @classmethod
    def from_function(cls, fn: Callable[..., int], arity: int, ordered: bool = True) -> "Behaviour":
        n = (ORDERED if ordered else RCC5).n
        return cls(arity, tuple(fn(*c) for c in itertools.product(range(n), repeat=arity)), ordered)

    def minor(self, positions: Sequence[int], arity: int) -> "Behaviour":
        """``(x_0..x_{arity-1}) -> B(x_{positions[0]}, ...)``."""
        return Behaviour.from_function(lambda *x: self(*(x[p] for p in positions)), arity, self.ordered)

    def unordered_projection(self) -> "Behaviour | None":
        """The induced table on unordered atoms, or ``None`` if not well defined."""
        if not self.ordered:
            return self
        lifts = [[j for j in range(7) if _PROJECT[j] == i] for i in range(5)]
        out = []
        for cell in itertools.product(range(5), repeat=self.arity):
            vals = {_PROJECT[self(*o)] for o in itertools.product(*(lifts[a] for a in cell))}
            if len(vals) != 1:
                return None
            out.append(vals.pop())
        return Behaviour(self.arity, tuple(out), ordered=False)

    # JSON ---------------------------------------------------------------
    def to_json(self) -> dict:
        names = self.calc.names
        return {",".join(names[a] for a in cell): names[v] for cell, v in zip(self.cells(), self.table)}

    @classmethod
    def from_json(cls, data: dict) -> "Behaviour":
        if not data:
            raise ValueError("empty behaviour table")
        first = next(iter(data))
        arity = first.count(",") + 1
        ordered = len(data) == 7 ** arity
        names = ORDERED_NAMES if ordered else BASIC_NAMES
        n = len(names)
        table = [None] * (n ** arity)
        for key, val in data.items():
            atoms = [names.index(s) for s in key.split(",")]
            i = 0
            for a in atoms:
                i = i * n + a
            table[i] = names.index(val)
        if None in table:
            raise ValueError("behaviour table is incomplete")
        return cls(arity, tuple(table), ordered)


@dataclass(frozen=True)
class BooleanOp:
    arity: int
    table: tuple[int, ...]

    def __call__(self, *bits: int) -> int:
        i = 0
        for b in bits:
            i = 2 * i + b
        return self.table[i]

    @classmethod
    def from_function(cls, fn, arity: int) -> "BooleanOp":
        return cls(arity, tuple(int(fn(*c)) for c in itertools.product((0, 1), repeat=arity)))

    def is_projection(self) -> bool:
        return any(self == projection(i, self.arity) for i in range(self.arity))

    def is_cyclic(self) -> bool:
        return all(self(*c) == self(*(c[1:] + c[:1]))
                   for c in itertools.product((0, 1), repeat=self.arity))


def projection(i: int, arity: int) -> BooleanOp:
    return BooleanOp.from_function(lambda *x: x[i], arity)


AND = BooleanOp.from_function(lambda x, y: x & y, 2)
OR = BooleanOp.from_function(lambda x, y: x | y, 2)
MAJORITY = BooleanOp.from_function(lambda x, y, z: (x + y + z) >= 2, 3)
MINORITY = BooleanOp.from_function(lambda x, y, z: x ^ y ^ z, 3)


def eta(b: Behaviour) -> BooleanOp | None:
    """Quotient on {PP, DR<, PO<} with PP as 1 and the other two as 0."""
    if not b.ordered:
        raise ValueError("eta is defined on ordered behaviours")
    seen: dict[tuple[int, ...], int] = {}
    for cell in itertools.product(_ETA_DOMAIN, repeat=b.arity):
        v = b(*cell)
        if v not in _ETA_DOMAIN:
            return None
        key = tuple(int(a == _PP) for a in cell)
        cls_ = int(v == _PP)
        if seen.setdefault(key, cls_) != cls_:
            return None
    return BooleanOp(b.arity, tuple(seen[k] for k in itertools.product((0, 1), repeat=b.arity)))


def rho(b: Behaviour) -> BooleanOp:
    """Restriction to {DR<, PO<} with DR< as 0 and PO< as 1."""
    if not b.ordered:
        raise ValueError("rho is defined on ordered behaviours")
    out = []
    for cell in itertools.product(_RHO_DOMAIN, repeat=b.arity):
        v = b(*cell)
        if v not in _RHO_DOMAIN:
            raise ValueError(
                f"{','.join(ORDERED_NAMES[a] for a in cell)} maps to {ORDERED_NAMES[v]}, "
                "outside DR_LT/PO_LT")
        out.append(int(v == _POL))
    return BooleanOp(b.arity, tuple(out))


# --------------------------------------------------------------------------
# search problems


def behaviour_problem(spec: ExpansionSpec, arity: int, ordered: bool = True) -> SearchProblem:
    """Realizability of ``arity``-ary behaviours for ``spec`` as a table CSP."""
    calc = ORDERED if ordered else RCC5
    prob = SearchProblem(calc, arity)
    n = calc.n
    prob.restrict(0, 1)  # all-EQ diagonal
    for mask in spec.binary_masks():
        allowed = lift_mask(mask) if ordered else mask
        members = calc.members(allowed)
        for cell in itertools.product(members, repeat=arity):
            prob.restrict(prob.cell_index(cell), allowed)
    conv = calc.converse_index
    for c, cell in enumerate(prob.cells):
        d = prob.cell_index([conv[a] for a in cell])
        if c < d:
            prob.link(c, d, LINK_CONVERSE, LINK_CONVERSE)
    tris = calc.triangles()
    prob.add_family(Family(tris, tris))
    for rel in spec.ternary():
        allowed = [t for t in tris if tuple(_PROJECT[a] for a in t) in rel.triangles] if ordered \
            else [t for t in tris if t in rel.triangles]
        prob.add_family(Family(allowed, allowed))
    assert prob.ncells == n ** arity
    return prob


def _behaviour_from_solution(sol, arity: int, ordered: bool) -> Behaviour:
    return Behaviour(arity, tuple(d.bit_length() - 1 for d in sol), ordered)


def restrict_eta(prob: SearchProblem, op: BooleanOp) -> None:
    for cell in itertools.product(_ETA_DOMAIN, repeat=prob.k):
        bit = op(*(int(a == _PP) for a in cell))
        prob.restrict(prob.cell_index(cell), (1 << _PP) if bit else (1 << _DRL) | (1 << _POL))


def restrict_rho(prob: SearchProblem, op: BooleanOp) -> None:
    for cell in itertools.product(_RHO_DOMAIN, repeat=prob.k):
        bit = op(*(int(a == _POL) for a in cell))
        prob.restrict(prob.cell_index(cell), 1 << (_POL if bit else _DRL))


def restrict_cyclic_rho(prob: SearchProblem) -> None:
    for cell in itertools.product(_RHO_DOMAIN, repeat=prob.k):
        c = prob.cell_index(cell)
        prob.restrict(c, (1 << _DRL) | (1 << _POL))
        prob.link(c, prob.cell_index(cell[1:] + cell[:1]), LINK_EQUAL)


def restrict_wnu(prob: SearchProblem) -> None:
    k, n = prob.k, prob.n
    for a, b in itertools.permutations(range(n), 2):
        cells = [prob.cell_index([b if i == j else a for i in range(k)]) for j in range(k)]
        for c in cells[1:]:
            prob.link(cells[0], c, LINK_EQUAL)


@dataclass
class SearchOutcome:
    behaviour: Behaviour | None
    nodes: int
    exhausted: bool


def run_search(prob: SearchProblem, ordered: bool = True, max_nodes: int = 0,
               impl: str | None = None) -> SearchOutcome:
    sol, nodes, exhausted = kernel.search(prob, max_nodes=max_nodes, impl=impl)
    b = None if sol is None else _behaviour_from_solution(sol, prob.k, ordered)
    return SearchOutcome(b, nodes, exhausted)


def is_realizable(b: Behaviour, spec: ExpansionSpec = BASIC, impl: str | None = None) -> bool:
    """Check the triangle-local realizability criterion for a fixed table."""
    prob = behaviour_problem(spec, b.arity, b.ordered)
    dom = bytearray(prob.domains)
    for c, v in enumerate(b.table):
        dom[c] &= 1 << v
        if not dom[c]:
            return False
    return kernel.propagate(prob, dom, impl=impl) is not None


def find_eta_pattern(spec: ExpansionSpec, op: BooleanOp, **kw) -> Behaviour | None:
    prob = behaviour_problem(spec, op.arity)
    restrict_eta(prob, op)
    return run_search(prob, **kw).behaviour


def find_rho_pattern(spec: ExpansionSpec, op: BooleanOp, **kw) -> Behaviour | None:
    prob = behaviour_problem(spec, op.arity)
    restrict_rho(prob, op)
    return run_search(prob, **kw).behaviour


def find_wedge_behaviour(spec: ExpansionSpec = BASIC, **kw) -> Behaviour | None:
    """Binary realizable behaviour whose eta quotient is the Boolean minimum."""
    return find_eta_pattern(spec, AND, **kw)


def find_cyclic_rho(spec: ExpansionSpec = BASIC, **kw) -> Behaviour | None:
    """Ternary realizable behaviour whose rho quotient is cyclic."""
    prob = behaviour_problem(spec, 3)
    restrict_cyclic_rho(prob)
    return run_search(prob, **kw).behaviour


def find_wnu_behaviour(spec: ExpansionSpec = BASIC, arity: int = 3, **kw) -> Behaviour | None:
    """Realizable weak near-unanimity table on unordered atoms.

    The search runs on unordered behaviours directly; by 3-boundedness these
    are exactly the unordered projections that a WNU witness needs.
    """
    if arity < 2:
        raise ValueError("WNU arity must be at least 2")
    prob = behaviour_problem(spec, arity, ordered=False)
    restrict_wnu(prob)
    return run_search(prob, ordered=False, **kw).behaviour


# --------------------------------------------------------------------------
# composition and the cyclic construction


def compose_behaviours(outer: Behaviour, inners: Sequence[Behaviour]) -> Behaviour:
    if len(inners) != outer.arity:
        raise ValueError(f"outer arity {outer.arity} needs {outer.arity} inner behaviours")
    if not inners:
        raise ValueError("no inner behaviours")
    m = inners[0].arity
    if any(b.arity != m or b.ordered != outer.ordered for b in inners):
        raise ValueError("inner behaviours must share arity and calculus")
    return Behaviour.from_function(lambda *x: outer(*(b(*x) for b in inners)), m, outer.ordered)


def _rotations(b: Behaviour) -> list[Behaviour]:
    return [b, b.minor((1, 2, 0), 3), b.minor((2, 0, 1), 3)]


def is_wnu(b: Behaviour) -> bool:
    n, k = b.calc.n, b.arity
    for x, y in itertools.permutations(range(n), 2):
        vals = {b(*[y if i == j else x for i in range(k)]) for j in range(k)}
        if len(vals) != 1:
            return False
    return True


def is_cyclic(b: Behaviour) -> bool:
    return all(b(*c) == b(*(c[1:] + c[:1])) for c in b.cells())


def check_h_cyclic(h: Behaviour) -> list[str]:
    """Post-conditions of the cyclic construction; empty list when all hold."""
    problems = []
    proj = h.unordered_projection()
    if proj is None:
        return ["unordered projection is not well defined"]
    if not is_cyclic(proj):
        problems.append("unordered projection is not cyclic")
    for o in range(5):
        if proj(o, o, o) != o:
            problems.append(f"diagonal {BASIC_NAMES[o]} not preserved")
    for cell in itertools.product(range(1, 5), repeat=3):
        if len(set(cell)) > 1 and proj(*cell) not in (3, 4):
            problems.append(f"{','.join(BASIC_NAMES[a] for a in cell)} leaves DR/PO")
    return problems


def build_h_cyclic(g: Behaviour, f: Behaviour, spec: ExpansionSpec | None = None) -> Behaviour:
    """Combine a wedge ``g`` and a cyclic-rho ``f`` into a cyclic behaviour."""
    if g.arity != 2 or eta(g) != AND:
        raise ValueError("g must be binary with eta(g) equal to the minimum")
    if f.arity != 3 or not rho(f).is_cyclic():
        raise ValueError("f must be ternary with a cyclic rho quotient")
    if spec is not None and not (is_realizable(g, spec) and is_realizable(f, spec)):
        raise ValueError("g and f must be realizable for the expansion")
    p = [Behaviour.projection(i, 3) for i in range(3)]
    h = compose_behaviours(g, [compose_behaviours(g, [p[0], p[1]]), p[2]])
    h1 = compose_behaviours(h, _rotations(h))
    h2 = compose_behaviours(f, _rotations(h1))
    problems = check_h_cyclic(h2)
    if problems:
        raise AssertionError("cyclic construction failed: " + "; ".join(problems))
    return h2


# --------------------------------------------------------------------------
# table-level invariants of realizable behaviours


def preserves_prec(b: Behaviour) -> bool:
    return all(b(*c) in _PREC_SIDE for c in itertools.product(sorted(_PREC_SIDE), repeat=b.arity))


def preserves_precnsim(b: Behaviour) -> bool:
    return all(b(*c) in _PRECNSIM for c in itertools.product(sorted(_PRECNSIM), repeat=b.arity))


def preserves_neq(b: Behaviour) -> bool:
    return all(b(*c) != _EQ for c in itertools.product(range(1, 7), repeat=b.arity))


def partially_canonical(b: Behaviour) -> bool:
    lifts = [[j for j in range(7) if _PROJECT[j] == i] for i in range(5)]
    for cell in itertools.product(range(1, 5), repeat=b.arity):
        outs = [b(*o) for o in itertools.product(*(lifts[a] for a in cell))]
        if all(v in _NSIM for v in outs) and len({_PROJECT[v] for v in outs}) != 1:
            return False
    return True


def wedge_injective(b: Behaviour) -> bool:
    return all(b(*c) != _EQ for c in b.cells() if any(c))


def wedge_distinct_nsim(b: Behaviour) -> bool:
    lifts = [[j for j in range(7) if _PROJECT[j] == i] for i in range(5)]
    for o1, o2 in itertools.permutations(range(1, 5), 2):
        for a in lifts[o1]:
            for c in lifts[o2]:
                if b(a, c) not in _NSIM:
                    return False
    return True


def behaviour_invariants(b: Behaviour) -> dict[str, bool]:
    """Every table-level property that realizable behaviours must have."""
    out = {
        "pres_prec": preserves_prec(b),
        "pres_precnsim": preserves_precnsim(b),
        "pres_neq": preserves_neq(b),
        "eta_defined": eta(b) is not None,
    }
    if b.arity == 2:
        out["partial_canonical"] = partially_canonical(b)
    if eta(b) == AND:
        out["wedge_injective"] = wedge_injective(b)
        out["wedge_distinct_nsim"] = wedge_distinct_nsim(b)
    return out


def sample_behaviours(spec: ExpansionSpec, arity: int, count: int, seed: int = 0,
                      pins: int = 2, max_nodes: int = 20000) -> list[Behaviour]:
    """Realizable behaviours found by pinning random cells before searching."""
    import random

    rng = random.Random(seed)
    base = behaviour_problem(spec, arity)
    out: list[Behaviour] = []
    seen = set()
    for _ in range(count * 4):
        if len(out) >= count:
            break
        dom = bytearray(base.domains)
        for _ in range(pins):
            c = rng.randrange(base.ncells)
            choices = ORDERED.members(dom[c])
            dom[c] = 1 << rng.choice(choices)
        prob = behaviour_problem(spec, arity)
        prob.domains[:] = dom
        res = run_search(prob, max_nodes=max_nodes)
        if res.behaviour is not None and res.behaviour.table not in seen:
            seen.add(res.behaviour.table)
            out.append(res.behaviour)
    return out


# --------------------------------------------------------------------------
# classification


@dataclass
class Classification:
    verdict: str
    wedge: Behaviour | None = None
    cyclic_rho: Behaviour | None = None
    wnu3: Behaviour | None = None
    failing_quotient: str | None = None
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "wedge": self.wedge.to_json() if self.wedge else None,
            "cyclic_rho": self.cyclic_rho.to_json() if self.cyclic_rho else None,
            "wnu3": self.wnu3.to_json() if self.wnu3 else None,
            "failing_quotient": self.failing_quotient,
            "notes": self.notes,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


ASSUMPTION = ("witnesses are realizable under the triangle-local criterion; "
              "its sufficiency for canonical polymorphisms is assumed")


def classify(spec: ExpansionSpec = BASIC, with_wnu: bool = True, parallel: bool = False,
             impl: str | None = None) -> Classification:
    """P_DATALOG iff a wedge and a cyclic-rho behaviour both exist."""
    if parallel:
        with ThreadPoolExecutor(max_workers=2) as pool:
            fw = pool.submit(find_wedge_behaviour, spec, impl=impl)
            fc = pool.submit(find_cyclic_rho, spec, impl=impl)
            wedge, cyc = fw.result(), fc.result()
    else:
        wedge = find_wedge_behaviour(spec, impl=impl)
        cyc = find_cyclic_rho(spec, impl=impl) if wedge is not None else None
    if wedge is None:
        return Classification(NP_COMPLETE, failing_quotient="eta",
                              notes=["no binary behaviour with eta = min; eta maps to projections"])
    if cyc is None:
        return Classification(NP_COMPLETE, wedge=wedge, failing_quotient="rho",
                              notes=["no ternary behaviour with cyclic rho; rho maps to projections"])
    result = Classification(P_DATALOG, wedge=wedge, cyclic_rho=cyc, notes=[ASSUMPTION])
    if with_wnu:
        result.wnu3 = find_wnu_behaviour(spec, 3, impl=impl)
        if result.wnu3 is None:
            raise ClassifierAlarm("tractable verdict but no ternary WNU behaviour exists")
    return result
