"""Satisfiability and set-model construction for RCC5 constraint networks.

Networks are over first-order expansions of the basic relations with
constraints of arity two or three.  Satisfiability reduces to a finite CSP
whose variables are the unordered variable pairs (their basic relation) with
a consistency constraint on every triangle; a complete labelling with all
triangles consistent always has a set model, which :func:`build_model`
constructs explicitly.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .algebra import BASIC_NAMES, RCC5

SAT = "SAT"
UNSAT = "UNSAT"
REFUTED = "REFUTED"
UNDECIDED = "UNDECIDED"

I_EQ, I_PP, I_PPI, I_DR, I_PO = range(5)
_CONV = RCC5.converse_index


class InstanceError(ValueError):
    """Malformed instance, relation or network."""


class ModelVerificationError(RuntimeError):
    """A constructed witness failed its own verification (a construction bug)."""


# --------------------------------------------------------------------------
# relations and instances


@dataclass(frozen=True)
class RelationSpec:
    """A definable relation given as a union of orbits.

    Binary relations carry an RCC5 mask; ternary ones a set of triangles
    ``(r(x,y), r(y,z), r(x,z))`` of atom indices in argument order.
    """

    arity: int
    orbits: int = 0
    triangles: frozenset = frozenset()
    name: str = ""

    def __post_init__(self):
        if self.arity == 1:
            raise InstanceError("unary relations are trivial over RCC5 and are not accepted")
        if self.arity == 2:
            if not 0 <= self.orbits <= RCC5.full:
                raise InstanceError(f"bad orbit mask {self.orbits}")
        elif self.arity == 3:
            for t in self.triangles:
                if len(t) != 3 or not RCC5.triangle_consistent(*t):
                    raise InstanceError(f"inconsistent triangle {t} in relation {self.name!r}")
        else:
            raise InstanceError(f"relations of arity {self.arity} are not supported")

    @classmethod
    def binary(cls, mask: int, name: str = "") -> "RelationSpec":
        return cls(2, orbits=mask, name=name)

    @classmethod
    def ternary(cls, triangles: Iterable[Sequence[int]], name: str = "") -> "RelationSpec":
        return cls(3, triangles=frozenset(tuple(t) for t in triangles), name=name)

    def allowed_tuples(self) -> set[tuple[int, ...]]:
        """Allowed label tuples over the argument pairs (x,y) or (x,y),(y,z),(x,z)."""
        if self.arity == 2:
            return {(i,) for i in RCC5.members(self.orbits)}
        return set(self.triangles)


@dataclass(frozen=True)
class Constraint:
    relation: RelationSpec
    args: tuple[str, ...]


@dataclass
class Instance:
    variables: list[str]
    constraints: list[Constraint] = field(default_factory=list)

    def __post_init__(self):
        if len(set(self.variables)) != len(self.variables):
            raise InstanceError("variable names must be unique")
        known = set(self.variables)
        for c in self.constraints:
            if len(c.args) != c.relation.arity:
                raise InstanceError(
                    f"constraint {c.relation.name or '?'} has {len(c.args)} arguments, "
                    f"relation arity is {c.relation.arity}")
            for a in c.args:
                if a not in known:
                    raise InstanceError(f"unknown variable {a!r}")

    def add(self, relation: RelationSpec, *args: str) -> "Instance":
        self.constraints.append(Constraint(relation, tuple(args)))
        self.__post_init__()
        return self


# --------------------------------------------------------------------------
# set models


SetModel = dict  # variable -> frozenset of natural-number tokens


def relation_of_sets(x: frozenset, y: frozenset) -> int:
    """Basic relation index holding between two nonempty sets."""
    if x == y:
        return I_EQ
    if x < y:
        return I_PP
    if x > y:
        return I_PPI
    if x.isdisjoint(y):
        return I_DR
    return I_PO


def evaluate(model: Mapping[str, frozenset], x: str, y: str) -> int:
    try:
        a, b = model[x], model[y]
    except KeyError as exc:
        raise InstanceError(f"unassigned variable {exc.args[0]!r}") from None
    if not a or not b:
        raise InstanceError("set models assign nonempty sets")
    return relation_of_sets(frozenset(a), frozenset(b))


def model_satisfies(model: Mapping[str, frozenset], instance: Instance) -> bool:
    for c in instance.constraints:
        labels = _arg_labels(model, c.args)
        if labels not in c.relation.allowed_tuples():
            return False
    return True


def _arg_labels(model, args):
    if len(args) == 2:
        return (evaluate(model, args[0], args[1]),)
    x, y, z = args
    return (evaluate(model, x, y), evaluate(model, y, z), evaluate(model, x, z))


def independent_copies(model: Mapping[str, frozenset]):
    """Two relabelled copies on even and odd tokens; every cross pair is DR."""
    even = {v: frozenset(2 * t for t in s) for v, s in model.items()}
    odd = {v: frozenset(2 * t + 1 for t in s) for v, s in model.items()}
    return even, odd


# --------------------------------------------------------------------------
# atomic networks


@dataclass
class AtomicNetwork:
    """Complete labelling of all unordered variable pairs by basic relations.

    ``labels[(i, j)]`` for ``i < j`` is the relation of ``variables[i]`` to
    ``variables[j]``.
    """

    variables: list[str]
    labels: dict[tuple[int, int], int]

    def __post_init__(self):
        n = len(self.variables)
        for i, j in itertools.combinations(range(n), 2):
            if (i, j) not in self.labels:
                raise InstanceError(f"pair {self.variables[i]},{self.variables[j]} unlabelled")

    @classmethod
    def from_names(cls, variables: Sequence[str], labels: Mapping[tuple[str, str], str]):
        """Build from ``{("x","y"): "PP"}``; either orientation is accepted."""
        pos = {v: i for i, v in enumerate(variables)}
        out = {}
        for (a, b), name in labels.items():
            r = BASIC_NAMES.index(name)
            i, j = pos[a], pos[b]
            if i > j:
                i, j, r = j, i, _CONV[r]
            out[(i, j)] = r
        return cls(list(variables), out)

    def label(self, i: int, j: int) -> int:
        if i == j:
            return I_EQ
        if i < j:
            return self.labels[(i, j)]
        return _CONV[self.labels[(j, i)]]

    def triangles_consistent(self) -> bool:
        n = len(self.variables)
        for i, j, k in itertools.permutations(range(n), 3):
            if not RCC5.triangle_consistent(self.label(i, j), self.label(j, k), self.label(i, k)):
                return False
        return True

    def eq_classes(self) -> list[list[int]]:
        n = len(self.variables)
        seen, classes = set(), []
        for i in range(n):
            if i in seen:
                continue
            cls_ = [j for j in range(i, n) if j == i or self.label(i, j) == I_EQ]
            seen.update(cls_)
            classes.append(cls_)
        return classes


def solve_atomic(network: AtomicNetwork) -> str:
    """SAT iff every triangle is consistent (the age is 3-bounded)."""
    return SAT if network.triangles_consistent() else UNSAT


def build_model(network: AtomicNetwork) -> SetModel:
    """Explicit set model of a consistent atomic network.

    EQ classes are collapsed to their first member.  With ``r`` the
    representatives (in variable order), representative ``r[i]`` owns token
    ``i``, and each PO pair ``(r[i], r[j])``, ``i < j``, owns a shared token
    numbered after all variable tokens in lexicographic pair order.  A set
    holds its own token, the tokens of its proper parts, and every PO-pair
    token whose pair meets it from below.
    """
    if not network.triangles_consistent():
        raise InstanceError("network is not triangle-consistent")
    classes = network.eq_classes()
    reps = [c[0] for c in classes]
    m = len(reps)

    def below(i, j):  # reps[i] is a part of (or equal to) reps[j]
        return i == j or network.label(reps[i], reps[j]) == I_PP

    po_pairs = [(i, j) for i, j in itertools.combinations(range(m), 2)
                if network.label(reps[i], reps[j]) == I_PO]
    sets = []
    for u in range(m):
        s = {v for v in range(m) if below(v, u)}
        s.update(m + idx for idx, (v, w) in enumerate(po_pairs) if below(v, u) or below(w, u))
        sets.append(frozenset(s))
    model = {}
    for cls_, s in zip(classes, sets):
        for v in cls_:
            model[network.variables[v]] = s
    verify_model(network, model)
    return model


def verify_model(network: AtomicNetwork, model: Mapping[str, frozenset]) -> None:
    n = len(network.variables)
    for i, j in itertools.combinations(range(n), 2):
        got = evaluate(model, network.variables[i], network.variables[j])
        if got != network.label(i, j):
            raise ModelVerificationError(
                f"model gives {BASIC_NAMES[got]} for {network.variables[i]},"
                f"{network.variables[j]}, expected {BASIC_NAMES[network.label(i, j)]}")


# --------------------------------------------------------------------------
# path consistency on relation matrices


def path_consistency(matrix: Sequence[Sequence[int]], order: str = "fifo"):
    """Algebraic closure ``C[i][j] &= C[i][k] o C[k][j]``.

    Returns the refined matrix (list of lists) or ``None`` if some entry
    becomes empty.  ``order`` selects the queue discipline (``fifo``,
    ``lifo`` or ``sweep``); the fixed point does not depend on it.
    """
    n = len(matrix)
    c = [list(row) for row in matrix]
    for i in range(n):
        c[i][i] &= 1
        for j in range(n):
            c[i][j] &= RCC5.converse(c[j][i])
            c[j][i] = RCC5.converse(c[i][j])
    if any(c[i][j] == 0 for i in range(n) for j in range(n)):
        return None
    comp = RCC5.compose
    if order == "sweep":
        changed = True
        while changed:
            changed = False
            for i, k, j in itertools.product(range(n), repeat=3):
                new = c[i][j] & comp(c[i][k], c[k][j])
                if new != c[i][j]:
                    if not new:
                        return None
                    c[i][j] = new
                    c[j][i] = RCC5.converse(new)
                    changed = True
        return c
    if order not in ("fifo", "lifo"):
        raise ValueError(f"unknown queue order {order!r}")
    queue = deque((i, j) for i in range(n) for j in range(n) if i != j)
    pending = set(queue)
    pop = queue.popleft if order == "fifo" else queue.pop
    while queue:
        i, j = pop()
        pending.discard((i, j))
        for k in range(n):
            if k in (i, j):
                continue
            # refine (i,k) via j and (k,j) via i
            for (a, b, x, y) in ((i, k, (i, j), (j, k)), (k, j, (k, i), (i, j))):
                new = c[a][b] & comp(c[x[0]][x[1]], c[y[0]][y[1]])
                if new != c[a][b]:
                    if not new:
                        return None
                    c[a][b] = new
                    c[b][a] = RCC5.converse(new)
                    for e in ((a, b), (b, a)):
                        if e not in pending:
                            pending.add(e)
                            queue.append(e)
    return c


# --------------------------------------------------------------------------
# finite type CSP


@dataclass
class TypeCSP:
    """Finite CSP over pair variables.

    ``pairs[p] = (i, j)`` with ``i < j``; a value is a basic relation index.
    ``constraints`` is a list of ``(scope, allowed)`` with ``scope`` a tuple
    of pair-variable indices and ``allowed`` a set of value tuples.
    ``triangles`` lists the ``(p_ij, p_jk, p_ik)`` scopes of the built-in
    consistency constraint for every ``i < j < k``.
    """

    variables: list[str]
    pairs: list[tuple[int, int]]
    domains: list[int]
    triangles: list[tuple[int, int, int]]
    constraints: list[tuple[tuple[int, ...], frozenset]]
    unsat: bool = False

    @property
    def triangle_relation(self) -> list[tuple[int, int, int]]:
        return RCC5.triangles()

    def pair_index(self, i: int, j: int) -> int:
        return self._index[(i, j)]

    def __post_init__(self):
        self._index = {p: k for k, p in enumerate(self.pairs)}


def reduce_to_type_csp(instance: Instance) -> TypeCSP:
    pos = {v: i for i, v in enumerate(instance.variables)}
    n = len(instance.variables)
    pairs = list(itertools.combinations(range(n), 2))
    index = {p: k for k, p in enumerate(pairs)}
    domains = [RCC5.full] * len(pairs)
    triangles = [(index[(i, j)], index[(j, k)], index[(i, k)])
                 for i, j, k in itertools.combinations(range(n), 3)]
    constraints = []
    unsat = False
    for c in instance.constraints:
        idx = [pos[a] for a in c.args]
        if len(idx) == 2:
            arg_pairs = [(idx[0], idx[1])]
        else:
            arg_pairs = [(idx[0], idx[1]), (idx[1], idx[2]), (idx[0], idx[2])]
        scope: list[int] = []
        allowed = set()
        for tup in c.relation.allowed_tuples():
            assign = {}
            ok = True
            for (a, b), r in zip(arg_pairs, tup):
                if a == b:
                    ok = r == I_EQ
                elif a < b:
                    ok = assign.setdefault(index[(a, b)], r) == r
                else:
                    rc = _CONV[r]
                    ok = assign.setdefault(index[(b, a)], rc) == rc
                if not ok:
                    break
            if not ok:
                continue
            if not scope:
                scope = sorted(assign)
            allowed.add(tuple(assign[p] for p in scope))
        if not scope:
            # every argument pair is a repeated variable
            if not allowed:
                unsat = True
            continue
        if not allowed:
            unsat = True
            continue
        if len(scope) == 1:
            domains[scope[0]] &= sum(1 << t[0] for t in allowed)
        else:
            constraints.append((tuple(scope), frozenset(allowed)))
    if any(d == 0 for d in domains):
        unsat = True
    return TypeCSP(list(instance.variables), pairs, domains, triangles, constraints, unsat)


def _watch_lists(csp: TypeCSP):
    tri_of = [[] for _ in csp.pairs]
    for t, scope in enumerate(csp.triangles):
        for p in scope:
            tri_of[p].append(t)
    con_of = [[] for _ in csp.pairs]
    for ci, (scope, _) in enumerate(csp.constraints):
        for p in set(scope):
            con_of[p].append(ci)
    return tri_of, con_of


def _propagate(csp: TypeCSP, dom: list[int], queue: Iterable[int], watches) -> bool:
    """Generalised arc consistency on triangle and instance constraints."""
    tri_of, con_of = watches
    comp = RCC5.compose
    conv = RCC5.converse
    queue = deque(queue)
    inq = set(queue)
    while queue:
        p = queue.popleft()
        inq.discard(p)
        for t in tri_of[p]:
            a, b, c = csp.triangles[t]
            # labels: a = (i,j), b = (j,k), c = (i,k)
            da, db, dc = dom[a], dom[b], dom[c]
            nc = dc & comp(da, db)
            na = da & comp(nc, conv(db))
            nb = db & comp(conv(na), nc)
            for v, new in ((a, na), (b, nb), (c, nc)):
                if new != dom[v]:
                    if not new:
                        return False
                    dom[v] = new
                    if v not in inq:
                        inq.add(v)
                        queue.append(v)
        for ci in con_of[p]:
            scope, allowed = csp.constraints[ci]
            supp = [0] * len(scope)
            for tup in allowed:
                if all(dom[v] >> r & 1 for v, r in zip(scope, tup)):
                    for s, r in enumerate(tup):
                        supp[s] |= 1 << r
            for v, m in zip(scope, supp):
                new = dom[v] & m
                if new != dom[v]:
                    if not new:
                        return False
                    dom[v] = new
                    if v not in inq:
                        inq.add(v)
                        queue.append(v)
    return True


def pc_decide(instance: Instance) -> str:
    """(2,3)-consistency on the type CSP: REFUTED is a proof of UNSAT."""
    csp = reduce_to_type_csp(instance)
    if csp.unsat:
        return REFUTED
    dom = list(csp.domains)
    ok = _propagate(csp, dom, range(len(dom)), _watch_lists(csp))
    return UNDECIDED if ok else REFUTED


@dataclass
class SolveResult:
    verdict: str
    model: SetModel | None = None
    network: AtomicNetwork | None = None
    nodes: int = 0


def solve(instance: Instance) -> SolveResult:
    """Complete search over atomic refinements with propagation at each node."""
    csp = reduce_to_type_csp(instance)
    n = len(instance.variables)
    if csp.unsat:
        return SolveResult(UNSAT)
    watches = _watch_lists(csp)
    dom = list(csp.domains)
    if not _propagate(csp, dom, range(len(dom)), watches):
        return SolveResult(UNSAT, nodes=1)
    nodes = 0
    stack = [(dom, None, 0)]
    found = None
    while stack:
        dom, var, bit = stack[-1]
        if var is None:
            best, best_cnt = -1, 99
            for v, d in enumerate(dom):
                cnt = bin(d).count("1")
                if 1 < cnt < best_cnt:
                    best, best_cnt = v, cnt
            if best < 0:
                found = dom
                break
            var = best
        d = dom[var]
        while bit < 5 and not d >> bit & 1:
            bit += 1
        if bit >= 5:
            stack.pop()
            continue
        stack[-1] = (dom, var, bit + 1)
        nodes += 1
        child = list(dom)
        child[var] = 1 << bit
        if _propagate(csp, child, [var], watches):
            stack.append((child, None, 0))
    if found is None:
        return SolveResult(UNSAT, nodes=nodes)
    labels = {csp.pairs[p]: d.bit_length() - 1 for p, d in enumerate(found)}
    network = AtomicNetwork(list(instance.variables), labels)
    if n and not network.triangles_consistent():
        raise ModelVerificationError("search returned an inconsistent labelling")
    model = build_model(network)
    if not model_satisfies(model, instance):
        raise ModelVerificationError("model does not satisfy the instance")
    return SolveResult(SAT, model, network, nodes)


# --------------------------------------------------------------------------
# JSON


def relation_from_json(item: dict, default_name: str = "") -> RelationSpec:
    if not isinstance(item, dict):
        raise InstanceError("relation entries must be objects")
    name = item.get("name") or default_name

    def atom(s):
        if s not in BASIC_NAMES:
            raise InstanceError(f"unknown basic relation {s!r}")
        return BASIC_NAMES.index(s)

    if "triangles" in item:
        if item.get("arity", 3) != 3:
            raise InstanceError(f"relation {name!r}: triangles need arity 3")
        tris = []
        for t in item["triangles"]:
            if not isinstance(t, list) or len(t) != 3:
                raise InstanceError(f"relation {name!r}: triangles have three labels")
            tris.append(tuple(atom(s) for s in t))
        return RelationSpec.ternary(tris, name)
    if "orbits" in item:
        arity = item.get("arity", 2)
        if arity != 2:
            raise InstanceError(f"relation {name!r}: orbit lists need arity 2, got {arity}")
        mask = 0
        for s in item["orbits"]:
            mask |= 1 << atom(s)
        return RelationSpec.binary(mask, name)
    raise InstanceError(f"relation {name!r} needs 'orbits' or 'triangles'")


def instance_from_json(data: dict) -> Instance:
    if not isinstance(data, dict) or "variables" not in data:
        raise InstanceError("instance must be an object with 'variables'")
    variables = data["variables"]
    if not isinstance(variables, list) or not all(isinstance(v, str) for v in variables):
        raise InstanceError("'variables' must be a list of names")
    constraints = []
    for k, item in enumerate(data.get("constraints", [])):
        rel = relation_from_json(item, default_name=item.get("name", "") if isinstance(item, dict) else "")
        args = item.get("args")
        if not isinstance(args, list):
            raise InstanceError(f"constraint {k} needs an 'args' list")
        constraints.append(Constraint(rel, tuple(args)))
    return Instance(list(variables), constraints)


def relation_to_json(rel: RelationSpec) -> dict:
    out = {"name": rel.name} if rel.name else {}
    if rel.arity == 2:
        out["orbits"] = [BASIC_NAMES[i] for i in RCC5.members(rel.orbits)]
    else:
        out["triangles"] = [[BASIC_NAMES[i] for i in t] for t in sorted(rel.triangles)]
    return out


def instance_to_json(instance: Instance) -> dict:
    cons = []
    for c in instance.constraints:
        item = relation_to_json(c.relation)
        item["args"] = list(c.args)
        cons.append(item)
    return {"variables": list(instance.variables), "constraints": cons}


def model_to_json(model: Mapping[str, frozenset]) -> dict:
    return {v: sorted(s) for v, s in model.items()}


def model_from_json(data: dict) -> SetModel:
    if not isinstance(data, dict):
        raise InstanceError("model must be an object")
    out = {}
    for v, toks in data.items():
        if not isinstance(toks, list) or not toks or \
                not all(isinstance(t, int) and not isinstance(t, bool) and t >= 0 for t in toks):
            raise InstanceError(f"model entry {v!r} must be a nonempty list of naturals")
        out[v] = frozenset(toks)
    return out
