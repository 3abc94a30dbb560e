import random

import pytest

from rcc5 import kernel
from rcc5.clone import (BASIC, MAJORITY, all_binary_unions, behaviour_problem,
                        restrict_cyclic_rho, restrict_eta, restrict_rho, restrict_wnu, AND)

pytest.importorskip("rcc5._ckernel")


def problems():
    p = behaviour_problem(BASIC, 2)
    yield "plain2", p
    p = behaviour_problem(BASIC, 2)
    restrict_eta(p, AND)
    yield "wedge", p
    p = behaviour_problem(BASIC, 3)
    restrict_cyclic_rho(p)
    yield "cyclic", p
    p = behaviour_problem(BASIC, 3)
    restrict_rho(p, MAJORITY)
    yield "majority", p
    p = behaviour_problem(BASIC, 3, ordered=False)
    restrict_wnu(p)
    yield "wnu3", p
    p = behaviour_problem(all_binary_unions(), 2)
    restrict_eta(p, AND)
    yield "unions-wedge", p


CASES = list(problems())


@pytest.mark.parametrize("name,prob", CASES, ids=[c[0] for c in CASES])
def test_search_identical(name, prob):
    py = kernel.search(prob, impl="python")
    cy = kernel.search(prob, impl="cython")
    assert py == cy


@pytest.mark.parametrize("name,prob", CASES, ids=[c[0] for c in CASES])
def test_propagate_identical(name, prob):
    rng = random.Random(name)
    for _ in range(20 if prob.k == 2 else 4):
        dom = bytearray(prob.domains)
        for _ in range(3):
            c = rng.randrange(prob.ncells)
            bits = [b for b in range(prob.n) if dom[c] >> b & 1]
            if bits:
                dom[c] = 1 << rng.choice(bits)
        assert kernel.propagate(prob, dom, impl="python") == kernel.propagate(prob, dom, impl="cython")


def test_node_limit():
    prob = CASES[1][1]
    cy = kernel.search(prob, max_nodes=1, impl="cython")
    assert cy[0] is None and not cy[2]
    assert kernel.search(prob, max_nodes=1, impl="python") == cy


def test_unknown_impl():
    with pytest.raises(ValueError):
        kernel.get("fortran")


def test_active():
    assert kernel.IMPLEMENTATION in ("python", "cython")
