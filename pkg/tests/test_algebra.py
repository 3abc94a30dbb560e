import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rcc5 import algebra
from rcc5.algebra import (DR, EQ, FULL, O_DR_GT, O_DR_LT, O_FULL, O_PO_LT, O_PP,
                          ORDERED, PO, PP, PPI, PRECEDES, RCC5, SUCCEEDS,
                          compose, compose_ordered, converse, enumerate_orbits,
                          lift_mask, parse_relation, project_mask,
                          triangle_consistent, triangle_presentations)

from .conftest import ordered_set_model_composition, set_model_composition

masks = st.integers(min_value=0, max_value=FULL)
I_EQ, I_PP, I_PPI, I_DR, I_PO = range(5)


class TestCompose:
    def test_pp_dr(self):
        assert compose(PP, DR) == DR

    def test_eq_identity(self):
        assert compose(EQ, PO) == PO
        for r in range(32):
            assert compose(EQ, r) == r
            assert compose(r, EQ) == r

    def test_ppi_pp(self):
        assert compose(PPI, PP) == EQ | PP | PPI | PO

    def test_union(self):
        assert compose(PP | DR, DR) == FULL

    def test_empty(self):
        assert compose(0, PP) == 0
        assert compose(PP, 0) == 0

    def test_po_ppi_contains_dr(self):
        # x={0,1}, y={1,2}, z={2}
        assert compose(PO, PPI) == PPI | DR | PO

    @pytest.mark.parametrize("r1", range(5))
    @pytest.mark.parametrize("r2", range(5))
    def test_table_matches_set_models(self, r1, r2):
        witnessed = set(set_model_composition(6)[(r1, r2)])
        assert RCC5.members(compose(1 << r1, 1 << r2)) == sorted(witnessed)


class TestConverse:
    def test_examples(self):
        assert converse(PP) == PPI
        assert converse(DR) == DR
        assert converse(DR | PP) == DR | PPI

    @given(masks)
    def test_involutive(self, r):
        assert converse(converse(r)) == r

    @given(masks, masks)
    def test_anti_homomorphism(self, r, s):
        assert converse(compose(r, s)) == compose(converse(s), converse(r))

    @given(masks, masks)
    def test_distributes_over_union(self, r, s):
        assert converse(r | s) == converse(r) | converse(s)


@given(masks, masks, masks)
def test_associative(r, s, t):
    assert compose(compose(r, s), t) == compose(r, compose(s, t))


class TestOrdered:
    def test_examples(self):
        assert compose_ordered(O_DR_LT, O_DR_LT) == O_PP | O_DR_LT | O_PO_LT
        assert compose_ordered(O_PP, O_PP) == O_PP
        assert compose_ordered(O_DR_LT, O_DR_GT) == O_FULL

    def test_eq_is_identity(self):
        for o in range(128):
            assert compose_ordered(1, o) == o
            assert compose_ordered(o, 1) == o

    def test_case_formula(self):
        for i, j in itertools.product(range(1, 7), repeat=2):
            oi, oj = 1 << i, 1 << j
            base = lift_mask(compose(project_mask(oi), project_mask(oj)))
            if oi & PRECEDES and oj & PRECEDES:
                expected = base & PRECEDES
            elif oi & SUCCEEDS and oj & SUCCEEDS:
                expected = base & SUCCEEDS
            else:
                expected = base
            assert compose_ordered(oi, oj) == expected

    def test_matches_antilex_set_models(self):
        table = ordered_set_model_composition(5)
        for i, j in itertools.product(range(7), repeat=2):
            assert ORDERED.members(compose_ordered(1 << i, 1 << j)) == sorted(table[(i, j)])

    @given(masks, masks)
    def test_projects_to_compose(self, r, s):
        assert project_mask(compose_ordered(lift_mask(r), lift_mask(s))) == compose(r, s)

    @pytest.mark.parametrize("o", [O_PP, O_DR_LT, O_PO_LT])
    def test_square_contains_pp(self, o):
        assert compose_ordered(o, o) & O_PP

    def test_converse(self):
        assert algebra.converse_ordered(O_DR_LT) == O_DR_GT
        assert algebra.converse_ordered(O_PP) == 1 << 2


class TestTriangles:
    def test_examples(self):
        assert triangle_consistent(I_PP, I_PP, I_PP)
        assert not triangle_consistent(I_PP, I_PP, I_DR)
        assert triangle_consistent(I_DR, I_DR, I_EQ)

    def test_eq_patterns(self):
        assert not triangle_consistent(I_EQ, I_PP, I_DR)
        assert triangle_consistent(I_EQ, I_PP, I_PP)

    @pytest.mark.parametrize("ordered", [False, True])
    def test_presentations_agree(self, ordered):
        calc = ORDERED if ordered else RCC5
        for t in itertools.product(range(calc.n), repeat=3):
            values = {triangle_consistent(*p, ordered=ordered) for p in triangle_presentations(t, ordered)}
            assert len(values) == 1

    def test_counts(self):
        assert len(enumerate_orbits(2)) == 5
        assert len(enumerate_orbits(2, ordered=True)) == 7
        brute = [t for t in itertools.product(range(1, 5), repeat=3)
                 if all(triangle_consistent(*p) for p in triangle_presentations(t))]
        assert len(enumerate_orbits(3, injective=True)) == len(brute) == 41
        assert len(enumerate_orbits(3)) == 54
        assert len(enumerate_orbits(3, ordered=True)) == 145

    def test_sorted_and_consistent(self):
        tris = enumerate_orbits(3)
        assert tris == sorted(tris)
        assert all(triangle_consistent(*t) for t in tris)

    def test_eq_collapse(self):
        # a triangle with x = y reduces to the single pair (y, z)
        for a, b, c in enumerate_orbits(3):
            if a == I_EQ:
                assert b == c

    def test_bad_k(self):
        with pytest.raises(ValueError):
            enumerate_orbits(4)


class TestParsing:
    def test_parse(self):
        assert parse_relation("PP,DR") == PP | DR
        assert parse_relation("1") == FULL
        assert parse_relation("DR_LT,PP", ordered=True) == O_DR_LT | O_PP

    def test_unknown(self):
        with pytest.raises(ValueError):
            parse_relation("XX")

    def test_format(self):
        assert RCC5.format(PP | DR) == "PP,DR"
        assert RCC5.format(FULL) == "1"
        assert RCC5.format(0) == "0"

    def test_format_table(self):
        text = algebra.format_table()
        assert text.splitlines()[0].split()[1:] == list(algebra.BASIC_NAMES)
        assert len(algebra.format_table(ordered=True).splitlines()) == 8
