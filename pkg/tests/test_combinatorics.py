import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from occtime import combinatorics as cb
from oracles import bell_triangle, brute_partitions, rising_poly_coeffs, stirling2_table

# Frozen oracle output: bell_triangle(10) and stirling2_table(10), tests/oracles.py
BELL = [1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975]
STIRLING2_ROW4 = [0, 1, 7, 6, 1]


def test_frozen_tables_match_oracles():
    assert bell_triangle(10) == BELL
    assert stirling2_table(4)[4] == STIRLING2_ROW4


class TestSetPartitions:
    def test_m1(self):
        parts = list(cb.enumerate_set_partitions(1))
        assert [p.blocks for p in parts] == [((1,),)]

    def test_m3_count(self):
        assert len(list(cb.enumerate_set_partitions(3))) == BELL[3] == 5

    def test_m4_two_blocks(self):
        parts = list(cb.enumerate_set_partitions(4))
        assert len(parts) == 15
        assert sum(len(p) == 2 for p in parts) == STIRLING2_ROW4[2] == 7

    @pytest.mark.parametrize("m", range(1, 10))
    def test_counts_match_bell_and_stirling(self, m):
        table = stirling2_table(m)
        by_blocks = Counter(len(p) for p in cb.enumerate_set_partitions(m))
        assert sum(by_blocks.values()) == BELL[m]
        for k in range(1, m + 1):
            assert by_blocks[k] == table[m][k]

    @pytest.mark.parametrize("m", range(1, 7))
    def test_same_set_as_brute_force(self, m):
        canon = lambda blocks: frozenset(frozenset(b) for b in blocks)
        ours = [canon(p.blocks) for p in cb.enumerate_set_partitions(m)]
        assert len(set(ours)) == len(ours)
        assert set(ours) == {canon(b) for b in brute_partitions(range(1, m + 1))}

    def test_cap(self):
        with pytest.raises(cb.PartitionCapError):
            next(cb.enumerate_set_partitions(13))
        assert sum(1 for _ in cb.enumerate_set_partitions(3, cap=3)) == 5
        with pytest.raises(ValueError):
            next(cb.enumerate_set_partitions(0))

    def test_set_partition_validates(self):
        with pytest.raises(ValueError):
            cb.SetPartition(3, ((1, 2),))
        assert cb.SetPartition(3, ((1, 3), (2,))).sizes == (2, 1)


class TestBlockProfiles:
    def test_m2(self):
        assert {(p.sizes, p.weight) for p in cb.block_profiles(2)} == {((2,), 1), ((1, 1), 1)}

    def test_m3(self):
        got = {p.sizes: p.weight for p in cb.block_profiles(3)}
        assert got == {(3,): 1, (2, 1): 3, (1, 1, 1): 1}
        assert sum(got.values()) == 5

    def test_m4_22(self):
        got = {p.sizes: p.weight for p in cb.block_profiles(4)}
        assert got[(2, 2)] == 3 == math.factorial(4) // (math.factorial(2) ** 2 * math.factorial(2))

    @pytest.mark.parametrize("m", range(1, 9))
    def test_weights_count_partitions(self, m):
        enumerated = Counter(p.sizes for p in cb.enumerate_set_partitions(m))
        assert {p.sizes: p.weight for p in cb.block_profiles(m)} == dict(enumerated)

    @pytest.mark.parametrize("m", range(1, 9))
    def test_collapse_with_prime_weights(self, m):
        primes = [2, 3, 5, 7, 11, 13, 17, 19]
        naive = sum(math.prod(primes[len(b) - 1] for b in p.blocks) for p in cb.enumerate_set_partitions(m))
        collapsed = sum(p.weight * math.prod(primes[k - 1] for k in p.sizes) for p in cb.block_profiles(m))
        assert naive == collapsed

    def test_m12_is_cheap(self):
        profs = cb.block_profiles(12)
        assert len(profs) == 77
        assert sum(p.weight for p in profs) == cb.bell_number(12) == 4213597


class TestStirlingAndRising:
    def test_diagonal(self):
        for m in range(8):
            assert cb.unsigned_stirling_first(m, m) == 1

    def test_small(self):
        assert cb.unsigned_stirling_first(3, 2) == 3
        assert cb.unsigned_stirling_first(4, 2) == 11
        assert cb.unsigned_stirling_first(2, 5) == 0

    def test_against_cycle_weights(self):
        # c(m, b) = sum over partitions with b blocks of prod (|B| - 1)!
        for m in range(1, 7):
            for b in range(1, m + 1):
                brute = sum(
                    math.prod(math.factorial(len(x) - 1) for x in p) for p in brute_partitions(range(m)) if len(p) == b
                )
                assert cb.unsigned_stirling_first(m, b) == brute

    @pytest.mark.parametrize("m", range(0, 11))
    def test_against_polynomial_coefficients(self, m):
        assert [cb.unsigned_stirling_first(m, b) for b in range(m + 1)] == rising_poly_coeffs(m)

    @pytest.mark.parametrize("c", [Fraction(1, 3), Fraction(1, 2), Fraction(2, 3)])
    def test_identity(self, c):
        for m in range(11):
            assert sum(cb.unsigned_stirling_first(m, b) * c**b for b in range(m + 1)) == cb.rising_factorial(c, m)

    def test_rising(self):
        assert cb.rising_factorial(Fraction(1, 2), 2) == Fraction(3, 4)
        assert cb.rising_factorial(0.7, 0) == 1
        assert isinstance(cb.rising_factorial(Fraction(1, 3), 4), Fraction)
        assert cb.rising_factorial(1, 5) == 120

    def test_stirling_second_and_bell(self):
        table = stirling2_table(9)
        for m in range(10):
            assert cb.bell_number(m) == BELL[m]
            for k in range(m + 1):
                assert cb.stirling_second(m, k) == table[m][k]


class TestBell:
    w = [Fraction(2), Fraction(3), Fraction(5), Fraction(7), Fraction(11), Fraction(13)]

    def test_single_block_and_singletons(self):
        for k in range(1, 7):
            assert cb.partial_bell(k, 1, self.w) == self.w[k - 1]
            assert cb.partial_bell(k, k, self.w) == self.w[0] ** k

    def test_b32(self):
        assert cb.partial_bell(3, 2, self.w) == 3 * self.w[0] * self.w[1]

    def test_l_above_k(self):
        assert cb.partial_bell(2, 3, self.w) == 0

    @pytest.mark.parametrize("k", range(1, 7))
    def test_partial_against_enumeration(self, k):
        for l in range(1, k + 1):
            brute = sum(math.prod(self.w[len(b) - 1] for b in p) for p in brute_partitions(range(k)) if len(p) == l)
            assert cb.partial_bell(k, l, self.w) == brute

    def test_complete(self):
        v = [Fraction(1)] * 6
        assert cb.complete_bell(1, v, self.w) == v[0] * self.w[0]
        w = [Fraction(math.factorial(k - 1), 2) for k in range(1, 7)]
        assert cb.complete_bell(2, v, w) / 2 == Fraction(3, 8)


class TestArcsineWalk:
    def test_values(self):
        assert cb.arcsine_walk_moment(0) == 1
        assert cb.arcsine_walk_moment(1) == Fraction(1, 2)
        assert cb.arcsine_walk_moment(2) == Fraction(3, 8)
        assert cb.arcsine_walk_moment(3) == Fraction(5, 16)
        assert cb.arcsine_walk_moment(4) == Fraction(35, 128)

    @pytest.mark.parametrize("m", [1, 2, 10, 30])
    def test_recursion(self, m):
        assert cb.persistence_recursion_check(m)

    def test_m2_terms(self):
        p = cb.arcsine_walk_moment
        assert p(2) * p(0) + p(1) * p(1) + p(0) * p(2) == Fraction(3, 8) + Fraction(1, 4) + Fraction(3, 8) == 1


class TestShiftsAndBaxter:
    def test_shifts(self):
        assert cb.cyclic_shifts(1) == [(0,)]
        applied = [tuple(cb.apply_permutation(s, "abc")) for s in cb.cyclic_shifts(3)]
        assert applied == [("a", "b", "c"), ("b", "c", "a"), ("c", "a", "b")]

    def test_half_space(self):
        assert cb.left_half_space_contains((1, 0), (0.3, 0.1))
        assert not cb.left_half_space_contains((1, 0), (0.3, -0.1))
        assert cb.left_half_space_contains((1, 0), (-2.0, 0.0))
        with pytest.raises(ValueError):
            cb.left_half_space_contains((0, 0), (1, 1))

    def test_small_cases(self):
        assert cb.baxter_unique_shift([(1.0, 0.0)]) == 0
        assert cb.baxter_unique_shift([(1.0, 1.0), (1.0, -1.0)]) == 0
        assert cb.baxter_unique_shift([(1.0, -1.0), (1.0, 1.0)]) == 1

    def test_degenerate(self):
        # collinear points: every shift stays on the boundary line
        with pytest.raises(cb.DegeneracyError) as info:
            cb.baxter_unique_shift([(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)])
        assert info.value.count == 3
        with pytest.raises(cb.DegeneracyError):
            cb.baxter_unique_shift([(1.0, 0.0), (-1.0, 0.0)])

    @pytest.mark.parametrize("n", range(2, 9))
    def test_random_gaussian_unique(self, n):
        rng = np.random.default_rng(n)
        pts = rng.standard_normal((2000, n, 2))
        counts = cb.baxter_shift_counts(pts)
        assert np.all(counts == 1)
        # vectorized count agrees with the scalar path
        for trial in pts[:50]:
            assert len(cb.admissible_shifts(trial)) == 1

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=1, max_size=7))
    def test_integer_points_never_zero_shifts(self, pts):
        # at least one shift is always admissible (argmin argument); ties can add more
        if sum(p[0] for p in pts) == 0 and sum(p[1] for p in pts) == 0:
            return
        assert len(cb.admissible_shifts(pts)) >= 1


@settings(max_examples=50, deadline=None)
@given(st.fractions(min_value=-3, max_value=3, max_denominator=50), st.integers(0, 8))
def test_stirling_rising_property(c, m):
    assert sum(cb.unsigned_stirling_first(m, b) * c**b for b in range(m + 1)) == cb.rising_factorial(c, m)
