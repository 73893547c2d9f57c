import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gapforge.errors import DomainError
from gapforge.gapseq import (
    GapSequence,
    as_gamma,
    ciura_sequence,
    gamma_increment,
    gamma_sequence,
    tokuda_sequence,
    truncate_for_size,
)

BEST_GAMMA = "2.243609061420001"
BEST_SEQ = (1, 4, 9, 20, 45, 102, 230, 516, 1158, 2599, 5831, 13082, 29351,
            65853, 147748, 331490, 743735)
TOKUDA = (1, 4, 9, 20, 46, 103, 233, 525, 1182, 2660, 5985, 13467, 30301,
          68178, 153401, 345152, 776591)


def direct_increment(gamma: Fraction, k: int) -> int:
    # independent route: sum the powers one by one instead of the closed form
    return math.ceil(sum(gamma**i for i in range(k)))


gammas = st.fractions(min_value=Fraction(11, 10), max_value=Fraction(5))


@pytest.mark.parametrize(
    "gamma, k, expected",
    [(Fraction(9, 4), 5, 46), (2, 4, 15), (BEST_GAMMA, 7, 230)],
)
def test_gamma_increment_examples(gamma, k, expected):
    assert gamma_increment(gamma, k) == expected


@pytest.mark.parametrize("bad", [1, Fraction(1, 2), "0.99", "1"])
def test_gamma_at_most_one_is_rejected(bad):
    with pytest.raises(DomainError):
        gamma_increment(bad, 3)


def test_float_gamma_is_read_as_its_decimal():
    assert as_gamma(2.24) == Fraction(224, 100)
    assert as_gamma("9/4") == Fraction(9, 4)


@settings(max_examples=200, deadline=None)
@given(gammas, st.integers(min_value=1, max_value=40))
def test_increment_matches_direct_summation(gamma, k):
    assert gamma_increment(gamma, k) == direct_increment(gamma, k)


def test_ceiling_at_exact_integer_sum():
    # S_3(2) == 7 exactly: the ceiling must not round up to 8
    assert gamma_increment(2, 3) == 7
    # one part in 10**30 above 2 pushes it over
    assert gamma_increment(Fraction(2) + Fraction(1, 10**30), 3) == 8


def test_gamma_sequence_examples():
    assert gamma_sequence("2.24", 50000).increments == (
        1, 4, 9, 20, 45, 102, 228, 511, 1145, 2565, 5745, 12869, 28827)
    assert gamma_sequence("2.26", 50000).increments == (
        1, 4, 9, 20, 46, 105, 239, 540, 1220, 2758, 6235, 14090, 31845)
    assert gamma_sequence(2, 10).increments == (1, 3, 7)


def test_best_gamma_sequence():
    assert gamma_sequence(BEST_GAMMA, 10**6).increments == BEST_SEQ


def test_tokuda_examples():
    assert tokuda_sequence(800000).increments == TOKUDA
    assert tokuda_sequence(50000).increments[-1] == 30301
    assert tokuda_sequence(1).increments == (1,)


def test_tokuda_equals_gamma_nine_quarters_up_to_1e8():
    seq = tokuda_sequence(10**8)
    assert seq == gamma_sequence(Fraction(9, 4), 10**8)
    assert seq.source == "tokuda"


def test_ciura_examples():
    assert ciura_sequence(4000).increments == (1, 4, 10, 23, 57, 132, 301, 701)
    assert ciura_sequence(5000, extended=True).increments[-3:] == (701, 1577, 3548)
    assert ciura_sequence(5).increments == (1, 4)


def test_ciura_extension_is_exact():
    seq = ciura_sequence(10**15, extended=True).increments
    for a, b in zip(seq[7:], seq[8:]):
        assert b == (9 * a) // 4


def test_truncate_examples():
    t = truncate_for_size(tokuda_sequence(10**6), 100000)
    assert len(t) == 13 and t[-1] == 30301
    assert truncate_for_size(tokuda_sequence(100), 2).increments == (1,)
    assert truncate_for_size(gamma_sequence(BEST_GAMMA, 10**7), 10**6)[-1] == 331490


def test_truncate_keeps_one_for_tiny_inputs():
    assert truncate_for_size(GapSequence((1, 4)), 1).increments == (1,)


def test_truncate_boundary_is_rational():
    # h == n/2 stays, h == (n+1)/2 for odd n goes
    assert truncate_for_size(GapSequence((1, 4, 9)), 18).increments == (1, 4, 9)
    assert truncate_for_size(GapSequence((1, 4, 9)), 17).increments == (1, 4)


@settings(deadline=None)
@given(gammas, st.integers(min_value=1, max_value=10**6), st.integers(min_value=1, max_value=10**6))
def test_truncation_idempotent(gamma, limit, n):
    s = gamma_sequence(gamma, limit)
    once = truncate_for_size(s, n)
    assert truncate_for_size(once, n) == once


@given(gammas, st.integers(min_value=1, max_value=60))
def test_increments_strictly_increase_from_one(gamma, k):
    assert gamma_increment(gamma, 1) == 1
    assert gamma_increment(gamma, k + 1) > gamma_increment(gamma, k)


@settings(deadline=None)
@given(gammas, st.integers(min_value=1, max_value=10**9))
def test_sequence_is_exactly_the_terms_below_limit(gamma, limit):
    s = gamma_sequence(gamma, limit)
    assert s[0] == 1
    assert all(h <= limit for h in s)
    assert gamma_increment(gamma, len(s) + 1) > limit


def test_gap_sequence_invariants():
    with pytest.raises(ValueError):
        GapSequence(())
    with pytest.raises(ValueError):
        GapSequence((2, 3))
    with pytest.raises(ValueError):
        GapSequence((1, 4, 4))


def last_disorder(g1, g2, kmax=64):
    """Largest k <= kmax with h_k(g1) >= h_k(g2) (0 if none)."""
    last = 0
    for k in range(1, kmax + 1):
        if gamma_increment(g1, k) >= gamma_increment(g2, k):
            last = k
    return last


def test_eventual_monotonicity_grid():
    # 120 pairs on a grid in (2.2, 2.4), including close neighbours
    pts = [Fraction(22, 10) + Fraction(i, 500) for i in range(1, 100)]
    pairs = [(a, b) for a, b in zip(pts, pts[1:])]
    pairs += [(pts[i], pts[i] + Fraction(1, 10**9)) for i in range(0, 99, 5)]
    assert len(pairs) >= 100
    for g1, g2 in pairs:
        assert last_disorder(g1, g2) < 64, (g1, g2)


@settings(max_examples=100)
@given(st.fractions(min_value=Fraction(22, 10), max_value=Fraction(24, 10)),
       st.fractions(min_value=Fraction(1, 10**6), max_value=Fraction(1, 10)))
def test_eventual_monotonicity_property(g1, delta):
    g2 = g1 + delta
    k0 = last_disorder(g1, g2)
    assert k0 < 64
    assert all(gamma_increment(g1, k) < gamma_increment(g2, k) for k in range(k0 + 1, 65))
