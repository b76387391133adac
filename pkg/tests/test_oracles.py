from fractions import Fraction

import pytest

from abcelect.election import Election
from abcelect.oracles import (OracleSizeError, brute_balanced_supports, brute_maximin_support,
                              brute_min_avg_satisfaction, brute_min_subset_weight,
                              brute_replacement_check, extend_election, random_election)


def test_reference_values(e3):
    assert brute_min_avg_satisfaction(e3, [0, 1], 1) == 0
    assert brute_min_avg_satisfaction(e3, [0, 1], 2) is None
    assert brute_min_subset_weight(e3, [0, 1], 2) == Fraction(1, 2)
    assert brute_maximin_support(e3, [0, 1]) == Fraction(1, 4)
    assert brute_balanced_supports(e3, [0, 1]) == [Fraction(1, 4)] * 2


def test_disjoint_singletons():
    e = Election.from_ballots([[0], [1], [2]], [5, 3, 2], k=3)
    assert brute_maximin_support(e, [0, 1, 2]) == Fraction(1, 5)
    assert brute_min_subset_weight(e, [0, 1, 2], 1) == Fraction(1, 5)
    assert brute_balanced_supports(e, [0, 1, 2]) == [Fraction(1, 2), Fraction(3, 10), Fraction(1, 5)]


def test_balanced_levels_nested():
    # c1 shared by a heavy voter and c2; c3 alone
    e = Election.from_ballots([[0, 1], [1], [2]], [6, 2, 1], k=3)
    assert brute_balanced_supports(e, [0, 1, 2]) == [Fraction(4, 9), Fraction(4, 9), Fraction(1, 9)]


def test_size_refusal():
    e = Election.from_ballots([[i] for i in range(13)], k=13)
    with pytest.raises(OracleSizeError):
        brute_maximin_support(e, list(range(13)))


def test_extension_places_newcomers_first(e1):
    ext = extend_election(e1, [(0.3, (0,))], 1)
    assert ext.candidates[0] == "new1" and ext.m == 4
    assert ext.ballots[-1] == frozenset({0})
    assert ext.ballots[1] == frozenset({1, 2})


def test_replacement_check(e1):
    assert brute_replacement_check("av", e1, [(0.3, (0,))])
    assert not brute_replacement_check("av", e1, [(Fraction(3, 10) - Fraction(1, 1000), (0,))])
    with pytest.raises(ValueError):
        extend_election(e1, [(1, (2,))], 1)


def test_random_election_deterministic():
    a, b = random_election(5), random_election(5)
    assert a.approvals == b.approvals and a.exact_weights == b.exact_weights
    e = random_election(3, positive_support=True)
    assert all(e.approval_weights > 0)
