from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abcelect.election import (Election, ElectionError, approval_weight, as_fraction,
                               exact_approval_weight, normalize, pick_best, supporters, validate)


def test_normalize_exact(e1):
    assert e1.exact_weights == (Fraction(1, 2), Fraction(3, 10), Fraction(1, 5))
    assert e1.is_normalized
    assert normalize(e1) is e1


def test_approval_weights(e1):
    assert e1.approval_weights == pytest.approx([0.8, 0.3, 0.2])
    assert approval_weight(e1, [0, 1]) == pytest.approx(0.8)
    assert approval_weight(e1, []) == 0.0
    assert exact_approval_weight(e1, [1, 2]) == Fraction(1, 2)
    assert supporters(e1, 0) == {0, 1}


def test_unknown_candidate_raises(e1):
    with pytest.raises(ElectionError):
        approval_weight(e1, [7])


def test_normalize_rejects_zero_total():
    with pytest.raises(ElectionError):
        Election.from_ballots([[0]], [0]).normalize()


@pytest.mark.parametrize("value", [True, None, [1], "abc", "1/0"])
def test_as_fraction_rejects(value):
    with pytest.raises(ElectionError):
        as_fraction(value)


def test_as_fraction_forms():
    assert as_fraction("0.3") == Fraction(3, 10)
    assert as_fraction("2/3") == Fraction(2, 3)
    assert as_fraction(4) == 4


def test_validate_messages():
    assert validate(Election.from_ballots([[0]], k=2, candidates=1)) == ["k exceeds candidate count"]
    assert "duplicate approval" in validate(Election.from_ballots([[0, 0]], candidates=1))
    assert "approval references unknown candidate" in validate(Election.from_ballots([[3]], candidates=2))
    assert "ballot exceeds cap" in validate(Election.from_ballots([[0, 1]], ballot_cap=1))
    assert "negative voter weight" in validate(Election.from_ballots([[0]], [-1]))
    assert "total voter weight must be positive" in validate(Election.from_ballots([[0]], [0]))
    assert "duplicate voter identifier" in validate(Election.from_ballots([[0], [0]], voters=["a", "a"]))


def test_ballots_are_cleaned_for_computation():
    e = Election.from_ballots([[0, 0, 5]], candidates=2)
    assert e.ballots == (frozenset({0}),)
    assert e.matrix.toarray().tolist() == [[1.0, 0.0]]


def test_pick_best_ties_to_smallest_index():
    assert pick_best(np.array([0.3, 0.9 / 3, 0.1])) == 0
    assert pick_best(np.array([1.0, 3.0, 3.0 + 1e-12])) == 1
    assert pick_best(np.array([1.0, 2.0]), np.array([True, False])) == 0
    assert pick_best(np.array([1.0, 2.0]), np.array([False, False])) == -1
    assert pick_best(np.array([np.inf, 2.0]), maximize=False) == 1


elections = st.builds(
    lambda ballots, weights: Election.from_ballots(ballots, weights[:len(ballots)], k=1, candidates=5),
    st.lists(st.lists(st.integers(0, 4), unique=True, max_size=5), min_size=1, max_size=8),
    st.lists(st.integers(1, 50), min_size=8, max_size=8),
)


@settings(max_examples=60, deadline=None)
@given(elections)
def test_normalize_idempotent_and_sums_to_one(e):
    n1 = normalize(e)
    assert sum(n1.exact_weights) == 1
    assert normalize(n1) is n1
    assert n1.weights == pytest.approx(e.weights / e.weights.sum())


@settings(max_examples=60, deadline=None)
@given(elections, st.sets(st.integers(0, 4)), st.sets(st.integers(0, 4)))
def test_approval_weight_monotone_and_subadditive(e, s, t):
    e = normalize(e)
    ws, wt, wu = (approval_weight(e, x) for x in (s, t, s | t))
    assert wu >= max(ws, wt) - 1e-12
    assert wu <= ws + wt + 1e-12
    assert 0 <= wu <= 1 + 1e-12
