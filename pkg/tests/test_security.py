import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abcelect.election import Election
from abcelect.oracles import brute_maximin_support, brute_replacement_check, random_election
from abcelect.rules import RuleError, run_rule
from abcelect.security import (backing_variance, maximin_support, min_approval_weight_subset,
                               replacement_cost, seqpav_replacement_lp, stake_lost_curve)


def test_subset_examples(e1, e3):
    r = min_approval_weight_subset(e3, [0, 1], 2)
    assert r.subset == (0, 1) and r.weight == pytest.approx(0.5) and r.optimal
    r = min_approval_weight_subset(e1, [0, 1, 2], 1)
    assert r.weight == pytest.approx(0.2) and r.subset == (2,)


def test_subset_disjoint_support_is_sum_of_smallest():
    e = Election.from_ballots([[0], [1], [2], [3]], [4, 1, 3, 2], k=4).normalize()
    r = min_approval_weight_subset(e, [0, 1, 2, 3], 2)
    assert r.weight == pytest.approx(0.3)


def test_subset_time_budget_flags_partial():
    rng = np.random.default_rng(0)
    ballots = [sorted(rng.choice(30, size=4, replace=False).tolist()) for _ in range(200)]
    e = Election.from_ballots(ballots, rng.integers(1, 100, 200).tolist(), k=30).normalize()
    r = min_approval_weight_subset(e, list(range(30)), 15, time_budget=0.0)
    assert r.bound <= r.weight + 1e-12
    if not r.optimal:
        assert r.bound < r.weight


def test_enumerate_refuses_large():
    e = Election.from_ballots([[i] for i in range(21)], k=21)
    with pytest.raises(ValueError):
        min_approval_weight_subset(e, list(range(21)), 2, method="enumerate")


def test_maximin_examples(e3):
    value, a = maximin_support(e3, [0, 1])
    assert value == pytest.approx(0.25)
    assert a.supports() == pytest.approx([0.25, 0.25])
    curve = stake_lost_curve(e3, [0, 1], a)
    assert curve == pytest.approx([0.25, 0.5])
    assert backing_variance(a) == pytest.approx(0.0)


def test_maximin_disjoint_singletons():
    e = Election.from_ballots([[0], [1], [2]], [5, 3, 2], k=3)
    value, _ = maximin_support(e, [0, 1, 2])
    assert value == pytest.approx(0.2)


def test_maximin_unsupported_winner_is_zero():
    e = Election.from_ballots([[0]], [1], k=2, candidates=2)
    value, a = maximin_support(e, [0, 1])
    assert value == 0.0
    assert not a.check(e)


def test_backing_variance_definition(e1):
    _, a = maximin_support(e1, [0, 2])
    assert a.supports() == pytest.approx([0.8, 0.2])
    assert backing_variance(a) == pytest.approx(0.09)


def test_replacement_examples(e1):
    assert replacement_cost("av", run_rule("av", e1)[1], 1).cost == pytest.approx(0.3)
    assert replacement_cost("sav", run_rule("sav", e1)[1], 1).cost == pytest.approx(0.2)
    assert replacement_cost("seq-phragmen", run_rule("seq-phragmen", e1)[1], 2).cost == pytest.approx(1.6)


def test_replacement_av_capped(e1):
    q = replacement_cost("av", run_rule("av", e1)[1], 2, ballot_cap=1)
    assert q.cost == pytest.approx(2 * 0.8)
    assert q.voter_count == 2
    assert replacement_cost("av", run_rule("av", e1)[1], 2).voter_count == 1


def test_replacement_rejections(e1):
    with pytest.raises(RuleError):
        replacement_cost("mes", run_rule("mes", e1)[1], 1)
    with pytest.raises(RuleError):
        replacement_cost("sav", run_rule("av", e1)[1], 1)
    with pytest.raises(ValueError):
        replacement_cost("av", run_rule("av", e1)[1], 3)


def test_replacement_check_examples(e1):
    assert brute_replacement_check("av", e1, [(0.3, (0,))])
    assert not brute_replacement_check("av", e1, [(0.3 - 1e-3, (0,))])
    assert not brute_replacement_check("av", e1, [(0.0, (0,))], l=1)


def test_seqpav_quote_uses_program(e1):
    trace = run_rule("seq-pav", e1)[1]
    q = replacement_cost("seq-pav", trace, 2)
    assert q.cost == pytest.approx(2 * trace.per_round[0])
    assert brute_replacement_check("seq-pav", e1, q.witness, 2)


def test_seqpav_program_values():
    assert seqpav_replacement_lp(1)[0] == 1.0
    assert seqpav_replacement_lp(2)[0] == pytest.approx(2.0)
    value, y = seqpav_replacement_lp(3)
    assert value == pytest.approx(8 / 3)
    with pytest.raises(ValueError):
        seqpav_replacement_lp(22)


def test_seqpav_program_solution_is_feasible():
    l = 5
    value, y = seqpav_replacement_lp(l)
    assert sum(y.values()) == pytest.approx(value)

    def marginal(c, step):
        return sum(w / (bin(mask & ((1 << step) - 1)).count("1") + 1)
                   for mask, w in y.items() if mask >> c & 1)

    for i in range(l):
        for j in range(i + 1, l):
            assert marginal(i, i) >= marginal(j, i) - 1e-9
    assert marginal(l - 1, l - 1) >= 1 - 1e-9


seeds = st.integers(0, 10_000)


@settings(max_examples=60, deadline=None)
@given(seeds, st.sampled_from(["av", "seq-phragmen", "phragmms"]))
def test_subset_methods_agree_and_bound_stake(seed, rule):
    e = random_election(seed, n_max=10, m_max=8, k_max=5, positive_support=True)
    w = list(run_rule(rule, e)[0])
    value, a = maximin_support(e, w)
    curve = stake_lost_curve(e, w, a)
    for l in range(1, len(w) + 1):
        ilp = min_approval_weight_subset(e, w, l, method="ilp")
        enum = min_approval_weight_subset(e, w, l, method="enumerate")
        assert ilp.exact_weight == enum.exact_weight
        assert curve[l - 1] <= ilp.weight + 1e-9


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_maximin_bounds_and_identity(seed):
    e = random_election(seed, n_max=10, m_max=8, k_max=6, positive_support=True)
    w = list(run_rule("sav", e)[0])
    value, a = maximin_support(e, w)
    assert not a.check(e)
    assert value <= e.approval_weights[w].min() + 1e-12
    assert value == pytest.approx(float(brute_maximin_support(e, w)), abs=1e-6)


def test_maximin_with_copies():
    e = Election.from_ballots([[0], [0, 1]], [3, 1], k=3, candidates=2).normalize()
    value, a = maximin_support(e, [0, 0, 1])
    assert value == pytest.approx(float(brute_maximin_support(e, [0, 0, 1])), abs=1e-6)
