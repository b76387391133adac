"""Slow exact reference implementations for tests.

Everything here enumerates and works in rational arithmetic; sizes are
guarded so an accidental call on real data fails fast.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Sequence

from .election import Election, normalize
from .rules import run_rule


class OracleSizeError(ValueError):
    pass


def _sat(election: Election, committee: Sequence[int]) -> list[int]:
    return [sum(1 for c in committee if c in b) for b in election.ballots]


def _non_selected(election: Election, committee, allow_copies):
    chosen = set() if allow_copies else set(committee)
    return [c for c in range(election.m) if c not in chosen]


def brute_min_avg_satisfaction(election: Election, committee: Sequence[int], l: int,
                               allow_copies: bool = False) -> Fraction | None:
    """Exact least average satisfaction of an l-supporting group, or None."""
    el = normalize(election)
    w = el.exact_weights
    sat = _sat(el, committee)
    need = Fraction(l, el.k)
    best = None
    for c in _non_selected(el, committee, allow_copies):
        sup = [v for v, b in enumerate(el.ballots) if c in b and w[v] > 0]
        if len(sup) > 12:
            raise OracleSizeError("more than 12 supporters")
        for r in range(1, len(sup) + 1):
            for grp in itertools.combinations(sup, r):
                gw = sum((w[v] for v in grp), Fraction(0))
                if gw < need:
                    continue
                val = sum((w[v] * sat[v] for v in grp), Fraction(0)) / gw
                if best is None or val < best:
                    best = val
    return best


def _union(el: Election, seats) -> Fraction:
    cands = set(seats)
    return sum((w for w, b in zip(el.exact_weights, el.ballots) if b & cands), Fraction(0))


def brute_min_subset_weight(election: Election, committee: Sequence[int], l: int) -> Fraction:
    if len(committee) > 20:
        raise OracleSizeError("committee larger than 20")
    el = normalize(election)
    return min(_union(el, [committee[j] for j in s])
               for s in itertools.combinations(range(len(committee)), l))


def brute_maximin_support(election: Election, committee: Sequence[int]) -> Fraction:
    """min over nonempty seat subsets of (joint approval weight) / (size)."""
    r = len(committee)
    if r > 12:
        raise OracleSizeError("committee larger than 12")
    el = normalize(election)
    return min(_union(el, [committee[j] for j in s]) / len(s)
               for size in range(1, r + 1)
               for s in itertools.combinations(range(r), size))


def brute_balanced_supports(election: Election, committee: Sequence[int]) -> list[Fraction]:
    """Seat supports of the balanced assignment by level decomposition.

    The least-backed level is the largest seat set X minimising
    w(V_X)/|X|; its supporters pay only X.  Removing both and repeating
    yields every level.
    """
    r = len(committee)
    if r > 12:
        raise OracleSizeError("committee larger than 12")
    el = normalize(election)
    voters = [(w, b) for w, b in zip(el.exact_weights, el.ballots)]
    seats = list(range(r))
    out: list[Fraction] = [Fraction(0)] * r
    while seats:
        best, best_x = None, None
        for size in range(1, len(seats) + 1):
            for x in itertools.combinations(seats, size):
                cands = {committee[j] for j in x}
                val = sum((w for w, b in voters if b & cands), Fraction(0)) / size
                if best is None or val < best or (val == best and size > len(best_x)):
                    best, best_x = val, x
        for j in best_x:
            out[j] = best
        cands = {committee[j] for j in best_x}
        voters = [(w, b) for w, b in voters if not b & cands]
        seats = [j for j in seats if j not in best_x]
        remaining = {committee[j] for j in seats}
        voters = [(w, b & remaining) for w, b in voters]
    return out


def extend_election(election: Election, replacement, l: int) -> Election:
    """Add l new candidates (placed first so ties favour them) and new voters.

    ``replacement`` is a sequence of (weight, ballot) pairs whose ballots
    index the new candidates 0..l-1.  Weights are in units of the
    normalized election.
    """
    el = normalize(election)
    cands = tuple(f"new{i + 1}" for i in range(l)) + el.candidates
    ballots = tuple(tuple(c + l for c in b) for b in el.approvals)
    weights = list(el.exact_weights)
    voters = list(el.voters)
    for q, (wt, b) in enumerate(replacement):
        if any(not 0 <= c < l for c in b):
            raise ValueError("replacement ballots may only approve new candidates")
        ballots += (tuple(b),)
        weights.append(Fraction(wt))
        voters.append(f"new-voter{q + 1}")
    return Election(cands, tuple(voters), tuple(weights), ballots, el.k, None, dict(el.meta))


def brute_replacement_check(rule_id: str, election: Election, replacement, l: int | None = None,
                            allow_copies: bool = False) -> bool:
    """True iff rerunning the rule elects every one of the new candidates."""
    if l is None:
        l = 1 + max((c for _, b in replacement for c in b), default=-1)
    ext = extend_election(election, replacement, l)
    committee, _ = run_rule(rule_id, ext, allow_copies=allow_copies)
    return set(range(l)) <= set(committee)


def random_election(seed: int, n_max: int = 8, m_max: int = 6, k_max: int = 3,
                    weight_max: int = 10, positive_support: bool = False) -> Election:
    """Small random election with integer weights, normalized exactly."""
    rng = random.Random(seed)
    while True:
        m = rng.randint(1, m_max)
        n = rng.randint(1, n_max)
        k = rng.randint(1, min(k_max, m))
        ballots = []
        for _ in range(n):
            size = rng.randint(0, m)
            ballots.append(sorted(rng.sample(range(m), size)))
        weights = [rng.randint(1, weight_max) for _ in range(n)]
        if positive_support and set(range(m)) - {c for b in ballots for c in b}:
            continue
        return Election.from_ballots(ballots, weights, k=k, candidates=m).normalize()


__all__ = [
    "OracleSizeError", "brute_min_avg_satisfaction", "brute_min_subset_weight",
    "brute_maximin_support", "brute_balanced_supports", "extend_election",
    "brute_replacement_check", "random_election",
]
