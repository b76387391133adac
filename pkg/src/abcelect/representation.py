"""Underrepresentation measures.

All measures interpret voter weights relative to their total, so they can be
applied to raw-stake elections directly.  In copy mode every candidate counts
as non-selected, since another copy of it could always be added.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .election import EPS, Election, normalize


def satisfaction(election: Election, committee: Sequence[int]) -> np.ndarray:
    """|A_v ∩ W| per voter, counting repeated seats."""
    counts = np.bincount(np.asarray(committee, dtype=np.int64), minlength=election.m).astype(float)
    return election.matrix @ counts


def _weights(election: Election) -> np.ndarray:
    return normalize(election).weights


def pav_score(election: Election, committee: Sequence[int]) -> float:
    sat = satisfaction(election, committee).astype(np.int64)
    harmonic = np.concatenate(([0.0], np.cumsum(1.0 / np.arange(1, max(sat.max(initial=0), 1) + 1))))
    return float(math.fsum(_weights(election) * harmonic[sat]))


def weighted_satisfaction(election: Election, committee: Sequence[int]) -> float:
    return float(math.fsum(_weights(election) * satisfaction(election, committee)))


def _non_selected(election: Election, committee: Sequence[int], allow_copies: bool) -> np.ndarray:
    mask = np.ones(election.m, dtype=bool)
    if not allow_copies:
        mask[list(committee)] = False
    return mask


def _weight_by_satisfaction(election: Election, committee: Sequence[int]):
    """Matrix M[c, s] = weight of c's supporters with exactly s committee members."""
    sat = satisfaction(election, committee).astype(np.int64)
    top = int(sat.max(initial=0))
    onehot = sp.csr_matrix((_weights(election), (np.arange(election.n), sat)),
                           shape=(election.n, top + 1))
    return (election.matrix_t @ onehot).toarray()


def ejr_violations(election: Election, committee: Sequence[int], level: str = "EJR+",
                   allow_copies: bool = False) -> tuple[int, list[int]]:
    """Non-selected candidates violating JR or EJR+.

    ``c`` violates EJR+ when, for some ``l`` in 1..k, the supporters of ``c``
    with fewer than ``l`` committee members weigh at least ``l/k``; JR only
    looks at ``l = 1``.
    """
    level = level.upper()
    if level not in ("JR", "EJR+"):
        raise ValueError(f"unknown level {level!r}")
    k = election.k
    by_sat = _weight_by_satisfaction(election, committee)
    below = np.cumsum(by_sat, axis=1)  # below[:, l-1] = weight with fewer than l members
    top = by_sat.shape[1]
    lmax = 1 if level == "JR" else min(k, top + 1)
    ls = np.arange(1, lmax + 1)
    cols = np.minimum(ls - 1, top - 1)
    violated = (below[:, cols] >= ls / k - EPS).any(axis=1)
    violated &= _non_selected(election, committee, allow_copies)
    bad = np.flatnonzero(violated).tolist()
    return len(bad), bad


@dataclass
class GroupRecord:
    l: int
    candidate: int | None
    group_weight: float
    value: float | None
    census: int


@dataclass
class GroupReport:
    """Per-l supporting-group summary; ``value`` is None when no group exists."""

    records: list[GroupRecord]

    @property
    def census(self) -> list[int]:
        return [r.census for r in self.records]


def supporting_group_census(election: Election, committee: Sequence[int],
                            allow_copies: bool = False, with_groups: bool = False,
                            ls: Iterable[int] | None = None) -> GroupReport:
    """For each l, count non-selected candidates with an l-supporting group.

    With ``with_groups`` the worst group (lowest average satisfaction) is
    also located for every l.
    """
    wc = normalize(election).approval_weights[_non_selected(election, committee, allow_copies)]
    k = election.k
    records = []
    for l in (range(1, k + 1) if ls is None else ls):
        count = int((wc >= l / k - EPS).sum())
        rec = GroupRecord(l, None, 0.0, None, count)
        if with_groups and count:
            res = min_avg_satisfaction(election, committee, l, allow_copies)
            rec.candidate, rec.group_weight, rec.value = res.candidate, res.group_weight, res.value
        records.append(rec)
    return GroupReport(records)


@dataclass
class MinAvgResult:
    value: float | None
    candidate: int | None = None
    group: list[int] = field(default_factory=list)
    group_weight: float = 0.0
    exact: bool = True

    @property
    def exists(self) -> bool:
        return self.value is not None


def _cover_knapsack(costs, weights, need, node_budget):
    """min sum(costs[S]) subject to sum(weights[S]) >= need (positive costs).

    Depth-first branch and bound with the fractional greedy bound; items must
    be sorted by cost/weight ascending.  Returns (cost, chosen, exact).
    """
    n = len(costs)
    suffix_w = np.concatenate((np.cumsum(weights[::-1])[::-1], [0.0]))
    best = [math.inf, None]
    nodes = [0]

    def bound(i, rem):
        total = 0.0
        while i < n and rem > EPS:
            if weights[i] >= rem:
                return total + costs[i] * rem / weights[i]
            total += costs[i]
            rem -= weights[i]
            i += 1
        return total if rem <= EPS else math.inf

    def dfs(i, rem, cost, chosen):
        nodes[0] += 1
        if rem <= EPS:
            if cost < best[0]:
                best[0], best[1] = cost, list(chosen)
            return
        if i >= n or suffix_w[i] < rem - EPS or nodes[0] > node_budget:
            return
        if cost + bound(i, rem) >= best[0] - 1e-15:
            return
        chosen.append(i)
        dfs(i + 1, rem - weights[i], cost + costs[i], chosen)
        chosen.pop()
        dfs(i + 1, rem, cost, chosen)

    dfs(0, need, 0.0, [])
    return best[0], best[1] or [], nodes[0] <= node_budget


def _min_avg_for_candidate(w, s, need, node_budget):
    """Least weighted-average satisfaction over subsets of weight >= need.

    Dinkelbach iteration on the ratio; each step includes every voter below
    the current ratio for free and covers the remainder exactly.
    """
    order = np.argsort(s, kind="stable")
    w, s = w[order], s[order]
    # initial feasible group: shortest ascending prefix
    csum = np.cumsum(w)
    p = int(np.searchsorted(csum, need - EPS)) + 1
    group = list(range(p))
    lam = float(np.dot(w[:p], s[:p]) / csum[p - 1])
    exact = True
    for _ in range(64):
        low = s <= lam
        base = list(np.flatnonzero(low))
        rem = need - w[low].sum()
        if rem <= EPS:
            cand = base
        else:
            hi = np.flatnonzero(~low)
            hi = hi[np.lexsort((-w[hi], s[hi]))]
            costs = w[hi] * (s[hi] - lam)
            _, chosen, ok = _cover_knapsack(costs, w[hi], rem, node_budget)
            exact &= ok
            cand = base + [int(hi[i]) for i in chosen]
        ww = w[cand].sum()
        new = float(np.dot(w[cand], s[cand]) / ww)
        if new >= lam - 1e-12:
            break
        lam, group = new, cand
    return lam, [int(order[i]) for i in group], exact


def min_avg_satisfaction(election: Election, committee: Sequence[int], l: int,
                         allow_copies: bool = False, node_budget: int = 200_000) -> MinAvgResult:
    """Lowest average satisfaction of any l-supporting group.

    Minimises ``sum(w(v)|A_v ∩ W|) / w(V')`` over non-selected candidates
    ``c`` and groups ``V' ⊆ V_c`` with ``w(V') >= l/k``.  The per-candidate
    subproblem is solved exactly by a ratio iteration over a covering
    knapsack; ``exact`` turns False only if the branch-and-bound node budget
    ran out.
    """
    k = election.k
    if not 1 <= l <= k:
        raise ValueError("l must lie in 1..k")
    el = normalize(election)
    need = l / k
    sat = satisfaction(el, committee)
    w = el.weights
    at = el.matrix_t
    result = MinAvgResult(None)
    for c in np.flatnonzero(_non_selected(el, committee, allow_copies)):
        sup = at.indices[at.indptr[c]:at.indptr[c + 1]]
        sup = sup[w[sup] > 0]
        if w[sup].sum() < need - EPS:
            continue
        # a lower bound: the best conceivable average is the smallest satisfaction
        if result.value is not None and sat[sup].min() >= result.value:
            continue
        val, grp, ok = _min_avg_for_candidate(w[sup], sat[sup], need, node_budget)
        if result.value is None or val < result.value - 1e-12:
            members = sorted(int(sup[i]) for i in grp)
            result = MinAvgResult(val, int(c), members, float(w[members].sum()), ok)
        elif not ok:
            result.exact = False
    return result


@dataclass
class PriceSystem:
    price: float
    payments: dict[tuple[int, int], float]

    def check(self, election: Election, committee: Sequence[int], tol: float = 1e-9) -> list[str]:
        """Verify budget, approval and equal-price conditions."""
        problems = []
        w = _weights(election)
        spent = np.zeros(election.n)
        per_seat = np.zeros(len(committee))
        for (v, j), x in self.payments.items():
            if x < -tol:
                problems.append("negative payment")
            if committee[j] not in election.ballots[v] and x > tol:
                problems.append("payment for unapproved winner")
            spent[v] += x
            per_seat[j] += x
        if np.any(spent > w + tol):
            problems.append("voter exceeds budget")
        if np.any(np.abs(per_seat - self.price) > tol):
            problems.append("winner payments differ from price")
        return sorted(set(problems))


@dataclass
class PriceabilityResult:
    gap: float
    normalized_gap: float | None
    system: PriceSystem
    exceeding: list[int]
    spare: np.ndarray = field(repr=False)
    diagnostic: str = ""


def priceability_gap(election: Election, committee: Sequence[int],
                     allow_copies: bool = False) -> PriceabilityResult:
    """Price system minimising (max spare money of a non-selected candidate) - price.

    Stage one minimises the gap ``g``; stage two maximises the price among
    gap-optimal systems.  Voters approving no winner cannot pay, so they
    enter only as spare money.  A committee is priceable iff ``gap <= 0``.
    """
    committee = list(committee)
    if not committee:
        raise ValueError("committee must be nonempty")
    el = normalize(election)
    w = el.weights
    r = len(committee)
    pat = el.matrix.tocsc()[:, committee].tocsr()
    pat.sort_indices()
    rows = np.repeat(np.arange(el.n), np.diff(pat.indptr))
    seat = pat.indices
    nf = pat.nnz
    # variables: f (one per approved voter/seat pair), p, g
    ip, ig = nf, nf + 1
    nvar = nf + 2
    others = np.flatnonzero(_non_selected(el, committee, allow_copies))

    # budget rows: sum_j f(v, j) <= w(v)
    payers = np.unique(rows)
    row_of = np.searchsorted(payers, rows)
    a_budget = sp.csr_matrix((np.ones(nf), (row_of, np.arange(nf))), shape=(len(payers), nvar))
    b_budget = w[payers]
    # spare rows: sum_{v in V_c} w(v) - sum f(v, .) - p - g <= 0
    at = el.matrix_t[others]
    at_f = at[:, rows] if nf else sp.csr_matrix((len(others), 0))
    a_spare = sp.hstack([-at_f, sp.csr_matrix(np.column_stack([-np.ones(len(others)), -np.ones(len(others))]))])
    b_spare = -(at @ w)
    # vacuous spare row: -p - g <= 0
    a_vac = sp.csr_matrix(([-1.0, -1.0], ([0, 0], [ip, ig])), shape=(1, nvar))
    a_ub = sp.vstack([a_budget, a_spare, a_vac]).tocsr()
    b_ub = np.concatenate([b_budget, b_spare, [0.0]])
    # price rows: sum_v f(v, j) - p = 0
    a_eq = sp.hstack([sp.csr_matrix((np.ones(nf), (seat, np.arange(nf))), shape=(r, nf)),
                      sp.csr_matrix(np.column_stack([-np.ones(r), np.zeros(r)]))]).tocsr()
    b_eq = np.zeros(r)
    bounds = [(0, None)] * nf + [(0, 1), (None, None)]

    c1 = np.zeros(nvar)
    c1[ig] = 1.0
    res = linprog(c1, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
    diagnostic = ""
    if res.status != 0:
        x = np.zeros(nvar)
        diagnostic = f"LP failed: {res.message}"
    else:
        g_star = res.x[ig]
        c2 = np.zeros(nvar)
        c2[ip] = -1.0
        a2 = sp.vstack([a_ub, sp.csr_matrix(([1.0], ([0], [ig])), shape=(1, nvar))]).tocsr()
        b2 = np.concatenate([b_ub, [g_star + 1e-9 * max(1.0, abs(g_star))]])
        res2 = linprog(c2, A_ub=a2, b_ub=b2, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
        x = res2.x if res2.status == 0 else res.x

    # Repair solver tolerances so the returned system holds exactly.
    f = np.maximum(x[:nf], 0.0)
    spent = np.bincount(rows, weights=f, minlength=el.n)
    over = spent > w
    if over.any():
        scale = np.ones(el.n)
        scale[over] = w[over] / spent[over]
        f *= scale[rows]
    per_seat = np.bincount(seat, weights=f, minlength=r)
    price = float(per_seat.min()) if r else 0.0
    f *= np.divide(price, per_seat, out=np.zeros(r), where=per_seat > 0)[seat]
    spent = np.bincount(rows, weights=f, minlength=el.n)
    spare = el.matrix_t @ (w - spent)
    spare_others = spare[others]
    gap = float(max(spare_others.max(initial=0.0), 0.0) - price)
    exceeding = others[spare_others > price + EPS].tolist()
    payments = {(int(v), int(j)): float(x) for v, j, x in zip(rows, seat, f) if x > 0}
    return PriceabilityResult(
        gap=gap,
        normalized_gap=gap / price if price > 0 else None,
        system=PriceSystem(price, payments),
        exceeding=exceeding,
        spare=spare,
        diagnostic=diagnostic,
    )


__all__ = [
    "satisfaction", "pav_score", "weighted_satisfaction", "ejr_violations",
    "supporting_group_census", "GroupReport", "GroupRecord", "min_avg_satisfaction", "MinAvgResult", "PriceSystem",
    "PriceabilityResult", "priceability_gap",
]
