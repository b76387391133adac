"""Overrepresentation measures and the cost of replacing committee members.

Weights are interpreted relative to their total, as in
:mod:`abcelect.representation`.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog
from scipy.sparse.csgraph import maximum_flow

from .assignment import VoteAssignment, seat_pattern
from .election import EPS, Election, exact_approval_weight, normalize
from .rules import RuleError, SelectionTrace, canonical_rule


# ---------------------------------------------------------------------------
# minimum approval weight of committee subsets


@dataclass
class SubsetWeightResult:
    l: int
    subset: tuple[int, ...]
    weight: float
    optimal: bool = True
    bound: float | None = None
    exact_weight: Fraction | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.bound is None:
            self.bound = self.weight


def _reduced_cover(election: Election, committee: Sequence[int]):
    """Distinct restricted ballots as a group x seat 0/1 matrix plus group weights."""
    pat = seat_pattern(election, committee)
    rows = {}
    w = election.weights
    for v in range(election.n):
        key = tuple(pat.indices[pat.indptr[v]:pat.indptr[v + 1]].tolist())
        if key and w[v] > 0:
            rows[key] = rows.get(key, 0.0) + w[v]
    keys = list(rows)
    r = len(committee)
    mat = np.zeros((len(keys), r), dtype=bool)
    for g, key in enumerate(keys):
        mat[g, list(key)] = True
    return mat, np.array([rows[k] for k in keys])


def _union_weight(mat, gw, subset) -> float:
    if not subset:
        return 0.0
    return float(math.fsum(gw[mat[:, list(subset)].any(axis=1)]))


def _greedy_subset(mat, gw, l):
    chosen: list[int] = []
    covered = np.zeros(len(gw), dtype=bool)
    for _ in range(l):
        gain = (mat & ~covered[:, None]).T.astype(float) @ gw
        gain[chosen] = np.inf
        j = int(np.argmin(gain))
        chosen.append(j)
        covered |= mat[:, j]
    return tuple(sorted(chosen))


class _SubsetLP:
    """LP relaxation: min sum_g w_g z_g, z_g >= x_j for approved seats, sum x = l."""

    def __init__(self, mat, gw, l):
        self.ng, self.r = mat.shape
        g, j = np.nonzero(mat)
        ne = len(g)
        # variables: x (r), z (ng); rows x_j - z_g <= 0
        self.a_ub = sp.csr_matrix(
            (np.concatenate([np.ones(ne), -np.ones(ne)]),
             (np.concatenate([np.arange(ne)] * 2), np.concatenate([j, self.r + g]))),
            shape=(ne, self.r + self.ng))
        self.b_ub = np.zeros(ne)
        self.a_eq = sp.csr_matrix(np.concatenate([np.ones(self.r), np.zeros(self.ng)])[None, :])
        self.c = np.concatenate([np.zeros(self.r), gw])
        self.l = l

    def solve(self, ones, zeros):
        bounds = [(1.0 if j in ones else 0.0, 0.0 if j in zeros else 1.0) for j in range(self.r)]
        bounds += [(0.0, 1.0)] * self.ng
        res = linprog(self.c, A_ub=self.a_ub, b_ub=self.b_ub, A_eq=self.a_eq, b_eq=[self.l],
                      bounds=bounds, method="highs")
        if res.status != 0:
            return math.inf, None
        return float(res.fun), res.x[:self.r]


def min_approval_weight_subset(election: Election, committee: Sequence[int], l: int,
                               method: str = "ilp", time_budget: float | None = None
                               ) -> SubsetWeightResult:
    """Size-l subset of the committee with the least joint approval weight.

    ``method="ilp"`` runs best-first branch and bound over the seat
    indicators, bounded by the LP relaxation; ``"enumerate"`` tries every
    subset (at most 20 seats).  ``subset`` holds seat positions within
    ``committee``.  When ``time_budget`` (seconds) runs out the incumbent is
    returned with ``optimal=False`` and the best open bound.
    """
    committee = list(committee)
    r = len(committee)
    if not 1 <= l <= r:
        raise ValueError("l must lie in 1..|W|")
    el = normalize(election)
    mat, gw = _reduced_cover(el, committee)

    if method == "enumerate":
        if r > 20:
            raise ValueError("enumeration is limited to committees of at most 20 seats")
        best, best_s = math.inf, ()
        for s in itertools.combinations(range(r), l):
            val = _union_weight(mat, gw, s)
            if val < best - 1e-15:
                best, best_s = val, s
        return _finish(el, committee, l, best_s, True, best)
    if method != "ilp":
        raise ValueError(f"unknown method {method!r}")

    start = time.monotonic()
    inc_s = _greedy_subset(mat, gw, l)
    inc = _union_weight(mat, gw, inc_s)
    lp = _SubsetLP(mat, gw, l)
    root, x = lp.solve(frozenset(), frozenset())
    heap = [(root, 0, frozenset(), frozenset(), x)]
    counter = 1
    tol = 1e-12
    while heap:
        bound, _, ones, zeros, x = heapq.heappop(heap)
        if bound >= inc - tol:
            heap.clear()
            break
        if time_budget is not None and time.monotonic() - start > time_budget:
            heapq.heappush(heap, (bound, 0, ones, zeros, x))
            break
        # rounding heuristic: the l largest fractional indicators
        top = tuple(sorted(np.argsort(-x, kind="stable")[:l].tolist()))
        val = _union_weight(mat, gw, top)
        if val < inc - tol:
            inc, inc_s = val, top
        frac = np.abs(x - 0.5)
        free = [j for j in range(r) if j not in ones and j not in zeros]
        cand = [j for j in free if 1e-9 < x[j] < 1 - 1e-9]
        if not cand:
            continue  # integral: its value is the rounding above
        j = min(cand, key=lambda i: (frac[i], i))
        for o, z in ((ones | {j}, zeros), (ones, zeros | {j})):
            if len(o) > l or r - len(z) < l:
                continue
            b, xx = lp.solve(o, z)
            if b < inc - tol:
                heapq.heappush(heap, (b, counter, o, z, xx))
                counter += 1
    optimal = not heap
    bound = inc if optimal else min(inc, heap[0][0])
    return _finish(el, committee, l, inc_s, optimal, inc, bound)


def _finish(el, committee, l, subset, optimal, value, bound=None):
    exact = exact_approval_weight(el, {committee[j] for j in subset})
    return SubsetWeightResult(l, tuple(int(j) for j in subset), float(value), optimal,
                              bound, exact)


# ---------------------------------------------------------------------------
# maximin support


def _flow_assignment(el: Election, committee, t):
    """Scaled max-flow check: can every seat receive t?  Returns (ok, amounts)."""
    pat = seat_pattern(el, committee)
    n, r = pat.shape
    scale = 2.0 ** 30
    cap_v = np.floor(el.weights * scale).astype(np.int64)
    need = int(math.floor(t * scale))
    rows = np.repeat(np.arange(n), np.diff(pat.indptr))
    src, sink = n + r, n + r + 1
    size = n + r + 2
    u = np.concatenate([np.full(n, src), rows, n + np.arange(r)])
    v = np.concatenate([np.arange(n), n + pat.indices, np.full(r, sink)])
    c = np.concatenate([cap_v, cap_v[rows], np.full(r, need)]).astype(np.int32)
    graph = sp.csr_matrix((c, (u, v)), shape=(size, size))
    res = maximum_flow(graph, src, sink, method="dinic")
    flow = res.flow.tocsr()
    amounts = np.asarray(flow[rows, n + pat.indices]).ravel() / scale
    return res.flow_value >= need * r, pat, amounts


def maximin_support(election: Election, committee: Sequence[int],
                    width: float = 1e-9) -> tuple[float, VoteAssignment]:
    """Largest achievable minimum backing over complete vote assignments.

    Bisection on the target ``t`` with a max-flow feasibility check; leftover
    voter weight is then spread onto the least-backed approved seats, which
    only raises supports.  The returned value is the minimum backing of the
    returned assignment.
    """
    committee = list(committee)
    if not committee:
        raise ValueError("committee must be nonempty")
    el = normalize(election)
    aw = el.approval_weights[committee]
    hi = float(aw.min())
    lo = 0.0
    pat = seat_pattern(el, committee)
    amounts = np.zeros(pat.nnz)
    if hi > 0:
        ok, pat, amounts = _flow_assignment(el, committee, hi)
        if ok:
            lo = hi
        while hi - lo > width:
            mid = 0.5 * (lo + hi)
            ok, p2, a2 = _flow_assignment(el, committee, mid)
            if ok:
                lo, pat, amounts = mid, p2, a2
            else:
                hi = mid
        if lo == 0.0:
            _, pat, amounts = _flow_assignment(el, committee, 0.0)
    assignment = VoteAssignment(tuple(committee), pat, amounts.astype(np.float64))
    _fill_leftover(el, assignment)
    supp = assignment.supports()
    return float(supp.min()), assignment


def _fill_leftover(el: Election, assignment: VoteAssignment) -> None:
    pat = assignment.pattern
    supp = assignment.supports()
    left = el.weights - assignment.voter_loads()
    for v in np.flatnonzero(left > 0):
        a, b = pat.indptr[v], pat.indptr[v + 1]
        if a == b:
            continue
        p = a + int(np.argmin(supp[pat.indices[a:b]]))
        assignment.amounts[p] += left[v]
        supp[pat.indices[p]] += left[v]


def stake_lost_curve(election: Election, committee: Sequence[int],
                     assignment: VoteAssignment) -> np.ndarray:
    """Entry l-1 is the least total backing of any l committee members."""
    if tuple(assignment.seats) != tuple(int(c) for c in committee):
        raise ValueError("assignment does not belong to this committee")
    return np.cumsum(np.sort(assignment.supports()))


def backing_variance(assignment: VoteAssignment) -> float:
    return float(np.var(assignment.supports()))


# ---------------------------------------------------------------------------
# replacement costs


@dataclass
class ReplacementQuote:
    """Cost of an exogenous l-replacement and a witness achieving it.

    ``witness`` lists (weight, ballot) pairs for the added voters; ballots
    index the l new candidates as 0..l-1.
    """

    rule: str
    l: int
    cost: float
    witness: list[tuple[float, tuple[int, ...]]]
    ballot_cap: int | None = None

    @property
    def voter_count(self) -> int:
        return len(self.witness)

    def scaled(self, factor: float) -> list[tuple[float, tuple[int, ...]]]:
        return [(w * factor, b) for w, b in self.witness]

    def to_json(self) -> dict:
        return {"rule": self.rule, "l": self.l, "cost": self.cost, "ballot_cap": self.ballot_cap,
                "witness": [{"weight": w, "approvals": list(b)} for w, b in self.witness]}


def _singletons(l, x):
    return [(x, (i,)) for i in range(l)]


def replacement_cost(rule_id: str, trace: SelectionTrace, l: int,
                     ballot_cap: int | None = None) -> ReplacementQuote:
    """Minimum total weight of new voters that get l new candidates elected.

    ``trace`` must come from running ``rule_id`` on the (normalized)
    election.  seq-PAV is priced with :func:`seqpav_replacement_lp`; MES has
    no such closed form because it is not monotone under added candidates.
    """
    rule = canonical_rule(rule_id)
    if trace.rule != rule:
        raise RuleError(f"trace was produced by {trace.rule}, not {rule}")
    k = len(trace.order)
    if not 1 <= l <= k:
        raise ValueError("l must lie in 1..k")
    if ballot_cap is not None and ballot_cap < 1:
        raise ValueError("ballot cap must be positive")
    x = float(trace.per_round[k - l])
    if rule == "av":
        if ballot_cap is None or ballot_cap >= l:
            return ReplacementQuote(rule, l, x, [(x, tuple(range(l)))], ballot_cap)
        chunks = [tuple(range(s, min(s + ballot_cap, l))) for s in range(0, l, ballot_cap)]
        return ReplacementQuote(rule, l, len(chunks) * x, [(x, c) for c in chunks], ballot_cap)
    if rule == "sav":
        return ReplacementQuote(rule, l, l * x, _singletons(l, x), ballot_cap)
    if rule == "seq-phragmen":
        return ReplacementQuote(rule, l, l / x, _singletons(l, 1.0 / x), ballot_cap)
    if rule == "phragmms":
        s = float(min(trace.per_round[:k - l + 1]))
        return ReplacementQuote(rule, l, l * s, _singletons(l, s), ballot_cap)
    if rule == "seq-pav":
        if ballot_cap is not None and ballot_cap < l:
            raise RuleError("the seq-PAV replacement program assumes unbounded ballots")
        value, y = seqpav_replacement_lp(l)
        witness = [(x * wt, tuple(i for i in range(l) if mask >> i & 1))
                   for mask, wt in sorted(y.items())]
        return ReplacementQuote(rule, l, value * x, witness, ballot_cap)
    raise RuleError("MES has no replacement-cost formula: it is not monotone under added candidates")


SEQPAV_LP_MAX = 21


def seqpav_replacement_lp(l: int) -> tuple[float, dict[int, float]]:
    """Least total weight of an l-candidate election whose l-th seq-PAV pick
    has marginal score at least 1.

    One variable per nonempty subset ``S`` of the new candidates (bitmask),
    the weight of voters approving exactly ``S``.  Constraints keep the
    greedy order c_1, ..., c_l and force the last marginal score to reach 1.
    Solved with the dual simplex so the solution is a vertex: at most
    l(l-1)/2 + 1 variables are positive.  Returns the value and the positive
    part of the solution keyed by bitmask.
    """
    if not 1 <= l <= SEQPAV_LP_MAX:
        raise ValueError(f"l must lie in 1..{SEQPAV_LP_MAX}: the program has 2^l variables")
    masks = np.arange(1, 1 << l, dtype=np.int64)
    member = ((masks[:, None] >> np.arange(l)) & 1).astype(bool)  # (S, i)
    before = np.cumsum(member, axis=1) - member  # |S ∩ {c_1..c_{i-1}}|
    t = 1.0 / (before + 1.0)
    rows, rhs = [], []
    for i in range(l):
        for j in range(i + 1, l):
            # marginal of c_j at step i must not exceed that of c_i
            coef = t[:, i] * (member[:, j].astype(float) - member[:, i])
            nz = np.flatnonzero(coef)
            rows.append((nz, coef[nz]))
            rhs.append(0.0)
    last = np.flatnonzero(member[:, l - 1])
    rows.append((last, -t[last, l - 1]))
    rhs.append(-1.0)
    r_idx = np.concatenate([np.full(len(nz), q) for q, (nz, _) in enumerate(rows)])
    c_idx = np.concatenate([nz for nz, _ in rows])
    vals = np.concatenate([v for _, v in rows])
    a_ub = sp.csr_matrix((vals, (r_idx, c_idx)), shape=(len(rows), len(masks)))
    res = linprog(np.ones(len(masks)), A_ub=a_ub, b_ub=np.array(rhs), bounds=(0, None),
                  method="highs-ds")
    if res.status != 0:
        raise RuntimeError(f"replacement program failed: {res.message}")
    y = {int(masks[q]): float(res.x[q]) for q in np.flatnonzero(res.x > 1e-12)}
    return float(res.fun), y


__all__ = [
    "SubsetWeightResult", "min_approval_weight_subset", "maximin_support", "stake_lost_curve",
    "backing_variance", "ReplacementQuote", "replacement_cost", "seqpav_replacement_lp",
]
