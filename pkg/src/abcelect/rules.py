"""The six approval-based committee rules.

Every rule returns ``(committee, trace)``: the committee is a sorted tuple of
candidate indices (with repetitions in copy mode) and the trace records the
selection order plus the per-round quantity the replacement-cost analysis
needs.  Ties are always resolved towards the smaller candidate index, with
scores closer than :data:`~abcelect.election.EPS` treated as equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .assignment import VoteAssignment, balanced_assignment, rebalance, seat_pattern
from .election import EPS, Election, pick_best

RULES = ("av", "sav", "seq-pav", "seq-phragmen", "mes", "phragmms")
COPY_RULES = ("seq-pav", "seq-phragmen", "mes", "phragmms")

_ALIASES = {
    "seqpav": "seq-pav", "seq_pav": "seq-pav",
    "seqphragmen": "seq-phragmen", "seq_phragmen": "seq-phragmen", "phragmen": "seq-phragmen",
    "equal-shares": "mes", "equal_shares": "mes",
}


class RuleError(ValueError):
    """Unknown rule or an option the rule does not support."""


class InsufficientCandidatesError(RuleError):
    pass


def canonical_rule(rule_id: str) -> str:
    r = rule_id.strip().lower()
    r = _ALIASES.get(r, r)
    if r not in RULES:
        raise RuleError(f"unknown rule {rule_id!r}; expected one of {', '.join(RULES)}")
    return r


@dataclass
class SelectionTrace:
    rule: str
    order: list[int]
    per_round: list[float]
    phase: list[str] | None = None
    assignment: VoteAssignment | None = field(default=None, repr=False, compare=False)

    def to_json(self, election: Election | None = None) -> dict:
        ids = [election.candidates[c] for c in self.order] if election is not None else list(self.order)
        out = {"rule": self.rule, "order": ids, "per_round": [float(x) for x in self.per_round]}
        if self.phase is not None:
            out["phase"] = list(self.phase)
        return out

    @classmethod
    def from_json(cls, data: dict, election: Election | None = None) -> SelectionTrace:
        order = data["order"]
        if election is not None:
            order = [election.candidate_index(c) for c in order]
        return cls(canonical_rule(data["rule"]), [int(c) for c in order],
                   [float(x) for x in data["per_round"]], data.get("phase"))


@dataclass(frozen=True)
class RuleOptions:
    allow_copies: bool = False
    tie_break: str = field(default="lexicographic", init=False)


def _finish(rule: str, order: list[int], per_round: list[float], phase=None):
    return tuple(sorted(order)), SelectionTrace(rule, order, per_round, phase)


def _top_k(rule: str, election: Election, scores: np.ndarray):
    eligible = np.ones(election.m, dtype=bool)
    order, vals = [], []
    for _ in range(election.k):
        c = pick_best(scores, eligible)
        eligible[c] = False
        order.append(c)
        vals.append(float(scores[c]))
    return _finish(rule, order, vals)


def _no_copies(rule: str, allow_copies: bool):
    if allow_copies:
        raise RuleError(f"{rule} has no multi-copy variant")


def _check_k(election: Election, allow_copies: bool = False):
    if election.k < 1:
        raise RuleError("k must be positive")
    if not allow_copies and election.k > election.m:
        raise RuleError("k exceeds candidate count")


def run_av(election: Election, allow_copies: bool = False):
    """Approval voting: the k candidates of highest approval weight."""
    _no_copies("av", allow_copies)
    _check_k(election)
    return _top_k("av", election, election.approval_weights)


def sav_scores(election: Election) -> np.ndarray:
    sizes = election.ballot_sizes
    share = np.divide(election.weights, sizes, out=np.zeros(election.n), where=sizes > 0)
    return election.matrix_t @ share


def run_sav(election: Election, allow_copies: bool = False):
    """Satisfaction approval voting: voters split weight evenly over their ballot."""
    _no_copies("sav", allow_copies)
    _check_k(election)
    return _top_k("sav", election, sav_scores(election))


def run_seq_pav(election: Election, allow_copies: bool = False):
    """Sequential PAV; the trace stores each round's marginal PAV gain."""
    _check_k(election, allow_copies)
    w = election.weights
    at = election.matrix_t
    sat = np.zeros(election.n)
    eligible = np.ones(election.m, dtype=bool)
    order, gains = [], []
    for _ in range(election.k):
        marg = at @ (w / (sat + 1.0))
        c = pick_best(marg, eligible)
        order.append(c)
        gains.append(float(marg[c]))
        if not allow_copies:
            eligible[c] = False
        sat[at.indices[at.indptr[c]:at.indptr[c + 1]]] += 1.0
    return _finish("seq-pav", order, gains)


def _phragmen_rounds(election: Election, seats: int, money: np.ndarray, start_time: float,
                     eligible: np.ndarray, allow_copies: bool):
    """Event-driven seq-Phragmén from an arbitrary money state.

    Voter ``v`` holds ``offset[v] + w[v] * t`` money at time ``t``, so the
    time at which candidate ``c`` becomes affordable is
    ``(1 - sum offset) / w(V_c)`` over its supporters.
    """
    w = election.weights
    at = election.matrix_t
    wc = election.approval_weights
    offset = np.asarray(money, dtype=np.float64) - w * start_time
    now = start_time
    order, times = [], []
    for _ in range(seats):
        held = at @ offset
        with np.errstate(divide="ignore", invalid="ignore"):
            times_c = np.where(wc > 0, (1.0 - held) / wc, np.inf)
        # zero-weight supporters can still be affordable through initial money
        times_c = np.where((wc <= 0) & (held >= 1.0 - EPS), now, times_c)
        times_c = np.maximum(times_c, now)
        c = pick_best(times_c, eligible, maximize=False)
        if c < 0:
            raise InsufficientCandidatesError("insufficient electable candidates")
        now = float(times_c[c])
        order.append(c)
        times.append(now)
        if not allow_copies:
            eligible[c] = False
        sup = at.indices[at.indptr[c]:at.indptr[c + 1]]
        offset[sup] = -w[sup] * now
    return order, times


def run_seq_phragmen(election: Election, allow_copies: bool = False,
                     initial_money: Sequence[float] | None = None):
    """Sequential Phragmén; the trace stores the election time of each seat."""
    _check_k(election, allow_copies)
    money = np.zeros(election.n) if initial_money is None else np.asarray(initial_money, dtype=float)
    if money.shape != (election.n,):
        raise RuleError("initial_money must have one entry per voter")
    eligible = np.ones(election.m, dtype=bool)
    order, times = _phragmen_rounds(election, election.k, money, 0.0, eligible, allow_copies)
    return _finish("seq-phragmen", order, times)


def _min_affordable_q(budgets: np.ndarray) -> float:
    """Smallest q with sum(min(b, q)) >= 1, or inf."""
    b = np.sort(budgets[budgets > 0])
    if b.size == 0 or b.sum() < 1.0 - EPS:
        return np.inf
    s = b.size
    spent = np.concatenate(([0.0], np.cumsum(b)[:-1]))
    q = (1.0 - spent) / (s - np.arange(s))
    j = int(np.flatnonzero(q <= b + EPS)[0])
    return float(max(q[j], 0.0))


def run_mes(election: Election, allow_copies: bool = False):
    """Method of Equal Shares, completed by seq-Phragmén on leftover budgets.

    Budgets are ``k * w(v) / sum(w)``; a candidate costs one unit.  The trace
    stores ``q`` for equal-shares rounds and election times for completion
    rounds, with ``phase`` telling them apart.
    """
    _check_k(election, allow_copies)
    at = election.matrix_t
    budget = election.k * election.weights / election.weights.sum()
    eligible = np.ones(election.m, dtype=bool)
    q = np.array([_min_affordable_q(budget[at.indices[at.indptr[c]:at.indptr[c + 1]]])
                  for c in range(election.m)])
    order, vals, phase = [], [], []
    while len(order) < election.k:
        c = pick_best(q, eligible, maximize=False)
        if c < 0:
            break
        qc = float(q[c])
        order.append(c)
        vals.append(qc)
        phase.append("mes")
        if not allow_copies:
            eligible[c] = False
        sup = at.indices[at.indptr[c]:at.indptr[c + 1]]
        budget[sup] = np.maximum(0.0, budget[sup] - qc)
        # only candidates sharing a supporter with c can change
        for d in np.unique(election.matrix[sup].indices):
            q[d] = _min_affordable_q(budget[at.indices[at.indptr[d]:at.indptr[d + 1]]])
    if len(order) < election.k:
        more, times = _phragmen_rounds(election, election.k - len(order), budget, 0.0,
                                       eligible, allow_copies)
        order += more
        vals += times
        phase += ["completion"] * len(more)
    return _finish("mes", order, vals, phase)


def phragmms_scores(election: Election, assignment: VoteAssignment, eligible: np.ndarray) -> np.ndarray:
    """Score of every eligible candidate against a (balanced) partial solution.

    For a threshold ``t`` a supporter may move stake away from any seat whose
    backing exceeds ``t``, proportionally, down to ``t``; it keeps everything
    it has not assigned.  The score is the largest ``t`` such that the
    supporters can jointly free ``t`` this way.
    """
    wc = election.approval_weights
    scores = np.full(election.m, -np.inf)
    cand = np.flatnonzero(eligible)
    if len(assignment.seats) == 0:
        scores[cand] = wc[cand]
        return scores
    supp = assignment.supports()
    beta = (election.matrix_t[cand] @ assignment.matrix).toarray()  # stake of c's supporters per seat
    order = np.argsort(supp, kind="stable")
    s = supp[order]
    b = beta[:, order]
    ratio = np.divide(b, s, out=np.zeros_like(b), where=s > 0)
    prefix = np.cumsum(b, axis=1)                        # stake locked on seats backed <= t
    suffix = np.cumsum(ratio[:, ::-1], axis=1)[:, ::-1]  # seats still above t
    suffix_after = np.concatenate([suffix[:, 1:], np.zeros((len(cand), 1))], axis=1)
    w_c = wc[cand][:, None]
    # slack at every breakpoint t = s_i, minus t; non-increasing in i
    g = w_c - prefix - s[None, :] * suffix_after - s[None, :]
    j = (g >= 0).sum(axis=1)
    p_j = np.where(j > 0, prefix[np.arange(len(cand)), np.maximum(j - 1, 0)], 0.0)
    q_j = np.where(j > 0, suffix_after[np.arange(len(cand)), np.maximum(j - 1, 0)], suffix[:, 0])
    scores[cand] = np.maximum((wc[cand] - p_j) / (1.0 + q_j), 0.0)
    return scores


def run_phragmms(election: Election, allow_copies: bool = False, tol: float = 1e-9,
                 max_iter: int = 2_000):
    """Phragmms: elect the top-scoring candidate, then rebalance.

    ``tol`` and ``max_iter`` control the rebalancing after every round.
    """
    _check_k(election, allow_copies)
    eligible = np.ones(election.m, dtype=bool)
    assignment = VoteAssignment.empty(election, [])
    order, scores_out = [], []
    for _ in range(election.k):
        scores = phragmms_scores(election, assignment, eligible)
        c = pick_best(scores, eligible)
        order.append(c)
        scores_out.append(float(scores[c]))
        if not allow_copies:
            eligible[c] = False
        assignment = _extend(election, assignment, c)
        rebalance(election, assignment, tol=tol, max_iter=max_iter)
    committee, trace = _finish("phragmms", order, scores_out)
    trace.assignment = assignment
    return committee, trace


def _extend(election: Election, assignment: VoteAssignment, c: int) -> VoteAssignment:
    seats = assignment.seats + (int(c),)
    pat = seat_pattern(election, seats)
    amounts = np.zeros(pat.nnz)
    amounts[pat.indices < len(seats) - 1] = assignment.amounts
    return VoteAssignment(seats, pat, amounts)


_RUNNERS = {
    "av": run_av,
    "sav": run_sav,
    "seq-pav": run_seq_pav,
    "seq-phragmen": run_seq_phragmen,
    "mes": run_mes,
    "phragmms": run_phragmms,
}


def run_rule(rule_id: str, election: Election, allow_copies: bool = False):
    """Dispatch by rule name (see :data:`RULES`)."""
    return _RUNNERS[canonical_rule(rule_id)](election, allow_copies=allow_copies)


__all__ = [
    "RULES", "COPY_RULES", "RuleError", "InsufficientCandidatesError", "SelectionTrace",
    "RuleOptions", "canonical_rule", "run_av", "run_sav", "run_seq_pav", "run_seq_phragmen",
    "run_mes", "run_phragmms", "run_rule", "balanced_assignment", "phragmms_scores", "sav_scores",
]
