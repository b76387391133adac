"""Vote assignments and balanced (minimum sum-of-squares) rebalancing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from numba import njit

from .election import Election


def seat_pattern(election: Election, seats: Sequence[int]) -> sp.csr_matrix:
    """Voter x seat approval pattern with sorted indices.

    A seat is one committee slot; several seats may hold the same candidate
    when copies are allowed.
    """
    seats = np.asarray(seats, dtype=np.int64)
    if len(seats) == 0:
        return sp.csr_matrix((election.n, 0))
    pat = election.matrix.tocsc()[:, seats].tocsr()
    pat.sort_indices()
    return pat


@dataclass
class VoteAssignment:
    """Split of voter weight over committee seats.

    ``pattern`` is the voter x seat approval structure and ``amounts`` holds
    one value per stored entry of ``pattern`` (same order as
    ``pattern.indices``), so an amount can only sit on an approved seat.
    """

    seats: tuple[int, ...]
    pattern: sp.csr_matrix
    amounts: np.ndarray

    @classmethod
    def empty(cls, election: Election, seats: Sequence[int]) -> VoteAssignment:
        pat = seat_pattern(election, seats)
        return cls(tuple(int(s) for s in seats), pat, np.zeros(pat.nnz))

    @property
    def matrix(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.amounts, self.pattern.indices, self.pattern.indptr),
                             shape=self.pattern.shape)

    def supports(self) -> np.ndarray:
        """Backing weight of every seat."""
        return np.bincount(self.pattern.indices, weights=self.amounts,
                           minlength=len(self.seats)).astype(np.float64)

    def voter_loads(self) -> np.ndarray:
        n = self.pattern.shape[0]
        rows = np.repeat(np.arange(n), np.diff(self.pattern.indptr))
        return np.bincount(rows, weights=self.amounts, minlength=n).astype(np.float64)

    def entries(self) -> dict[tuple[int, int], float]:
        """Positive entries keyed by (voter, seat position)."""
        out = {}
        ptr, idx = self.pattern.indptr, self.pattern.indices
        for v in range(self.pattern.shape[0]):
            for p in range(ptr[v], ptr[v + 1]):
                if self.amounts[p] > 0:
                    out[(v, int(idx[p]))] = float(self.amounts[p])
        return out

    def check(self, election: Election, complete: bool = True, tol: float = 1e-9) -> list[str]:
        problems = []
        if np.any(self.amounts < -tol):
            problems.append("negative amount")
        loads = self.voter_loads()
        w = election.weights
        if np.any(loads > w + tol):
            problems.append("voter assigns more than its weight")
        if complete:
            has = np.diff(self.pattern.indptr) > 0
            if np.any(np.abs(loads[has] - w[has]) > tol):
                problems.append("assignment is not complete")
        return problems

    def local_imbalance(self) -> float:
        """Largest supp(c) - supp(c') over voters paying c and approving c'."""
        return float(_local_imbalance(self.pattern.indptr, self.pattern.indices,
                                      self.amounts, self.supports()))


@njit(cache=True)
def _local_imbalance(indptr, indices, alpha, supp):
    worst = 0.0
    for v in range(len(indptr) - 1):
        a, b = indptr[v], indptr[v + 1]
        if b - a < 2:
            continue
        lo = np.inf
        hi = -np.inf
        for p in range(a, b):
            s = supp[indices[p]]
            if s < lo:
                lo = s
            if alpha[p] > 0.0 and s > hi:
                hi = s
        if hi - lo > worst:
            worst = hi - lo
    return worst


@njit(cache=True)
def _star_balance(indptr, indices, w, alpha, supp, tol, max_iter):
    # Gauss-Seidel over voters: each voter water-fills its weight onto its
    # approved seats given everybody else's current contributions.
    n = len(indptr) - 1
    base = np.empty(64)
    order = np.empty(64, dtype=np.int64)
    sweeps = 0
    for it in range(max_iter):
        sweeps = it + 1
        for v in range(n):
            a, b = indptr[v], indptr[v + 1]
            d = b - a
            if d == 0:
                continue
            if d == 1:
                supp[indices[a]] += w[v] - alpha[a]
                alpha[a] = w[v]
                continue
            if d > base.shape[0]:
                base = np.empty(2 * d)
                order = np.empty(2 * d, dtype=np.int64)
            for p in range(a, b):
                s = supp[indices[p]] - alpha[p]
                supp[indices[p]] = s
                base[p - a] = s
            srt = np.argsort(base[:d])
            for j in range(d):
                order[j] = srt[j]
            level = 0.0
            acc = 0.0
            for j in range(d):
                acc += base[order[j]]
                level = (w[v] + acc) / (j + 1)
                if j + 1 == d or level <= base[order[j + 1]]:
                    break
            for p in range(a, b):
                x = level - base[p - a]
                if x < 0.0:
                    x = 0.0
                alpha[p] = x
                supp[indices[p]] += x
        if _local_imbalance(indptr, indices, alpha, supp) < tol:
            break
    return sweeps


def rebalance(election: Election, assignment: VoteAssignment, tol: float = 1e-7,
              max_iter: int = 10_000) -> int:
    """Rebalance ``assignment`` in place; returns the number of sweeps."""
    pat = assignment.pattern
    if pat.nnz == 0:
        return 0
    supp = assignment.supports()
    w = np.ascontiguousarray(election.weights, dtype=np.float64)
    return int(_star_balance(pat.indptr.astype(np.int64), pat.indices.astype(np.int64), w,
                             assignment.amounts, supp, tol, max_iter))


def balanced_assignment(election: Election, committee: Sequence[int], tol: float = 1e-7,
                        max_iter: int = 10_000) -> VoteAssignment:
    """Complete assignment minimising the sum of squared backing weights.

    Every voter approving some seat is fully assigned, which maximises the
    total backing.  The result is locally balanced: a voter only pays seats
    whose support is minimal among the seats it approves (up to ``tol``).
    """
    assignment = VoteAssignment.empty(election, committee)
    rebalance(election, assignment, tol=tol, max_iter=max_iter)
    return assignment
