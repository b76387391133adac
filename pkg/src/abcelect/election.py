"""Weighted approval-based committee elections.

An :class:`Election` holds candidates, voters, their (raw) weights, approval
ballots and the committee size.  Weights are kept twice: as exact fractions
(so that oracles can work in rational arithmetic) and as a float64 array
for the fast paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

# Comparison tolerance used by every float fast path.
EPS = 1e-9


class ElectionError(ValueError):
    """Raised for elections that cannot be processed at all."""


def as_fraction(value) -> Fraction:
    """Parse a weight given as int, Fraction, float or decimal string."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ElectionError(f"invalid weight {value!r}")
    if isinstance(value, (int, float, str)):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ElectionError(f"invalid weight {value!r}") from exc
    raise ElectionError(f"invalid weight {value!r}")


@dataclass(frozen=True, eq=False)
class Election:
    """A weighted ABC election.

    Parameters
    ----------
    candidates : tuple of str
        Candidate identifiers; position is the candidate index.
    voters : tuple of str
        Voter identifiers; position is the voter index.
    exact_weights : tuple of Fraction
        Voter weights in raw units.
    approvals : tuple of tuple of int
        Ballot of every voter as candidate indices.  Stored as given, so a
        malformed ballot (duplicates, out-of-range indices) is reported by
        :func:`validate` instead of being silently repaired.
    k : int
        Committee size.
    ballot_cap : int or None
        Maximum allowed ballot length.
    meta : dict
        Free-form metadata carried through file round trips.
    """

    candidates: tuple[str, ...]
    voters: tuple[str, ...]
    exact_weights: tuple[Fraction, ...]
    approvals: tuple[tuple[int, ...], ...]
    k: int
    ballot_cap: int | None = None
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_ballots(
        cls,
        ballots: Sequence[Iterable[int]],
        weights: Sequence | None = None,
        k: int = 1,
        candidates: Sequence[str] | int | None = None,
        voters: Sequence[str] | None = None,
        ballot_cap: int | None = None,
        meta: dict | None = None,
    ) -> Election:
        """Convenience constructor.

        ``candidates`` may be a list of identifiers or a count; by default
        the candidates are ``c1 .. cm`` with ``m`` one larger than the largest
        approved index.  Weights default to 1 per voter.
        """
        ballots = [tuple(int(c) for c in b) for b in ballots]
        if candidates is None or isinstance(candidates, int):
            if candidates is None:
                candidates = 1 + max((max(b) for b in ballots if b), default=-1)
            candidates = [f"c{i + 1}" for i in range(candidates)]
        if voters is None:
            voters = [f"v{i + 1}" for i in range(len(ballots))]
        if weights is None:
            weights = [1] * len(ballots)
        if len(weights) != len(ballots) or len(voters) != len(ballots):
            raise ElectionError("ballots, weights and voters differ in length")
        return cls(
            candidates=tuple(str(c) for c in candidates),
            voters=tuple(str(v) for v in voters),
            exact_weights=tuple(as_fraction(w) for w in weights),
            approvals=tuple(ballots),
            k=int(k),
            ballot_cap=ballot_cap,
            meta=dict(meta or {}),
        )

    @property
    def n(self) -> int:
        return len(self.voters)

    @property
    def m(self) -> int:
        return len(self.candidates)

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.array([float(x) for x in self.exact_weights], dtype=np.float64)
        w.setflags(write=False)
        return w

    @cached_property
    def ballots(self) -> tuple[frozenset[int], ...]:
        """Approval sets with duplicates and out-of-range indices removed."""
        m = self.m
        return tuple(frozenset(c for c in b if 0 <= c < m) for b in self.approvals)

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        """Voter x candidate 0/1 approval matrix (CSR, sorted indices)."""
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        cols = []
        for i, b in enumerate(self.ballots):
            cols.extend(sorted(b))
            indptr[i + 1] = len(cols)
        indices = np.asarray(cols, dtype=np.int64)
        data = np.ones(len(indices), dtype=np.float64)
        return sp.csr_matrix((data, indices, indptr), shape=(self.n, self.m))

    @cached_property
    def matrix_t(self) -> sp.csr_matrix:
        """Candidate x voter approval matrix."""
        return self.matrix.T.tocsr()

    @cached_property
    def ballot_sizes(self) -> np.ndarray:
        return np.diff(self.matrix.indptr).astype(np.int64)

    @cached_property
    def approval_weights(self) -> np.ndarray:
        """w(V_c) for every candidate."""
        return self.matrix_t @ self.weights

    @cached_property
    def total_weight(self) -> float:
        return float(sum(self.exact_weights, Fraction(0)))

    @cached_property
    def is_normalized(self) -> bool:
        return sum(self.exact_weights, Fraction(0)) == 1

    def normalize(self) -> Election:
        return normalize(self)

    def with_k(self, k: int) -> Election:
        return Election(self.candidates, self.voters, self.exact_weights,
                        self.approvals, int(k), self.ballot_cap, dict(self.meta))

    def candidate_index(self, ident: str) -> int:
        try:
            return self._candidate_lookup[ident]
        except KeyError:
            raise ElectionError(f"unknown candidate {ident!r}") from None

    @cached_property
    def _candidate_lookup(self) -> dict[str, int]:
        return {c: i for i, c in enumerate(self.candidates)}

    def __repr__(self) -> str:
        return f"Election(n={self.n}, m={self.m}, k={self.k}, ballot_cap={self.ballot_cap})"


def normalize(election: Election) -> Election:
    """Scale weights to sum to one.

    Idempotent: an election whose exact weights already sum to one is
    returned unchanged.
    """
    total = sum(election.exact_weights, Fraction(0))
    if total <= 0:
        raise ElectionError("total voter weight must be positive")
    if total == 1:
        return election
    exact = tuple(w / total for w in election.exact_weights)
    return Election(election.candidates, election.voters, exact, election.approvals,
                    election.k, election.ballot_cap, dict(election.meta))


def _check_candidates(election: Election, candidate_set: Iterable[int]) -> list[int]:
    out = []
    for c in candidate_set:
        c = int(c)
        if not 0 <= c < election.m:
            raise ElectionError(f"unknown candidate index {c}")
        out.append(c)
    return out


def approval_weight(election: Election, candidate_set: Iterable[int]) -> float:
    """Total weight of voters approving at least one candidate of the set."""
    cols = sorted(set(_check_candidates(election, candidate_set)))
    if not cols:
        return 0.0
    hits = election.matrix[:, cols].getnnz(axis=1) > 0
    return float(math.fsum(election.weights[hits]))


def exact_approval_weight(election: Election, candidate_set: Iterable[int]) -> Fraction:
    s = set(_check_candidates(election, candidate_set))
    return sum((w for w, b in zip(election.exact_weights, election.ballots) if b & s), Fraction(0))


def supporters(election: Election, c: int) -> set[int]:
    """Indices of voters approving candidate ``c``."""
    (c,) = _check_candidates(election, [c])
    col = election.matrix_t
    return set(col.indices[col.indptr[c]:col.indptr[c + 1]].tolist())


def validate(election: Election) -> list[str]:
    """Return human-readable invariant violations (empty when valid)."""
    problems = []
    m = election.m
    if election.k < 1:
        problems.append("k must be a positive integer")
    if election.k > m:
        problems.append("k exceeds candidate count")
    if len(set(election.candidates)) != m:
        problems.append("duplicate candidate identifier")
    if len(set(election.voters)) != election.n:
        problems.append("duplicate voter identifier")
    if len(election.exact_weights) != election.n or len(election.approvals) != election.n:
        problems.append("voters, weights and ballots differ in length")
    if any(w < 0 for w in election.exact_weights):
        problems.append("negative voter weight")
    if election.n and sum(election.exact_weights, Fraction(0)) <= 0:
        problems.append("total voter weight must be positive")
    cap = election.ballot_cap
    if cap is not None and cap < 1:
        problems.append("ballot cap must be positive")
    dup = bad = over = False
    for ballot in election.approvals:
        if len(set(ballot)) != len(ballot):
            dup = True
        if any(not 0 <= c < m for c in ballot):
            bad = True
        if cap is not None and cap >= 1 and len(set(ballot)) > cap:
            over = True
    if dup:
        problems.append("duplicate approval")
    if bad:
        problems.append("approval references unknown candidate")
    if over:
        problems.append("ballot exceeds cap")
    return problems


def pick_best(scores: np.ndarray, eligible: np.ndarray | None = None, maximize: bool = True) -> int:
    """Index of the best eligible score, ties (within EPS) to the smallest index.

    Returns -1 when nothing is eligible or every eligible score is
    non-finite.
    """
    vals = np.asarray(scores, dtype=np.float64)
    ok = np.isfinite(vals)
    if eligible is not None:
        ok &= eligible
    if not ok.any():
        return -1
    best = vals[ok].max() if maximize else vals[ok].min()
    tol = EPS * max(1.0, abs(best))
    near = ok & ((vals >= best - tol) if maximize else (vals <= best + tol))
    return int(np.flatnonzero(near)[0])
