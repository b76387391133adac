"""scikit-learn style wrappers around the committee rules.

``fit`` takes a voter x candidate approval matrix (dense or sparse, 0/1)
with optional voter weights, or an :class:`Election`.  ``transform`` maps
ballots to per-voter satisfaction with the fitted committee.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .election import Election
from .representation import pav_score
from .rules import run_rule


def check_approval_matrix(X) -> sp.csr_matrix:
    """Validate a binary approval matrix and return it as CSR."""
    X = check_array(X, accept_sparse="csr", dtype=np.float64)
    X = sp.csr_matrix(X)
    X.eliminate_zeros()
    if X.nnz and not np.all(X.data == 1.0):
        raise ValueError("approval matrix must be binary (0/1)")
    return X


def check_voter_weights(sample_weight, n: int) -> np.ndarray:
    if sample_weight is None:
        return np.ones(n)
    w = np.asarray(sample_weight, dtype=np.float64)
    if w.shape != (n,):
        raise ValueError(f"sample_weight must have shape ({n},)")
    if np.any(w < 0) or not np.isfinite(w).all() or w.sum() <= 0:
        raise ValueError("sample_weight must be nonnegative, finite and not all zero")
    return w


def election_from_matrix(X, k: int, sample_weight=None) -> Election:
    X = check_approval_matrix(X)
    w = check_voter_weights(sample_weight, X.shape[0])
    ballots = [X.indices[X.indptr[i]:X.indptr[i + 1]].tolist() for i in range(X.shape[0])]
    return Election.from_ballots(ballots, w.tolist(), k=k, candidates=X.shape[1])


class _CommitteeRule(BaseEstimator, TransformerMixin):
    _rule = ""

    def __init__(self, k: int = 1, allow_copies: bool = False):
        self.k = k
        self.allow_copies = allow_copies

    def fit(self, X, y=None, sample_weight=None):
        if isinstance(X, Election):
            if sample_weight is not None:
                raise ValueError("sample_weight is taken from the election")
            election = X.with_k(self.k)
        else:
            election = election_from_matrix(X, self.k, sample_weight)
        self.election_ = election.normalize()
        committee, trace = run_rule(self._rule, self.election_, allow_copies=self.allow_copies)
        self.committee_ = np.asarray(committee, dtype=np.int64)
        self.trace_ = trace
        self.n_features_in_ = self.election_.m
        return self

    def _counts(self):
        return np.bincount(self.committee_, minlength=self.n_features_in_).astype(np.float64)

    def transform(self, X):
        """Number of committee seats each voter approves."""
        check_is_fitted(self, "committee_")
        X = self.election_.matrix if isinstance(X, Election) else check_approval_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} candidates, got {X.shape[1]}")
        return np.asarray(X @ self._counts()).reshape(-1, 1)

    def score(self, X=None, y=None):
        """PAV score of the fitted committee on the training election."""
        check_is_fitted(self, "committee_")
        return pav_score(self.election_, self.committee_.tolist())


class ApprovalVoting(_CommitteeRule):
    _rule = "av"


class SatisfactionApprovalVoting(_CommitteeRule):
    _rule = "sav"


class SequentialPAV(_CommitteeRule):
    _rule = "seq-pav"


class SequentialPhragmen(_CommitteeRule):
    _rule = "seq-phragmen"


class EqualShares(_CommitteeRule):
    _rule = "mes"


class Phragmms(_CommitteeRule):
    _rule = "phragmms"


__all__ = [
    "ApprovalVoting", "SatisfactionApprovalVoting", "SequentialPAV", "SequentialPhragmen",
    "EqualShares", "Phragmms", "check_approval_matrix", "check_voter_weights", "election_from_matrix",
]
