"""Statistics over series of elections and a synthetic election generator."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .election import Election, ElectionError


class SeriesError(ValueError):
    pass


@dataclass
class ElectionSeries:
    """Elections ordered by era label; identities are the id strings."""

    items: list[tuple[int, Election]]

    def __post_init__(self):
        labels = [lab for lab, _ in self.items]
        if any(b <= a for a, b in zip(labels, labels[1:])):
            raise SeriesError("era labels must be strictly increasing")

    @classmethod
    def from_elections(cls, elections: Iterable[Election], key: str = "era") -> ElectionSeries:
        items = []
        for e in elections:
            if key not in e.meta:
                raise SeriesError(f"election without meta[{key!r}]")
            items.append((int(e.meta[key]), e))
        labels = [lab for lab, _ in items]
        dup = sorted(lab for lab, c in Counter(labels).items() if c > 1)
        if dup:
            raise SeriesError(f"duplicate era labels: {dup}")
        return cls(sorted(items, key=lambda it: it[0]))

    @property
    def labels(self) -> list[int]:
        return [lab for lab, _ in self.items]

    def pairs(self):
        return list(zip(self.items, self.items[1:]))

    def missing_labels(self) -> list[int]:
        labels = self.labels
        if not labels:
            return []
        present = set(labels)
        return [x for x in range(labels[0], labels[-1] + 1) if x not in present]

    def __len__(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class RelativeChanges:
    voter_set: float
    weight: float | None
    opinion: float | None
    candidate_set: float


def _sym_quotient(a: set, b: set) -> float:
    total = len(a) + len(b)
    return len(a ^ b) / total if total else 0.0


def relative_changes(e: Election, e2: Election) -> RelativeChanges:
    """Change quotients between two elections keyed by voter/candidate ids.

    Uses the weights as stored.  The weight quotient is None when no voter
    is shared; voters whose ballots, restricted to the shared candidates,
    are both empty are left out of the opinion mean.
    """
    v1, v2 = set(e.voters), set(e2.voters)
    c1, c2 = set(e.candidates), set(e2.candidates)
    idx1 = {v: i for i, v in enumerate(e.voters)}
    idx2 = {v: i for i, v in enumerate(e2.voters)}
    shared = sorted(v1 & v2)
    weight = None
    if shared:
        num = sum((abs(e.exact_weights[idx1[v]] - e2.exact_weights[idx2[v]]) for v in shared), Fraction(0))
        den = sum((e.exact_weights[idx1[v]] for v in shared), Fraction(0))
        weight = float(num / den) if den > 0 else None
    terms = []
    for v in shared:
        a = {e.candidates[c] for c in e.ballots[idx1[v]]} & c2
        b = {e2.candidates[c] for c in e2.ballots[idx2[v]]} & c1
        if a or b:
            terms.append(len(a ^ b) / (len(a) + len(b)))
    opinion = math.fsum(terms) / len(terms) if terms else None
    return RelativeChanges(_sym_quotient(v1, v2), weight, opinion, _sym_quotient(c1, c2))


def committee_overlap(w1: Iterable[str], w2: Iterable[str]) -> int:
    return len(set(w1) & set(w2))


def overlap_matrix(committees: dict[str, Sequence[str]]) -> tuple[list[str], np.ndarray]:
    names = list(committees)
    mat = np.array([[committee_overlap(committees[a], committees[b]) for b in names] for a in names])
    return names, mat


def reelection_counts(committees: Sequence[Sequence[str]]) -> list[int]:
    """Members re-elected between consecutive committees."""
    return [committee_overlap(a, b) for a, b in zip(committees, committees[1:])]


@dataclass
class OrderStatistics:
    values: np.ndarray
    half_prefix: int

    @property
    def total(self) -> float:
        return float(self.values.sum())


def _order_stats(values: np.ndarray) -> OrderStatistics:
    vals = np.sort(np.asarray(values, dtype=float))[::-1]
    if not len(vals):
        return OrderStatistics(vals, 0)
    csum = np.cumsum(vals)
    half = 0.5 * csum[-1]
    prefix = int(np.searchsorted(csum, half * (1 - 1e-12))) + 1
    return OrderStatistics(vals, min(prefix, len(vals)))


def weight_order_statistics(election: Election) -> OrderStatistics:
    """Weights in decreasing order and the smallest prefix holding half the total."""
    return _order_stats(election.weights)


def approval_weight_order_statistics(election: Election) -> OrderStatistics:
    return _order_stats(election.approval_weights)


def simplicity_statistic(election: Election, chunk: int = 2048) -> float | None:
    """Mean of |A_u ∩ A_v| / (|A_u| + |A_v|) over voter pairs with overlapping ballots.

    Identical ballots are collapsed with multiplicities, then overlaps are
    counted blockwise with a sparse product.  None when no pair overlaps.
    """
    counts = Counter(b for b in election.ballots if b)
    if not counts:
        return None
    uniq = list(counts)
    mult = np.array([counts[b] for b in uniq], dtype=float)
    size = np.array([len(b) for b in uniq], dtype=float)
    rows = np.repeat(np.arange(len(uniq)), size.astype(int))
    cols = np.fromiter((c for b in uniq for c in sorted(b)), dtype=np.int64, count=len(rows))
    a = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(uniq), election.m))
    at = a.T.tocsc()
    # identical-ballot pairs contribute exactly 1/2 each
    same = mult * (mult - 1) / 2
    total, pairs = 0.5 * same.sum(), same.sum()
    for s in range(0, len(uniq), chunk):
        block = (a[s:s + chunk] @ at).tocoo()
        i = block.row + s
        j = block.col
        keep = j > i
        i, j, inter = i[keep], j[keep], block.data[keep]
        wpair = mult[i] * mult[j]
        total += float(np.sum(wpair * inter / (size[i] + size[j])))
        pairs += float(wpair.sum())
    return total / pairs if pairs else None


@dataclass(frozen=True)
class GeneratorConfig:
    """Synthetic election parameters; ``seed`` fixes the output."""

    n: int
    m: int
    k: int
    ballot_cap: int = 16
    weights: str = "uniform"
    pareto_shape: float = 1.5
    approvals: str = "impartial"
    clusters: int = 5
    cross_prob: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.k < 1 or self.ballot_cap < 1:
            raise ElectionError("n, m, k and ballot_cap must be positive")
        if self.m < self.k:
            raise ElectionError("k exceeds candidate count")
        if self.weights not in ("uniform", "pareto"):
            raise ElectionError(f"unknown weight model {self.weights!r}")
        if self.approvals not in ("impartial", "clustered"):
            raise ElectionError(f"unknown approval model {self.approvals!r}")
        if self.weights == "pareto" and self.pareto_shape <= 0:
            raise ElectionError("pareto shape must be positive")


STAKE_UNIT = 1000


def generate(config: GeneratorConfig, normalized: bool = True) -> Election:
    """Random election with integer stakes (normalized unless asked otherwise)."""
    rng = np.random.default_rng(config.seed)
    n, m, cap = config.n, config.m, min(config.ballot_cap, config.m)
    if config.weights == "uniform":
        stakes = rng.integers(1, STAKE_UNIT + 1, size=n)
    else:
        stakes = np.ceil(STAKE_UNIT * (1.0 + rng.pareto(config.pareto_shape, size=n))).astype(np.int64)
    sizes = rng.integers(1, cap + 1, size=n)
    ballots = []
    if config.approvals == "impartial":
        for s in sizes:
            ballots.append(sorted(rng.choice(m, size=int(s), replace=False).tolist()))
    else:
        groups = np.array_split(rng.permutation(m), min(config.clusters, m))
        home = rng.integers(0, len(groups), size=n)
        for s, g in zip(sizes, home):
            pool = groups[g]
            inside = min(int(s) - int(rng.binomial(int(s), config.cross_prob)), len(pool))
            picks = set(rng.choice(pool, size=inside, replace=False).tolist())
            while len(picks) < s:
                picks.add(int(rng.integers(m)))
            ballots.append(sorted(picks))
    e = Election.from_ballots(
        ballots, [int(x) for x in stakes], k=config.k, candidates=[f"c{i + 1}" for i in range(m)],
        ballot_cap=config.ballot_cap, meta={"generator": _config_meta(config)})
    return e.normalize() if normalized else e


def _config_meta(config: GeneratorConfig) -> dict:
    return {k: getattr(config, k) for k in config.__dataclass_fields__}


__all__ = [
    "ElectionSeries", "SeriesError", "RelativeChanges", "relative_changes", "committee_overlap",
    "overlap_matrix", "reelection_counts", "OrderStatistics", "weight_order_statistics",
    "approval_weight_order_statistics", "simplicity_statistic", "GeneratorConfig", "generate",
]
