"""Weighted approval-based committee elections: rules, measures and tooling."""

from .assignment import VoteAssignment, balanced_assignment
from .election import Election, ElectionError, approval_weight, normalize, supporters, validate
from .estimators import (ApprovalVoting, EqualShares, Phragmms, SatisfactionApprovalVoting,
                         SequentialPAV, SequentialPhragmen)
from .representation import (ejr_violations, min_avg_satisfaction, pav_score, priceability_gap,
                             supporting_group_census, weighted_satisfaction)
from .rules import (RULES, RuleError, SelectionTrace, run_av, run_mes, run_phragmms, run_rule,
                    run_sav, run_seq_pav, run_seq_phragmen)
from .security import (backing_variance, maximin_support, min_approval_weight_subset,
                       replacement_cost, seqpav_replacement_lp, stake_lost_curve)

__version__ = "0.1.0"

__all__ = [
    "Election", "ElectionError", "normalize", "validate", "approval_weight", "supporters",
    "VoteAssignment", "balanced_assignment", "RULES", "RuleError", "SelectionTrace", "run_av",
    "run_sav", "run_seq_pav", "run_seq_phragmen", "run_mes", "run_phragmms", "run_rule",
    "pav_score", "weighted_satisfaction", "ejr_violations", "min_avg_satisfaction",
    "supporting_group_census", "priceability_gap", "min_approval_weight_subset", "maximin_support",
    "stake_lost_curve", "backing_variance", "replacement_cost", "seqpav_replacement_lp",
    "ApprovalVoting", "SatisfactionApprovalVoting", "SequentialPAV", "SequentialPhragmen",
    "EqualShares", "Phragmms",
]
