"""Selection bias in the exposure-outcome odds ratio.

Exact measures, a rule engine for the direction of the bias, sensitivity
adjustment, and brute-force verification of the bound results.
"""

__version__ = "0.1.0"

# the rule engine lives in ``biasbound.classify``; its ``classify`` function
# is not re-exported so the submodule name stays importable
from .classify import (BoundVerdict, Direction, InteractionSign, MonotoneSign,
                       QualitativeAssumptions, Scale, classify_numeric,
                       derive_assumptions, recode, stratified_classify)
from .measures import (LinearParams, LogisticParams, SelectionModel,
                       TargetJoint, decomposition, fit_linear, fit_logistic,
                       inter_or, inter_rd, inter_rr, selected_joint,
                       selected_or, true_or)
from .sensitivity import (IntervalEstimate, ObservedTable, adjust_interval,
                          adjust_or, bound_report, woolf_ci)

__all__ = [
    "BoundVerdict", "Direction", "InteractionSign", "MonotoneSign",
    "QualitativeAssumptions", "Scale", "classify_numeric",
    "derive_assumptions", "recode", "stratified_classify",
    "LinearParams", "LogisticParams", "SelectionModel", "TargetJoint",
    "decomposition", "fit_linear", "fit_logistic", "inter_or", "inter_rd",
    "inter_rr", "selected_joint", "selected_or", "true_or",
    "IntervalEstimate", "ObservedTable", "adjust_interval", "adjust_or",
    "bound_report", "woolf_ci",
]
