"""Direction of selection bias in the odds ratio from qualitative assumptions.

The rule engine maps monotonicity of the selection probabilities and the sign
of the D-E interaction on S (on a chosen scale) to a verdict: the selected
odds ratio is equal to, a lower bound for, or an upper bound for the true one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Sequence

from . import measures
from .errors import InternalConsistencyError, ValidationError
from .measures import SelectionModel, TargetJoint

#: tolerance for numeric extraction of signs from a selection table
DEFAULT_TOL = 1e-9
#: tolerance for the Inter_RR cross-check of a verdict
CROSS_CHECK_TOL = 1e-9


class MonotoneSign(str, enum.Enum):
    NON_DECREASING = "NonDecreasing"
    NON_INCREASING = "NonIncreasing"
    FLAT = "Flat"
    UNKNOWN = "Unknown"

    def is_non_decreasing(self) -> bool:
        return self in (MonotoneSign.NON_DECREASING, MonotoneSign.FLAT)

    def is_non_increasing(self) -> bool:
        return self in (MonotoneSign.NON_INCREASING, MonotoneSign.FLAT)

    def flipped(self) -> "MonotoneSign":
        return _FLIP_SIGN.get(self, self)


class Scale(str, enum.Enum):
    RISK_RATIO = "RiskRatio"
    ODDS_RATIO = "OddsRatio"
    RISK_DIFFERENCE = "RiskDifference"


class InteractionSign(str, enum.Enum):
    NON_POSITIVE = "NonPositive"
    ZERO = "Zero"
    NON_NEGATIVE = "NonNegative"
    UNKNOWN = "Unknown"

    def is_non_positive(self) -> bool:
        return self in (InteractionSign.NON_POSITIVE, InteractionSign.ZERO)

    def is_non_negative(self) -> bool:
        return self in (InteractionSign.NON_NEGATIVE, InteractionSign.ZERO)

    def flipped(self) -> "InteractionSign":
        return _FLIP_INTERACTION.get(self, self)


class Direction(str, enum.Enum):
    EQUAL = "Equal"
    LOWER = "SelectedIsLowerBound"
    UPPER = "SelectedIsUpperBound"
    INDETERMINATE = "Indeterminate"

    def flipped(self) -> "Direction":
        return _FLIP_DIRECTION.get(self, self)


_FLIP_SIGN = {MonotoneSign.NON_DECREASING: MonotoneSign.NON_INCREASING,
              MonotoneSign.NON_INCREASING: MonotoneSign.NON_DECREASING}
_FLIP_INTERACTION = {InteractionSign.NON_POSITIVE: InteractionSign.NON_NEGATIVE,
                     InteractionSign.NON_NEGATIVE: InteractionSign.NON_POSITIVE}
_FLIP_DIRECTION = {Direction.LOWER: Direction.UPPER,
                   Direction.UPPER: Direction.LOWER}

_SCALE_ALIASES = {
    "rr": Scale.RISK_RATIO, "riskratio": Scale.RISK_RATIO,
    "risk_ratio": Scale.RISK_RATIO,
    "or": Scale.ODDS_RATIO, "oddsratio": Scale.ODDS_RATIO,
    "odds_ratio": Scale.ODDS_RATIO,
    "rd": Scale.RISK_DIFFERENCE, "riskdifference": Scale.RISK_DIFFERENCE,
    "risk_difference": Scale.RISK_DIFFERENCE,
}


def parse_scale(text: str | Scale) -> Scale:
    if isinstance(text, Scale):
        return text
    try:
        return _SCALE_ALIASES[str(text).strip().lower()]
    except KeyError:
        raise ValidationError(f"unknown scale {text!r}; use rr, or or rd",
                              code="unknown_scale", field="scale") from None


def _parse_enum(cls, text, fieldname):
    if isinstance(text, cls):
        return text
    for member in cls:
        if str(text).strip().lower() in (member.value.lower(), member.name.lower()):
            return member
    allowed = ", ".join(m.value for m in cls)
    raise ValidationError(f"{fieldname}: {text!r} is not one of {allowed}",
                          code="unknown_value", field=fieldname)


@dataclass(frozen=True)
class QualitativeAssumptions:
    sign_d: MonotoneSign
    sign_e: MonotoneSign
    scale: Scale
    interaction_sign: InteractionSign

    @classmethod
    def parse(cls, sign_d, sign_e, scale, interaction_sign) -> "QualitativeAssumptions":
        return cls(_parse_enum(MonotoneSign, sign_d, "sign_d"),
                   _parse_enum(MonotoneSign, sign_e, "sign_e"),
                   parse_scale(scale),
                   _parse_enum(InteractionSign, interaction_sign,
                               "interaction_sign"))

    def to_dict(self) -> dict:
        return {"sign_d": self.sign_d.value, "sign_e": self.sign_e.value,
                "scale": self.scale.value,
                "interaction_sign": self.interaction_sign.value}


@dataclass(frozen=True)
class BoundVerdict:
    direction: Direction
    applied_result: str | None
    rationale: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if (self.applied_result is None) != (self.direction is Direction.INDETERMINATE):
            raise ValueError("applied_result must be None exactly when the "
                             "verdict is Indeterminate")

    def to_dict(self) -> dict:
        return {"direction": self.direction.value,
                "applied_result": self.applied_result,
                "rationale": self.rationale}


def same_direction(sign_d: MonotoneSign, sign_e: MonotoneSign) -> bool:
    """Both non-decreasing or both non-increasing.

    ``Flat`` in one argument makes the product of the two main effects zero,
    so it pairs with anything, ``Unknown`` included.
    """
    if MonotoneSign.FLAT in (sign_d, sign_e):
        return True
    return ((sign_d.is_non_decreasing() and sign_e.is_non_decreasing())
            or (sign_d.is_non_increasing() and sign_e.is_non_increasing()))


def opposite_direction(sign_d: MonotoneSign, sign_e: MonotoneSign) -> bool:
    if MonotoneSign.FLAT in (sign_d, sign_e):
        return True
    return ((sign_d.is_non_decreasing() and sign_e.is_non_increasing())
            or (sign_d.is_non_increasing() and sign_e.is_non_decreasing()))


_NO_INTERACTION_RESULT = {Scale.ODDS_RATIO: ("R2a", "R2b"),
                          Scale.RISK_DIFFERENCE: ("R3a", "R3b")}


def classify(a: QualitativeAssumptions) -> BoundVerdict:
    """Bound direction implied by the assumptions.

    Rules, in precedence order:

    * risk ratio scale: the sign of Inter_RR - 1 decides on its own
      (zero -> R1, non-positive -> R4a, non-negative -> R4b);
    * odds ratio / risk difference scale: non-positive interaction with
      same-direction monotonicity gives a lower bound (R2a/R3a when the
      interaction is zero, R4a otherwise); non-negative interaction with
      opposite monotonicity gives an upper bound (R2b/R3b, R4b);
    * if a lower and an upper rule both fire the verdict is Equal.
    """
    interaction = a.interaction_sign
    rationale = {"assumptions": a.to_dict(), "fired": [], "unmet": []}

    if a.scale is Scale.RISK_RATIO:
        rationale["monotonicity_used"] = False
        rationale["note"] = ("Inter_RR sign alone fixes the direction; the "
                             "formal R4 statement also assumes monotonicity, "
                             "which is not needed here")
        if interaction is InteractionSign.ZERO:
            rationale["fired"] = ["R1"]
            return BoundVerdict(Direction.EQUAL, "R1", rationale)
        if interaction is InteractionSign.NON_POSITIVE:
            rationale["fired"] = ["R4a"]
            return BoundVerdict(Direction.LOWER, "R4a", rationale)
        if interaction is InteractionSign.NON_NEGATIVE:
            rationale["fired"] = ["R4b"]
            return BoundVerdict(Direction.UPPER, "R4b", rationale)
        rationale["unmet"] = ["sign of the risk-ratio interaction is unknown"]
        return BoundVerdict(Direction.INDETERMINATE, None, rationale)

    rationale["monotonicity_used"] = True
    zero_a, zero_b = _NO_INTERACTION_RESULT[a.scale]
    is_zero = interaction is InteractionSign.ZERO

    lower = None
    if interaction.is_non_positive() and same_direction(a.sign_d, a.sign_e):
        lower = zero_a if is_zero else "R4a"
    upper = None
    if interaction.is_non_negative() and opposite_direction(a.sign_d, a.sign_e):
        upper = zero_b if is_zero else "R4b"

    rationale["fired"] = [r for r in (lower, upper) if r]
    if lower and upper:
        return BoundVerdict(Direction.EQUAL, lower, rationale)
    if lower:
        return BoundVerdict(Direction.LOWER, lower, rationale)
    if upper:
        return BoundVerdict(Direction.UPPER, upper, rationale)

    unmet = []
    if interaction is InteractionSign.UNKNOWN:
        unmet.append(f"sign of the interaction on the {a.scale.value} scale "
                     "is unknown")
    if not (same_direction(a.sign_d, a.sign_e)
            or opposite_direction(a.sign_d, a.sign_e)):
        unmet.append("monotonicity of the selection probability in d and e "
                     "is not known in both arguments")
    if interaction is InteractionSign.NON_NEGATIVE and same_direction(a.sign_d, a.sign_e):
        unmet.append("non-negative interaction with same-direction "
                     "monotonicity: no general result")
    if interaction is InteractionSign.NON_POSITIVE and opposite_direction(a.sign_d, a.sign_e):
        unmet.append("non-positive interaction with opposite monotonicity: "
                     "no general result")
    rationale["unmet"] = unmet
    return BoundVerdict(Direction.INDETERMINATE, None, rationale)


def _slice_sign(diffs: Sequence[float], tol: float) -> MonotoneSign:
    if all(abs(x) <= tol for x in diffs):
        return MonotoneSign.FLAT
    if all(x >= -tol for x in diffs):
        return MonotoneSign.NON_DECREASING
    if all(x <= tol for x in diffs):
        return MonotoneSign.NON_INCREASING
    return MonotoneSign.UNKNOWN


def monotone_signs(sel: SelectionModel, tol: float = DEFAULT_TOL
                   ) -> tuple[MonotoneSign, MonotoneSign]:
    """Monotonicity of ``pi`` in d and in e, consistent across both slices."""
    sign_d = _slice_sign((sel.d1e1 - sel.d0e1, sel.d1e0 - sel.d0e0), tol)
    sign_e = _slice_sign((sel.d1e1 - sel.d1e0, sel.d0e1 - sel.d0e0), tol)
    return sign_d, sign_e


def interaction_contrast(sel: SelectionModel, scale: Scale) -> float:
    """Signed interaction on ``scale``; zero means no interaction."""
    if scale is Scale.RISK_RATIO:
        return measures.inter_rr(sel) - 1.0
    if scale is Scale.ODDS_RATIO:
        return measures.inter_or(sel) - 1.0
    return measures.inter_rd(sel)


def derive_assumptions(sel: SelectionModel, scale, tol: float = DEFAULT_TOL
                       ) -> QualitativeAssumptions:
    """Read the qualitative assumptions off a numeric selection table."""
    scale = parse_scale(scale)
    sign_d, sign_e = monotone_signs(sel, tol)
    contrast = interaction_contrast(sel, scale)
    if abs(contrast) <= tol:
        interaction = InteractionSign.ZERO
    elif contrast < 0:
        interaction = InteractionSign.NON_POSITIVE
    else:
        interaction = InteractionSign.NON_NEGATIVE
    return QualitativeAssumptions(sign_d, sign_e, scale, interaction)


def classify_numeric(target: TargetJoint | None, sel: SelectionModel, scale,
                     tol: float = DEFAULT_TOL) -> BoundVerdict:
    """Classify a numeric selection table and cross-check with Inter_RR.

    When a target joint is given, the selected and true odds ratios are
    reported in the rationale as well.
    """
    verdict = classify(derive_assumptions(sel, scale, tol))
    try:
        rr = measures.inter_rr(sel)
    except measures.ZeroCellError:
        return verdict
    # signs read with tolerance tol may hide cell perturbations of that size;
    # allow their first-order effect on the cross ratio
    check_tol = CROSS_CHECK_TOL + 4 * tol * rr * sum(
        1.0 / p for p in sel.cells() if p > 0)
    d = verdict.direction
    ok = {Direction.LOWER: rr <= 1.0 + check_tol,
          Direction.UPPER: rr >= 1.0 - check_tol,
          Direction.EQUAL: abs(rr - 1.0) <= check_tol}.get(d, True)
    if not ok:
        raise InternalConsistencyError(
            f"verdict {d.value} via {verdict.applied_result} contradicts "
            f"Inter_RR = {rr!r} for {sel}")
    rationale = dict(verdict.rationale, inter_rr=rr)
    if target is not None:
        rationale["decomposition"] = measures.decomposition(target, sel)._asdict()
    return replace(verdict, rationale=rationale)


def recode(obj, which: str):
    """Relabel E or D (1 <-> 0) in a selection model or a target joint."""
    which = str(which).upper()
    if which not in ("E", "D"):
        raise ValidationError(f"recode: which must be 'E' or 'D', got {which!r}",
                              code="unknown_value", field="which")
    c = obj.cells()  # (d1e1, d1e0, d0e1, d0e0)
    if which == "E":
        cells = (c[1], c[0], c[3], c[2])
    else:
        cells = (c[2], c[3], c[0], c[1])
    return type(obj)(*cells)


def recode_assumptions(a: QualitativeAssumptions, which: str) -> QualitativeAssumptions:
    """Assumptions describing the recoded table.

    Relabeling one variable reverses monotonicity in that argument and the
    sign of the interaction on every scale.
    """
    which = str(which).upper()
    if which == "E":
        return replace(a, sign_e=a.sign_e.flipped(),
                       interaction_sign=a.interaction_sign.flipped())
    if which == "D":
        return replace(a, sign_d=a.sign_d.flipped(),
                       interaction_sign=a.interaction_sign.flipped())
    raise ValidationError(f"recode: which must be 'E' or 'D', got {which!r}",
                          code="unknown_value", field="which")


def stratified_classify(strata):
    """Classify each ``(label, assumptions)`` stratum on its own."""
    strata = list(strata)
    if not strata:
        raise ValidationError("stratified_classify needs at least one stratum",
                              code="empty_strata", field="strata")
    return [(label, classify(a)) for label, a in strata]
