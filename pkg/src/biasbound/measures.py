"""Association and selection-interaction measures for binary (E, D, S).

Every four-cell object uses the cell order ``(d=1,e=1), (d=1,e=0),
(d=0,e=1), (d=0,e=0)``; the attributes are named ``d1e1`` ... ``d0e0``
so that the order never has to be remembered.

The central identity is

    OR_{ED|S=1} = OR_{ED} * Inter_RR,
    Inter_RR = pi(1,1) pi(0,0) / (pi(1,0) pi(0,1)),

with ``pi(d, e) = P(S=1 | D=d, E=e)``.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .errors import (BoundaryError, EmptySelectionError, ValidationError,
                     ZeroCellError)

CELLS = ("d1e1", "d1e0", "d0e1", "d0e0")

#: absolute tolerance on input probabilities
PROB_ATOL = 1e-12
#: relative tolerance on derived ratios
RATIO_RTOL = 1e-10


def _cell_name(d: int, e: int) -> str:
    if d not in (0, 1) or e not in (0, 1):
        raise IndexError(f"binary index expected, got d={d!r}, e={e!r}")
    return f"d{d}e{e}"


def _check_probability(name: str, value: float) -> float:
    try:
        # rationals stay exact; everything else becomes a float
        if isinstance(value, bool) or not isinstance(value, numbers.Rational):
            value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{name}: expected a number, got {value!r}",
                              code="not_a_number", field=name) from None
    if not math.isfinite(value) or value < 0.0 or value > 1.0:
        raise ValidationError(f"{name}={value!r}: probability out of range",
                              code="probability_out_of_range", field=name)
    return value


class _FourCells:
    """Shared behaviour of the four-cell value types."""

    d1e1: float
    d1e0: float
    d0e1: float
    d0e0: float

    @classmethod
    def from_cells(cls, cells: Iterable[float]):
        values = list(cells)
        if len(values) != 4:
            raise ValidationError(
                f"{cls.__name__} needs exactly 4 cells, got {len(values)}",
                code="wrong_cell_count")
        return cls(*values)

    def cells(self) -> tuple[float, float, float, float]:
        return (self.d1e1, self.d1e0, self.d0e1, self.d0e0)

    def cell(self, d: int, e: int) -> float:
        return getattr(self, _cell_name(d, e))


@dataclass(frozen=True)
class TargetJoint(_FourCells):
    """Joint law of (E, D) in the target population."""

    d1e1: float
    d1e0: float
    d0e1: float
    d0e0: float

    def __post_init__(self):
        for name in CELLS:
            object.__setattr__(self, name,
                               _check_probability(name, getattr(self, name)))
        total = math.fsum(self.cells())
        if abs(total - 1.0) > PROB_ATOL:
            raise ValidationError(
                f"target cells sum to {total!r}, expected 1",
                code="not_normalized")

    def prob(self, e: int, d: int) -> float:
        """``P(E=e, D=d)``."""
        return self.cell(d, e)

    @classmethod
    def independent(cls, p_exposed: float, p_outcome: float) -> "TargetJoint":
        pe, pd = p_exposed, p_outcome
        return cls(pd * pe, pd * (1 - pe), (1 - pd) * pe, (1 - pd) * (1 - pe))


@dataclass(frozen=True)
class SelectionModel(_FourCells):
    """Selection probabilities ``pi(d, e) = P(S=1 | D=d, E=e)``."""

    d1e1: float
    d1e0: float
    d0e1: float
    d0e0: float

    def __post_init__(self):
        for name in CELLS:
            object.__setattr__(self, name,
                               _check_probability(name, getattr(self, name)))
        if max(self.cells()) <= 0.0:
            raise ValidationError(
                "all selection probabilities are zero; the selected "
                "population is empty", code="empty_selection")

    def pi(self, d: int, e: int) -> float:
        return self.cell(d, e)

    def scaled(self, factor: float) -> "SelectionModel":
        """Multiply every cell by an overall sampling fraction."""
        return SelectionModel(*(factor * p for p in self.cells()))

    def transposed(self) -> "SelectionModel":
        """Swap the roles of d and e."""
        return SelectionModel(self.d1e1, self.d0e1, self.d1e0, self.d0e0)


class LogisticParams(NamedTuple):
    """Saturated logistic model ``logit pi(d,e) = b0 + b1 d + b2 e + b3 d e``."""

    beta0: float
    beta1: float
    beta2: float
    beta3: float

    def predict(self, d: int, e: int) -> float:
        return expit(self.beta0 + self.beta1 * d + self.beta2 * e
                     + self.beta3 * d * e)

    def to_selection(self) -> SelectionModel:
        return SelectionModel(*(self.predict(d, e)
                                for d, e in ((1, 1), (1, 0), (0, 1), (0, 0))))


class LinearParams(NamedTuple):
    """Saturated linear probability model ``pi(d,e) = g0 + g1 d + g2 e + g3 d e``."""

    gamma0: float
    gamma1: float
    gamma2: float
    gamma3: float

    def predict(self, d: int, e: int) -> float:
        return self.gamma0 + self.gamma1 * d + self.gamma2 * e + self.gamma3 * d * e

    def to_selection(self) -> SelectionModel:
        return SelectionModel(*(self.predict(d, e)
                                for d, e in ((1, 1), (1, 0), (0, 1), (0, 0))))


class InteractionSummary(NamedTuple):
    inter_rr: float | None
    inter_or: float | None
    inter_rd: float


class Decomposition(NamedTuple):
    or_sel: float
    or_true: float
    inter_rr: float

    @property
    def residual(self) -> float:
        """Relative error of ``or_sel = or_true * inter_rr``."""
        return abs(self.or_sel - self.or_true * self.inter_rr) / self.or_sel


def expit(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def logit(p: float) -> float:
    return math.log(p) - math.log1p(-p)


def _require_interior(sel: SelectionModel) -> None:
    for name, value in zip(CELLS, sel.cells()):
        if value <= 0.0 or value >= 1.0:
            raise BoundaryError(name, value)


def _cross_ratio(a: float, b: float, c: float, d: float,
                 names: tuple[str, str], quantity: str) -> float:
    """``a*d / (b*c)`` with explicit zero-denominator errors."""
    if b == 0.0:
        raise ZeroCellError(names[0], quantity)
    if c == 0.0:
        raise ZeroCellError(names[1], quantity)
    return (a * d) / (b * c)


def true_or(target: TargetJoint) -> float:
    """Exposure-outcome odds ratio ``OR_ED`` of a joint table."""
    for name, value in zip(CELLS, target.cells()):
        if value <= 0.0:
            raise ZeroCellError(name)
    return (target.d1e1 * target.d0e0) / (target.d1e0 * target.d0e1)


def risk_ratio(target: TargetJoint) -> float:
    """``P(D=1|E=1) / P(D=1|E=0)``."""
    exposed = target.d1e1 + target.d0e1
    unexposed = target.d1e0 + target.d0e0
    if exposed == 0.0 or unexposed == 0.0:
        raise ZeroCellError("E margin", "risk ratio")
    if target.d1e0 == 0.0:
        raise ZeroCellError("d1e0", "risk ratio")
    return (target.d1e1 / exposed) / (target.d1e0 / unexposed)


def risk_difference(target: TargetJoint) -> float:
    """``P(D=1|E=1) - P(D=1|E=0)``."""
    exposed = target.d1e1 + target.d0e1
    unexposed = target.d1e0 + target.d0e0
    if exposed == 0.0 or unexposed == 0.0:
        raise ZeroCellError("E margin", "risk difference")
    return target.d1e1 / exposed - target.d1e0 / unexposed


def selected_joint(target: TargetJoint, sel: SelectionModel) -> TargetJoint:
    """Law of (E, D) given S=1."""
    weights = [p * s for p, s in zip(target.cells(), sel.cells())]
    norm = math.fsum(weights)
    if norm <= 0.0:
        raise EmptySelectionError(
            "P(S=1) = 0: the selected population is empty")
    return TargetJoint(*(w / norm for w in weights))


def selected_or(target: TargetJoint, sel: SelectionModel) -> float:
    """``OR_{ED|S=1}``.

    Computed from the products ``p * pi`` directly; the normalizing constant
    cancels in the cross ratio.
    """
    weights = [p * s for p, s in zip(target.cells(), sel.cells())]
    if math.fsum(weights) <= 0.0:
        raise EmptySelectionError(
            "P(S=1) = 0: the selected population is empty")
    for name, w in zip(CELLS, weights):
        if w <= 0.0:
            raise ZeroCellError(name, "selected odds ratio")
    return (weights[0] * weights[3]) / (weights[1] * weights[2])


def inter_rr(sel: SelectionModel) -> float:
    """Multiplicative interaction of D and E on S (risk ratio scale)."""
    return _cross_ratio(sel.d1e1, sel.d1e0, sel.d0e1, sel.d0e0,
                        ("d1e0", "d0e1"), "Inter_RR")


def inter_or(sel: SelectionModel) -> float:
    """``OR_{ES|D=1} / OR_{ES|D=0}``, the interaction on the odds ratio scale."""
    _require_interior(sel)
    odds = [p / (1.0 - p) for p in sel.cells()]
    return (odds[0] * odds[3]) / (odds[1] * odds[2])


def inter_rd(sel: SelectionModel) -> float:
    """``RD_{ES|D=1} - RD_{ES|D=0}``, the interaction on the additive scale."""
    return (sel.d1e1 - sel.d1e0) - (sel.d0e1 - sel.d0e0)


def interactions(sel: SelectionModel) -> InteractionSummary:
    """All three interaction measures; undefined ones are ``None``."""
    try:
        rr = inter_rr(sel)
    except ZeroCellError:
        rr = None
    try:
        or_ = inter_or(sel)
    except BoundaryError:
        or_ = None
    return InteractionSummary(rr, or_, inter_rd(sel))


def fit_logistic(sel: SelectionModel) -> LogisticParams:
    _require_interior(sel)
    b0 = logit(sel.d0e0)
    b1 = logit(sel.d1e0) - b0
    b2 = logit(sel.d0e1) - b0
    b3 = logit(sel.d1e1) - b0 - b1 - b2
    return LogisticParams(b0, b1, b2, b3)


def fit_linear(sel: SelectionModel) -> LinearParams:
    g0 = sel.d0e0
    g1 = sel.d1e0 - g0
    g2 = sel.d0e1 - g0
    # pi(1,1) - g0 - g1 - g2, grouped as a difference of differences
    g3 = (sel.d1e1 - sel.d1e0) - (sel.d0e1 - sel.d0e0)
    return LinearParams(g0, g1, g2, g3)


def decomposition(target: TargetJoint, sel: SelectionModel) -> Decomposition:
    """``(OR_sel, OR_true, Inter_RR)``; the first equals the product of the others."""
    return Decomposition(selected_or(target, sel), true_or(target), inter_rr(sel))


def is_collapsible(sel: SelectionModel, tol: float = PROB_ATOL) -> bool:
    """True if ``pi`` is constant in d (D ind. S | E) or in e (E ind. S | D).

    Either condition forces ``Inter_RR = 1``.
    """
    flat_in_d = (abs(sel.d1e1 - sel.d0e1) <= tol
                 and abs(sel.d1e0 - sel.d0e0) <= tol)
    flat_in_e = (abs(sel.d1e1 - sel.d1e0) <= tol
                 and abs(sel.d0e1 - sel.d0e0) <= tol)
    return flat_in_d or flat_in_e
