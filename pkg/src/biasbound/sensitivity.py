"""Sensitivity adjustment of an observed (selected-population) odds ratio."""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import NamedTuple

from .classify import BoundVerdict, Direction
from .errors import ValidationError, ZeroCellError
from .measures import CELLS


@dataclass(frozen=True)
class ObservedTable:
    """Cell counts of the selected sample, in canonical cell order."""

    d1e1: int
    d1e0: int
    d0e1: int
    d0e0: int

    def __post_init__(self):
        for name in CELLS:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                if isinstance(value, float) and value.is_integer():
                    object.__setattr__(self, name, int(value))
                    value = int(value)
                else:
                    raise ValidationError(f"{name}: count must be an integer, "
                                          f"got {value!r}", code="not_an_integer",
                                          field=name)
            if value < 0:
                raise ValidationError(f"{name}: negative count {value}",
                                      code="negative_count", field=name)
        if self.total() == 0:
            raise ValidationError("observed table is empty", code="empty_table")

    @classmethod
    def from_cells(cls, cells) -> "ObservedTable":
        values = list(cells)
        if len(values) != 4:
            raise ValidationError(f"counts need exactly 4 cells, got {len(values)}",
                                  code="wrong_cell_count", field="counts")
        return cls(*values)

    def cells(self) -> tuple[int, int, int, int]:
        return (self.d1e1, self.d1e0, self.d0e1, self.d0e0)

    def total(self) -> int:
        return sum(self.cells())


@dataclass(frozen=True)
class IntervalEstimate:
    point: float
    lo: float
    hi: float
    level: float = 0.95

    def __post_init__(self):
        for name in ("point", "lo", "hi"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be a positive number, got {v!r}",
                                      code="non_positive", field=name)
        if not 0.0 < self.level < 1.0:
            raise ValidationError(f"level must lie in (0, 1), got {self.level!r}",
                                  code="bad_level", field="level")
        if not self.lo <= self.point <= self.hi:
            raise ValidationError(
                f"interval must satisfy lo <= point <= hi, got "
                f"({self.lo!r}, {self.point!r}, {self.hi!r})", code="bad_interval")

    def to_dict(self) -> dict:
        return {"point": self.point, "lo": self.lo, "hi": self.hi,
                "level": self.level}


class AdjustedRange(NamedTuple):
    """Range of the true odds ratio implied by a range of Inter_RR."""

    point_lo: float
    point_hi: float
    lo: float
    hi: float
    level: float


def _positive(name: str, value: float) -> float:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ValidationError(f"{name} must be positive, got {value!r}",
                              code="non_positive", field=name)
    return float(value)


def adjust_or(or_sel: float, inter_rr: float) -> float:
    """True odds ratio implied by a selected OR and an assumed Inter_RR."""
    return _positive("or_sel", or_sel) / _positive("inter_rr", inter_rr)


def adjust_interval(est: IntervalEstimate, inter_rr_range: tuple[float, float]
                    ) -> AdjustedRange:
    """Divide the estimate and its limits by every Inter_RR in ``[lo, hi]``.

    The result is the envelope: the point estimate becomes a range and the
    limits widen to ``est.lo / hi`` and ``est.hi / lo``.
    """
    lo, hi = inter_rr_range
    lo = _positive("inter_rr_lo", lo)
    hi = _positive("inter_rr_hi", hi)
    if lo > hi:
        raise ValidationError(f"Inter_RR range is reversed: ({lo!r}, {hi!r})",
                              code="invalid_range", field="inter_rr_range")
    return AdjustedRange(est.point / hi, est.point / lo,
                         est.lo / hi, est.hi / lo, est.level)


def normal_quantile(p: float) -> float:
    return NormalDist().inv_cdf(p)


def woolf_ci(table: ObservedTable, level: float = 0.95,
             continuity_correction: bool = False) -> IntervalEstimate:
    """Odds ratio with the Woolf (log-OR) confidence interval.

    With ``continuity_correction`` 0.5 is added to every cell first;
    otherwise a zero cell raises.
    """
    if not 0.0 < level < 1.0:
        raise ValidationError(f"level must lie in (0, 1), got {level!r}",
                              code="bad_level", field="level")
    counts = [float(n) for n in table.cells()]
    if continuity_correction:
        counts = [n + 0.5 for n in counts]
    else:
        for name, n in zip(CELLS, counts):
            if n == 0:
                raise ZeroCellError(name, "Woolf interval")
    n11, n10, n01, n00 = counts
    point = (n11 * n00) / (n10 * n01)
    se = math.sqrt(sum(1.0 / n for n in counts))
    z = normal_quantile(0.5 + level / 2.0)
    log_point = math.log(point)
    return IntervalEstimate(point, math.exp(log_point - z * se),
                            math.exp(log_point + z * se), level)


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def bound_report(est: IntervalEstimate, verdict: BoundVerdict) -> dict:
    """Qualitative conclusion about the true odds ratio.

    Returns a dict with the verdict, machine-readable bounds on ``OR_true``
    (``None`` where no bound follows) and a human-readable statement.
    """
    d = verdict.direction
    pct = f"{100 * est.level:g}%"
    out = {"direction": d.value, "applied_result": verdict.applied_result,
           "estimate": est.to_dict()}
    if d is Direction.LOWER:
        out["or_true_lower"] = est.point
        out["or_true_upper"] = None
        out["statement"] = (f"OR_true ≥ {_fmt(est.point)} "
                            f"(and ≥ {_fmt(est.lo)} at the {pct} confidence level)")
    elif d is Direction.UPPER:
        out["or_true_lower"] = None
        out["or_true_upper"] = est.point
        out["statement"] = (f"OR_true ≤ {_fmt(est.point)} "
                            f"(and ≤ {_fmt(est.hi)} at the {pct} confidence level)")
    elif d is Direction.EQUAL:
        out["or_true_lower"] = est.point
        out["or_true_upper"] = est.point
        out["statement"] = (f"OR_true = {_fmt(est.point)} "
                            f"({pct} CI {_fmt(est.lo)} to {_fmt(est.hi)})")
    else:
        unmet = list(verdict.rationale.get("unmet") or
                     ["no sufficient condition holds"])
        out["or_true_lower"] = None
        out["or_true_upper"] = None
        out["unmet_conditions"] = unmet
        out["statement"] = ("no conclusion about OR_true: " + "; ".join(unmet))
    return out
