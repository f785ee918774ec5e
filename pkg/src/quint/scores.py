"""Score values and the vectors that bundle them.

All quality scores are held as exact rationals (:class:`fractions.Fraction`)
so that aggregation order never introduces float drift, and rounding happens
only where a value crosses a storage or display boundary. Rounding is
half-up, which is what you get when you do the arithmetic by hand.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .errors import ValidationError

Score = Fraction
ScoreLike = Union[Fraction, int, float, str]

# Canonical feature order for vectors, reports, and ranking.
FEATURES: tuple[str, ...] = (
    "fact_completeness",
    "validity",
    "accuracy",
    "timeliness",
)

SHORT_NAMES: Mapping[str, str] = {
    "fact_completeness": "fact",
    "validity": "validity",
    "accuracy": "accuracy",
    "timeliness": "timeliness",
}

ZERO = Fraction(0)
ONE = Fraction(1)


def as_score(value: ScoreLike) -> Score:
    """Coerce a caller-supplied number to an exact score."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValidationError("boolean is not a score")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # Go through the decimal literal so 0.62 means 62/100, not the
        # binary float it would otherwise denote.
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value)
    raise ValidationError(f"cannot interpret {value!r} as a score")


def round_half_up(value: Score, digits: int) -> Score:
    """Round an exact rational to `digits` decimal places, ties away from zero."""
    if digits < 0:
        raise ValidationError("negative precision")
    scale = 10 ** digits
    scaled = value * scale
    whole, rem = divmod(scaled.numerator, scaled.denominator)
    # divmod floors, so rem is non-negative; a remainder of exactly half
    # the denominator rounds up, matching hand arithmetic on positives.
    if 2 * rem >= scaled.denominator:
        whole += 1
    return Fraction(whole, scale)


def format_score(value: Score, digits: int | None = 2) -> str:
    """Render a score as a fixed-point decimal string."""
    if digits is None:
        digits = 2
    rounded = round_half_up(value, digits)
    sign = "-" if rounded < 0 else ""
    scaled = abs(rounded) * 10 ** digits
    text = str(int(scaled)).rjust(digits + 1, "0")
    if digits == 0:
        return sign + text
    return f"{sign}{text[:-digits]}.{text[-digits:]}"


def _check_unit(name: str, value: Score) -> Score:
    if not (ZERO <= value <= ONE):
        raise ValidationError(f"{name} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class QualityVector:
    """One score per quality feature, in canonical order."""

    fact_completeness: Score
    validity: Score
    accuracy: Score
    timeliness: Score

    def __post_init__(self):
        for name in FEATURES:
            object.__setattr__(
                self, name, _check_unit(name, as_score(getattr(self, name)))
            )

    def get(self, feature: str) -> Score:
        if feature not in FEATURES:
            raise ValidationError(f"unknown feature {feature!r}")
        return getattr(self, feature)

    def rounded(self, digits: int | None) -> "QualityVector":
        if digits is None:
            return self
        return QualityVector(
            *(round_half_up(getattr(self, name), digits) for name in FEATURES)
        )

    def as_tuple(self) -> tuple[Score, Score, Score, Score]:
        return tuple(getattr(self, name) for name in FEATURES)

    def format(self, digits: int | None = 2) -> str:
        return "(" + ", ".join(format_score(s, digits) for s in self.as_tuple()) + ")"


@dataclass(frozen=True)
class ColumnProfile:
    """Full per-column assessment, before any projection onto a query.

    `population` counts represented real-world entities, `incompleteness`
    counts null cells among them, and the remaining four are the features
    queries can constrain. fact_completeness = population - incompleteness
    by construction.
    """

    column_id: int
    gs_column_id: int
    population: Score
    incompleteness: Score
    fact_completeness: Score
    validity: Score
    accuracy: Score
    timeliness: Score

    def __post_init__(self):
        for name in (
            "population",
            "incompleteness",
            "fact_completeness",
            "validity",
            "accuracy",
            "timeliness",
        ):
            object.__setattr__(
                self, name, _check_unit(name, as_score(getattr(self, name)))
            )

    def vector(self) -> QualityVector:
        return QualityVector(
            self.fact_completeness, self.validity, self.accuracy, self.timeliness
        )


def mean(values: Iterable[Score]) -> Score:
    items = list(values)
    if not items:
        raise ValidationError("mean of empty sequence")
    return sum(items, ZERO) / len(items)
