"""Validity rules attached to global-schema columns.

A rule is written as one of:

    type:int        type:real       type:date       type:text
    range:[0,4]
    in:{IS,IT,CS}
    pattern:^[A-Z][a-z]+$

`type:date` accepts day/month/year with `/` separators. `range` implies
real-valued and is inclusive on both ends. `in` compares the raw text
after stripping surrounding whitespace. Rules also define how raw cell
text is canonicalized before equality checks against reference data.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date
from fractions import Fraction
from typing import Any

from .errors import ValidationError

DATE_FORMAT = "%d/%m/%Y"


def parse_date(text: str) -> date:
    """Parse day/month/year. Raises ValueError on malformed input."""
    parts = text.strip().split("/")
    if len(parts) != 3:
        raise ValueError(f"not a d/m/y date: {text!r}")
    day, month, year = (int(p) for p in parts)
    return date(year, month, day)


def format_date(value: date) -> str:
    return f"{value.day}/{value.month}/{value.year}"


@dataclass(frozen=True)
class Rule:
    kind: str                      # int | real | date | text | range | in | pattern
    low: Fraction | None = None
    high: Fraction | None = None
    members: frozenset[str] | None = None
    pattern: str | None = None

    def spec(self) -> str:
        """Render back to the textual form used in schema files."""
        if self.kind == "range":
            return f"range:[{self.low},{self.high}]"
        if self.kind == "in":
            assert self.members is not None
            return "in:{" + ",".join(sorted(self.members)) + "}"
        if self.kind == "pattern":
            return f"pattern:{self.pattern}"
        return f"type:{self.kind}"


TEXT_RULE = Rule("text")

_TYPES = {"int", "real", "date", "text"}


def parse_rule(text: str) -> Rule:
    text = text.strip()
    if ":" not in text:
        raise ValidationError(f"malformed rule {text!r}")
    head, _, body = text.partition(":")
    head = head.strip().lower()
    body = body.strip()
    if head == "type":
        kind = body.lower()
        if kind not in _TYPES:
            raise ValidationError(f"unknown type {body!r} in rule")
        return Rule(kind)
    if head == "range":
        m = re.fullmatch(r"\[([^,\]]+),([^,\]]+)\]", body)
        if not m:
            raise ValidationError(f"malformed range rule {text!r}")
        try:
            low = Fraction(m.group(1).strip())
            high = Fraction(m.group(2).strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"malformed range bound in {text!r}") from exc
        if low > high:
            raise ValidationError(f"empty range in {text!r}")
        return Rule("range", low=low, high=high)
    if head == "in":
        if not (body.startswith("{") and body.endswith("}")):
            raise ValidationError(f"malformed membership rule {text!r}")
        members = frozenset(
            part.strip() for part in body[1:-1].split(",") if part.strip()
        )
        if not members:
            raise ValidationError(f"empty membership rule {text!r}")
        return Rule("in", members=members)
    if head == "pattern":
        try:
            re.compile(body)
        except re.error as exc:
            raise ValidationError(f"bad pattern in rule {text!r}: {exc}") from exc
        return Rule("pattern", pattern=body)
    raise ValidationError(f"unknown rule head {head!r}")


def is_valid(rule: Rule, raw: str) -> bool:
    """Does a non-null cell satisfy the rule?"""
    raw = raw.strip()
    if rule.kind == "text":
        return True
    if rule.kind == "int":
        try:
            int(raw)
        except ValueError:
            return False
        return True
    if rule.kind == "real":
        try:
            Fraction(raw)
        except (ValueError, ZeroDivisionError):
            return False
        return True
    if rule.kind == "date":
        try:
            parse_date(raw)
        except ValueError:
            return False
        return True
    if rule.kind == "range":
        try:
            value = Fraction(raw)
        except (ValueError, ZeroDivisionError):
            return False
        assert rule.low is not None and rule.high is not None
        return rule.low <= value <= rule.high
    if rule.kind == "in":
        assert rule.members is not None
        return raw in rule.members
    if rule.kind == "pattern":
        assert rule.pattern is not None
        return re.fullmatch(rule.pattern, raw) is not None
    raise ValidationError(f"unknown rule kind {rule.kind!r}")


def canon(rule: Rule, raw: str) -> Any:
    """Canonical comparison value for a cell under this rule.

    Falls back to the stripped text when the cell does not parse, so
    invalid cells still compare (unequal) rather than raising.
    """
    raw = raw.strip()
    if rule.kind == "int":
        try:
            return int(raw)
        except ValueError:
            return raw
    if rule.kind in ("real", "range"):
        try:
            return Fraction(raw)
        except (ValueError, ZeroDivisionError):
            return raw
    if rule.kind == "date":
        try:
            return parse_date(raw)
        except ValueError:
            return raw
    return raw
