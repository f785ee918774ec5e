"""Run settings and the qualitative term table.

Settings come from CLI flags or a small key=value file; either way they
end up in a RunConfig. The term table maps words like "high" to numeric
bounds, globally or per feature, so goals can be written qualitatively.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from fractions import Fraction
from pathlib import Path

from .assess import AGE_MODES, AGE_EXACT_DAYS
from .errors import UnresolvedTerm, ValidationError
from .query import normalize_feature
from .rules import parse_date
from .scores import FEATURES, Score, as_score

SCORING_NAMES = ("sum", "min", "weighted")
OUTPUT_FORMATS = ("table", "csv")

DEFAULT_TERMS: dict[str, Score] = {
    "high": Fraction("0.65"),
    "medium": Fraction("0.40"),
    "low": Fraction(0),
}


@dataclass
class TermTable:
    defaults: dict[str, Score] = field(default_factory=lambda: dict(DEFAULT_TERMS))
    overrides: dict[tuple[str, str], Score] = field(default_factory=dict)

    def define(self, term: str, bound: Score, feature: str | None = None):
        term = term.strip().lower()
        if not term:
            raise ValidationError("term name must be non-empty")
        bound = as_score(bound)
        if not 0 <= bound <= 1:
            raise ValidationError(f"term bound must lie in [0, 1], got {bound}")
        if feature is None:
            self.defaults[term] = bound
        else:
            if feature not in FEATURES:
                raise ValidationError(f"unknown feature {feature!r}")
            self.overrides[(feature, term)] = bound

    def bound(self, feature: str, term: str) -> Score:
        term = term.lower()
        if (feature, term) in self.overrides:
            return self.overrides[(feature, term)]
        if term in self.defaults:
            return self.defaults[term]
        raise UnresolvedTerm(
            f"term {term!r} has no bound for feature {feature!r}; "
            "define it before use"
        )


@dataclass
class RunConfig:
    as_of: date | None = None
    age_mode: str = AGE_EXACT_DAYS
    score_precision: int | None = 2
    scoring: str = "sum"
    weights: dict[str, Score] = field(default_factory=dict)
    output: str = "table"
    max_sources: int = 16
    terms: TermTable = field(default_factory=TermTable)

    def set(self, key: str, value: str):
        """Apply one key=value setting; used by config files and --set."""
        key = key.strip()
        value = value.strip()
        if key == "as_of":
            self.as_of = parse_date(value)
        elif key == "age_mode":
            if value not in AGE_MODES:
                raise ValidationError(
                    f"age_mode must be one of {', '.join(AGE_MODES)}"
                )
            self.age_mode = value
        elif key == "score_precision":
            if value.lower() in ("none", "full"):
                self.score_precision = None
            else:
                precision = int(value)
                if not 0 <= precision <= 12:
                    raise ValidationError("score_precision must be 0..12 or full")
                self.score_precision = precision
        elif key == "scoring":
            if value not in SCORING_NAMES:
                raise ValidationError(
                    f"scoring must be one of {', '.join(SCORING_NAMES)}"
                )
            self.scoring = value
        elif key == "output":
            if value not in OUTPUT_FORMATS:
                raise ValidationError(
                    f"output must be one of {', '.join(OUTPUT_FORMATS)}"
                )
            self.output = value
        elif key == "max_sources":
            count = int(value)
            if count < 1:
                raise ValidationError("max_sources must be positive")
            self.max_sources = count
        elif key.startswith("weight."):
            feature = normalize_feature(key[len("weight."):])
            if feature is None:
                raise ValidationError(f"unknown feature in {key!r}")
            self.weights[feature] = _parse_bound(value)
        elif key.startswith("term."):
            parts = key.split(".")
            if len(parts) == 2:
                self.terms.define(parts[1], _parse_bound(value))
            elif len(parts) == 3:
                feature = normalize_feature(parts[1])
                if feature is None:
                    raise ValidationError(f"unknown feature in {key!r}")
                self.terms.define(parts[2], _parse_bound(value), feature)
            else:
                raise ValidationError(f"malformed term key {key!r}")
        else:
            raise ValidationError(f"unknown setting {key!r}")


def _parse_bound(value: str) -> Score:
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"not a number: {value!r}") from exc


def load_config(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    config = base or RunConfig()
    for number, raw_line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{number}: expected key=value")
        key, _, value = line.partition("=")
        config.set(key, value)
    return config
