"""Quality assessment of mapped source columns against reference data.

Scores are computed per (source column, global column) pair. All of the
reference-based features share one denominator, the number of reference
rows, which is what makes the chain

    fact_completeness >= validity >= accuracy

hold by construction: validity only counts non-null cells of represented
entities, and accuracy only counts valid cells that agree with the
reference value.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from fractions import Fraction
from typing import Iterable, Sequence

from . import rules as rules_mod
from .catalog import Catalog
from .errors import (
    EmptyInput,
    EmptyProjection,
    EmptyReference,
    InvariantViolation,
    ValidationError,
)
from .rules import Rule
from .scores import ColumnProfile, ONE, Score, ZERO, as_score

AGE_EXACT_DAYS = "exact-days"
AGE_MONTHS30 = "months30"
AGE_MODES = (AGE_EXACT_DAYS, AGE_MONTHS30)


# -- feature formulas ---------------------------------------------------------

def null_completeness(cells: Sequence[str | None]) -> Score:
    """Share of non-null cells in a column, independent of any reference."""
    if not cells:
        raise EmptyInput("null completeness over an empty column")
    filled = sum(1 for c in cells if c is not None)
    return Fraction(filled, len(cells))


def population_completeness(represented: int, ref_size: int) -> Score:
    if ref_size <= 0:
        raise EmptyReference("population completeness needs a non-empty reference")
    if not 0 <= represented <= ref_size:
        raise ValidationError("represented count exceeds reference size")
    return Fraction(represented, ref_size)


def incompleteness(nulls: int, ref_size: int) -> Score:
    if ref_size <= 0:
        raise EmptyReference("incompleteness needs a non-empty reference")
    if not 0 <= nulls <= ref_size:
        raise ValidationError("null count exceeds reference size")
    return Fraction(nulls, ref_size)


def fact_completeness(population: Score, incomplete: Score) -> Score:
    if incomplete > population:
        raise InvariantViolation(
            f"incompleteness {incomplete} exceeds population {population}"
        )
    return population - incomplete


def validity_score(valid: int, ref_size: int) -> Score:
    if ref_size <= 0:
        raise EmptyReference("validity needs a non-empty reference")
    return Fraction(valid, ref_size)


def accuracy_score(accurate: int, ref_size: int) -> Score:
    if ref_size <= 0:
        raise EmptyReference("accuracy needs a non-empty reference")
    return Fraction(accurate, ref_size)


@dataclass(frozen=True)
class TimelinessInput:
    insertion: date
    as_of: date
    volatility_days: int


def age_days(insertion: date, as_of: date, mode: str = AGE_EXACT_DAYS) -> int:
    """Currency of the data in days under the chosen counting convention.

    `exact-days` is the calendar difference. `months30` counts whole
    elapsed months and values each at 30 days, which is the convention
    used when quoting ages like "two months old".
    """
    if mode == AGE_EXACT_DAYS:
        return (as_of - insertion).days
    if mode == AGE_MONTHS30:
        months = (as_of.year - insertion.year) * 12 + (as_of.month - insertion.month)
        if as_of.day < insertion.day:
            months -= 1
        return months * 30
    raise ValidationError(f"unknown age mode {mode!r}")


def timeliness_score(inp: TimelinessInput, mode: str = AGE_EXACT_DAYS) -> Score:
    if inp.volatility_days <= 0:
        raise ValidationError("volatility must be a positive number of days")
    currency = age_days(inp.insertion, inp.as_of, mode)
    value = ONE - Fraction(currency, inp.volatility_days)
    if value < ZERO:
        return ZERO
    if value > ONE:
        return ONE
    return value


# -- aggregation --------------------------------------------------------------

def scaled_aggregate(values: Iterable[Score], scale: int) -> Score:
    """Sum of per-attribute scores over the number of queried attributes.

    Attributes a source does not supply simply contribute nothing, which
    is why the divisor is the query's attribute count, not len(values).
    """
    if scale <= 0:
        raise EmptyProjection("aggregate over zero queried attributes")
    total = sum((as_score(v) for v in values), ZERO)
    result = total / scale
    if result > ONE:
        raise InvariantViolation("scaled aggregate exceeded 1")
    return result


def max_aggregate(values: Iterable[Score]) -> Score:
    items = [as_score(v) for v in values]
    if not items:
        raise EmptyInput("max aggregate of an empty collection")
    return max(items)


def mean_aggregate(values: Iterable[Score]) -> Score:
    items = [as_score(v) for v in values]
    if not items:
        raise EmptyInput("mean aggregate of an empty collection")
    return sum(items, ZERO) / len(items)


# -- per-column counting -------------------------------------------------------

@dataclass(frozen=True)
class ColumnCounts:
    represented: int
    nulls: int
    valid: int
    accurate: int


def count_matched(
    pairs: Sequence[tuple[str | None, str | None]], rule: Rule
) -> ColumnCounts:
    """Tally one column's cells against their matched reference cells.

    Each pair is (source cell, reference cell) for one represented
    entity. Accuracy requires the cell to be valid first, so an exact
    copy of an out-of-domain reference value still counts as inaccurate.
    """
    nulls = valid = accurate = 0
    for cell, ref_cell in pairs:
        if cell is None:
            nulls += 1
            continue
        if not rules_mod.is_valid(rule, cell):
            continue
        valid += 1
        if ref_cell is not None and rules_mod.canon(rule, cell) == rules_mod.canon(
            rule, ref_cell
        ):
            accurate += 1
    return ColumnCounts(len(pairs), nulls, valid, accurate)


def profile_from_counts(
    column_id: int,
    gs_column_id: int,
    counts: ColumnCounts,
    ref_size: int,
    timeliness: Score,
) -> ColumnProfile:
    pop = population_completeness(counts.represented, ref_size)
    inc = incompleteness(counts.nulls, ref_size)
    return ColumnProfile(
        column_id=column_id,
        gs_column_id=gs_column_id,
        population=pop,
        incompleteness=inc,
        fact_completeness=fact_completeness(pop, inc),
        validity=validity_score(counts.valid, ref_size),
        accuracy=accuracy_score(counts.accurate, ref_size),
        timeliness=timeliness,
    )


# -- whole-catalog assessment ----------------------------------------------------

@dataclass
class AssessmentRun:
    as_of: date
    age_mode: str
    profiles: list[ColumnProfile]
    diagnostics: list[str]


@dataclass(frozen=True)
class RelationMatch:
    """Join of a relation's rows onto reference rows via the mapped key."""

    relation_id: int
    gs_table_id: int
    pairs: list[tuple[int, int]]        # (reference row idx, relation row idx)
    diagnostics: list[str]


def match_relation(cat: Catalog, relation_id: int, gs_table_id: int) -> RelationMatch:
    rel = cat.relation(relation_id)
    key_cols = cat.key_columns_of(relation_id, gs_table_id)
    key_rules = [
        cat.gs_column(cat.mappings[c.column_id].gs_column_id).rule for c in key_cols
    ]
    ref_index = cat.reference_key_index(gs_table_id)
    diagnostics: list[str] = []
    claimed: dict[int, int] = {}
    for row_idx, row in enumerate(rel.rows):
        raw_key = [row[c.position] for c in key_cols]
        if any(cell is None for cell in raw_key):
            diagnostics.append(
                f"relation {rel.name!r} row {row_idx + 1}: null key, row ignored"
            )
            continue
        key = tuple(
            rules_mod.canon(rule, cell) for rule, cell in zip(key_rules, raw_key)
        )
        ref_idx = ref_index.get(key)
        if ref_idx is None:
            diagnostics.append(
                f"relation {rel.name!r} row {row_idx + 1}: key {key} not in "
                "reference, row ignored"
            )
            continue
        if ref_idx in claimed:
            diagnostics.append(
                f"relation {rel.name!r} row {row_idx + 1}: duplicate key {key}, "
                f"row {claimed[ref_idx] + 1} already scored"
            )
            continue
        claimed[ref_idx] = row_idx
    pairs = sorted((ref_idx, row_idx) for ref_idx, row_idx in claimed.items())
    return RelationMatch(relation_id, gs_table_id, pairs, diagnostics)


def assess_catalog(
    cat: Catalog, as_of: date, age_mode: str = AGE_EXACT_DAYS
) -> AssessmentRun:
    """Score every mapped column and store the profiles on the mappings."""
    if age_mode not in AGE_MODES:
        raise ValidationError(f"unknown age mode {age_mode!r}")
    profiles: list[ColumnProfile] = []
    diagnostics: list[str] = []
    for gs_table_id in sorted(cat.gs_tables):
        mappings = cat.mappings_into(gs_table_id)
        if not mappings:
            continue
        table = cat.gs_table(gs_table_id)
        ref = cat.references.get(gs_table_id)
        if ref is None or not ref.rows:
            raise EmptyReference(
                f"table {table.name!r} has mapped columns but no reference rows"
            )
        ref_size = len(ref.rows)
        ref_position = {cid: i for i, cid in enumerate(table.column_ids)}
        matches: dict[int, RelationMatch] = {}
        for relation_id in cat.relations_into(gs_table_id):
            rel = cat.relation(relation_id)
            if not rel.loaded:
                diagnostics.append(
                    f"relation {rel.name!r} has no loaded rows, columns scored empty"
                )
            match = match_relation(cat, relation_id, gs_table_id)
            diagnostics.extend(match.diagnostics)
            matches[relation_id] = match
        for mapping in mappings:
            col = cat.column(mapping.column_id)
            rel = cat.relation(col.relation_id)
            if rel.insertion_date is None or rel.volatility_days is None:
                raise ValidationError(
                    f"relation {rel.name!r} needs an insertion date and a "
                    "volatility to be assessed"
                )
            gcol = cat.gs_column(mapping.gs_column_id)
            match = matches[col.relation_id]
            ref_pos = ref_position[gcol.gs_column_id]
            pairs = [
                (rel.rows[row_idx][col.position], ref.rows[ref_idx][ref_pos])
                for ref_idx, row_idx in match.pairs
            ]
            counts = count_matched(pairs, gcol.rule)
            tscore = timeliness_score(
                TimelinessInput(rel.insertion_date, as_of, rel.volatility_days),
                age_mode,
            )
            profile = profile_from_counts(
                col.column_id, gcol.gs_column_id, counts, ref_size, tscore
            )
            if not (
                profile.fact_completeness >= profile.validity >= profile.accuracy
            ):
                raise InvariantViolation(
                    f"column {col.column_id}: feature chain broken: "
                    f"{profile.fact_completeness} / {profile.validity} / "
                    f"{profile.accuracy}"
                )
            cat.set_profile(col.column_id, profile)
            profiles.append(profile)
    profiles.sort(key=lambda p: (p.gs_column_id, p.column_id))
    return AssessmentRun(as_of, age_mode, profiles, diagnostics)
