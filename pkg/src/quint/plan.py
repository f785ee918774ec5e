"""Query planning: queried-source vectors, alternatives, goal pruning.

A queried source's vector projects its column profiles onto the query:
fact completeness, validity and accuracy are summed over the queried
attributes and scaled by the attribute count (an attribute the source
does not supply contributes nothing), while timeliness takes the best
column. Alternatives are the non-empty subsets of the candidate
sources; multi-source vectors average the members feature-wise, again
except timeliness, which keeps the freshest member.

Scores are rounded to the configured precision each time they are
stored on an entity (column profile -> queried vector -> alternative
vector), so reported numbers and the numbers later stages consume are
the same. Precision None keeps every stage exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .assess import max_aggregate, scaled_aggregate
from .catalog import Catalog
from .errors import (
    NoCandidateSources,
    StaleAssessment,
    TooManySources,
    UnknownColumn,
    UnsatisfiableGoal,
    ValidationError,
)
from .query import FeatureConstraint, Goal, QualityQuery
from .scores import (
    QualityVector,
    SHORT_NAMES,
    Score,
    ZERO,
    format_score,
    round_half_up,
)

# FROM this name means the whole global schema rather than one table.
WHOLE_SCHEMA = "g"


def _stored(value: Score, precision: int | None) -> Score:
    return value if precision is None else round_half_up(value, precision)


@dataclass(frozen=True)
class Projection:
    names: tuple[str, ...]
    gs_column_ids: tuple[int, ...]
    gs_table_ids: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.gs_column_ids)


def resolve_projection(cat: Catalog, query: QualityQuery) -> Projection:
    if query.table.lower() == WHOLE_SCHEMA:
        scope = sorted(cat.gs_tables)
    else:
        try:
            scope = [cat.gs_table_by_name(query.table).gs_table_id]
        except ValidationError:
            raise UnknownColumn(f"unknown global table {query.table!r}") from None
    by_name: dict[str, list[int]] = {}
    ordered: list[int] = []
    for gs_table_id in scope:
        for gcid in cat.gs_tables[gs_table_id].column_ids:
            by_name.setdefault(cat.gs_columns[gcid].name, []).append(gcid)
            ordered.append(gcid)
    if query.select is None:
        chosen = ordered
        names = tuple(cat.gs_columns[c].name for c in chosen)
    else:
        chosen = []
        for name in query.select:
            hits = by_name.get(name)
            if not hits:
                raise UnknownColumn(f"no queried table has a column {name!r}")
            if len(hits) > 1:
                raise UnknownColumn(
                    f"column {name!r} is ambiguous across the queried tables"
                )
            chosen.append(hits[0])
        names = query.select
    tables = tuple(sorted({cat.gs_columns[c].gs_table_id for c in chosen}))
    return Projection(tuple(names), tuple(chosen), tables)


@dataclass
class QueriedSourceProfile:
    source_id: int
    name: str
    vector: QualityVector
    participation: dict[str, int] = field(default_factory=dict)


def candidate_source_ids(cat: Catalog, projection: Projection) -> list[int]:
    wanted = set(projection.gs_column_ids)
    found: set[int] = set()
    for mapping in cat.mappings.values():
        if mapping.gs_column_id in wanted:
            col = cat.column(mapping.column_id)
            found.add(cat.relation(col.relation_id).source_id)
    if not found:
        raise NoCandidateSources(
            "no registered source supplies any of the queried attributes"
        )
    return sorted(found)


def profile_queried_source(
    cat: Catalog,
    source_id: int,
    projection: Projection,
    precision: int | None = 2,
) -> QueriedSourceProfile:
    source = cat.source(source_id)
    facts: list[Score] = []
    valids: list[Score] = []
    accuracies: list[Score] = []
    timelinesses: list[Score] = []
    participation: dict[str, int] = {}
    for name, gcid in zip(projection.names, projection.gs_column_ids):
        candidates = []
        for mapping in cat.mappings.values():
            if mapping.gs_column_id != gcid:
                continue
            col = cat.column(mapping.column_id)
            if cat.relation(col.relation_id).source_id != source_id:
                continue
            candidates.append(mapping)
        if not candidates:
            continue
        mapping = min(candidates, key=lambda m: m.column_id)
        if mapping.stale or mapping.profile is None:
            raise StaleAssessment(
                f"column {mapping.column_id} of source {source.name!r} has no "
                "current quality profile; run assess first"
            )
        profile = mapping.profile
        participation[name] = mapping.column_id
        facts.append(_stored(profile.fact_completeness, precision))
        valids.append(_stored(profile.validity, precision))
        accuracies.append(_stored(profile.accuracy, precision))
        timelinesses.append(_stored(profile.timeliness, precision))
    if not participation:
        raise NoCandidateSources(
            f"source {source.name!r} supplies none of the queried attributes"
        )
    m = projection.m
    vector = QualityVector(
        _stored(scaled_aggregate(facts, m), precision),
        _stored(scaled_aggregate(valids, m), precision),
        _stored(scaled_aggregate(accuracies, m), precision),
        _stored(max_aggregate(timelinesses), precision),
    )
    return QueriedSourceProfile(source_id, source.name, vector, participation)


@dataclass
class Alternative:
    label: str
    members: tuple[int, ...]            # source ids, ascending
    member_names: tuple[str, ...]
    vector: QualityVector
    qualified: bool = True
    prune_reason: str | None = None
    prune_stage: str | None = None      # "first" (singleton) or "second"

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def label_number(self) -> int:
        return int(self.label.removeprefix("Alternative"))


def form_alternatives(
    profiles: list[QueriedSourceProfile],
    max_sources: int = 16,
    precision: int | None = 2,
) -> list[Alternative]:
    """Every non-empty subset of the candidate sources, smallest first."""
    profiles = sorted(profiles, key=lambda p: p.source_id)
    if len(profiles) > max_sources:
        raise TooManySources(
            f"{len(profiles)} candidate sources would form "
            f"{2 ** len(profiles) - 1} alternatives; the cap is {max_sources} sources"
        )
    by_id = {p.source_id: p for p in profiles}
    ids = [p.source_id for p in profiles]
    alternatives: list[Alternative] = []
    counter = itertools.count(1)
    for size in range(1, len(ids) + 1):
        for members in itertools.combinations(ids, size):
            label = f"Alternative{next(counter)}"
            member_profiles = [by_id[s] for s in members]
            if size == 1:
                vector = member_profiles[0].vector
            else:
                vector = QualityVector(
                    *(
                        _stored(
                            sum(
                                (p.vector.get(feature) for p in member_profiles),
                                ZERO,
                            )
                            / size,
                            precision,
                        )
                        for feature in ("fact_completeness", "validity", "accuracy")
                    ),
                    max_aggregate(p.vector.timeliness for p in member_profiles),
                )
            alternatives.append(
                Alternative(
                    label,
                    members,
                    tuple(p.name for p in member_profiles),
                    vector,
                )
            )
    return alternatives


# -- goal evaluation ----------------------------------------------------------

_FAIL_OP = {">=": "<", ">": "<=", "<=": ">", "<": ">=", "=": "!=", "!=": "="}


def _constraint_failure(vector: QualityVector, constraint: FeatureConstraint) -> str | None:
    """None when satisfied, otherwise a short human-readable reason."""
    if constraint.bound is None:
        raise ValidationError(
            f"constraint on {constraint.feature} still has an unresolved term"
        )
    value = vector.get(constraint.feature)
    bound = constraint.bound
    op = constraint.op
    ok = (
        value >= bound if op == ">="
        else value <= bound if op == "<="
        else value > bound if op == ">"
        else value < bound if op == "<"
        else value == bound if op == "="
        else value != bound
    )
    if ok:
        return None
    shown = constraint.lexeme if constraint.term else format_score(bound)
    return (
        f"{SHORT_NAMES[constraint.feature]} {format_score(value)} "
        f"{_FAIL_OP[op]} {shown}"
    )


def satisfies(vector: QualityVector, goal: Goal) -> tuple[bool, str | None]:
    reasons = []
    for constraint in goal.terms:
        reason = _constraint_failure(vector, constraint)
        if reason is None:
            if goal.connective != "and":
                return True, None
        else:
            if goal.connective == "and" or goal.connective is None:
                return False, reason
            reasons.append(reason)
    if goal.connective == "or" and len(reasons) == len(goal.terms):
        return False, "; ".join(reasons)
    return True, None


def apply_goal(
    alternatives: list[Alternative],
    goal: Goal | None,
    two_stage: bool = True,
) -> list[Alternative]:
    """Mark each alternative qualified or pruned; return the qualified ones.

    Two-stage order tests single-source alternatives before aggregated
    ones, which lets a caller stop aggregating early. With `two_stage`
    off everything is tested in one sweep; the qualified set is the
    same either way (a property the tests pin down).
    """
    if goal is None:
        for alt in alternatives:
            alt.qualified = True
            alt.prune_reason = None
            alt.prune_stage = None
        return list(alternatives)
    if two_stage:
        passes = [
            [a for a in alternatives if a.size == 1],
            [a for a in alternatives if a.size > 1],
        ]
        stages = ["first", "second"]
    else:
        passes = [list(alternatives)]
        stages = ["goal"]
    qualified: list[Alternative] = []
    for stage, group in zip(stages, passes):
        for alt in group:
            ok, reason = satisfies(alt.vector, goal)
            alt.qualified = ok
            alt.prune_reason = None if ok else reason
            alt.prune_stage = None if ok else stage
            if ok:
                qualified.append(alt)
    if not qualified:
        raise UnsatisfiableGoal(
            "the quality goal can't be satisfied with these data quality "
            "features together; no combination of the candidate sources reaches it"
        )
    qualified.sort(key=lambda a: a.label_number)
    return qualified


def plan_alternatives(
    cat: Catalog,
    projection: Projection,
    max_sources: int = 16,
    precision: int | None = 2,
) -> tuple[list[QueriedSourceProfile], list[Alternative]]:
    profiles = [
        profile_queried_source(cat, sid, projection, precision)
        for sid in candidate_source_ids(cat, projection)
    ]
    return profiles, form_alternatives(profiles, max_sources, precision)
