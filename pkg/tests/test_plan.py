"""Planning: projections, queried-source vectors, alternatives, pruning."""

from __future__ import annotations

import itertools
from fractions import Fraction

import pytest

from quint.catalog import Catalog
from quint.config import TermTable
from quint.errors import (
    NoCandidateSources,
    StaleAssessment,
    TooManySources,
    UnknownColumn,
    UnsatisfiableGoal,
)
from quint.plan import (
    Alternative,
    apply_goal,
    candidate_source_ids,
    form_alternatives,
    plan_alternatives,
    profile_queried_source,
    resolve_projection,
    satisfies,
)
from quint.query import parse, resolve_qualitative
from quint.scores import QualityVector

from conftest import EXPECTED_SOURCE_VECTORS, Q1, Q2, Q3, build_assessed


def vec(*scores: str) -> QualityVector:
    return QualityVector(*(Fraction(s) for s in scores))


def alts_from(vectors: dict[str, tuple[str, str, str, str]]) -> list[Alternative]:
    """Singleton alternatives straight from literal score strings."""
    out = []
    for i, (name, scores) in enumerate(sorted(vectors.items()), start=1):
        out.append(Alternative(f"Alternative{i}", (i,), (name,), vec(*scores)))
    return out


def test_resolve_projection_single_table(paper_catalog):
    q = parse("SELECT SName, GPA FROM Student", paper_catalog)
    projection = resolve_projection(paper_catalog, q)
    assert projection.names == ("SName", "GPA")
    assert projection.m == 2
    assert len(projection.gs_table_ids) == 1


def test_resolve_projection_whole_schema(paper_catalog):
    q = parse(Q1, paper_catalog)
    projection = resolve_projection(paper_catalog, q)
    assert projection.m == 5
    assert len(projection.gs_table_ids) == 3
    star = resolve_projection(paper_catalog, parse("SELECT * FROM Student"))
    assert star.names == ("SId", "SName", "SAddress", "GPA", "DOB")


def test_resolve_projection_rejects_bad_names(paper_catalog):
    with pytest.raises(UnknownColumn):
        resolve_projection(paper_catalog, parse("SELECT Nope FROM Student"))
    with pytest.raises(UnknownColumn):
        resolve_projection(paper_catalog, parse("SELECT SName FROM Ghost"))


def test_resolve_projection_ambiguity_across_tables():
    cat = Catalog()
    cat.load_global_schema(
        "A(Id key type:int, Name type:text)\nB(Id key type:int, Name type:text)"
    )
    # The same column name in two tables is ambiguous under FROM G...
    with pytest.raises(UnknownColumn):
        resolve_projection(cat, parse("SELECT Name FROM G"))
    # ...but fine when the query names one table.
    projection = resolve_projection(cat, parse("SELECT Name FROM B"))
    assert projection.m == 1


def test_candidate_sources_depend_on_projection(paper_catalog):
    q1 = resolve_projection(paper_catalog, parse(Q1, paper_catalog))
    assert candidate_source_ids(paper_catalog, q1) == [1, 2, 3]
    # Dropping DName drops DS1, which only supplies departments.
    q3 = resolve_projection(paper_catalog, parse(Q3, paper_catalog))
    assert candidate_source_ids(paper_catalog, q3) == [2, 3]


def test_queried_source_vectors_match_hand_computation(paper_catalog):
    projection = resolve_projection(paper_catalog, parse(Q1, paper_catalog))
    for sid in (1, 2, 3):
        profile = profile_queried_source(paper_catalog, sid, projection)
        expected = vec(*EXPECTED_SOURCE_VECTORS[profile.name])
        assert profile.vector == expected, profile.name


def test_queried_source_participation(paper_catalog):
    projection = resolve_projection(paper_catalog, parse(Q1, paper_catalog))
    ds1 = profile_queried_source(paper_catalog, 1, projection)
    assert set(ds1.participation) == {"DName"}
    ds2 = profile_queried_source(paper_catalog, 2, projection)
    assert set(ds2.participation) == set(projection.names)


def test_stale_profiles_are_rejected():
    cat = build_assessed()
    projection = resolve_projection(cat, parse(Q1, cat))
    # Mark a mapping the projection actually touches; stale metadata that
    # no queried column reads is allowed to linger.
    touched = next(
        m
        for m in cat.mappings.values()
        if m.gs_column_id in projection.gs_column_ids
    )
    touched.stale = True
    with pytest.raises(StaleAssessment):
        [profile_queried_source(cat, sid, projection) for sid in (1, 2, 3)]


def test_source_outside_projection_rejected(paper_catalog):
    projection = resolve_projection(
        paper_catalog, parse("SELECT SupName FROM Supervisor", paper_catalog)
    )
    with pytest.raises(NoCandidateSources):
        profile_queried_source(paper_catalog, 1, projection)  # DS1 has no supervisors


def test_alternative_enumeration_order(paper_catalog):
    projection = resolve_projection(paper_catalog, parse(Q1, paper_catalog))
    _, alternatives = plan_alternatives(paper_catalog, projection)
    assert [a.label for a in alternatives] == [
        f"Alternative{i}" for i in range(1, 8)
    ]
    assert [a.members for a in alternatives] == [
        (1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3),
    ]
    assert alternatives[5].member_names == ("DS2", "DS3")


def test_multi_source_vectors_average_and_keep_freshest(paper_catalog):
    projection = resolve_projection(paper_catalog, parse(Q1, paper_catalog))
    _, alternatives = plan_alternatives(paper_catalog, projection)
    by_label = {a.label: a for a in alternatives}
    # DS2+DS3: mean of (0.95, 0.68) etc., timeliness max(0.92, 0.67).
    assert by_label["Alternative6"].vector == vec("0.82", "0.79", "0.79", "0.92")
    assert by_label["Alternative4"].vector.fact_completeness == Fraction("0.58")
    assert by_label["Alternative5"].vector.fact_completeness == Fraction("0.44")
    assert by_label["Alternative7"].vector.fact_completeness == Fraction("0.61")


def test_full_precision_mode_skips_rounding(paper_catalog):
    projection = resolve_projection(paper_catalog, parse(Q1, paper_catalog))
    profiles, alternatives = plan_alternatives(
        paper_catalog, projection, precision=None
    )
    ds1 = next(p for p in profiles if p.name == "DS1")
    assert ds1.vector.fact_completeness == Fraction(1, 5)
    assert ds1.vector.timeliness == 1 - Fraction(60, 365)
    pair = next(a for a in alternatives if a.members == (1, 2))
    expected = (Fraction(1, 5) + Fraction(19, 20)) / 2
    assert pair.vector.fact_completeness == expected


def test_rounded_stages_feed_rounded_inputs(paper_catalog):
    # The Alternative7 fact score comes from already rounded member
    # scores: (0.20 + 0.95 + 0.68) / 3 = 0.61, not the exact 0.6083...
    projection = resolve_projection(paper_catalog, parse(Q1, paper_catalog))
    _, alternatives = plan_alternatives(paper_catalog, projection)
    alt7 = next(a for a in alternatives if a.members == (1, 2, 3))
    assert alt7.vector.fact_completeness == Fraction("0.61")


def test_too_many_sources_guard(paper_catalog):
    projection = resolve_projection(paper_catalog, parse(Q1, paper_catalog))
    profiles, _ = plan_alternatives(paper_catalog, projection)
    with pytest.raises(TooManySources):
        form_alternatives(profiles, max_sources=2)


def goal_of(text: str):
    q = resolve_qualitative(parse(text), TermTable())
    return q.goal


def test_satisfies_and_or_semantics():
    v = vec("0.70", "0.50", "0.30", "0.90")
    ok, reason = satisfies(v, goal_of("SELECT a FROM t WITH fact is high"))
    assert ok and reason is None
    ok, reason = satisfies(
        v, goal_of("SELECT a FROM t WITH fact is high AND accuracy is high")
    )
    assert not ok and "accuracy 0.30 <" in reason
    ok, _ = satisfies(
        v, goal_of("SELECT a FROM t WITH accuracy is high OR validity >= 0.5")
    )
    assert ok
    ok, reason = satisfies(
        v, goal_of("SELECT a FROM t WITH accuracy is high OR validity > 0.5")
    )
    assert not ok
    assert ";" in reason  # every OR branch explains itself


def test_failure_reasons_echo_term_words():
    v = vec("0.20", "0.20", "0.20", "0.20")
    _, reason = satisfies(v, goal_of("SELECT a FROM t WITH fact completeness is High"))
    assert reason == "fact 0.20 < High"
    _, reason = satisfies(v, goal_of("SELECT a FROM t WITH validity >= 0.85"))
    assert reason == "validity 0.20 < 0.85"


def test_apply_goal_two_stage_marks_without_removing():
    alternatives = alts_from(
        {
            "A": ("0.20", "0.20", "0.20", "0.20"),
            "B": ("0.90", "0.90", "0.90", "0.90"),
        }
    )
    pair = Alternative(
        "Alternative3", (1, 2), ("A", "B"), vec("0.55", "0.55", "0.55", "0.90")
    )
    alternatives.append(pair)
    goal = goal_of("SELECT a FROM t WITH fact completeness is high")
    qualified = apply_goal(alternatives, goal)
    assert [a.label for a in qualified] == ["Alternative2"]
    assert len(alternatives) == 3  # nothing removed, only marked
    first = alternatives[0]
    assert not first.qualified and first.prune_stage == "first"
    assert pair.prune_stage == "second"
    assert first.prune_reason == "fact 0.20 < high"


def test_apply_goal_none_resets_marks():
    alternatives = alts_from(
        {"A": ("0.10", "0.10", "0.10", "0.10"), "B": ("0.90", "0.90", "0.90", "0.90")}
    )
    apply_goal(alternatives, goal_of("SELECT a FROM t WITH validity is high"), False)
    marked = [a for a in alternatives if not a.qualified]
    assert marked and marked[0].prune_stage == "goal"
    qualified = apply_goal(alternatives, None)
    assert all(a.qualified and a.prune_stage is None for a in alternatives)
    assert qualified == alternatives


def test_apply_goal_unsatisfiable():
    alternatives = alts_from({"A": ("0.10", "0.10", "0.10", "0.10")})
    goal = goal_of("SELECT a FROM t WITH validity is high AND accuracy is high")
    with pytest.raises(UnsatisfiableGoal) as err:
        apply_goal(alternatives, goal)
    assert "can't be satisfied with these data quality features together" in str(
        err.value
    )


def test_two_stage_equals_single_sweep_on_paper_alternatives(paper_catalog):
    projection = resolve_projection(paper_catalog, parse(Q1, paper_catalog))
    _, alternatives = plan_alternatives(paper_catalog, projection)
    goal = goal_of(Q2)
    staged = {a.label for a in apply_goal(alternatives, goal, two_stage=True)}
    swept = {a.label for a in apply_goal(alternatives, goal, two_stage=False)}
    assert staged == swept == {"Alternative2", "Alternative3", "Alternative6"}


def test_exhaustive_goal_pruning_equivalence_small():
    # Every goal over two features, both connectives, on three synthetic
    # sources: stage split must never change the qualified set.
    alternatives = alts_from(
        {
            "A": ("0.10", "0.30", "0.20", "0.50"),
            "B": ("0.70", "0.60", "0.40", "0.30"),
            "C": ("0.90", "0.20", "0.10", "0.80"),
        }
    )
    pairs = list(itertools.combinations((1, 2, 3), 2))
    for i, members in enumerate(pairs, start=4):
        alternatives.append(
            Alternative(f"Alternative{i}", members, ("x", "y"), vec("0.50", "0.40", "0.25", "0.80"))
        )
    for conn in ("AND", "OR"):
        for f1, f2 in itertools.combinations(("fact", "validity", "accuracy"), 2):
            goal = goal_of(
                f"SELECT a FROM t WITH {f1} >= 0.4 {conn} {f2} >= 0.35"
            )
            try:
                staged = {a.label for a in apply_goal(alternatives, goal, True)}
            except UnsatisfiableGoal:
                with pytest.raises(UnsatisfiableGoal):
                    apply_goal(alternatives, goal, False)
                continue
            swept = {a.label for a in apply_goal(alternatives, goal, False)}
            assert staged == swept
