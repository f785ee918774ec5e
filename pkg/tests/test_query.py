"""Query dialect: tokenizer, parser, classification, term resolution."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quint.config import TermTable
from quint.errors import (
    ParseError,
    UnknownColumn,
    UnknownFeature,
    UnsupportedGoalShape,
)
from quint.query import (
    QueryClass,
    classify,
    goal_features,
    normalize_feature,
    parse,
    resolve_qualitative,
    tokenize,
    unparse,
)

from conftest import build_catalog


def test_tokenize_positions_and_ops():
    tokens = tokenize("SELECT a,b\nFROM t WHERE x >= 3.5")
    kinds = [(t.type, t.value) for t in tokens[:-1]]
    assert kinds == [
        ("ident", "SELECT"),
        ("ident", "a"),
        ("comma", ","),
        ("ident", "b"),
        ("ident", "FROM"),
        ("ident", "t"),
        ("ident", "WHERE"),
        ("ident", "x"),
        ("op", ">="),
        ("number", "3.5"),
    ]
    assert tokens[4].line == 2 and tokens[4].col == 1
    with pytest.raises(ParseError):
        tokenize("SELECT 'oops")
    with pytest.raises(ParseError) as err:
        tokenize("a ; b")
    assert err.value.column == 3


def test_normalize_feature_variants():
    for text in (
        "fact_completeness",
        "fact completeness",
        "Fact Completeness",
        "fact",
        "alternative fact completeness",
        "FACTCOMPLETENESS",
    ):
        assert normalize_feature(text) == "fact_completeness"
    assert normalize_feature("timeliness") == "timeliness"
    assert normalize_feature("speed") is None


def test_parse_minimal_query():
    q = parse("SELECT SName FROM Student")
    assert q.select == ("SName",)
    assert q.table == "Student"
    assert q.where is None and q.goal is None
    assert q.order_by == () and q.limit is None
    assert classify(q) is QueryClass.NO_FEATURE


def test_parse_star_and_where():
    q = parse("SELECT * FROM Student WHERE GPA >= 3 AND SAddress = 'Cairo'")
    assert q.select is None
    assert q.where.connective == "and"
    assert q.where.predicates[0].value == Fraction(3)
    assert q.where.predicates[1].value == "Cairo"


def test_parse_goal_forms():
    variants = [
        "SELECT a FROM t WITH fact completeness is high",
        "SELECT a FROM t WITH fact_completeness IS High",
        "SELECT a FROM t WITH fact completeness high",
        "SELECT a FROM t WITH fact >= high",
    ]
    for text in variants:
        q = parse(text)
        (c,) = q.goal.terms
        assert c.feature == "fact_completeness"
        assert c.op == ">="
        assert c.bound is None and c.term == "high"
    q = parse("SELECT a FROM t WITH timeliness >= 0.8")
    (c,) = q.goal.terms
    assert c.bound == Fraction(4, 5) and c.term is None


def test_parse_multi_goal_classes():
    q_and = parse("SELECT a FROM t WITH validity is high AND accuracy is medium")
    assert classify(q_and) is QueryClass.MULTI_AND
    q_or = parse("SELECT a FROM t WITH validity is high OR accuracy is medium")
    assert classify(q_or) is QueryClass.MULTI_OR
    single = parse("SELECT a FROM t WITH validity is high")
    assert classify(single) is QueryClass.SINGLE_FEATURE
    with pytest.raises(UnsupportedGoalShape):
        parse(
            "SELECT a FROM t WITH validity is high AND accuracy is high "
            "OR timeliness is high"
        )


def test_parse_order_by_and_limit():
    q = parse("SELECT a FROM t ORDER BY timeliness DESC, accuracy LIMIT 2")
    assert q.order_by == ("timeliness", "accuracy")
    assert q.limit == 2
    with pytest.raises(ParseError):
        parse("SELECT a FROM t ORDER BY accuracy ASC")
    with pytest.raises(ParseError):
        parse("SELECT a FROM t LIMIT 0")
    with pytest.raises(ParseError):
        parse("SELECT a FROM t LIMIT 1.5")


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError) as err:
        parse("SELECT FROM t")
    assert (err.value.line, err.value.column) == (1, 8)
    with pytest.raises(ParseError):
        parse("")
    with pytest.raises(ParseError):
        parse("SELECT a FROM t garbage")
    with pytest.raises(UnknownFeature):
        parse("SELECT a FROM t WITH speed is high")
    with pytest.raises(UnknownFeature):
        parse("SELECT a FROM t ORDER BY speed")


def test_resolve_names_against_catalog():
    cat = build_catalog()
    q = parse("SELECT SName, GPA FROM Student", cat)
    assert q.select == ("SName", "GPA")
    parse("SELECT SName, DName FROM G", cat)  # whole schema knows both
    with pytest.raises(UnknownColumn):
        parse("SELECT Nope FROM Student", cat)
    with pytest.raises(UnknownColumn):
        parse("SELECT DName FROM Student", cat)  # wrong table
    with pytest.raises(UnknownColumn):
        parse("SELECT SName FROM Employees", cat)
    with pytest.raises(UnknownColumn):
        parse("SELECT SName FROM Student WHERE Nope = 1", cat)


def test_resolve_qualitative_fills_bounds():
    terms = TermTable()
    q = parse("SELECT a FROM t WITH fact completeness is high AND validity >= 0.3")
    resolved = resolve_qualitative(q, terms)
    first, second = resolved.goal.terms
    assert first.bound == Fraction("0.65") and first.term == "high"
    assert second.bound == Fraction("0.3")
    # Idempotent: a second pass returns the same object.
    assert resolve_qualitative(resolved, terms) is resolved


def test_goal_features_canonical_order():
    q = parse(
        "SELECT a FROM t WITH timeliness is high AND fact completeness is high "
        "AND timeliness >= 0.2"
    )
    assert goal_features(q) == ("fact_completeness", "timeliness")
    assert goal_features(parse("SELECT a FROM t")) == ()


def test_unparse_round_trips_structure():
    texts = [
        "SELECT SName, GPA FROM Student",
        "SELECT * FROM G WITH fact_completeness >= 0.65 AND validity >= 0.4",
        "SELECT a FROM t WHERE GPA >= 3.5 OR GPA <= 1 WITH validity is high "
        "ORDER BY validity LIMIT 3",
    ]
    for text in texts:
        q = parse(text)
        again = parse(unparse(q))
        assert again == q


goal_term = st.builds(
    lambda feature, tail: f"{feature} {tail}",
    st.sampled_from(
        ["fact completeness", "fact_completeness", "validity", "accuracy", "timeliness"]
    ),
    st.one_of(
        st.sampled_from(["is high", "is medium", "is low"]),
        st.tuples(
            st.sampled_from([">=", ">", "<=", "<", "="]),
            st.integers(min_value=0, max_value=100),
        ).map(lambda pair: f"{pair[0]} 0.{pair[1]:02d}"),
    ),
)


@settings(max_examples=80, deadline=None)
@given(
    columns=st.lists(
        st.sampled_from(["SName", "GPA", "DOB", "SAddress"]),
        min_size=1,
        max_size=3,
        unique=True,
    ),
    connective=st.sampled_from(["AND", "OR"]),
    terms=st.lists(goal_term, min_size=1, max_size=3),
    limit=st.one_of(st.none(), st.integers(min_value=1, max_value=9)),
)
def test_property_parse_unparse_fixpoint(columns, connective, terms, limit):
    text = f"SELECT {', '.join(columns)} FROM Student"
    if terms:
        text += " WITH " + f" {connective} ".join(terms)
    if limit is not None:
        text += f" LIMIT {limit}"
    q = parse(text)
    rendered = unparse(q)
    assert parse(rendered) == q
    assert unparse(parse(rendered)) == rendered
