"""Parser for the quality-extended query dialect.

The dialect is a small SELECT language with one addition: a WITH clause
stating a quality goal over the four features, either as numeric bounds
(`fact_completeness >= 0.65`) or qualitative terms (`validity is high`).

    SELECT SName, GPA FROM Student
    WHERE GPA >= 3
    WITH fact completeness is high AND timeliness >= 0.8
    ORDER BY accuracy
    LIMIT 2

Goals combine constraints with AND or with OR but never both in one
query; the planner treats the two shapes differently and a mixed tree
has no defined meaning here.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Union

from .errors import (
    ParseError,
    UnknownColumn,
    UnknownFeature,
    UnsupportedGoalShape,
    ValidationError,
)
from .scores import FEATURES

KEYWORDS = {
    "select", "from", "where", "with", "and", "or",
    "order", "by", "limit", "is", "asc", "desc",
}

# Qualitative words the grammar itself recognizes; anything else must be
# written with an explicit operator or IS.
TERM_WORDS = ("low", "medium", "high")

_FEATURE_KEYS = {
    "factcompleteness": "fact_completeness",
    "fact": "fact_completeness",
    "validity": "validity",
    "accuracy": "accuracy",
    "timeliness": "timeliness",
}


def normalize_feature(text: str) -> str | None:
    key = re.sub(r"[\s_]+", "", text.lower())
    if key.startswith("alternative"):
        key = key[len("alternative"):]
    return _FEATURE_KEYS.get(key)


# -- tokens --------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    type: str               # ident | number | string | op | comma | star | eof
    value: str
    line: int
    col: int


_OPS = (">=", "<=", "!=", ">", "<", "=")


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        start_line, start_col = line, col
        if ch == ",":
            tokens.append(Token("comma", ",", start_line, start_col))
            i += 1
            col += 1
            continue
        if ch == "*":
            tokens.append(Token("star", "*", start_line, start_col))
            i += 1
            col += 1
            continue
        matched_op = next((op for op in _OPS if text.startswith(op, i)), None)
        if matched_op:
            tokens.append(Token("op", matched_op, start_line, start_col))
            i += len(matched_op)
            col += len(matched_op)
            continue
        if ch in "'\"":
            quote = ch
            j = i + 1
            while j < n and text[j] != quote:
                if text[j] == "\n":
                    raise ParseError("unterminated string", start_line, start_col)
                j += 1
            if j >= n:
                raise ParseError("unterminated string", start_line, start_col)
            tokens.append(Token("string", text[i + 1 : j], start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        m = re.match(r"\d+(\.\d+)?", text[i:])
        if m:
            tokens.append(Token("number", m.group(0), start_line, start_col))
            i += m.end()
            col += m.end()
            continue
        m = re.match(r"[A-Za-z_][A-Za-z0-9_]*", text[i:])
        if m:
            tokens.append(Token("ident", m.group(0), start_line, start_col))
            i += m.end()
            col += m.end()
            continue
        raise ParseError(f"unexpected character {ch!r}", start_line, start_col)
    tokens.append(Token("eof", "", line, col))
    return tokens


# -- AST -----------------------------------------------------------------------

@dataclass(frozen=True)
class Comparison:
    """A WHERE predicate on one projected column."""

    column: str
    op: str
    value: Union[Fraction, str]


@dataclass(frozen=True)
class WhereClause:
    connective: str | None          # None for a single predicate
    predicates: tuple[Comparison, ...]


@dataclass(frozen=True)
class FeatureConstraint:
    feature: str                    # canonical feature name
    op: str
    bound: Fraction | None          # None until a qualitative term resolves
    term: str | None = None         # original qualitative word, if any
    lexeme: str = field(default="", compare=False)      # as written, for messages

    def resolved(self) -> bool:
        return self.bound is not None


@dataclass(frozen=True)
class Goal:
    connective: str | None          # "and" | "or" | None for single term
    terms: tuple[FeatureConstraint, ...]


@dataclass(frozen=True)
class QualityQuery:
    select: tuple[str, ...] | None  # None means '*'
    table: str
    where: WhereClause | None
    goal: Goal | None
    order_by: tuple[str, ...]       # quality features, best first
    limit: int | None


class QueryClass(Enum):
    NO_FEATURE = "no-feature"
    SINGLE_FEATURE = "single-feature"
    MULTI_AND = "multi-feature-and"
    MULTI_OR = "multi-feature-or"


# -- parser ----------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        token = self.tokens[self.pos]
        if token.type != "eof":
            self.pos += 1
        return token

    def error(self, message: str, token: Token | None = None):
        token = token or self.peek()
        raise ParseError(message, token.line, token.col)

    def at_keyword(self, *words: str) -> bool:
        token = self.peek()
        return token.type == "ident" and token.value.lower() in words

    def expect_keyword(self, word: str) -> Token:
        token = self.next()
        if token.type != "ident" or token.value.lower() != word:
            self.error(f"expected {word.upper()}", token)
        return token

    def expect(self, type_: str) -> Token:
        token = self.next()
        if token.type != type_:
            self.error(f"expected {type_}, found {token.value!r}", token)
        return token

    # SELECT list

    def parse_select(self) -> tuple[str, ...] | None:
        if self.peek().type == "star":
            self.next()
            return None
        names = [self.parse_name("column name")]
        while self.peek().type == "comma":
            self.next()
            names.append(self.parse_name("column name"))
        return tuple(names)

    def parse_name(self, what: str) -> str:
        token = self.peek()
        if token.type != "ident" or token.value.lower() in KEYWORDS:
            self.error(f"expected a {what}", token)
        return self.next().value

    # WHERE

    def parse_where(self) -> WhereClause:
        predicates = [self.parse_comparison()]
        connective: str | None = None
        while self.at_keyword("and", "or"):
            word = self.next().value.lower()
            if connective is None:
                connective = word
            elif connective != word:
                raise UnsupportedGoalShape(
                    "WHERE mixes AND with OR; use one connective"
                )
            predicates.append(self.parse_comparison())
        return WhereClause(connective, tuple(predicates))

    def parse_comparison(self) -> Comparison:
        column = self.parse_name("column name")
        op_token = self.expect("op")
        value_token = self.next()
        value: Union[Fraction, str]
        if value_token.type == "number":
            value = Fraction(value_token.value)
        elif value_token.type in ("string", "ident"):
            value = value_token.value
        else:
            self.error("expected a literal", value_token)
        return Comparison(column, op_token.value, value)

    # WITH goal

    def parse_goal(self) -> Goal:
        terms = [self.parse_constraint()]
        connective: str | None = None
        while self.at_keyword("and", "or"):
            token = self.next()
            word = token.value.lower()
            if connective is None:
                connective = word
            elif connective != word:
                raise UnsupportedGoalShape(
                    "goal mixes AND with OR; use one connective per query"
                )
            terms.append(self.parse_constraint())
        return Goal(connective, tuple(terms))

    def parse_constraint(self) -> FeatureConstraint:
        words: list[Token] = []
        while (
            self.peek().type == "ident"
            and self.peek().value.lower() not in KEYWORDS
        ):
            words.append(self.next())
        if not words:
            self.error("expected a quality feature")
        token = self.peek()
        if token.type == "op":
            op = self.next().value
            bound_token = self.next()
            phrase = " ".join(w.value for w in words)
            feature = self._feature(phrase)
            if bound_token.type == "number":
                return FeatureConstraint(
                    feature, op, Fraction(bound_token.value), None, phrase
                )
            if bound_token.type == "ident":
                return FeatureConstraint(
                    feature, op, None, bound_token.value.lower(), bound_token.value
                )
            self.error("expected a number or a qualitative term", bound_token)
        if self.at_keyword("is"):
            self.next()
            term_token = self.next()
            if term_token.type != "ident":
                self.error("expected a qualitative term after IS", term_token)
            feature = self._feature(" ".join(w.value for w in words))
            return FeatureConstraint(
                feature, ">=", None, term_token.value.lower(), term_token.value
            )
        # Bare form: the trailing word is one of the built-in terms,
        # as in "fact completeness high".
        if len(words) >= 2 and words[-1].value.lower() in TERM_WORDS:
            feature = self._feature(" ".join(w.value for w in words[:-1]))
            term = words[-1].value.lower()
            return FeatureConstraint(feature, ">=", None, term, words[-1].value)
        self.error("expected an operator, IS, or a qualitative term")

    def _feature(self, phrase: str) -> str:
        feature = normalize_feature(phrase)
        if feature is None:
            raise UnknownFeature(
                f"{phrase!r} is not a quality feature; expected one of "
                + ", ".join(FEATURES)
            )
        return feature

    # ORDER BY / LIMIT

    def parse_order(self) -> tuple[str, ...]:
        features = [self.parse_order_feature()]
        while self.peek().type == "comma":
            self.next()
            features.append(self.parse_order_feature())
        return tuple(features)

    def parse_order_feature(self) -> str:
        words: list[Token] = []
        while (
            self.peek().type == "ident"
            and self.peek().value.lower() not in KEYWORDS
        ):
            words.append(self.next())
        if not words:
            self.error("expected a quality feature")
        feature = self._feature(" ".join(w.value for w in words))
        if self.at_keyword("desc"):
            self.next()
        elif self.at_keyword("asc"):
            token = self.peek()
            raise ParseError(
                "ascending quality order is not supported", token.line, token.col
            )
        return feature

    def parse_query(self) -> QualityQuery:
        self.expect_keyword("select")
        select = self.parse_select()
        self.expect_keyword("from")
        table = self.parse_name("table name")
        where = goal = None
        order_by: tuple[str, ...] = ()
        limit = None
        if self.at_keyword("where"):
            self.next()
            where = self.parse_where()
        if self.at_keyword("with"):
            self.next()
            goal = self.parse_goal()
        if self.at_keyword("order"):
            self.next()
            self.expect_keyword("by")
            order_by = self.parse_order()
        if self.at_keyword("limit"):
            self.next()
            token = self.expect("number")
            if "." in token.value:
                self.error("LIMIT takes an integer", token)
            limit = int(token.value)
            if limit < 1:
                self.error("LIMIT must be at least 1", token)
        token = self.peek()
        if token.type != "eof":
            self.error(f"unexpected {token.value!r} after query", token)
        return QualityQuery(select, table, where, goal, order_by, limit)


def parse(text: str, schema=None) -> QualityQuery:
    """Parse query text, optionally resolving names against a catalog."""
    if not text.strip():
        raise ParseError("empty query", 1, 1)
    query = _Parser(tokenize(text)).parse_query()
    if schema is not None:
        _resolve_names(query, schema)
    return query


def _resolve_names(query: QualityQuery, schema):
    if query.table.lower() == "g":
        # FROM G queries the whole global schema.
        names = {g.name for g in schema.gs_columns.values()}
    else:
        try:
            table = schema.gs_table_by_name(query.table)
        except ValidationError:
            raise UnknownColumn(f"unknown global table {query.table!r}") from None
        names = {schema.gs_columns[c].name for c in table.column_ids}
    for name in query.select or ():
        if name not in names:
            raise UnknownColumn(
                f"table {query.table!r} has no column {name!r}"
            )
    if query.where is not None:
        for predicate in query.where.predicates:
            if predicate.column not in names:
                raise UnknownColumn(
                    f"table {query.table!r} has no column {predicate.column!r}"
                )


# -- classification and term resolution ----------------------------------------------

def classify(query: QualityQuery) -> QueryClass:
    goal = query.goal
    if goal is None or not goal.terms:
        return QueryClass.NO_FEATURE
    if len(goal.terms) == 1:
        return QueryClass.SINGLE_FEATURE
    if goal.connective == "and":
        return QueryClass.MULTI_AND
    if goal.connective == "or":
        return QueryClass.MULTI_OR
    raise UnsupportedGoalShape("multi-feature goal lacks a connective")


def resolve_qualitative(query: QualityQuery, terms) -> QualityQuery:
    """Fill numeric bounds for qualitative constraints via a term table.

    `terms` must expose bound(feature, term) -> Fraction. Already
    resolved constraints pass through untouched, so this is idempotent.
    """
    if query.goal is None:
        return query
    resolved = []
    changed = False
    for constraint in query.goal.terms:
        if constraint.bound is not None:
            resolved.append(constraint)
            continue
        if constraint.term is None:
            raise ValidationError("constraint has neither bound nor term")
        bound = terms.bound(constraint.feature, constraint.term)
        resolved.append(replace(constraint, bound=bound))
        changed = True
    if not changed:
        return query
    return replace(query, goal=Goal(query.goal.connective, tuple(resolved)))


def goal_features(query: QualityQuery) -> tuple[str, ...]:
    """Features named by the goal, in canonical feature order, no repeats."""
    if query.goal is None:
        return ()
    named = {c.feature for c in query.goal.terms}
    return tuple(f for f in FEATURES if f in named)


# -- rendering --------------------------------------------------------------------

def _render_number(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    num, den = value.numerator, value.denominator
    digits = 0
    while den % 2 == 0:
        den //= 2
        digits += 1
    twos = digits
    fives = 0
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        raise ValidationError(f"{value} has no finite decimal form")
    digits = max(twos, fives)
    scaled = value.numerator * 10 ** digits // value.denominator
    text = str(abs(scaled)).rjust(digits + 1, "0")
    sign = "-" if scaled < 0 else ""
    return f"{sign}{text[:-digits]}.{text[-digits:]}"


def unparse(query: QualityQuery) -> str:
    parts = ["SELECT"]
    parts.append("*" if query.select is None else ", ".join(query.select))
    parts.append("FROM")
    parts.append(query.table)
    if query.where is not None:
        parts.append("WHERE")
        joiner = f" {(query.where.connective or 'and').upper()} "
        rendered = []
        for p in query.where.predicates:
            if isinstance(p.value, Fraction):
                value = _render_number(p.value)
            else:
                value = "'" + p.value + "'"
            rendered.append(f"{p.column} {p.op} {value}")
        parts.append(joiner.join(rendered))
    if query.goal is not None:
        parts.append("WITH")
        joiner = f" {(query.goal.connective or 'and').upper()} "
        rendered = []
        for c in query.goal.terms:
            if c.bound is not None:
                rendered.append(f"{c.feature} {c.op} {_render_number(c.bound)}")
            else:
                rendered.append(f"{c.feature} is {c.term}")
        parts.append(joiner.join(rendered))
    if query.order_by:
        parts.append("ORDER BY")
        parts.append(", ".join(query.order_by))
    if query.limit is not None:
        parts.append(f"LIMIT {query.limit}")
    return " ".join(parts)
