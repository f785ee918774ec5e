"""End-to-end query execution: parse, plan, prune, rank, optionally fuse."""

from __future__ import annotations

from dataclasses import dataclass, field

from .catalog import Catalog
from .config import RunConfig
from .errors import ValidationError
from .fuse import FusedAnswer, fuse_and_rerank
from .plan import (
    Alternative,
    Projection,
    QueriedSourceProfile,
    apply_goal,
    plan_alternatives,
    resolve_projection,
)
from .query import (
    QualityQuery,
    QueryClass,
    classify,
    goal_features,
    parse,
    resolve_qualitative,
)
from .rank import (
    RankedAnswer,
    ScoringFunction,
    TaStats,
    build_scoring,
    rank_all_features,
    rank_single_feature,
    ta_rank,
)
from .scores import FEATURES


@dataclass
class QueryOutcome:
    text: str
    query: QualityQuery
    query_class: QueryClass
    projection: Projection
    profiles: list[QueriedSourceProfile]
    alternatives: list[Alternative]
    qualified: list[Alternative]
    # Per-feature orderings; the only rankings a no-goal query has.
    rankings: dict[str, list[RankedAnswer]] = field(default_factory=dict)
    # The top-k answer list for goal queries.
    ranked: list[RankedAnswer] | None = None
    scoring: ScoringFunction | None = None
    ta_stats: TaStats | None = None
    fused: list[FusedAnswer] | None = None


def run_query(
    cat: Catalog,
    text: str,
    config: RunConfig | None = None,
    fuse: bool = False,
) -> QueryOutcome:
    config = config or RunConfig()
    query = parse(text, cat)
    query = resolve_qualitative(query, config.terms)
    query_class = classify(query)
    if fuse and query_class is QueryClass.NO_FEATURE:
        raise ValidationError(
            "fusion refines a ranked answer list; add a quality goal to rank one"
        )
    projection = resolve_projection(cat, query)
    profiles, alternatives = plan_alternatives(
        cat, projection, config.max_sources, config.score_precision
    )
    qualified = apply_goal(alternatives, query.goal)
    outcome = QueryOutcome(
        text, query, query_class, projection, profiles, alternatives, qualified
    )
    k = query.limit if query.limit is not None else len(qualified)

    if query_class is QueryClass.NO_FEATURE:
        features = query.order_by or FEATURES
        outcome.rankings = rank_all_features(qualified, features, query.limit)
        return outcome

    if query_class is QueryClass.SINGLE_FEATURE:
        feature = query.goal.terms[0].feature
        ranked = rank_single_feature(qualified, feature, k)
        outcome.ranked = ranked
        outcome.rankings = {feature: ranked}
        outcome.scoring = build_scoring("sum", (feature,))
    else:
        features = query.order_by or goal_features(query)
        scoring = build_scoring(config.scoring, features, config.weights)
        outcome.scoring = scoring
        outcome.ranked, outcome.ta_stats = ta_rank(qualified, scoring, k)

    if fuse:
        outcome.fused = fuse_and_rerank(
            cat,
            outcome.ranked,
            projection,
            outcome.scoring,
            config.score_precision,
        )
    return outcome
