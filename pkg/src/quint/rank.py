"""Top-k ranking of alternatives, including the threshold algorithm.

The threshold algorithm walks one sorted list per ranked feature in
round-robin, randomly accessing the features it has not yet seen for
each new object, and stops as soon as k seen objects score at least the
threshold, which is the scoring function applied to the last scores
seen under sorted access. That early stop is only sound for monotone
scoring functions, so non-monotone ones are rejected up front. When the
k-th buffered answer ties the threshold exactly the walk keeps going
until no unseen object could tie in ahead of it under the tie rule, so
the result is always identical to the brute-force ordering.

Ties anywhere are broken toward smaller alternatives (fewer member
sources), then lower member ids, which keeps every ordering in this
module deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .errors import EmptyRanking, RejectedScoringFunction, ValidationError
from .plan import Alternative
from .scores import FEATURES, Fraction, ONE, Score, ZERO, as_score

ScoreFn = Callable[[tuple[Score, ...]], Score]


StrictAt = Callable[[tuple[Score, ...]], tuple[int, ...]]


@dataclass(frozen=True)
class ScoringFunction:
    name: str
    features: tuple[str, ...]
    fn: ScoreFn
    # Indices of coordinates F strictly increases in at a given point;
    # None for opaque functions. Lets the threshold walk prove that an
    # unseen object tying the threshold cannot win the tie rule.
    strict_at: StrictAt | None = None

    def __call__(self, values: tuple[Score, ...]) -> Score:
        return self.fn(values)

    def of(self, alternative: Alternative) -> Score:
        return self.fn(
            tuple(alternative.vector.get(f) for f in self.features)
        )


def _probe_monotone(fn: ScoreFn, arity: int) -> bool:
    """Spot-check that raising any one coordinate never lowers F."""
    base = tuple(Fraction(1, 2) for _ in range(arity))
    try:
        base_value = fn(base)
        if fn(tuple(ZERO for _ in range(arity))) > fn(
            tuple(ONE for _ in range(arity))
        ):
            return False
        for i in range(arity):
            raised = base[:i] + (Fraction(7, 10),) + base[i + 1 :]
            if fn(raised) < base_value:
                return False
    except Exception:
        return False
    return True


def build_scoring(
    name: str,
    features: Sequence[str],
    weights: Mapping[str, Score] | None = None,
) -> ScoringFunction:
    features = tuple(features)
    if not features:
        raise ValidationError("scoring function needs at least one feature")
    for feature in features:
        if feature not in FEATURES:
            raise ValidationError(f"unknown feature {feature!r}")
    everywhere = tuple(range(len(features)))
    if name == "sum":
        return ScoringFunction(
            "sum", features, lambda vs: sum(vs, ZERO), lambda vs: everywhere
        )
    if name == "min":
        return ScoringFunction(
            "min",
            features,
            lambda vs: min(vs),
            lambda vs: tuple(i for i, v in enumerate(vs) if v == min(vs)),
        )
    if name == "weighted":
        ws = tuple(
            as_score((weights or {}).get(feature, 1)) for feature in features
        )
        if any(w < 0 for w in ws):
            raise RejectedScoringFunction(
                "negative weights break monotonicity; weights must be >= 0"
            )
        positive = tuple(i for i, w in enumerate(ws) if w > 0)
        return ScoringFunction(
            "weighted",
            features,
            lambda vs: sum((w * v for w, v in zip(ws, vs)), ZERO),
            lambda vs: positive,
        )
    raise ValidationError(f"unknown scoring function {name!r}")


def custom_scoring(
    name: str, features: Sequence[str], fn: ScoreFn, monotone: bool = False
) -> ScoringFunction:
    """Wrap a caller-supplied F; it must be declared and spot-checked monotone."""
    features = tuple(features)
    if not monotone:
        raise RejectedScoringFunction(
            f"scoring function {name!r} is not declared monotone; the "
            "threshold algorithm would stop too early"
        )
    if not _probe_monotone(fn, len(features)):
        raise RejectedScoringFunction(
            f"scoring function {name!r} failed the monotonicity spot check"
        )
    return ScoringFunction(name, features, fn)


@dataclass
class RankedAnswer:
    rank: int
    alternative: Alternative
    f_value: Score

    @property
    def label(self) -> str:
        return self.alternative.label


def _order_key(alternative: Alternative, value: Score):
    return (-value, alternative.size, alternative.members)


@dataclass
class TaStats:
    rounds: int = 0
    sorted_accesses: int = 0
    random_accesses: int = 0
    thresholds: list[Score] = field(default_factory=list)
    # Top-k buffer contents (F values, best first) at each halt check.
    halt_checks: list[tuple[Score, ...]] = field(default_factory=list)


def ta_rank(
    alternatives: Sequence[Alternative],
    scoring: ScoringFunction,
    k: int,
) -> tuple[list[RankedAnswer], TaStats]:
    """Threshold-algorithm top-k over the qualified alternatives."""
    if k < 1:
        raise ValidationError("k must be at least 1")
    if not alternatives:
        raise EmptyRanking("no qualified alternatives to rank")
    lists = {
        feature: sorted(
            alternatives,
            key=lambda a: _order_key(a, a.vector.get(feature)),
        )
        for feature in scoring.features
    }
    depth = len(alternatives)
    stats = TaStats()
    seen: dict[str, Score] = {}
    by_label = {a.label: a for a in alternatives}
    last_seen: dict[str, Score] = {}
    for r in range(depth):
        stats.rounds += 1
        row: dict[str, Alternative] = {}
        for feature in scoring.features:
            entry = lists[feature][r]
            row[feature] = entry
            stats.sorted_accesses += 1
            last_seen[feature] = entry.vector.get(feature)
            if entry.label not in seen:
                # Fetch this object's remaining feature scores directly.
                stats.random_accesses += len(scoring.features) - 1
                seen[entry.label] = scoring.of(entry)
        last_values = tuple(last_seen[feature] for feature in scoring.features)
        threshold = scoring(last_values)
        stats.thresholds.append(threshold)
        buffer = sorted(
            seen.items(), key=lambda item: _order_key(by_label[item[0]], item[1])
        )[:k]
        stats.halt_checks.append(tuple(value for _, value in buffer))
        at_or_above = sum(1 for value in seen.values() if value >= threshold)
        if at_or_above < k:
            continue
        if len(seen) == len(alternatives):
            break
        tail_label, tail_value = buffer[-1]
        if tail_value > threshold:
            break
        # The tail ties the threshold exactly, so an unseen object could
        # still tie it too and win the tie rule. Such an object must match
        # the last-seen score on every strictly scored feature, which puts
        # it deeper in those equal-score runs than the entry just read and
        # hence gives it a larger tie key. Halt only once that proves it
        # would sort behind the tail anyway; otherwise keep walking.
        strict = scoring.strict_at(last_values) if scoring.strict_at else ()
        if strict:
            tail = by_label[tail_label]
            bound = max(
                (row[scoring.features[i]].size, row[scoring.features[i]].members)
                for i in strict
            )
            if (tail.size, tail.members) <= bound:
                break
    ranked = [
        RankedAnswer(i + 1, by_label[label], value)
        for i, (label, value) in enumerate(buffer)
    ]
    return ranked, stats


def brute_force_rank(
    alternatives: Sequence[Alternative],
    scoring: ScoringFunction,
    k: int,
) -> list[RankedAnswer]:
    if k < 1:
        raise ValidationError("k must be at least 1")
    if not alternatives:
        raise EmptyRanking("no qualified alternatives to rank")
    scored = [(a, scoring.of(a)) for a in alternatives]
    scored.sort(key=lambda pair: _order_key(pair[0], pair[1]))
    return [
        RankedAnswer(i + 1, alternative, value)
        for i, (alternative, value) in enumerate(scored[:k])
    ]


def rank_single_feature(
    alternatives: Sequence[Alternative],
    feature: str,
    k: int | None = None,
) -> list[RankedAnswer]:
    if feature not in FEATURES:
        raise ValidationError(f"unknown feature {feature!r}")
    if not alternatives:
        raise EmptyRanking("no qualified alternatives to rank")
    if k is not None and k < 1:
        raise ValidationError("k must be at least 1")
    scored = [(a, a.vector.get(feature)) for a in alternatives]
    scored.sort(key=lambda pair: _order_key(pair[0], pair[1]))
    if k is not None:
        scored = scored[:k]
    return [
        RankedAnswer(i + 1, alternative, value)
        for i, (alternative, value) in enumerate(scored)
    ]


def rank_all_features(
    alternatives: Sequence[Alternative],
    features: Sequence[str] = FEATURES,
    k: int | None = None,
) -> dict[str, list[RankedAnswer]]:
    return {
        feature: rank_single_feature(alternatives, feature, k)
        for feature in features
    }
