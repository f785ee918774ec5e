"""Duplicate clustering and quality-driven fusion of ranked answers.

For a multi-source answer, rows from the member sources are clustered
by exact key per global table. Inside a cluster each field takes the
value of the member whose column scored best (fact completeness, then
validity, accuracy, timeliness, then the lower source id), skipping
nulls, and the chosen source is kept as that field's provenance.

Fused data is then re-scored with the same per-column operators used
during assessment, so a fused answer's vector is directly comparable
to the unfused ones, and the top-k list is re-ranked on the result.

Filling a null from another member can only raise a column's fact
completeness, never lower it; the tests pin that down. Validity and
accuracy usually improve too, but a best-by-fact member can win a
field with a worse validity score, so no such guarantee is made.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import rules as rules_mod
from .assess import count_matched, profile_from_counts, scaled_aggregate
from .catalog import Catalog
from .errors import EmptyReference, MissingKey, MissingKeyMapping, StaleAssessment
from .plan import Alternative, Projection
from .rank import RankedAnswer, ScoringFunction
from .scores import ColumnProfile, QualityVector, Score, round_half_up


def _stored(value: Score, precision: int | None) -> Score:
    return value if precision is None else round_half_up(value, precision)


@dataclass
class FusedRow:
    key: tuple
    cells: tuple[str | None, ...]           # in global-table column order
    provenance: tuple[int | None, ...]      # source id per cell


@dataclass
class FusedTable:
    gs_table_id: int
    scope: tuple[int, ...]                  # fused gs column ids
    rows: list[FusedRow] = field(default_factory=list)

    def column_sources(self, gs_column_id: int, cat: Catalog) -> list[str]:
        """Distinct source names that contributed to one column, by id."""
        table = cat.gs_table(self.gs_table_id)
        position = table.column_ids.index(gs_column_id)
        ids = sorted({
            row.provenance[position]
            for row in self.rows
            if row.provenance[position] is not None
        })
        return [cat.source(sid).name for sid in ids]


@dataclass
class _MemberColumn:
    source_id: int
    column_id: int
    position: int                           # cell position in its relation
    profile: ColumnProfile

    @property
    def pick_key(self):
        p = self.profile
        return (
            -p.fact_completeness,
            -p.validity,
            -p.accuracy,
            -p.timeliness,
            self.source_id,
        )


def _member_columns(
    cat: Catalog, gs_column_id: int, members: tuple[int, ...]
) -> list[_MemberColumn]:
    found: dict[int, _MemberColumn] = {}
    for mapping in cat.mappings.values():
        if mapping.gs_column_id != gs_column_id:
            continue
        col = cat.column(mapping.column_id)
        source_id = cat.relation(col.relation_id).source_id
        if source_id not in members:
            continue
        if mapping.stale or mapping.profile is None:
            raise StaleAssessment(
                f"column {mapping.column_id} has no current quality profile; "
                "run assess before fusing"
            )
        current = found.get(source_id)
        if current is None or mapping.column_id < current.column_id:
            found[source_id] = _MemberColumn(
                source_id, mapping.column_id, col.position, mapping.profile
            )
    return sorted(found.values(), key=lambda mc: mc.pick_key)


def fuse_table(
    cat: Catalog,
    gs_table_id: int,
    members: tuple[int, ...],
    scope: tuple[int, ...] | None = None,
) -> FusedTable:
    """Cluster member rows by key and fuse the columns in scope."""
    table = cat.gs_table(gs_table_id)
    key_gs_ids = [g.gs_column_id for g in cat.key_gs_columns(gs_table_id)]
    if scope is None:
        scope_ids = tuple(table.column_ids)
    else:
        scope_ids = tuple(
            cid for cid in table.column_ids if cid in set(scope) | set(key_gs_ids)
        )
    key_rules = [cat.gs_column(g).rule for g in key_gs_ids]

    # Pre-resolve which member column supplies each fused column, best first.
    pickers = {cid: _member_columns(cat, cid, members) for cid in scope_ids}

    clusters: dict[tuple, dict[int, tuple[str | None, ...]]] = {}
    supplying = []
    for source_id in sorted(members):
        rel = cat.relation_into(source_id, gs_table_id)
        if rel is None:
            continue
        try:
            key_cols = cat.key_columns_of(rel.relation_id, gs_table_id)
        except MissingKeyMapping as exc:
            raise MissingKey(
                f"source {cat.source(source_id).name!r} cannot join table "
                f"{table.name!r}: {exc}"
            ) from exc
        supplying.append(source_id)
        for row_idx, row in enumerate(rel.rows):
            raw_key = [row[c.position] for c in key_cols]
            if any(cell is None for cell in raw_key):
                # Nothing to match on; keep the row as its own cluster.
                key = ("\x00unmatched", source_id, row_idx)
            else:
                key = tuple(
                    rules_mod.canon(rule, cell)
                    for rule, cell in zip(key_rules, raw_key)
                )
            cluster = clusters.setdefault(key, {})
            cluster.setdefault(source_id, row)

    fused = FusedTable(gs_table_id, scope_ids)
    column_positions = {cid: table.column_ids.index(cid) for cid in scope_ids}
    width = len(table.column_ids)
    for key, cluster in clusters.items():
        cells: list[str | None] = [None] * width
        provenance: list[int | None] = [None] * width
        for cid in scope_ids:
            position = column_positions[cid]
            for picker in pickers[cid]:
                row = cluster.get(picker.source_id)
                if row is None:
                    continue
                cell = row[picker.position]
                if cell is None:
                    continue
                cells[position] = cell
                provenance[position] = picker.source_id
                break
        fused.rows.append(FusedRow(key, tuple(cells), tuple(provenance)))
    return fused


def reassess_fused(
    cat: Catalog,
    projection: Projection,
    fused_tables: dict[int, FusedTable],
    timeliness: Score,
    precision: int | None = 2,
) -> QualityVector:
    """Score fused data with the assessment operators, per projected column.

    Timeliness is carried over from the answer being fused: merging rows
    does not change when the members' data was created.
    """
    facts = []
    valids = []
    accuracies = []
    for gcid in projection.gs_column_ids:
        gcol = cat.gs_column(gcid)
        fused = fused_tables.get(gcol.gs_table_id)
        if fused is None or gcid not in fused.scope:
            continue
        table = cat.gs_table(gcol.gs_table_id)
        ref = cat.references.get(gcol.gs_table_id)
        if ref is None or not ref.rows:
            raise EmptyReference(
                f"table {table.name!r} has no reference rows to score against"
            )
        ref_index = cat.reference_key_index(gcol.gs_table_id)
        position = table.column_ids.index(gcid)
        pairs = []
        for row in fused.rows:
            ref_idx = ref_index.get(row.key)
            if ref_idx is None:
                continue
            pairs.append((row.cells[position], ref.rows[ref_idx][position]))
        counts = count_matched(pairs, gcol.rule)
        profile = profile_from_counts(0, gcid, counts, len(ref.rows), timeliness)
        facts.append(_stored(profile.fact_completeness, precision))
        valids.append(_stored(profile.validity, precision))
        accuracies.append(_stored(profile.accuracy, precision))
    m = projection.m
    return QualityVector(
        _stored(scaled_aggregate(facts, m), precision),
        _stored(scaled_aggregate(valids, m), precision),
        _stored(scaled_aggregate(accuracies, m), precision),
        timeliness,
    )


@dataclass
class FusedAnswer:
    rank: int
    alternative: Alternative
    original_f: Score
    vector: QualityVector                  # after fusion (unchanged for singletons)
    f_value: Score
    tables: dict[int, FusedTable] = field(default_factory=dict)

    @property
    def label(self) -> str:
        return self.alternative.label

    @property
    def fused(self) -> bool:
        return bool(self.tables)


def fuse_and_rerank(
    cat: Catalog,
    ranked: list[RankedAnswer],
    projection: Projection,
    scoring: ScoringFunction,
    precision: int | None = 2,
) -> list[FusedAnswer]:
    """Fuse each multi-source answer in the top-k and re-rank the list.

    Only the answers already ranked take part; fusion refines the
    returned k answers rather than re-opening the search.
    """
    answers: list[FusedAnswer] = []
    for item in ranked:
        alt = item.alternative
        if alt.size == 1:
            answers.append(
                FusedAnswer(0, alt, item.f_value, alt.vector, item.f_value)
            )
            continue
        tables = {
            gs_table_id: fuse_table(
                cat, gs_table_id, alt.members, projection.gs_column_ids
            )
            for gs_table_id in projection.gs_table_ids
        }
        vector = reassess_fused(
            cat, projection, tables, alt.vector.timeliness, precision
        )
        f_value = scoring(tuple(vector.get(f) for f in scoring.features))
        answers.append(
            FusedAnswer(0, alt, item.f_value, vector, f_value, tables)
        )
    answers.sort(
        key=lambda a: (-a.f_value, a.alternative.size, a.alternative.members)
    )
    for i, answer in enumerate(answers):
        answer.rank = i + 1
    return answers
