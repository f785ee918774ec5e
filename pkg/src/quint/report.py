"""Plain-text and CSV rendering of engine results for the CLI.

Everything renders to a list of lines so callers control the stream.
Output is deterministic: iteration orders are fixed upstream and score
formatting is fixed-point.
"""

from __future__ import annotations

import csv
import io
from typing import Sequence

from .assess import AssessmentRun
from .catalog import Catalog
from .engine import QueryOutcome
from .fuse import FusedAnswer
from .plan import Alternative, Projection, QueriedSourceProfile
from .rank import RankedAnswer, TaStats
from .scores import FEATURES, SHORT_NAMES, Score, format_score

FEATURE_HEADERS = tuple(SHORT_NAMES[f] for f in FEATURES)


def fmt_score(value: Score, precision: int | None = 2) -> str:
    if precision is None:
        return str(value)
    return format_score(value, precision)


def _table_lines(headers: Sequence[str], rows: list[Sequence[str]]) -> list[str]:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    def render(cells: Sequence[str]) -> str:
        return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(cells)).rstrip()
    lines = [render(headers), render(["-" * w for w in widths])]
    lines.extend(render(row) for row in rows)
    return lines


def _csv_lines(headers: Sequence[str], rows: list[Sequence[str]]) -> list[str]:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(headers)
    writer.writerows(rows)
    return buf.getvalue().splitlines()


def _render(headers, rows, fmt: str) -> list[str]:
    if fmt == "csv":
        return _csv_lines(headers, rows)
    return _table_lines(headers, rows)


def section(name: str) -> str:
    return f"== {name} =="


def _titled(name: str, body: list[str], fmt: str) -> list[str]:
    # Section banners would corrupt csv parsing, so they are table-only.
    if fmt == "csv":
        return body
    return [section(name)] + body


def render_assessment(
    cat: Catalog, run: AssessmentRun, fmt: str = "table", precision: int | None = 2
) -> list[str]:
    headers = (
        "column", "source", "local", "global",
        "population", "incompleteness", "fact", "validity", "accuracy", "timeliness",
    )
    rows = []
    for p in run.profiles:
        col = cat.column(p.column_id)
        rel = cat.relation(col.relation_id)
        src = cat.source(rel.source_id)
        gcol = cat.gs_column(p.gs_column_id)
        gtable = cat.gs_table(gcol.gs_table_id)
        rows.append(
            (
                str(p.column_id),
                src.name,
                f"{rel.name}.{col.name}",
                f"{gtable.name}.{gcol.name}",
                fmt_score(p.population, precision),
                fmt_score(p.incompleteness, precision),
                fmt_score(p.fact_completeness, precision),
                fmt_score(p.validity, precision),
                fmt_score(p.accuracy, precision),
                fmt_score(p.timeliness, precision),
            )
        )
    return _titled("column profiles", _render(headers, rows, fmt), fmt)


def _vector_cells(profile_or_alt, precision) -> tuple[str, ...]:
    vector = profile_or_alt.vector
    return tuple(fmt_score(vector.get(f), precision) for f in FEATURES)


def render_sources(
    profiles: list[QueriedSourceProfile],
    projection: Projection,
    fmt: str = "table",
    precision: int | None = 2,
) -> list[str]:
    headers = ("source",) + FEATURE_HEADERS + ("supplies",)
    rows = []
    for p in profiles:
        supplied = [name for name in projection.names if name in p.participation]
        rows.append(
            (p.name,)
            + _vector_cells(p, precision)
            + (", ".join(supplied) or "-",)
        )
    return [section("queried sources")] + _render(headers, rows, fmt)


def render_alternatives(
    alternatives: list[Alternative], fmt: str = "table", precision: int | None = 2
) -> list[str]:
    headers = ("alternative", "sources") + FEATURE_HEADERS + ("status",)
    rows = []
    for alt in alternatives:
        if alt.qualified:
            status = "qualified"
        else:
            status = f"pruned ({alt.prune_reason})"
        rows.append(
            (alt.label, "+".join(alt.member_names))
            + _vector_cells(alt, precision)
            + (status,)
        )
    return _titled("alternatives", _render(headers, rows, fmt), fmt)


def render_ranked(
    ranked: list[RankedAnswer],
    fmt: str = "table",
    precision: int | None = 2,
    title: str = "ranking",
    score_header: str = "F",
) -> list[str]:
    headers = ("rank", "alternative", "sources") + FEATURE_HEADERS + (score_header,)
    rows = []
    for item in ranked:
        alt = item.alternative
        rows.append(
            (str(item.rank), alt.label, "+".join(alt.member_names))
            + _vector_cells(alt, precision)
            + (fmt_score(item.f_value, precision),)
        )
    return _titled(title, _render(headers, rows, fmt), fmt)


def render_rankings(
    rankings: dict[str, list[RankedAnswer]],
    fmt: str = "table",
    precision: int | None = 2,
) -> list[str]:
    lines: list[str] = []
    for feature, ranked in rankings.items():
        if lines:
            lines.append("")
        lines.extend(
            render_ranked(
                ranked,
                fmt,
                precision,
                title=f"ranking by {SHORT_NAMES[feature]}",
                score_header=SHORT_NAMES[feature],
            )
        )
    return lines


def render_ta_stats(stats: TaStats, fmt: str = "table", precision: int | None = 2) -> list[str]:
    lines = [section("threshold algorithm")]
    lines.append(f"rounds: {stats.rounds}")
    lines.append(f"sorted accesses: {stats.sorted_accesses}")
    lines.append(f"random accesses: {stats.random_accesses}")
    for i, (threshold, snapshot) in enumerate(
        zip(stats.thresholds, stats.halt_checks), start=1
    ):
        buffered = ", ".join(fmt_score(v, precision) for v in snapshot)
        lines.append(
            f"round {i}: threshold {fmt_score(threshold, precision)}; "
            f"buffer {{{buffered}}}"
        )
    return lines


def render_fused(
    cat: Catalog,
    fused: list[FusedAnswer],
    projection: Projection,
    fmt: str = "table",
    precision: int | None = 2,
) -> list[str]:
    headers = ("rank", "alternative", "sources") + FEATURE_HEADERS + ("F", "fused")
    rows = []
    for answer in fused:
        alt = answer.alternative
        rows.append(
            (str(answer.rank), alt.label, "+".join(alt.member_names))
            + tuple(fmt_score(answer.vector.get(f), precision) for f in FEATURES)
            + (fmt_score(answer.f_value, precision), "yes" if answer.fused else "no")
        )
    lines = _titled("ranking after fusion", _render(headers, rows, fmt), fmt)
    for answer in fused:
        if not answer.fused:
            continue
        lines.append("")
        lines.extend(
            render_fused_rows(cat, answer, projection, fmt)
        )
    return lines


def render_fused_rows(
    cat: Catalog,
    answer: FusedAnswer,
    projection: Projection,
    fmt: str = "table",
) -> list[str]:
    lines = (
        [] if fmt == "csv" else [section(f"fused data for {answer.alternative.label}")]
    )
    projected = set(projection.gs_column_ids)
    for gs_table_id in sorted(answer.tables):
        fused = answer.tables[gs_table_id]
        table = cat.gs_table(gs_table_id)
        shown = [
            (i, cid)
            for i, cid in enumerate(table.column_ids)
            if cid in projected or cat.gs_column(cid).is_key
        ]
        headers = tuple(cat.gs_column(cid).name for _, cid in shown) + ("provenance",)
        rows = []
        for row in fused.rows:
            provenance = []
            for i, cid in shown:
                sid = row.provenance[i]
                if sid is not None:
                    provenance.append(
                        f"{cat.gs_column(cid).name}<-{cat.source(sid).name}"
                    )
            rows.append(
                tuple(
                    row.cells[i] if row.cells[i] is not None else ""
                    for i, _ in shown
                )
                + ("; ".join(provenance),)
            )
        lines.append(f"{table.name}:")
        lines.extend(_render(headers, rows, fmt))
    return lines


def render_outcome(
    cat: Catalog,
    outcome: QueryOutcome,
    fmt: str = "table",
    precision: int | None = 2,
    explain: bool = False,
    stats: bool = False,
) -> list[str]:
    lines: list[str] = []
    if explain:
        lines.append(section("query"))
        lines.append(f"class: {outcome.query_class.value}")
        lines.append(
            "attributes (M={m}): {names}".format(
                m=outcome.projection.m, names=", ".join(outcome.projection.names)
            )
        )
        lines.append("")
        lines.extend(
            render_sources(outcome.profiles, outcome.projection, fmt, precision)
        )
        lines.append("")
        lines.extend(render_alternatives(outcome.alternatives, fmt, precision))
        lines.append("")
    if outcome.ranked is not None:
        lines.extend(render_ranked(outcome.ranked, fmt, precision))
    elif outcome.rankings:
        lines.extend(render_rankings(outcome.rankings, fmt, precision))
    if stats and outcome.ta_stats is not None:
        lines.append("")
        lines.extend(render_ta_stats(outcome.ta_stats, fmt, precision))
    if outcome.fused is not None:
        lines.append("")
        lines.extend(render_fused(cat, outcome.fused, outcome.projection, fmt, precision))
    return lines
