"""Command-line interface.

Exit codes: 0 on success, 1 for usage errors (bad flags, malformed or
unresolvable queries), 2 for data or catalog errors, 3 when a quality
goal cannot be satisfied by any source combination. Results go to
stdout, diagnostics and errors to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .assess import assess_catalog
from .catalog import Catalog
from .config import RunConfig, load_config
from .engine import run_query
from .errors import (
    ParseError,
    QuintError,
    UnknownColumn,
    UnknownFeature,
    UnresolvedTerm,
    UnsatisfiableGoal,
    UnsupportedGoalShape,
)
from .query import classify, normalize_feature, parse as parse_query, QueryClass
from .report import render_assessment, render_outcome
from .rules import parse_date

USAGE_ERRORS = (
    ParseError,
    UnknownColumn,
    UnknownFeature,
    UnresolvedTerm,
    UnsupportedGoalShape,
)


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; route that through the
    # same path as our own usage errors instead.
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(
        prog="quint",
        description="Quality-driven virtual integration over tabular sources.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create an empty catalog file")
    p.add_argument("--catalog", required=True)
    p.add_argument("--schema", help="global schema declaration file")
    p.add_argument(
        "--null-token",
        action="append",
        default=None,
        help="cell text treated as null (repeatable; default: empty string)",
    )

    p = sub.add_parser("register", help="add a domain, source, relation, or reference")
    reg = p.add_subparsers(dest="entity", required=True)

    d = reg.add_parser("domain")
    d.add_argument("name")
    d.add_argument("--catalog", required=True)

    s = reg.add_parser("source")
    s.add_argument("name")
    s.add_argument("--domain", required=True)
    s.add_argument("--id", type=int, default=None)
    s.add_argument("--catalog", required=True)

    r = reg.add_parser("relation")
    r.add_argument("name")
    r.add_argument("--source", required=True)
    r.add_argument("--columns", required=True, help="comma-separated column names")
    r.add_argument("--inserted", help="insertion date, day/month/year")
    r.add_argument("--volatility", type=int, help="volatility in days")
    r.add_argument("--data", help="CSV file to load")
    r.add_argument("--catalog", required=True)

    f = reg.add_parser("reference")
    f.add_argument("--table", required=True)
    f.add_argument("--data", required=True)
    f.add_argument("--catalog", required=True)

    p = sub.add_parser("map", help="map a source column onto a global column")
    p.add_argument("--column", required=True, help="source.relation.column")
    p.add_argument("--to", required=True, dest="target", help="table.column")
    p.add_argument("--replace", action="store_true")
    p.add_argument("--catalog", required=True)

    p = sub.add_parser("load", help="load or reload a relation's rows")
    p.add_argument("--relation", required=True, help="source.relation")
    p.add_argument("--data", required=True)
    p.add_argument("--catalog", required=True)

    p = sub.add_parser("assess", help="score every mapped column")
    p.add_argument("--catalog", required=True)
    p.add_argument("--as-of", required=True, help="delivery date, day/month/year")
    p.add_argument("--age-mode", choices=("exact-days", "months30"))
    p.add_argument("--format", choices=("table", "csv"))
    p.add_argument("--precision")

    for name in ("query", "explain"):
        p = sub.add_parser(
            name,
            help="run a quality query" if name == "query" else "show the full plan",
        )
        p.add_argument("--catalog", required=True)
        p.add_argument("--sql", help="query text")
        p.add_argument("--sql-file", help="file holding the query text")
        p.add_argument("--config", help="key=value settings file")
        p.add_argument("--precision", help="score decimals, or 'full'")
        p.add_argument("--scoring", choices=("sum", "min", "weighted"))
        p.add_argument(
            "--weight",
            action="append",
            default=None,
            metavar="FEATURE=W",
            help="feature weight for --scoring weighted (repeatable)",
        )
        p.add_argument(
            "--define",
            action="append",
            default=None,
            metavar="TERM=BOUND",
            help="term bound, e.g. high=0.7 or validity.high=0.9 (repeatable)",
        )
        p.add_argument("--format", choices=("table", "csv"))
        p.add_argument("--stats", action="store_true")
        p.add_argument("--fuse", action="store_true")

    return parser


def _load_catalog(path: str) -> Catalog:
    if not Path(path).exists():
        raise QuintError(f"catalog file {path!r} does not exist; run init first")
    return Catalog.load(path)


def _split_locator(text: str, parts: int, what: str) -> list[str]:
    pieces = text.split(".")
    if len(pieces) != parts or not all(pieces):
        raise UsageError(f"{what} must have {parts} dot-separated parts: {text!r}")
    return pieces


def _query_config(args) -> RunConfig:
    config = RunConfig()
    if args.config:
        config = load_config(args.config, config)
    if args.precision:
        config.set("score_precision", args.precision)
    if args.scoring:
        config.set("scoring", args.scoring)
    if getattr(args, "format", None):
        config.set("output", args.format)
    for item in args.weight or ():
        if "=" not in item:
            raise UsageError(f"--weight expects FEATURE=W, got {item!r}")
        key, _, value = item.partition("=")
        config.set(f"weight.{key.strip()}", value)
    for item in args.define or ():
        if "=" not in item:
            raise UsageError(f"--define expects TERM=BOUND, got {item!r}")
        key, _, value = item.partition("=")
        key = key.strip()
        if "." in key:
            feature, _, term = key.partition(".")
            canonical = normalize_feature(feature)
            if canonical is None:
                raise UsageError(f"unknown feature in --define {item!r}")
            config.set(f"term.{canonical}.{term}", value)
        else:
            config.set(f"term.{key}", value)
    return config


def _query_text(args) -> str:
    if bool(args.sql) == bool(args.sql_file):
        raise UsageError("give the query with exactly one of --sql or --sql-file")
    if args.sql:
        return args.sql
    return Path(args.sql_file).read_text(encoding="utf-8")


def _cmd_init(args) -> int:
    cat = Catalog()
    if args.null_token is not None:
        cat.set_null_tokens(args.null_token)
    if args.schema:
        cat.load_global_schema_file(args.schema)
    cat.save(args.catalog)
    print(f"created catalog {args.catalog}")
    return 0


def _cmd_register(args) -> int:
    cat = _load_catalog(args.catalog)
    if args.entity == "domain":
        domain = cat.register_domain(args.name)
        print(f"domain {domain.name} (id {domain.domain_id})")
    elif args.entity == "source":
        source = cat.register_source(args.name, args.domain, args.id)
        print(f"source {source.name} (id {source.source_id})")
    elif args.entity == "relation":
        source = cat.source_by_name(args.source)
        rel = cat.add_relation(
            source.source_id,
            args.name,
            [c.strip() for c in args.columns.split(",")],
            args.inserted,
            args.volatility,
        )
        loaded = ""
        if args.data:
            count = cat.load_relation(rel.relation_id, args.data)
            loaded = f", {count} rows"
        print(
            f"relation {source.name}.{rel.name} (id {rel.relation_id}, "
            f"columns {rel.column_ids[0]}..{rel.column_ids[-1]}{loaded})"
        )
    else:
        table = cat.gs_table_by_name(args.table)
        count = cat.load_reference(table.gs_table_id, args.data)
        print(f"reference for {table.name}: {count} rows")
    cat.save(args.catalog)
    return 0


def _cmd_map(args) -> int:
    cat = _load_catalog(args.catalog)
    source_name, rel_name, col_name = _split_locator(args.column, 3, "--column")
    table_name, gcol_name = _split_locator(args.target, 2, "--to")
    source = cat.source_by_name(source_name)
    rel = next(
        (
            cat.relations[r]
            for r in sorted(cat.relations)
            if cat.relations[r].source_id == source.source_id
            and cat.relations[r].name == rel_name
        ),
        None,
    )
    if rel is None:
        raise QuintError(f"source {source_name!r} has no relation {rel_name!r}")
    col = next(
        (
            cat.columns[c]
            for c in rel.column_ids
            if cat.columns[c].name == col_name
        ),
        None,
    )
    if col is None:
        raise QuintError(f"relation {rel_name!r} has no column {col_name!r}")
    table = cat.gs_table_by_name(table_name)
    gcol = cat.gs_column_by_name(table.gs_table_id, gcol_name)
    cat.upsert_mapping(col.column_id, gcol.gs_column_id, replace=args.replace)
    cat.save(args.catalog)
    print(
        f"column {col.column_id} ({args.column}) -> "
        f"{table.name}.{gcol.name} (global column {gcol.gs_column_id})"
    )
    return 0


def _cmd_load(args) -> int:
    cat = _load_catalog(args.catalog)
    source_name, rel_name = _split_locator(args.relation, 2, "--relation")
    source = cat.source_by_name(source_name)
    rel = next(
        (
            cat.relations[r]
            for r in sorted(cat.relations)
            if cat.relations[r].source_id == source.source_id
            and cat.relations[r].name == rel_name
        ),
        None,
    )
    if rel is None:
        raise QuintError(f"source {source_name!r} has no relation {rel_name!r}")
    count = cat.load_relation(rel.relation_id, args.data)
    cat.save(args.catalog)
    print(f"loaded {count} rows into {args.relation}")
    return 0


def _cmd_assess(args) -> int:
    cat = _load_catalog(args.catalog)
    if not cat.mappings:
        raise QuintError("nothing to assess: no source columns are mapped")
    as_of = parse_date(args.as_of)
    run = assess_catalog(cat, as_of, args.age_mode or "exact-days")
    cat.save(args.catalog)
    for note in run.diagnostics:
        print(f"note: {note}", file=sys.stderr)
    precision = None if args.precision == "full" else int(args.precision or 2)
    for line in render_assessment(cat, run, args.format or "table", precision):
        print(line)
    return 0


def _cmd_query(args, explain: bool) -> int:
    cat = _load_catalog(args.catalog)
    config = _query_config(args)
    text = _query_text(args)
    if args.fuse:
        # Check the shape before running anything: fusing an unranked
        # answer list is a usage error, not a data error.
        probe = parse_query(text, cat)
        if classify(probe) is QueryClass.NO_FEATURE:
            raise UsageError(
                "--fuse needs a ranked answer list; add a WITH quality goal"
            )
    outcome = run_query(cat, text, config, fuse=args.fuse)
    lines = render_outcome(
        cat,
        outcome,
        fmt=config.output,
        precision=config.score_precision,
        explain=explain,
        stats=args.stats or explain,
    )
    for line in lines:
        print(line)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "init":
            return _cmd_init(args)
        if args.command == "register":
            return _cmd_register(args)
        if args.command == "map":
            return _cmd_map(args)
        if args.command == "load":
            return _cmd_load(args)
        if args.command == "assess":
            return _cmd_assess(args)
        return _cmd_query(args, explain=args.command == "explain")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except USAGE_ERRORS as exc:
        print(f"query error: {exc}", file=sys.stderr)
        return 1
    except UnsatisfiableGoal as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except QuintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
