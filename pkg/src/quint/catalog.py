"""The integration catalog: sources, relations, global schema, mappings.

The catalog is the single store every other module reads from. It holds
registered domains and sources, their relations (with loaded rows),
the global schema with per-column validity rules, the column mappings
that tie local columns to global ones, and per-table reference data
used as ground truth during assessment.

Persistence is a line-oriented text format (version header, counted
sections, embedded CSV records) so a catalog file survives diffing and
hand inspection. See `docs/catalog-format.md`.
"""

from __future__ import annotations

import copy
import csv
import io
import threading
from dataclasses import dataclass, field
from datetime import date
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from . import rules as rules_mod
from .errors import (
    CatalogParseError,
    DuplicateReferenceKey,
    DuplicateSource,
    MappingConflict,
    MissingKeyMapping,
    NullReferenceKey,
    RowFormatError,
    SchemaMismatch,
    UnknownDomain,
    UnsupportedCatalogVersion,
    ValidationError,
)
from .rules import Rule, format_date, parse_date, parse_rule
from .scores import ColumnProfile

FORMAT_NAME = "quint-catalog"
FORMAT_VERSION = 1

DEFAULT_NULL_TOKENS = frozenset({""})


@dataclass
class Domain:
    domain_id: int
    name: str


@dataclass
class Source:
    source_id: int
    name: str
    domain_id: int


@dataclass
class Relation:
    relation_id: int
    source_id: int
    name: str
    insertion_date: date | None = None
    volatility_days: int | None = None
    column_ids: list[int] = field(default_factory=list)
    rows: list[tuple[str | None, ...]] = field(default_factory=list)
    loaded: bool = False


@dataclass
class Column:
    column_id: int
    relation_id: int
    name: str
    position: int


@dataclass
class GlobalTable:
    gs_table_id: int
    name: str
    column_ids: list[int] = field(default_factory=list)


@dataclass
class GlobalColumn:
    gs_column_id: int
    gs_table_id: int
    name: str
    rule: Rule
    is_key: bool = False


@dataclass
class Mapping:
    column_id: int
    gs_column_id: int
    stale: bool = True
    profile: ColumnProfile | None = None


@dataclass
class Reference:
    gs_table_id: int
    rows: list[tuple[str | None, ...]] = field(default_factory=list)


_STATE_FIELDS = (
    "domains",
    "sources",
    "relations",
    "columns",
    "gs_tables",
    "gs_columns",
    "mappings",
    "references",
    "null_tokens",
    "_next_id",
)


def _as_date(value: date | str | None) -> date | None:
    if value is None or isinstance(value, date):
        return value
    return parse_date(value)


def _csv_line(fields: Sequence[str]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerow(fields)
    return buf.getvalue()[:-1]


def _csv_parse(line: str) -> list[str]:
    return next(csv.reader([line]))


def _enc_cell(cell: str | None) -> str:
    if cell is None:
        return "\\N"
    # NUL must be escaped too: the csv module refuses to write it.
    return (
        cell.replace("\\", "\\\\")
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\x00", "\\0")
    )


def _dec_cell(text: str) -> str | None:
    if text == "\\N":
        return None
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            if nxt == "\\":
                out.append("\\")
                i += 2
                continue
            if nxt == "n":
                out.append("\n")
                i += 2
                continue
            if nxt == "r":
                out.append("\r")
                i += 2
                continue
            if nxt == "0":
                out.append("\x00")
                i += 2
                continue
        out.append(ch)
        i += 1
    return "".join(out)


def _enc_score(value: Fraction | None) -> str:
    return "" if value is None else str(value)


def _dec_score(text: str) -> Fraction | None:
    return None if text == "" else Fraction(text)


def split_column_specs(body: str) -> list[str]:
    """Split a parenthesized column list on commas outside brackets."""
    parts: list[str] = []
    depth = 0
    current: list[str] = []
    for ch in body:
        if ch in "[{(":
            depth += 1
        elif ch in "]})":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(current).strip())
            current = []
        else:
            current.append(ch)
    tail = "".join(current).strip()
    if tail:
        parts.append(tail)
    return parts


class Catalog:
    """Mutable registry of everything the engine knows about the data."""

    def __init__(self):
        self._lock = threading.RLock()
        self._frozen = False
        self.domains: dict[int, Domain] = {}
        self.sources: dict[int, Source] = {}
        self.relations: dict[int, Relation] = {}
        self.columns: dict[int, Column] = {}
        self.gs_tables: dict[int, GlobalTable] = {}
        self.gs_columns: dict[int, GlobalColumn] = {}
        self.mappings: dict[int, Mapping] = {}          # keyed by column_id
        self.references: dict[int, Reference] = {}      # keyed by gs_table_id
        self.null_tokens: set[str] = set(DEFAULT_NULL_TOKENS)
        self._next_id: dict[str, int] = {
            "domain": 1,
            "source": 1,
            "relation": 1,
            "column": 1,
            "gs_table": 1,
            "gs_column": 1,
        }

    # -- bookkeeping --------------------------------------------------------

    def _mutable(self):
        if self._frozen:
            raise ValidationError("catalog snapshot is read-only")

    def _take_id(self, kind: str) -> int:
        value = self._next_id[kind]
        self._next_id[kind] = value + 1
        return value

    def _bump_id(self, kind: str, used: int):
        if used >= self._next_id[kind]:
            self._next_id[kind] = used + 1

    def snapshot(self) -> "Catalog":
        """Deep, read-only copy; safe to hand to concurrent readers."""
        with self._lock:
            clone = Catalog.__new__(Catalog)
            clone._lock = threading.RLock()
            clone._frozen = True
            for name in _STATE_FIELDS:
                setattr(clone, name, copy.deepcopy(getattr(self, name)))
        return clone

    # -- registration --------------------------------------------------------

    def register_domain(self, name: str) -> Domain:
        name = name.strip()
        if not name:
            raise ValidationError("domain name must be non-empty")
        with self._lock:
            self._mutable()
            for domain in self.domains.values():
                if domain.name == name:
                    return domain
            domain = Domain(self._take_id("domain"), name)
            self.domains[domain.domain_id] = domain
            return domain

    def domain_by_name(self, name: str) -> Domain:
        for domain in self.domains.values():
            if domain.name == name:
                return domain
        raise UnknownDomain(f"no domain named {name!r}")

    def register_source(
        self, name: str, domain: str, source_id: int | None = None
    ) -> Source:
        name = name.strip()
        if not name:
            raise ValidationError("source name must be non-empty")
        with self._lock:
            self._mutable()
            dom = self.domain_by_name(domain)
            existing = None
            for src in self.sources.values():
                if src.name == name and src.domain_id == dom.domain_id:
                    existing = src
                    break
            if existing is not None:
                # Re-registering the same (name, domain) pair is a no-op,
                # unless the caller insists on a conflicting id.
                if source_id is not None and source_id != existing.source_id:
                    raise DuplicateSource(
                        f"source {name!r} already registered as id {existing.source_id}"
                    )
                return existing
            if source_id is None:
                source_id = self._take_id("source")
            elif source_id in self.sources:
                other = self.sources[source_id]
                raise DuplicateSource(
                    f"source id {source_id} already taken by {other.name!r}"
                )
            else:
                self._bump_id("source", source_id)
            src = Source(source_id, name, dom.domain_id)
            self.sources[source_id] = src
            return src

    def source_by_name(self, name: str, domain: str | None = None) -> Source:
        hits = [s for s in self.sources.values() if s.name == name]
        if domain is not None:
            dom = self.domain_by_name(domain)
            hits = [s for s in hits if s.domain_id == dom.domain_id]
        if not hits:
            raise ValidationError(f"no source named {name!r}")
        if len(hits) > 1:
            raise ValidationError(f"source name {name!r} is ambiguous across domains")
        return hits[0]

    def add_relation(
        self,
        source_id: int,
        name: str,
        columns: Sequence[str],
        insertion_date: date | str | None = None,
        volatility_days: int | None = None,
    ) -> Relation:
        name = name.strip()
        if not name:
            raise ValidationError("relation name must be non-empty")
        cols = [c.strip() for c in columns]
        if not cols or len(set(cols)) != len(cols) or any(not c for c in cols):
            raise ValidationError("relation columns must be non-empty and unique")
        if volatility_days is not None and volatility_days <= 0:
            raise ValidationError("volatility must be a positive number of days")
        with self._lock:
            self._mutable()
            if source_id not in self.sources:
                raise ValidationError(f"no source with id {source_id}")
            for rel in self.relations.values():
                if rel.source_id == source_id and rel.name == name:
                    raise ValidationError(
                        f"source {source_id} already has a relation {name!r}"
                    )
            rel = Relation(
                self._take_id("relation"),
                source_id,
                name,
                _as_date(insertion_date),
                volatility_days,
            )
            for position, col_name in enumerate(cols):
                col = Column(self._take_id("column"), rel.relation_id, col_name, position)
                self.columns[col.column_id] = col
                rel.column_ids.append(col.column_id)
            self.relations[rel.relation_id] = rel
            return rel

    # -- data loading ---------------------------------------------------------

    def _null(self, cell: str) -> str | None:
        return None if cell in self.null_tokens else cell

    def set_null_tokens(self, tokens: Iterable[str]):
        with self._lock:
            self._mutable()
            self.null_tokens = set(tokens)

    def load_relation_rows(
        self, relation_id: int, header: Sequence[str], rows: Iterable[Sequence[str]]
    ) -> int:
        with self._lock:
            self._mutable()
            rel = self.relation(relation_id)
            declared = [self.columns[cid].name for cid in rel.column_ids]
            if list(header) != declared:
                raise SchemaMismatch(
                    f"relation {rel.name!r} declares columns {declared}, "
                    f"file has {list(header)}"
                )
            arity = len(declared)
            stored: list[tuple[str | None, ...]] = []
            for number, row in enumerate(rows, start=1):
                if len(row) != arity:
                    raise RowFormatError(
                        f"expected {arity} cells, found {len(row)}", number
                    )
                stored.append(tuple(self._null(cell) for cell in row))
            rel.rows = stored
            rel.loaded = True
            # Any prior assessment of these columns no longer describes
            # the data now in place.
            for cid in rel.column_ids:
                mapping = self.mappings.get(cid)
                if mapping is not None:
                    mapping.stale = True
            return len(stored)

    def load_relation(self, relation_id: int, path: str | Path) -> int:
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.reader(handle)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaMismatch(f"{path}: file has no header row") from None
            return self.load_relation_rows(relation_id, header, reader)

    # -- global schema ----------------------------------------------------------

    def load_global_schema(self, text: str, replace: bool = False):
        """Parse table declarations like `Student(SId key type:int, ...)`."""
        with self._lock:
            self._mutable()
            if self.gs_tables and not replace:
                raise ValidationError("global schema already loaded")
            if replace:
                self.gs_tables.clear()
                self.gs_columns.clear()
                self.mappings.clear()
                self.references.clear()
                self._next_id["gs_table"] = 1
                self._next_id["gs_column"] = 1
            for raw_line in text.splitlines():
                line = raw_line.strip()
                if not line or line.startswith("#"):
                    continue
                if not line.endswith(")") or "(" not in line:
                    raise ValidationError(f"malformed table declaration: {line!r}")
                table_name, _, body = line[:-1].partition("(")
                table_name = table_name.strip()
                if not table_name:
                    raise ValidationError(f"missing table name in {line!r}")
                if any(t.name == table_name for t in self.gs_tables.values()):
                    raise ValidationError(f"duplicate table {table_name!r}")
                table = GlobalTable(self._take_id("gs_table"), table_name)
                self.gs_tables[table.gs_table_id] = table
                specs = split_column_specs(body)
                if not specs:
                    raise ValidationError(f"table {table_name!r} declares no columns")
                for spec in specs:
                    words = spec.split(None, 2)
                    if not words:
                        raise ValidationError(f"empty column in {table_name!r}")
                    col_name = words[0]
                    rest = words[1:]
                    is_key = bool(rest) and rest[0].lower() == "key"
                    if is_key:
                        rest = rest[1:]
                    rule = parse_rule(" ".join(rest)) if rest else rules_mod.TEXT_RULE
                    gcol = GlobalColumn(
                        self._take_id("gs_column"),
                        table.gs_table_id,
                        col_name,
                        rule,
                        is_key,
                    )
                    self.gs_columns[gcol.gs_column_id] = gcol
                    table.column_ids.append(gcol.gs_column_id)
                if not any(self.gs_columns[c].is_key for c in table.column_ids):
                    raise ValidationError(f"table {table_name!r} declares no key column")

    def load_global_schema_file(self, path: str | Path, replace: bool = False):
        self.load_global_schema(Path(path).read_text(encoding="utf-8"), replace)

    def gs_table_by_name(self, name: str) -> GlobalTable:
        for table in self.gs_tables.values():
            if table.name == name:
                return table
        raise ValidationError(f"no global table named {name!r}")

    def gs_column_by_name(self, gs_table_id: int, name: str) -> GlobalColumn:
        table = self.gs_table(gs_table_id)
        for cid in table.column_ids:
            if self.gs_columns[cid].name == name:
                return self.gs_columns[cid]
        raise ValidationError(f"table {table.name!r} has no column {name!r}")

    def key_gs_columns(self, gs_table_id: int) -> list[GlobalColumn]:
        table = self.gs_table(gs_table_id)
        return [self.gs_columns[c] for c in table.column_ids if self.gs_columns[c].is_key]

    # -- mappings ----------------------------------------------------------------

    def upsert_mapping(
        self, column_id: int, gs_column_id: int, replace: bool = False
    ) -> Mapping:
        with self._lock:
            self._mutable()
            self.column(column_id)
            self.gs_column(gs_column_id)
            current = self.mappings.get(column_id)
            if current is not None:
                if current.gs_column_id == gs_column_id:
                    return current
                if not replace:
                    raise MappingConflict(
                        f"column {column_id} already mapped to global column "
                        f"{current.gs_column_id}"
                    )
            mapping = Mapping(column_id, gs_column_id)
            self.mappings[column_id] = mapping
            return mapping

    def set_profile(self, column_id: int, profile: ColumnProfile):
        with self._lock:
            self._mutable()
            mapping = self.mappings.get(column_id)
            if mapping is None:
                raise ValidationError(f"column {column_id} has no mapping")
            if profile.gs_column_id != mapping.gs_column_id:
                raise ValidationError("profile target disagrees with mapping")
            mapping.profile = profile
            mapping.stale = False

    def mappings_into(self, gs_table_id: int) -> list[Mapping]:
        table = self.gs_table(gs_table_id)
        wanted = set(table.column_ids)
        found = [m for m in self.mappings.values() if m.gs_column_id in wanted]
        return sorted(found, key=lambda m: (m.gs_column_id, m.column_id))

    def relations_into(self, gs_table_id: int) -> list[int]:
        ids = {
            self.columns[m.column_id].relation_id
            for m in self.mappings_into(gs_table_id)
        }
        return sorted(ids)

    def relation_into(self, source_id: int, gs_table_id: int) -> Relation | None:
        for rid in self.relations_into(gs_table_id):
            if self.relations[rid].source_id == source_id:
                return self.relations[rid]
        return None

    def key_columns_of(self, relation_id: int, gs_table_id: int) -> list[Column]:
        """The relation's columns mapped onto the table's key, in key order.

        Raises MissingKeyMapping when the relation maps into the table but
        leaves part of the key uncovered.
        """
        rel = self.relation(relation_id)
        by_gs = {}
        for cid in rel.column_ids:
            mapping = self.mappings.get(cid)
            if mapping is not None:
                by_gs.setdefault(mapping.gs_column_id, cid)
        result = []
        for key_col in self.key_gs_columns(gs_table_id):
            cid = by_gs.get(key_col.gs_column_id)
            if cid is None:
                raise MissingKeyMapping(
                    f"relation {rel.name!r} maps into table "
                    f"{self.gs_table(gs_table_id).name!r} but not onto its key "
                    f"column {key_col.name!r}"
                )
            result.append(self.columns[cid])
        return result

    # -- reference data -------------------------------------------------------------

    def load_reference_rows(
        self, gs_table_id: int, header: Sequence[str], rows: Iterable[Sequence[str]]
    ) -> int:
        with self._lock:
            self._mutable()
            table = self.gs_table(gs_table_id)
            declared = [self.gs_columns[c].name for c in table.column_ids]
            if sorted(header) != sorted(declared):
                raise SchemaMismatch(
                    f"reference for {table.name!r} must carry columns {declared}, "
                    f"file has {list(header)}"
                )
            order = [list(header).index(name) for name in declared]
            key_positions = [
                i
                for i, cid in enumerate(table.column_ids)
                if self.gs_columns[cid].is_key
            ]
            key_rules = [
                self.gs_columns[table.column_ids[i]].rule for i in key_positions
            ]
            stored: list[tuple[str | None, ...]] = []
            seen: dict[tuple, int] = {}
            for number, row in enumerate(rows, start=1):
                if len(row) != len(declared):
                    raise RowFormatError(
                        f"expected {len(declared)} cells, found {len(row)}", number
                    )
                cells = tuple(self._null(row[i]) for i in order)
                key_cells = [cells[i] for i in key_positions]
                if any(c is None for c in key_cells):
                    raise NullReferenceKey(
                        f"reference row {number} for {table.name!r} has a null key"
                    )
                key = tuple(
                    rules_mod.canon(rule, cell)
                    for rule, cell in zip(key_rules, key_cells)
                )
                if key in seen:
                    raise DuplicateReferenceKey(
                        f"reference rows {seen[key]} and {number} for "
                        f"{table.name!r} share key {key}"
                    )
                seen[key] = number
                stored.append(cells)
            self.references[gs_table_id] = Reference(gs_table_id, stored)
            # Ground truth changed, so existing scores no longer hold.
            for mapping in self.mappings_into(gs_table_id):
                mapping.stale = True
            return len(stored)

    def load_reference(self, gs_table_id: int, path: str | Path) -> int:
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.reader(handle)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaMismatch(f"{path}: file has no header row") from None
            return self.load_reference_rows(gs_table_id, header, reader)

    def reference_key_index(self, gs_table_id: int) -> dict[tuple, int]:
        """Canonicalized key tuple -> row position in the reference."""
        table = self.gs_table(gs_table_id)
        ref = self.references.get(gs_table_id)
        if ref is None:
            return {}
        key_positions = [
            i for i, cid in enumerate(table.column_ids) if self.gs_columns[cid].is_key
        ]
        key_rules = [self.gs_columns[table.column_ids[i]].rule for i in key_positions]
        index: dict[tuple, int] = {}
        for row_idx, cells in enumerate(ref.rows):
            key = tuple(
                rules_mod.canon(rule, cells[i])
                for rule, i in zip(key_rules, key_positions)
            )
            index[key] = row_idx
        return index

    # -- lookups -------------------------------------------------------------------

    def domain(self, domain_id: int) -> Domain:
        try:
            return self.domains[domain_id]
        except KeyError:
            raise ValidationError(f"no domain with id {domain_id}") from None

    def source(self, source_id: int) -> Source:
        try:
            return self.sources[source_id]
        except KeyError:
            raise ValidationError(f"no source with id {source_id}") from None

    def relation(self, relation_id: int) -> Relation:
        try:
            return self.relations[relation_id]
        except KeyError:
            raise ValidationError(f"no relation with id {relation_id}") from None

    def column(self, column_id: int) -> Column:
        try:
            return self.columns[column_id]
        except KeyError:
            raise ValidationError(f"no column with id {column_id}") from None

    def gs_table(self, gs_table_id: int) -> GlobalTable:
        try:
            return self.gs_tables[gs_table_id]
        except KeyError:
            raise ValidationError(f"no global table with id {gs_table_id}") from None

    def gs_column(self, gs_column_id: int) -> GlobalColumn:
        try:
            return self.gs_columns[gs_column_id]
        except KeyError:
            raise ValidationError(f"no global column with id {gs_column_id}") from None

    def column_cells(self, column_id: int) -> list[str | None]:
        col = self.column(column_id)
        rel = self.relation(col.relation_id)
        return [row[col.position] for row in rel.rows]

    # -- integrity -------------------------------------------------------------------

    def validate_integrity(self):
        for src in self.sources.values():
            if src.domain_id not in self.domains:
                raise CatalogParseError(
                    f"source {src.source_id} points at missing domain {src.domain_id}"
                )
        for rel in self.relations.values():
            if rel.source_id not in self.sources:
                raise CatalogParseError(
                    f"relation {rel.relation_id} points at missing source"
                )
            for cid in rel.column_ids:
                if cid not in self.columns:
                    raise CatalogParseError(
                        f"relation {rel.relation_id} lists missing column {cid}"
                    )
            arity = len(rel.column_ids)
            for i, row in enumerate(rel.rows, start=1):
                if len(row) != arity:
                    raise CatalogParseError(
                        f"relation {rel.relation_id} row {i} has wrong width"
                    )
        for col in self.columns.values():
            if col.relation_id not in self.relations:
                raise CatalogParseError(
                    f"column {col.column_id} points at missing relation"
                )
        for table in self.gs_tables.values():
            for cid in table.column_ids:
                if cid not in self.gs_columns:
                    raise CatalogParseError(
                        f"global table {table.gs_table_id} lists missing column {cid}"
                    )
        for gcol in self.gs_columns.values():
            if gcol.gs_table_id not in self.gs_tables:
                raise CatalogParseError(
                    f"global column {gcol.gs_column_id} points at missing table"
                )
        for mapping in self.mappings.values():
            if mapping.column_id not in self.columns:
                raise CatalogParseError(
                    f"mapping points at missing column {mapping.column_id}"
                )
            if mapping.gs_column_id not in self.gs_columns:
                raise CatalogParseError(
                    f"mapping points at missing global column {mapping.gs_column_id}"
                )
        for ref in self.references.values():
            if ref.gs_table_id not in self.gs_tables:
                raise CatalogParseError(
                    f"reference points at missing table {ref.gs_table_id}"
                )
            width = len(self.gs_tables[ref.gs_table_id].column_ids)
            for i, row in enumerate(ref.rows, start=1):
                if len(row) != width:
                    raise CatalogParseError(
                        f"reference row {i} for table {ref.gs_table_id} has wrong width"
                    )

    # -- persistence -------------------------------------------------------------------

    def save(self, path: str | Path):
        with self._lock:
            text = self.dumps()
        Path(path).write_text(text, encoding="utf-8")

    def dumps(self) -> str:
        lines: list[str] = [f"{FORMAT_NAME} {FORMAT_VERSION}"]

        def section(name: str, rows: list[Sequence[str]], *extra: str):
            head = f"[{name}]"
            if extra:
                head += " " + " ".join(extra)
            lines.append(f"{head} {len(rows)}")
            for row in rows:
                lines.append(_csv_line(row))

        section(
            "domain",
            [
                (str(d.domain_id), d.name)
                for d in (self.domains[k] for k in sorted(self.domains))
            ],
        )
        section(
            "source",
            [
                (str(s.source_id), s.name, str(s.domain_id))
                for s in (self.sources[k] for k in sorted(self.sources))
            ],
        )
        section(
            "table",
            [
                (
                    str(r.relation_id),
                    str(r.source_id),
                    r.name,
                    format_date(r.insertion_date) if r.insertion_date else "",
                    str(r.volatility_days) if r.volatility_days is not None else "",
                    "1" if r.loaded else "0",
                )
                for r in (self.relations[k] for k in sorted(self.relations))
            ],
        )
        section(
            "column",
            [
                (str(c.column_id), str(c.relation_id), c.name, str(c.position))
                for c in (self.columns[k] for k in sorted(self.columns))
            ],
        )
        section(
            "gstable",
            [
                (str(t.gs_table_id), t.name)
                for t in (self.gs_tables[k] for k in sorted(self.gs_tables))
            ],
        )
        section(
            "gscolumn",
            [
                (
                    str(g.gs_column_id),
                    str(g.gs_table_id),
                    g.name,
                    "1" if g.is_key else "0",
                    g.rule.spec(),
                )
                for g in (self.gs_columns[k] for k in sorted(self.gs_columns))
            ],
        )
        mapping_rows = []
        for m in (self.mappings[k] for k in sorted(self.mappings)):
            p = m.profile
            mapping_rows.append(
                (
                    str(m.column_id),
                    str(m.gs_column_id),
                    "1" if m.stale else "0",
                    _enc_score(p.population if p else None),
                    _enc_score(p.incompleteness if p else None),
                    _enc_score(p.fact_completeness if p else None),
                    _enc_score(p.validity if p else None),
                    _enc_score(p.accuracy if p else None),
                    _enc_score(p.timeliness if p else None),
                )
            )
        section("mapping", mapping_rows)
        # Reserved for plan-state persistence; always empty in this version.
        section("queried-source", [])
        section("queried-vector", [])
        section("alternative", [])
        section("alternative-link", [])
        section("null-tokens", [(_enc_cell(t),) for t in sorted(self.null_tokens)])
        for rid in sorted(self.relations):
            rel = self.relations[rid]
            if not rel.loaded:
                continue
            section(
                "rows",
                [tuple(_enc_cell(c) for c in row) for row in rel.rows],
                str(rid),
            )
        for gid in sorted(self.references):
            ref = self.references[gid]
            section(
                "reference",
                [tuple(_enc_cell(c) for c in row) for row in ref.rows],
                str(gid),
            )
        lines.append("[end]")
        return "\n".join(lines) + "\n"

    @classmethod
    def load(cls, path: str | Path) -> "Catalog":
        return cls.loads(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def loads(cls, text: str) -> "Catalog":
        # Split on plain newlines only: splitlines() also breaks on form
        # feeds and separator control characters, which are legal inside
        # escaped cell data.
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        # Tolerate \r\n endings; raw \r never survives cell escaping.
        lines = [ln[:-1] if ln.endswith("\r") else ln for ln in lines]
        if not lines:
            raise CatalogParseError("empty catalog file")
        head = lines[0].split()
        if len(head) != 2 or head[0] != FORMAT_NAME:
            raise CatalogParseError(f"not a catalog file: {lines[0]!r}")
        try:
            version = int(head[1])
        except ValueError:
            raise CatalogParseError(f"bad version {head[1]!r}") from None
        if version > FORMAT_VERSION:
            raise UnsupportedCatalogVersion(
                f"catalog version {version} is newer than supported "
                f"version {FORMAT_VERSION}"
            )

        cat = cls()
        pos = 1

        def take_section(expected: str | None = None):
            nonlocal pos
            if pos >= len(lines):
                raise CatalogParseError("catalog file is truncated")
            header = lines[pos]
            pos += 1
            if not header.startswith("["):
                raise CatalogParseError(f"expected section header, got {header!r}")
            name_end = header.find("]")
            if name_end < 0:
                raise CatalogParseError(f"malformed section header {header!r}")
            name = header[1:name_end]
            if expected is not None and name != expected:
                raise CatalogParseError(
                    f"expected section [{expected}], found [{name}]"
                )
            words = header[name_end + 1 :].split()
            if not words:
                raise CatalogParseError(f"section [{name}] missing row count")
            try:
                count = int(words[-1])
            except ValueError:
                raise CatalogParseError(
                    f"bad row count in section [{name}]"
                ) from None
            extra = words[:-1]
            if pos + count > len(lines):
                raise CatalogParseError(f"section [{name}] is truncated")
            body = [_csv_parse(lines[pos + i]) for i in range(count)]
            pos += count
            return name, extra, body

        def need(row: list[str], width: int, what: str) -> list[str]:
            if len(row) != width:
                raise CatalogParseError(f"malformed {what} record: {row}")
            return row

        try:
            _, _, body = take_section("domain")
            for row in body:
                did, name = need(row, 2, "domain")
                cat.domains[int(did)] = Domain(int(did), name)
                cat._bump_id("domain", int(did))
            _, _, body = take_section("source")
            for row in body:
                sid, name, did = need(row, 3, "source")
                cat.sources[int(sid)] = Source(int(sid), name, int(did))
                cat._bump_id("source", int(sid))
            _, _, body = take_section("table")
            for row in body:
                rid, sid, name, ins, vol, loaded = need(row, 6, "table")
                rel = Relation(
                    int(rid),
                    int(sid),
                    name,
                    parse_date(ins) if ins else None,
                    int(vol) if vol else None,
                )
                rel.loaded = loaded == "1"
                cat.relations[int(rid)] = rel
                cat._bump_id("relation", int(rid))
            _, _, body = take_section("column")
            for row in body:
                cid, rid, name, posn = need(row, 4, "column")
                cat.columns[int(cid)] = Column(int(cid), int(rid), name, int(posn))
                cat._bump_id("column", int(cid))
            for col in sorted(cat.columns.values(), key=lambda c: c.position):
                if col.relation_id in cat.relations:
                    cat.relations[col.relation_id].column_ids.append(col.column_id)
            _, _, body = take_section("gstable")
            for row in body:
                gid, name = need(row, 2, "gstable")
                cat.gs_tables[int(gid)] = GlobalTable(int(gid), name)
                cat._bump_id("gs_table", int(gid))
            _, _, body = take_section("gscolumn")
            for row in body:
                gcid, gid, name, key, rule = need(row, 5, "gscolumn")
                gcol = GlobalColumn(
                    int(gcid), int(gid), name, parse_rule(rule), key == "1"
                )
                cat.gs_columns[int(gcid)] = gcol
                cat._bump_id("gs_column", int(gcid))
            for gcol in sorted(cat.gs_columns.values(), key=lambda g: g.gs_column_id):
                if gcol.gs_table_id in cat.gs_tables:
                    cat.gs_tables[gcol.gs_table_id].column_ids.append(
                        gcol.gs_column_id
                    )
            _, _, body = take_section("mapping")
            for row in body:
                fields = need(row, 9, "mapping")
                cid, gcid, stale = fields[:3]
                scores = [_dec_score(f) for f in fields[3:]]
                mapping = Mapping(int(cid), int(gcid), stale == "1")
                if all(s is not None for s in scores):
                    mapping.profile = ColumnProfile(int(cid), int(gcid), *scores)
                cat.mappings[int(cid)] = mapping
            for name in (
                "queried-source",
                "queried-vector",
                "alternative",
                "alternative-link",
            ):
                _, _, body = take_section(name)
                if body:
                    raise CatalogParseError(
                        f"section [{name}] must be empty in version {FORMAT_VERSION}"
                    )
            _, _, body = take_section("null-tokens")
            cat.null_tokens = set()
            for row in body:
                (token,) = need(row, 1, "null-token")
                decoded = _dec_cell(token)
                if decoded is None:
                    raise CatalogParseError("null token cannot itself be null")
                cat.null_tokens.add(decoded)
            while True:
                if pos < len(lines) and lines[pos].strip() == "[end]":
                    pos += 1
                    break
                name, extra, body = take_section()
                if name == "rows":
                    if len(extra) != 1:
                        raise CatalogParseError("[rows] header needs a relation id")
                    rel = cat.relations.get(int(extra[0]))
                    if rel is None:
                        raise CatalogParseError(
                            f"[rows] for unknown relation {extra[0]}"
                        )
                    rel.rows = [tuple(_dec_cell(c) for c in row) for row in body]
                    rel.loaded = True
                elif name == "reference":
                    if len(extra) != 1:
                        raise CatalogParseError(
                            "[reference] header needs a table id"
                        )
                    gid = int(extra[0])
                    if gid not in cat.gs_tables:
                        raise CatalogParseError(
                            f"[reference] for unknown table {extra[0]}"
                        )
                    cat.references[gid] = Reference(
                        gid, [tuple(_dec_cell(c) for c in row) for row in body]
                    )
                else:
                    raise CatalogParseError(f"unexpected section [{name}]")
        except (ValueError, ZeroDivisionError) as exc:
            raise CatalogParseError(f"malformed catalog value: {exc}") from exc
        if pos != len(lines):
            trailing = [ln for ln in lines[pos:] if ln.strip()]
            if trailing:
                raise CatalogParseError("content after [end] section")
        cat.validate_integrity()
        return cat
