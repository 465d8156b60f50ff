"""Embedded relational backend for mapping sources.

Holds named tables per database, ingests tab-separated fixture documents, and
executes the tiny SQL subset the mapping sources use: qualified column
projections plus TO_TIMESTAMP / unnest / ST_AsText, with engine-internal
equality constraints for bind-join pushdown.  No joins, no aggregation.
"""
from __future__ import annotations

import re
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone

KINDS = ("text", "int64", "float64", "bool", "epoch-seconds", "text-array", "wkt-text")

NULL_TOKEN = "\\N"


class RelStoreError(ValueError):
    pass


class FixtureError(RelStoreError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SqlError(RelStoreError):
    pass


@dataclass(frozen=True)
class TableSchema:
    name: str
    columns: tuple[tuple[str, str], ...]  # (column name, kind)

    def __post_init__(self):
        names = [c for c, _ in self.columns]
        if len(names) != len(set(names)):
            raise FixtureError(f"duplicate column name in table {self.name}")
        for _, kind in self.columns:
            if kind not in KINDS:
                raise FixtureError(f"unknown column kind {kind!r} in table {self.name}")

    def kind_of(self, column: str) -> str:
        for name, kind in self.columns:
            if name == column:
                return kind
        raise SqlError(f"unknown column {self.name}.{column}")

    def has_column(self, column: str) -> bool:
        return any(name == column for name, _ in self.columns)


@dataclass
class Table:
    schema: TableSchema
    rows: list[dict] = field(default_factory=list)


class Database:
    """Named tables with snapshot isolation for ingestion (atomic install)."""

    def __init__(self, name: str = "db"):
        self.name = name
        self._tables: dict[str, Table] = {}
        self._lock = threading.Lock()

    def tables(self) -> dict[str, Table]:
        return dict(self._tables)

    def table(self, name: str) -> Table:
        try:
            return self._tables[name]
        except KeyError:
            raise SqlError(f"unknown table {name!r}") from None

    def install(self, tables: dict[str, Table]) -> None:
        with self._lock:
            for name in tables:
                if name in self._tables:
                    raise FixtureError(f"duplicate table {name!r}")
            self._tables.update(tables)


def _parse_value(text: str, kind: str, table: str, column: str, line: int):
    if text == NULL_TOKEN:
        return None
    where = f"table {table}, column {column}"
    if kind == "text" or kind == "wkt-text":
        return text
    if kind == "int64" or kind == "epoch-seconds":
        if not re.fullmatch(r"[+-]?\d+", text):
            raise FixtureError(f"expected integer for {where}, got {text!r}", line)
        return int(text)
    if kind == "float64":
        try:
            return float(text)
        except ValueError:
            raise FixtureError(f"expected float for {where}, got {text!r}", line) from None
    if kind == "bool":
        if text == "true":
            return True
        if text == "false":
            return False
        raise FixtureError(f"expected true/false for {where}, got {text!r}", line)
    if kind == "text-array":
        return [] if text == "" else text.split("|")
    raise FixtureError(f"unknown kind {kind!r}", line)


def parse_fixture(document: str) -> dict[str, Table]:
    """Parse a fixture document into fresh tables (see the fixture format docs)."""
    tables: dict[str, Table] = {}
    current: Table | None = None
    columns: list[tuple[str, str]] = []
    pending_name: str | None = None

    def finish_pending(line: int):
        nonlocal current, pending_name
        if pending_name is None:
            return
        if not columns:
            raise FixtureError(f"table {pending_name!r} declares no columns", line)
        schema = TableSchema(pending_name, tuple(columns))
        current = Table(schema)
        tables[pending_name] = current
        pending_name = None

    for number, raw in enumerate(document.split("\n"), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        if line.startswith("table "):
            finish_pending(number)
            name = line[len("table "):].strip()
            if not name:
                raise FixtureError("missing table name", number)
            if name in tables or name == pending_name:
                raise FixtureError(f"duplicate table {name!r}", number)
            pending_name = name
            current = None
            columns = []
        elif line.startswith("col "):
            if pending_name is None:
                raise FixtureError("col line outside a table block", number)
            parts = line.split()
            if len(parts) != 3:
                raise FixtureError("col line must be 'col <name> <kind>'", number)
            _, cname, kind = parts
            if kind not in KINDS:
                raise FixtureError(f"unknown column kind {kind!r}", number)
            columns.append((cname, kind))
        elif line.startswith("row "):
            finish_pending(number)
            if current is None:
                raise FixtureError("row line outside a table block", number)
            cells = line[len("row "):].split("\t")
            schema = current.schema
            if len(cells) != len(schema.columns):
                raise FixtureError(
                    f"row has {len(cells)} values, table {schema.name} has "
                    f"{len(schema.columns)} columns", number)
            row = {
                cname: _parse_value(cell, kind, schema.name, cname, number)
                for cell, (cname, kind) in zip(cells, schema.columns)
            }
            current.rows.append(row)
        else:
            raise FixtureError(f"unrecognized line: {line!r}", number)
    finish_pending(len(document.split("\n")))
    return tables


def load_fixture(db: Database, document: str) -> dict[str, int]:
    """Ingest a fixture document; returns {table name: row count} in order."""
    tables = parse_fixture(document)
    db.install(tables)
    return {name: len(table.rows) for name, table in tables.items()}


# ---------------------------------------------------------------------------
# SQL subset


@dataclass(frozen=True)
class Projection:
    func: str | None  # None, "TO_TIMESTAMP", "unnest", "ST_AsText"
    column: str
    output: str


@dataclass(frozen=True)
class SqlQuery:
    table: str
    projections: tuple[Projection, ...]
    constraints: tuple[tuple[str, object], ...] = ()  # (column, value) equality

    def with_constraints(self, extra) -> "SqlQuery":
        return SqlQuery(self.table, self.projections, self.constraints + tuple(extra))

    def output_names(self) -> tuple[str, ...]:
        return tuple(p.output for p in self.projections)

    def to_sql(self) -> str:
        parts = []
        for p in self.projections:
            ref = f"{self.table}.{p.column}"
            if p.func is None:
                parts.append(ref)
            else:
                parts.append(f"{p.func}({ref}) AS {p.output}")
        text = f"SELECT {', '.join(parts)} FROM {self.table}"
        if self.constraints:
            preds = " AND ".join(f"{self.table}.{c} = {v!r}" for c, v in self.constraints)
            text += f" WHERE {preds}"
        return text


_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_PROJ_RE = re.compile(
    rf"(?:(TO_TIMESTAMP|unnest|ST_AsText)\s*\(\s*({_IDENT})\.({_IDENT})\s*\)"
    rf"|({_IDENT})\.({_IDENT}))"
    rf"(?:\s+AS\s+({_IDENT}))?\s*$",
    re.IGNORECASE,
)

_FUNC_CANON = {"to_timestamp": "TO_TIMESTAMP", "unnest": "unnest", "st_astext": "ST_AsText"}
_FUNC_KIND = {"TO_TIMESTAMP": "epoch-seconds", "unnest": "text-array", "ST_AsText": "wkt-text"}


def parse_sql(text: str) -> SqlQuery:
    """Parse 'SELECT <projections> FROM <table>' in the supported subset."""
    cleaned = " ".join(text.split())
    m = re.fullmatch(rf"SELECT\s+(.*?)\s+FROM\s+({_IDENT})", cleaned, re.IGNORECASE)
    if not m:
        raise SqlError(f"unsupported SQL statement: {text!r}")
    body, table = m.group(1), m.group(2)
    projections: list[Projection] = []
    for item in body.split(","):
        item = item.strip()
        pm = _PROJ_RE.match(item)
        if not pm:
            raise SqlError(f"unsupported projection: {item!r}")
        func_raw, ftable, fcol, ptable, pcol, alias = pm.groups()
        if func_raw:
            func = _FUNC_CANON[func_raw.lower()]
            qtable, column = ftable, fcol
            if alias is None:
                raise SqlError(f"function projection needs an alias: {item!r}")
            output = alias
        else:
            func = None
            qtable, column = ptable, pcol
            output = alias if alias else f"{qtable}.{pcol}"
        if qtable != table:
            raise SqlError(f"projection table {qtable!r} does not match FROM {table!r}")
        projections.append(Projection(func, column, output))
    if not projections:
        raise SqlError("empty projection list")
    names = [p.output for p in projections]
    if len(names) != len(set(names)):
        raise SqlError(f"duplicate output name in projection list: {names}")
    return SqlQuery(table, tuple(projections))


def validate_sql(q: SqlQuery, schema: TableSchema) -> None:
    for p in q.projections:
        kind = schema.kind_of(p.column)
        if p.func is not None and kind != _FUNC_KIND[p.func]:
            raise SqlError(
                f"{p.func} applies to {_FUNC_KIND[p.func]} columns, "
                f"but {schema.name}.{p.column} is {kind}")
    for column, _ in q.constraints:
        schema.kind_of(column)


def epoch_to_datetime(seconds: int) -> datetime:
    return datetime.fromtimestamp(seconds, tz=timezone.utc)


def execute(db: Database, q: SqlQuery) -> list[dict]:
    """Run a subset query: constraint filter, then projection; unnest multiplies.

    Output rows are dicts keyed by projection output names, in table insertion
    order.  A null (or empty) array under unnest contributes zero rows.
    """
    table = db.table(q.table)
    validate_sql(q, table.schema)
    results: list[dict] = []
    for row in table.rows:
        if any(row.get(column) != value for column, value in q.constraints):
            continue
        out: dict = {}
        unnest_outputs: list[tuple[str, list]] = []
        for p in q.projections:
            value = row.get(p.column)
            if p.func is None or p.func == "ST_AsText":
                out[p.output] = value
            elif p.func == "TO_TIMESTAMP":
                out[p.output] = None if value is None else epoch_to_datetime(value)
            elif p.func == "unnest":
                unnest_outputs.append((p.output, value if value else []))
        if not unnest_outputs:
            results.append(out)
            continue
        if len(unnest_outputs) > 1:
            raise SqlError("at most one unnest projection per query is supported")
        output, elements = unnest_outputs[0]
        for element in elements:
            expanded = dict(out)
            expanded[output] = element
            results.append(expanded)
    return results
