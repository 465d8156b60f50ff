"""Mapping documents: triple templates over SQL sources, and the virtual graph.

A mapping pairs a target triple template (subject IRI template, constant
predicate, IRI/literal object template or constant) with a source query.
Expanding the template over the source's rows yields the virtual RDF graph;
inverting it against constant terms yields equality constraints for pushdown.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime
from urllib.parse import quote, unquote

from .rdf import (
    RDF_TYPE,
    Iri,
    Literal,
    Term,
    Triple,
    format_datetime,
    unescape_string,
    validate_literal,
)
from .relstore import Database, SqlQuery, execute, parse_sql

PLACEHOLDER_RE = re.compile(r"\{([A-Za-z_][A-Za-z0-9_.]*)\}")


class MappingError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class IriTemplate:
    """Absolute IRI text with {placeholder} slots; placeholder-free means constant."""

    text: str

    @property
    def placeholders(self) -> tuple[str, ...]:
        return tuple(PLACEHOLDER_RE.findall(self.text))

    def expand(self, row: dict) -> Iri | None:
        def substitute(m: re.Match) -> str:
            return quote(render_value(row[m.group(1)]), safe="")

        for name in self.placeholders:
            if row.get(name) is None:
                return None
        return Iri(PLACEHOLDER_RE.sub(substitute, self.text))

    def invert(self, iri: str) -> dict[str, str] | None:
        """Match a constant IRI against the template; returns decoded slot values."""
        names = self.placeholders
        if not names:
            return {} if iri == self.text else None
        parts = PLACEHOLDER_RE.split(self.text)
        literals = parts[0::2]
        pattern = "(.*?)".join(re.escape(p) for p in literals)
        m = re.fullmatch(pattern, iri)
        if not m:
            return None
        values = {}
        for name, captured in zip(names, m.groups()):
            decoded = unquote(captured)
            if name in values and values[name] != decoded:
                return None
            values[name] = decoded
        expanded = self.expand({name: values[name] for name in names})
        if expanded is None or expanded.value != iri:
            return None
        return values


@dataclass(frozen=True)
class LiteralTemplate:
    text: str  # lexical template with {placeholder} slots
    datatype: str

    @property
    def placeholders(self) -> tuple[str, ...]:
        return tuple(PLACEHOLDER_RE.findall(self.text))

    def expand(self, row: dict) -> Literal | None:
        for name in self.placeholders:
            if row.get(name) is None:
                return None
        lexical = PLACEHOLDER_RE.sub(lambda m: render_value(row[m.group(1)]), self.text)
        return Literal(lexical, datatype=self.datatype)

    def invert(self, lit: Literal) -> dict[str, str] | None:
        names = self.placeholders
        if not names:
            return {} if lit.lexical == self.text else None
        parts = PLACEHOLDER_RE.split(self.text)
        literals = parts[0::2]
        pattern = "(.*?)".join(re.escape(p) for p in literals)
        m = re.fullmatch(pattern, lit.lexical)
        if not m:
            return None
        values = {}
        for name, captured in zip(names, m.groups()):
            if name in values and values[name] != captured:
                return None
            values[name] = captured
        return values


ObjectSpec = Iri | IriTemplate | LiteralTemplate


@dataclass(frozen=True)
class TripleTemplate:
    subject: IriTemplate
    predicate: Iri
    object: ObjectSpec


@dataclass(frozen=True)
class MappingDefinition:
    id: str
    target: TripleTemplate
    source: SqlQuery
    source_text: str

    @property
    def type_class(self) -> str | None:
        """For rdf:type mappings with a constant class object, that class IRI."""
        if self.target.predicate.value == RDF_TYPE and isinstance(self.target.object, Iri):
            return self.target.object.value
        return None


@dataclass
class MappingRegistry:
    prefixes: dict[str, str] = field(default_factory=dict)
    mappings: list[MappingDefinition] = field(default_factory=list)
    by_predicate: dict[str, list[MappingDefinition]] = field(default_factory=dict)
    by_class: dict[str, list[MappingDefinition]] = field(default_factory=dict)

    def add(self, mapping: MappingDefinition) -> None:
        if any(m.id == mapping.id for m in self.mappings):
            raise MappingError(f"duplicate mapping id {mapping.id!r}")
        self.mappings.append(mapping)
        self.by_predicate.setdefault(mapping.target.predicate.value, []).append(mapping)
        cls = mapping.type_class
        if cls is not None:
            self.by_class.setdefault(cls, []).append(mapping)


def render_value(value) -> str:
    """Canonical lexical rendering of a stored value."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, datetime):
        return format_datetime(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def value_for_kind(text: str, kind: str):
    """Convert a lexical constraint value to a column kind; None if impossible."""
    if kind in ("text", "wkt-text"):
        return text
    if kind in ("int64", "epoch-seconds"):
        return int(text) if re.fullmatch(r"[+-]?\d+", text) else None
    if kind == "float64":
        try:
            return float(text)
        except ValueError:
            return None
    if kind == "bool":
        if text in ("true", "1"):
            return True
        if text in ("false", "0"):
            return False
        return None
    return None


def expand_template(template: TripleTemplate, row: dict) -> Triple | None:
    """Instantiate a template over one source row; None means suppressed (null slot)."""
    subject = template.subject.expand(row)
    if subject is None:
        return None
    obj: Term | None
    if isinstance(template.object, Iri):
        obj = template.object
    else:
        obj = template.object.expand(row)
    if obj is None:
        return None
    if isinstance(obj, Literal):
        validate_literal(obj)  # declared datatype must fit the rendered value
    return Triple(subject, template.predicate, obj)


def materialize(mapping: MappingDefinition, db: Database) -> set[Triple]:
    try:
        rows = execute(db, mapping.source)
    except Exception as exc:
        raise MappingError(f"mapping {mapping.id}: {exc}") from exc
    triples: set[Triple] = set()
    for row in rows:
        triple = expand_template(mapping.target, row)
        if triple is not None:
            triples.add(triple)
    return triples


def materialize_all(registry: MappingRegistry, db: Database) -> set[Triple]:
    """Full virtual graph: union of all mapping expansions, set semantics."""
    triples: set[Triple] = set()
    for mapping in registry.mappings:
        triples |= materialize(mapping, db)
    return triples


# ---------------------------------------------------------------------------
# Document format:
#   prefix <name>: <iri>
#   mappingId <id>
#   target <subject-template> <predicate> <object-template> .
#   source <sql>


def _resolve(token: str, prefixes: dict[str, str], line: int) -> str:
    if token.startswith("<") and token.endswith(">"):
        return token[1:-1]
    m = re.match(r"([A-Za-z][A-Za-z0-9_-]*):(.*)", token)
    if not m:
        raise MappingError(f"expected an IRI or prefixed name, got {token!r}", line)
    prefix, local = m.groups()
    if prefix not in prefixes:
        raise MappingError(f"unknown prefix {prefix!r}", line)
    return prefixes[prefix] + local


def _target_tokens(text: str, line: int) -> list[str]:
    tokens: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch in " \t":
            i += 1
            continue
        if ch == '"':
            m = re.match(r'"((?:[^"\\]|\\.)*)"(\^\^\S+|@[A-Za-z-]+)?', text[i:])
            if not m:
                raise MappingError("unterminated literal in target", line)
            tokens.append(m.group(0))
            i += m.end()
        else:
            m = re.match(r"\S+", text[i:])
            tokens.append(m.group(0))
            i += m.end()
    return tokens


def _parse_object(token: str, prefixes: dict[str, str], line: int) -> ObjectSpec:
    if token.startswith('"'):
        m = re.fullmatch(r'"((?:[^"\\]|\\.)*)"\^\^(\S+)', token)
        if not m:
            raise MappingError(
                f"literal template must carry exactly one datatype: {token!r}", line)
        lexical, dtype = m.groups()
        return LiteralTemplate(unescape_string(lexical), _resolve(dtype, prefixes, line))
    iri_text = _resolve(token, prefixes, line)
    if PLACEHOLDER_RE.search(iri_text):
        return IriTemplate(iri_text)
    return Iri(iri_text)


def parse_mapping_document(text: str) -> MappingRegistry:
    registry = MappingRegistry()
    current_id: str | None = None
    current_target: TripleTemplate | None = None
    current_line = 0

    def finish(line: int):
        nonlocal current_id, current_target
        if current_id is not None:
            raise MappingError(f"mapping {current_id!r} is missing its source line", line)

    for number, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("prefix "):
            m = re.fullmatch(r"prefix\s+([A-Za-z][A-Za-z0-9_-]*):\s+(\S+)", line)
            if not m:
                raise MappingError("prefix line must be 'prefix <name>: <iri>'", number)
            registry.prefixes[m.group(1)] = m.group(2)
        elif line.startswith("mappingId "):
            finish(number)
            current_id = line[len("mappingId "):].strip()
            current_target = None
            current_line = number
        elif line.startswith("target "):
            if current_id is None:
                raise MappingError("target line outside a mapping block", number)
            body = line[len("target "):].strip()
            if not body.endswith("."):
                raise MappingError("target must end with ' .'", number)
            tokens = _target_tokens(body[:-1].strip(), number)
            if len(tokens) != 3:
                raise MappingError(
                    f"target must have subject, predicate, object; got {len(tokens)} terms",
                    number)
            s_text = _resolve(tokens[0], registry.prefixes, number)
            if not re.match(r"[A-Za-z][A-Za-z0-9+.-]*:", s_text):
                raise MappingError(
                    f"subject template is not an absolute IRI: {s_text!r}", number)
            subject = IriTemplate(s_text)
            p_text = (RDF_TYPE if tokens[1] == "a"
                      else _resolve(tokens[1], registry.prefixes, number))
            obj = _parse_object(tokens[2], registry.prefixes, number)
            current_target = TripleTemplate(subject, Iri(p_text), obj)
        elif line.startswith("source "):
            if current_id is None or current_target is None:
                raise MappingError("source line without mappingId/target", number)
            sql_text = line[len("source "):].strip()
            source = parse_sql(sql_text)
            outputs = set(source.output_names())
            used = set(current_target.subject.placeholders)
            if isinstance(current_target.object, (IriTemplate, LiteralTemplate)):
                used |= set(current_target.object.placeholders)
            missing = sorted(used - outputs)
            if missing:
                raise MappingError(
                    f"mapping {current_id}: placeholder(s) {', '.join(missing)} "
                    f"not in source projections", current_line)
            registry.add(MappingDefinition(current_id, current_target, source, sql_text))
            current_id = None
            current_target = None
        else:
            raise MappingError(f"unrecognized line: {line!r}", number)
    finish(len(text.split("\n")))
    return registry
