"""RDF terms, triples, and the N-Triples serialization used for all graph egress.

Triples are plain value objects: IRIs are absolute strings, literals carry a
lexical form plus either a datatype IRI or a language tag.  The N-Triples
reader/writer is line oriented ("<s> <p> <o> ." per line) and round-trips
exactly on triple sets.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime, timezone

XSD = "http://www.w3.org/2001/XMLSchema#"
XSD_STRING = XSD + "string"
XSD_INTEGER = XSD + "integer"
XSD_DECIMAL = XSD + "decimal"
XSD_DOUBLE = XSD + "double"
XSD_BOOLEAN = XSD + "boolean"
XSD_DATETIME = XSD + "dateTime"
XSD_DATE = XSD + "date"

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
RDFS_SUBCLASSOF = "http://www.w3.org/2000/01/rdf-schema#subClassOf"
RDFS_SUBPROPERTYOF = "http://www.w3.org/2000/01/rdf-schema#subPropertyOf"
RDFS_RANGE = "http://www.w3.org/2000/01/rdf-schema#range"
OWL_CLASS = "http://www.w3.org/2002/07/owl#Class"
OWL_DATATYPE_PROPERTY = "http://www.w3.org/2002/07/owl#DatatypeProperty"
OWL_OBJECT_PROPERTY = "http://www.w3.org/2002/07/owl#ObjectProperty"

_NUMERIC_DATATYPES = frozenset({XSD_INTEGER, XSD_DECIMAL, XSD_DOUBLE, XSD + "float",
                                XSD + "int", XSD + "long", XSD + "short"})


class NTriplesError(ValueError):
    """Malformed N-Triples input; carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Iri:
    value: str

    def __str__(self) -> str:
        return f"<{self.value}>"


@dataclass(frozen=True)
class Literal:
    lexical: str
    datatype: str | None = None
    language: str | None = None

    def __post_init__(self):
        if self.language is not None and self.datatype is not None:
            raise ValueError("literal cannot carry both a datatype and a language tag")
        if self.language is None and self.datatype is None:
            # Plain literals are xsd:string in the data model.
            object.__setattr__(self, "datatype", XSD_STRING)

    def __str__(self) -> str:
        quoted = '"%s"' % escape_string(self.lexical)
        if self.language is not None:
            return f"{quoted}@{self.language}"
        return f"{quoted}^^<{self.datatype}>"


Term = Iri | Literal


@dataclass(frozen=True)
class Triple:
    subject: Iri
    predicate: Iri
    object: Term

    def __str__(self) -> str:
        return f"{self.subject} {self.predicate} {self.object} ."


def validate_literal(lit: Literal) -> None:
    """Reject lexical forms that are invalid for the checked datatypes."""
    dt = lit.datatype
    if dt == XSD_INTEGER:
        if not re.fullmatch(r"[+-]?\d+", lit.lexical):
            raise ValueError(f"invalid xsd:integer lexical form: {lit.lexical!r}")
    elif dt == XSD_DOUBLE:
        if parse_double(lit.lexical) is None:
            raise ValueError(f"invalid xsd:double lexical form: {lit.lexical!r}")
    elif dt == XSD_BOOLEAN:
        if lit.lexical not in ("true", "false", "0", "1"):
            raise ValueError(f"invalid xsd:boolean lexical form: {lit.lexical!r}")
    elif dt == XSD_DATETIME:
        if parse_datetime(lit.lexical) is None:
            raise ValueError(f"invalid xsd:dateTime lexical form: {lit.lexical!r}")


def parse_double(lexical: str) -> float | None:
    try:
        value = float(lexical)
    except ValueError:
        return None
    return value


def parse_datetime(lexical: str) -> datetime | None:
    """Parse an xsd:dateTime (or bare date) lexical form to an aware datetime.

    Timezone-less forms are interpreted as UTC so the comparison order is total.
    """
    text = lexical.strip()
    if re.fullmatch(r"\d{4}-\d{2}-\d{2}", text):
        text += "T00:00:00"
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    try:
        parsed = datetime.fromisoformat(text)
    except ValueError:
        return None
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed


def format_datetime(value: datetime) -> str:
    """Canonical xsd:dateTime lexical form, UTC with trailing Z."""
    value = value.astimezone(timezone.utc)
    if value.microsecond:
        return value.strftime("%Y-%m-%dT%H:%M:%S.%f").rstrip("0") + "Z"
    return value.strftime("%Y-%m-%dT%H:%M:%SZ")


def canonical_key(term: Term):
    """Value-space key: numerically equal literals collapse to one key.

    Used for DISTINCT and for solution-set comparisons, so that e.g.
    "21.50"^^xsd:double and "21.5"^^xsd:double count as one value.
    """
    if isinstance(term, Iri):
        return ("iri", term.value)
    if term.language is not None:
        return ("lang", term.lexical, term.language.lower())
    dt = term.datatype
    if dt in _NUMERIC_DATATYPES:
        num = parse_double(term.lexical)
        if num is not None:
            return ("num", num)
    if dt == XSD_BOOLEAN:
        return ("bool", term.lexical in ("true", "1"))
    if dt == XSD_DATETIME:
        parsed = parse_datetime(term.lexical)
        if parsed is not None:
            return ("dt", parsed)
    return ("lit", term.lexical, dt)


_ESCAPES = {'"': '\\"', "\\": "\\\\", "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def escape_string(text: str) -> str:
    out = []
    for ch in text:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ord(ch) < 0x20:
            out.append("\\u%04X" % ord(ch))
        else:
            out.append(ch)
    return "".join(out)


def unescape_string(text: str, line: int = 0) -> str:
    out: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        if i + 1 >= len(text):
            raise NTriplesError("dangling backslash in string", line)
        esc = text[i + 1]
        if esc == "t":
            out.append("\t")
        elif esc == "n":
            out.append("\n")
        elif esc == "r":
            out.append("\r")
        elif esc == '"':
            out.append('"')
        elif esc == "\\":
            out.append("\\")
        elif esc == "u" or esc == "U":
            width = 4 if esc == "u" else 8
            hexdigits = text[i + 2 : i + 2 + width]
            if len(hexdigits) != width or not re.fullmatch(r"[0-9A-Fa-f]+", hexdigits):
                raise NTriplesError(f"bad \\{esc} escape", line)
            out.append(chr(int(hexdigits, 16)))
            i += 2 + width
            continue
        else:
            raise NTriplesError(f"unknown escape \\{esc}", line)
        i += 2
    return "".join(out)


_IRIREF_RE = re.compile(r"<([^<>\"{}|^`\\\x00-\x20]*)>")
_STRING_RE = re.compile(r'"((?:[^"\\\n\r]|\\.)*)"')
_LANGTAG_RE = re.compile(r"@([a-zA-Z]+(?:-[a-zA-Z0-9]+)*)")


def _parse_term(text: str, pos: int, line: int) -> tuple[Term, int]:
    if pos < len(text) and text[pos] == "<":
        m = _IRIREF_RE.match(text, pos)
        if not m:
            raise NTriplesError("malformed IRI", line)
        return Iri(m.group(1)), m.end()
    if pos < len(text) and text[pos] == '"':
        m = _STRING_RE.match(text, pos)
        if not m:
            raise NTriplesError("malformed string literal", line)
        lexical = unescape_string(m.group(1), line)
        pos = m.end()
        if text.startswith("^^", pos):
            dt = _IRIREF_RE.match(text, pos + 2)
            if not dt:
                raise NTriplesError("malformed datatype IRI", line)
            return Literal(lexical, datatype=dt.group(1)), dt.end()
        lang = _LANGTAG_RE.match(text, pos)
        if lang:
            return Literal(lexical, language=lang.group(1)), lang.end()
        return Literal(lexical), pos
    raise NTriplesError("expected IRI or literal", line)


def _skip_ws(text: str, pos: int) -> int:
    while pos < len(text) and text[pos] in " \t":
        pos += 1
    return pos


def parse_ntriples_line(text: str, line: int = 0) -> Triple | None:
    """Parse one N-Triples line; blank and comment lines yield None."""
    stripped = text.strip()
    if not stripped or stripped.startswith("#"):
        return None
    pos = _skip_ws(text, 0)
    subject, pos = _parse_term(text, pos, line)
    if not isinstance(subject, Iri):
        raise NTriplesError("subject must be an IRI", line)
    pos = _skip_ws(text, pos)
    predicate, pos = _parse_term(text, pos, line)
    if not isinstance(predicate, Iri):
        raise NTriplesError("predicate must be an IRI", line)
    pos = _skip_ws(text, pos)
    obj, pos = _parse_term(text, pos, line)
    pos = _skip_ws(text, pos)
    if pos >= len(text) or text[pos] != ".":
        raise NTriplesError("missing terminating '.'", line)
    trailer = text[pos + 1 :].strip()
    if trailer and not trailer.startswith("#"):
        raise NTriplesError(f"unexpected trailing content: {trailer!r}", line)
    return Triple(subject, predicate, obj)


def parse_ntriples(document: str) -> set[Triple]:
    triples: set[Triple] = set()
    # Split on LF only: literals may contain exotic Unicode line separators.
    for number, raw in enumerate(document.split("\n"), start=1):
        triple = parse_ntriples_line(raw.rstrip("\r"), number)
        if triple is not None:
            triples.add(triple)
    return triples


def serialize_ntriples(triples) -> str:
    """One triple per line, sorted for deterministic output; empty set -> ''."""
    lines = sorted(str(t) for t in triples)
    if not lines:
        return ""
    return "\n".join(lines) + "\n"
