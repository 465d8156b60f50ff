"""Solution table serialization: JSON, XML, CSV, TSV, HTML."""
from __future__ import annotations

import html as html_mod
import json
import xml.etree.ElementTree as ET

from .rdf import Iri, Literal, XSD_STRING, escape_string
from .rewriter import SolutionTable

MEDIA_TYPES = {
    "json": "application/sparql-results+json",
    "xml": "application/sparql-results+xml",
    "csv": "text/csv",
    "tsv": "text/tab-separated-values",
    "html": "text/html",
}

FORMATS = tuple(MEDIA_TYPES)


class UnknownFormatError(ValueError):
    def __init__(self, fmt: str):
        super().__init__(f"unknown result format {fmt!r}; expected one of {FORMATS}")
        self.format = fmt


def _json_term(term) -> dict:
    if isinstance(term, Iri):
        return {"type": "uri", "value": term.value}
    if isinstance(term, Literal):
        out = {"type": "literal", "value": term.lexical}
        if term.language is not None:
            out["xml:lang"] = term.language
        elif term.datatype != XSD_STRING:
            out["datatype"] = term.datatype
        return out
    raise TypeError(f"cannot serialize term {term!r}")


def to_json(table: SolutionTable) -> str:
    doc = {
        "head": {"vars": list(table.variables)},
        "results": {"bindings": [
            {name: _json_term(term) for name, term in solution.items()}
            for solution in table.solutions
        ]},
    }
    return json.dumps(doc, indent=2)


def to_xml(table: SolutionTable) -> str:
    root = ET.Element("sparql", xmlns="http://www.w3.org/2005/sparql-results#")
    head = ET.SubElement(root, "head")
    for name in table.variables:
        ET.SubElement(head, "variable", name=name)
    results = ET.SubElement(root, "results")
    for solution in table.solutions:
        result = ET.SubElement(results, "result")
        for name, term in solution.items():
            binding = ET.SubElement(result, "binding", name=name)
            if isinstance(term, Iri):
                ET.SubElement(binding, "uri").text = term.value
            else:
                attrs = {}
                if term.language is not None:
                    attrs["xml:lang"] = term.language
                elif term.datatype != XSD_STRING:
                    attrs["datatype"] = term.datatype
                ET.SubElement(binding, "literal", attrs).text = term.lexical
    return ET.tostring(root, encoding="unicode", xml_declaration=True)


def _csv_field(text: str) -> str:
    if any(c in text for c in ',"\n\r'):
        return '"' + text.replace('"', '""') + '"'
    return text


def to_csv(table: SolutionTable) -> str:
    lines = [",".join(_csv_field(v) for v in table.variables)]
    for solution in table.solutions:
        cells = []
        for name in table.variables:
            term = solution.get(name)
            if term is None:
                cells.append("")
            elif isinstance(term, Iri):
                cells.append(_csv_field(term.value))
            else:
                cells.append(_csv_field(term.lexical))
        lines.append(",".join(cells))
    return "\r\n".join(lines) + "\r\n"


def _tsv_term(term) -> str:
    if term is None:
        return ""
    if isinstance(term, Iri):
        return f"<{term.value}>"
    quoted = '"%s"' % escape_string(term.lexical)
    if term.language is not None:
        return f"{quoted}@{term.language}"
    if term.datatype == XSD_STRING:
        return quoted
    return f"{quoted}^^<{term.datatype}>"


def to_tsv(table: SolutionTable) -> str:
    lines = ["\t".join(f"?{v}" for v in table.variables)]
    for solution in table.solutions:
        lines.append("\t".join(_tsv_term(solution.get(v)) for v in table.variables))
    return "\n".join(lines) + "\n"


def to_html(table: SolutionTable) -> str:
    head_cells = "".join(f"<th>{html_mod.escape(v)}</th>" for v in table.variables)
    rows = []
    for solution in table.solutions:
        cells = "".join(
            f"<td>{html_mod.escape(_tsv_term(solution.get(v)))}</td>"
            for v in table.variables)
        rows.append(f"<tr>{cells}</tr>")
    body = "\n".join(rows)
    return (
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">"
        "<title>Query results</title></head>\n<body>\n"
        f"<table border=\"1\">\n<thead><tr>{head_cells}</tr></thead>\n"
        f"<tbody>\n{body}\n</tbody>\n</table>\n</body></html>\n"
    )


_SERIALIZERS = {
    "json": to_json,
    "xml": to_xml,
    "csv": to_csv,
    "tsv": to_tsv,
    "html": to_html,
}


def format_results(table: SolutionTable, fmt: str) -> tuple[bytes, str]:
    """Serialize a table; returns (payload bytes, media type)."""
    if fmt not in _SERIALIZERS:
        raise UnknownFormatError(fmt)
    text = _SERIALIZERS[fmt](table)
    return text.encode("utf-8"), MEDIA_TYPES[fmt]
