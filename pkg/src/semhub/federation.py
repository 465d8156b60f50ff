"""Federated query execution: SERVICE dispatch, bind joins, remote transports.

The federated layer owns no data.  Groups run left-to-right: each SERVICE
block (and each run of bare patterns, which goes to the default internal
endpoint) consumes the bindings accumulated so far.  With bind-join enabled,
bound variables are substituted as constants into the block before dispatch,
which is what lets the cross-service bounding-box filters prune remotely.
"""
from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

import httpx

from .graphstore import GraphStore
from .ontology import OntologyModel
from .rdf import Iri, Literal, Term, XSD_BOOLEAN
from .rewriter import (
    EvalContext,
    SolutionTable,
    apply_filter,
    distinct,
    evaluate_query,
    project,
)
from .sparql import (
    BinaryOp,
    Filter,
    FuncCall,
    SelectQuery,
    Service,
    TermTuple,
    TriplePattern,
    Var,
    serialize_query,
)

DEFAULT_ENDPOINT = "default"


class FederationError(Exception):
    pass


class UnknownEndpointError(FederationError):
    def __init__(self, endpoint: str):
        super().__init__(f"unknown SPARQL endpoint <{endpoint}>")
        self.endpoint = endpoint


class TransportError(FederationError):
    def __init__(self, endpoint: str, detail: str):
        super().__init__(f"endpoint <{endpoint}>: {detail}")
        self.endpoint = endpoint


class RemoteTimeoutError(TransportError):
    def __init__(self, endpoint: str, timeout: float):
        super().__init__(endpoint, f"timed out after {timeout}s")


class ResultParseError(FederationError):
    pass


@dataclass
class FederationPolicy:
    bind_join: bool = True
    timeout: float = 15.0
    max_service_solutions: int = 100_000

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")


@dataclass
class InProcessEndpoint:
    """A SPARQL-to-SQL context exposed as an endpoint."""

    ctx: EvalContext

    def evaluate(self, ast: SelectQuery, policy: FederationPolicy) -> SolutionTable:
        return evaluate_query(ast, self.ctx)


@dataclass
class GraphEndpoint:
    """A fixture-backed triple store exposed as an endpoint (mock LOD source)."""

    store: GraphStore
    ontology: OntologyModel | None = None

    def evaluate(self, ast: SelectQuery, policy: FederationPolicy) -> SolutionTable:
        return self.store.evaluate(ast, self.ontology)


@dataclass
class RemoteEndpoint:
    """SPARQL protocol over HTTP; JSON results preferred, XML fallback."""

    iri: str
    url: str
    use_post: bool = False

    def evaluate(self, ast: SelectQuery, policy: FederationPolicy) -> SolutionTable:
        query_text = serialize_query(ast)
        headers = {
            "Accept": "application/sparql-results+json, "
                      "application/sparql-results+xml;q=0.9",
        }
        try:
            if self.use_post or len(query_text) > 4000:
                response = httpx.post(
                    self.url, content=query_text.encode("utf-8"),
                    headers={**headers, "Content-Type": "application/sparql-query"},
                    timeout=policy.timeout)
            else:
                response = httpx.get(self.url, params={"query": query_text},
                                     headers=headers, timeout=policy.timeout)
        except httpx.TimeoutException:
            raise RemoteTimeoutError(self.iri, policy.timeout) from None
        except httpx.HTTPError as exc:
            raise TransportError(self.iri, str(exc)) from exc
        if response.status_code != 200:
            raise TransportError(
                self.iri, f"HTTP {response.status_code}: {response.text[:200]}")
        content_type = response.headers.get("content-type", "").split(";")[0].strip()
        if "json" in content_type:
            return parse_results("sparql-json", response.text)
        if "xml" in content_type:
            return parse_results("sparql-xml", response.text)
        raise ResultParseError(f"endpoint <{self.iri}> returned "
                               f"unsupported content type {content_type!r}")


@dataclass
class EndpointRegistry:
    entries: dict[str, object] = field(default_factory=dict)  # IRI -> endpoint

    def register(self, iri: str, endpoint) -> None:
        self.entries[iri] = endpoint

    def resolve(self, iri: str):
        try:
            return self.entries[iri]
        except KeyError:
            raise UnknownEndpointError(iri) from None


# ---------------------------------------------------------------------------
# Substitution of accumulated bindings into a block (bind join)


def _substitute_term(term, binding: dict):
    if isinstance(term, Var) and term.name in binding:
        return binding[term.name]
    if isinstance(term, TermTuple):
        return TermTuple(tuple(_substitute_term(t, binding) for t in term.items))
    return term


def _substitute_expr(expr, binding: dict):
    if isinstance(expr, Var) and expr.name in binding:
        return binding[expr.name]
    if isinstance(expr, BinaryOp):
        return BinaryOp(expr.op,
                        _substitute_expr(expr.left, binding),
                        _substitute_expr(expr.right, binding))
    if isinstance(expr, FuncCall):
        if expr.name == "BOUND" and isinstance(expr.args[0], Var) \
                and expr.args[0].name in binding:
            return Literal("true", datatype=XSD_BOOLEAN)
        return FuncCall(expr.name,
                        tuple(_substitute_expr(a, binding) for a in expr.args))
    return expr


def _substitute_body(body, binding: dict):
    out = []
    for element in body:
        if isinstance(element, TriplePattern):
            out.append(TriplePattern(
                _substitute_term(element.subject, binding),
                _substitute_term(element.predicate, binding),
                _substitute_term(element.object, binding)))
        elif isinstance(element, Filter):
            out.append(Filter(_substitute_expr(element.expr, binding)))
        else:
            raise FederationError("nested SERVICE blocks are not executable")
    return tuple(out)


def _body_variables(body) -> list[str]:
    names: list[str] = []
    for element in body:
        if isinstance(element, TriplePattern):
            for name in sorted(element.variables()):
                if name not in names:
                    names.append(name)
        elif isinstance(element, Filter):
            for name in sorted(element.variables()):
                if name not in names:
                    names.append(name)
    return names


def _pattern_variables(body) -> set[str]:
    out: set[str] = set()
    for element in body:
        if isinstance(element, TriplePattern):
            out |= element.variables()
    return out


def _compatible(a: dict, b: dict) -> bool:
    for name, term in a.items():
        if name in b and b[name] != term:
            return False
    return True


def _select_ast(projection: list[str], body) -> SelectQuery:
    return SelectQuery(prefixes=(), distinct=False,
                       projection=tuple(Var(n) for n in projection),
                       body=tuple(body))


def execute_service(block: Service, incoming: SolutionTable,
                    registry: EndpointRegistry,
                    policy: FederationPolicy | None = None) -> SolutionTable:
    """Join the accumulated solutions with one SERVICE block's answers."""
    policy = policy or FederationPolicy()
    endpoint = registry.resolve(block.endpoint.value)
    block_vars = _body_variables(block.body)
    out_vars = list(incoming.variables) + [v for v in block_vars
                                           if v not in incoming.variables]
    if not incoming.solutions:
        return SolutionTable(out_vars, [])  # bind-join short-circuit

    if policy.bind_join:
        merged: list[dict] = []
        cache: dict[tuple, list[dict]] = {}
        for solution in incoming.solutions:
            bound = {name: solution[name] for name in block_vars if name in solution}
            key = tuple(sorted((n, t) for n, t in bound.items()))
            if key not in cache:
                body = _substitute_body(block.body, bound)
                remaining = [v for v in block_vars if v not in bound]
                ast = _select_ast(remaining or ["__probe"], body)
                result = endpoint.evaluate(ast, policy)
                cache[key] = result.solutions[:policy.max_service_solutions]
            for row in cache[key]:
                piece = {n: t for n, t in row.items() if n != "__probe"}
                merged.append(dict(solution, **piece))
        return SolutionTable(out_vars, merged)

    # hash-join mode: evaluate once; defer filters that need outside bindings
    pattern_vars = _pattern_variables(block.body)
    inner: list = []
    deferred: list[Filter] = []
    for element in block.body:
        if isinstance(element, Filter) and not element.variables() <= pattern_vars:
            deferred.append(element)
        else:
            inner.append(element)
    ast = _select_ast([v for v in block_vars if v in pattern_vars] or block_vars, inner)
    result = endpoint.evaluate(ast, policy)
    rows = result.solutions[:policy.max_service_solutions]
    merged = []
    for solution in incoming.solutions:
        for row in rows:
            if _compatible(solution, row):
                merged.append(dict(solution, **row))
    table = SolutionTable(out_vars, merged)
    for flt in deferred:
        table = apply_filter(table, flt)
    return table


def evaluate_federated(ast: SelectQuery, registry: EndpointRegistry,
                       policy: FederationPolicy | None = None) -> SolutionTable:
    """Body groups left-to-right; bare patterns go to the default endpoint."""
    policy = policy or FederationPolicy()
    table = SolutionTable.unit()
    pending_patterns: list[TriplePattern] = []

    def flush_patterns(current: SolutionTable) -> SolutionTable:
        if not pending_patterns:
            return current
        block = Service(Iri(DEFAULT_ENDPOINT), tuple(pending_patterns))
        pending_patterns.clear()
        return execute_service(block, current, registry, policy)

    for element in ast.body:
        if isinstance(element, TriplePattern):
            pending_patterns.append(element)
        elif isinstance(element, Service):
            table = flush_patterns(table)
            table = execute_service(element, table, registry, policy)
        elif isinstance(element, Filter):
            table = flush_patterns(table)
            table = apply_filter(table, element)
    table = flush_patterns(table)
    table = project(table, ast.projection)
    if ast.distinct:
        table = distinct(table)
    return table


# ---------------------------------------------------------------------------
# Result set parsing (consuming remote endpoints)

_SRX_NS = "{http://www.w3.org/2005/sparql-results#}"


def _term_from_json(entry: dict, where: str) -> Term:
    kind = entry.get("type")
    value = entry.get("value")
    if value is None:
        raise ResultParseError(f"{where}: binding without a value")
    if kind == "uri":
        return Iri(value)
    if kind in ("literal", "typed-literal"):
        lang = entry.get("xml:lang")
        datatype = entry.get("datatype")
        if lang:
            return Literal(value, language=lang)
        return Literal(value, datatype=datatype)
    raise ResultParseError(f"{where}: unsupported term type {kind!r}")


def parse_results(fmt: str, payload: str) -> SolutionTable:
    """Parse SPARQL results (sparql-json or sparql-xml) into a SolutionTable."""
    if fmt == "sparql-json":
        try:
            doc = json.loads(payload)
        except json.JSONDecodeError as exc:
            raise ResultParseError(f"invalid JSON results: {exc}") from exc
        try:
            variables = list(doc["head"]["vars"])
            bindings = doc["results"]["bindings"]
        except (KeyError, TypeError) as exc:
            raise ResultParseError(f"missing results structure: {exc}") from exc
        solutions = []
        for i, row in enumerate(bindings):
            solutions.append({
                name: _term_from_json(entry, f"binding {i}/{name}")
                for name, entry in row.items()
            })
        return SolutionTable(variables, solutions)
    if fmt == "sparql-xml":
        try:
            root = ET.fromstring(payload)
        except ET.ParseError as exc:
            raise ResultParseError(f"invalid XML results: {exc}") from exc
        variables = [el.attrib["name"]
                     for el in root.findall(f"{_SRX_NS}head/{_SRX_NS}variable")]
        solutions = []
        for i, result in enumerate(root.findall(f"{_SRX_NS}results/{_SRX_NS}result")):
            row: dict[str, Term] = {}
            for binding in result.findall(f"{_SRX_NS}binding"):
                name = binding.attrib.get("name")
                if name is None:
                    raise ResultParseError(f"result {i}: binding without a name")
                uri = binding.find(f"{_SRX_NS}uri")
                lit = binding.find(f"{_SRX_NS}literal")
                if uri is not None:
                    row[name] = Iri(uri.text or "")
                elif lit is not None:
                    lang = lit.attrib.get("{http://www.w3.org/XML/1998/namespace}lang")
                    datatype = lit.attrib.get("datatype")
                    if lang:
                        row[name] = Literal(lit.text or "", language=lang)
                    else:
                        row[name] = Literal(lit.text or "", datatype=datatype)
                else:
                    raise ResultParseError(f"result {i}: unsupported binding term")
            solutions.append(row)
        return SolutionTable(variables, solutions)
    raise ResultParseError(f"unknown results format {fmt!r}")
