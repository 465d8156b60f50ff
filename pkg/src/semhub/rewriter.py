"""Query rewriting engine: triple patterns to SQL, joined into solution tables.

Each pattern is matched against the mapping registries with subclass and
subproperty expansion from the ontology; constant subject/object positions are
inverted through the templates into SQL equality constraints.  Pattern results
are combined left-to-right by natural join, filters run with SPARQL error
semantics (evaluation errors drop the solution), projection and DISTINCT last.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .mappings import (
    IriTemplate,
    LiteralTemplate,
    MappingDefinition,
    MappingRegistry,
    value_for_kind,
)
from .ontology import OntologyModel
from .rdf import (
    RDF_TYPE,
    XSD_BOOLEAN,
    XSD_DATETIME,
    XSD_DATE,
    XSD_STRING,
    Iri,
    Literal,
    Term,
    canonical_key,
    parse_datetime,
)
from .relstore import Database, execute
from .sparql import (
    BinaryOp,
    Filter,
    FuncCall,
    SelectQuery,
    Service,
    TermTuple,
    TriplePattern,
    UnsupportedFeatureError,
    Var,
)

_NUMERIC_RE = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_XSD_NUMERIC = {
    "http://www.w3.org/2001/XMLSchema#integer",
    "http://www.w3.org/2001/XMLSchema#decimal",
    "http://www.w3.org/2001/XMLSchema#double",
    "http://www.w3.org/2001/XMLSchema#float",
    "http://www.w3.org/2001/XMLSchema#int",
    "http://www.w3.org/2001/XMLSchema#long",
    "http://www.w3.org/2001/XMLSchema#short",
}


@dataclass
class SolutionTable:
    variables: list[str]
    solutions: list[dict]  # var name -> Term, partial

    @staticmethod
    def unit() -> "SolutionTable":
        return SolutionTable([], [{}])

    def canonical_rows(self) -> list[tuple]:
        rows = []
        for sol in self.solutions:
            rows.append(tuple(
                canonical_key(sol[v]) if v in sol else None for v in self.variables))
        return rows


@dataclass
class Source:
    registry: MappingRegistry
    database: Database


@dataclass
class EvalContext:
    ontology: OntologyModel
    sources: list[Source] = field(default_factory=list)


class EvaluationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Mapping match


def match_mappings(
    pattern: TriplePattern,
    ontology: OntologyModel,
    registry: MappingRegistry,
) -> list[tuple[MappingDefinition, dict[str, str]]]:
    """Mappings that can answer the pattern, with placeholder equality constraints.

    Constraints map source projection names to lexical values recovered by
    inverse template matching; constants whose shape cannot match eliminate
    the mapping.  rdf:type patterns expand over subclasses, other predicates
    over subproperties.
    """
    predicate = pattern.predicate
    if isinstance(predicate, Var):
        candidates = list(registry.mappings)
    elif isinstance(predicate, Iri):
        if predicate.value == RDF_TYPE:
            obj = pattern.object
            if isinstance(obj, Iri):
                candidates = []
                for cls in sorted(ontology.subclasses_of(obj.value)):
                    candidates.extend(registry.by_class.get(cls, []))
            elif isinstance(obj, Var):
                candidates = list(registry.by_predicate.get(RDF_TYPE, []))
            else:
                return []
        else:
            candidates = []
            for prop in sorted(ontology.subproperties_of(predicate.value)):
                candidates.extend(registry.by_predicate.get(prop, []))
    else:
        return []

    matched: list[tuple[MappingDefinition, dict[str, str]]] = []
    for mapping in candidates:
        constraints = _invert_constants(pattern, mapping)
        if constraints is None:
            continue
        matched.append((mapping, constraints))
    return matched


def _invert_constants(pattern: TriplePattern, mapping: MappingDefinition):
    """Slot values forced by constant positions; None when the mapping cannot match."""
    slots: dict[str, str] = {}

    def merge(found: dict[str, str] | None) -> bool:
        if found is None:
            return False
        for name, value in found.items():
            if name in slots and slots[name] != value:
                return False
            slots[name] = value
        return True

    subject = pattern.subject
    if isinstance(subject, Iri):
        if not merge(mapping.target.subject.invert(subject.value)):
            return None

    obj = pattern.object
    target_obj = mapping.target.object
    is_type = (isinstance(pattern.predicate, Iri)
               and pattern.predicate.value == RDF_TYPE)
    if isinstance(obj, TermTuple):
        return None
    if isinstance(obj, Iri):
        if isinstance(target_obj, Iri):
            # For type patterns subsumption already vetted the class.
            if not is_type and target_obj.value != obj.value:
                return None
        elif isinstance(target_obj, IriTemplate):
            if not merge(target_obj.invert(obj.value)):
                return None
        else:
            return None
    elif isinstance(obj, Literal):
        if not isinstance(target_obj, LiteralTemplate):
            return None
        if obj.language is not None:
            return None
        if obj.datatype != target_obj.datatype and not (
                obj.datatype in _XSD_NUMERIC and target_obj.datatype in _XSD_NUMERIC):
            return None
        if not merge(target_obj.invert(obj)):
            return None
    return slots


# ---------------------------------------------------------------------------
# Pattern evaluation


def _bind(pattern: TriplePattern, triple) -> dict | None:
    """Unify a produced triple with the pattern; constants compare by value."""
    binding: dict[str, Term] = {}
    is_type = isinstance(pattern.predicate, Iri) and pattern.predicate.value == RDF_TYPE

    def unify(part, term, vetted: bool) -> bool:
        if isinstance(part, Var):
            if part.name in binding:
                return canonical_key(binding[part.name]) == canonical_key(term)
            binding[part.name] = term
            return True
        if vetted:
            return True  # hierarchy expansion already accepted this constant
        if isinstance(part, Iri):
            return isinstance(term, Iri) and part.value == term.value
        if isinstance(part, Literal):
            return isinstance(term, Literal) and canonical_key(part) == canonical_key(term)
        return False

    if not unify(pattern.subject, triple.subject, vetted=False):
        return None
    if not unify(pattern.predicate, triple.predicate,
                 vetted=isinstance(pattern.predicate, Iri)):
        return None
    if not unify(pattern.object, triple.object,
                 vetted=is_type and isinstance(pattern.object, Iri)):
        return None
    return binding


def _pattern_solutions(pattern: TriplePattern, ontology: OntologyModel,
                       source: Source) -> list[dict]:
    from .mappings import expand_template

    seen: set = set()
    solutions: list[dict] = []
    for mapping, slot_constraints in match_mappings(pattern, ontology, source.registry):
        query = mapping.source
        schema = source.database.table(query.table).schema
        pushdown: list[tuple[str, object]] = []
        feasible = True
        for slot, text in slot_constraints.items():
            projection = next(p for p in query.projections if p.output == slot)
            if projection.func is not None:
                continue  # cannot invert through a function; unification re-checks
            converted = value_for_kind(text, schema.kind_of(projection.column))
            if converted is None:
                feasible = False
                break
            pushdown.append((projection.column, converted))
        if not feasible:
            continue
        rows = execute(source.database, query.with_constraints(pushdown))
        for row in rows:
            triple = expand_template(mapping.target, row)
            if triple is None:
                continue
            binding = _bind(pattern, triple)
            if binding is None:
                continue
            key = tuple(sorted((name, term) for name, term in binding.items()))
            if key in seen:
                continue
            seen.add(key)
            solutions.append(binding)
    return solutions


def join_tables(left: SolutionTable, right_vars: list[str],
                right: list[dict]) -> SolutionTable:
    """Natural hash join on shared variables; term equality decides compatibility."""
    shared = [v for v in left.variables if v in set(right_vars)]
    out_vars = list(left.variables) + [v for v in right_vars if v not in set(left.variables)]
    if not shared:
        merged = [dict(l, **r) for l in left.solutions for r in right]
        return SolutionTable(out_vars, merged)
    index: dict[tuple, list[dict]] = {}
    for r in right:
        key = tuple(r.get(v) for v in shared)
        index.setdefault(key, []).append(r)
    merged = []
    for l in left.solutions:
        key = tuple(l.get(v) for v in shared)
        for r in index.get(key, ()):  # unbound-on-either-side never arises here
            merged.append(dict(l, **r))
    return SolutionTable(out_vars, merged)


def evaluate_bgp(patterns, ctx: EvalContext) -> SolutionTable:
    """Left-to-right natural join of per-pattern solutions over all sources."""
    table = SolutionTable.unit()
    for index, pattern in enumerate(patterns):
        solutions: list[dict] = []
        seen: set = set()
        for source in ctx.sources:
            try:
                found = _pattern_solutions(pattern, ctx.ontology, source)
            except Exception as exc:
                raise EvaluationError(f"pattern {index + 1}: {exc}") from exc
            for binding in found:
                key = tuple(sorted((n, t) for n, t in binding.items()))
                if key not in seen:
                    seen.add(key)
                    solutions.append(binding)
        pattern_vars = sorted(pattern.variables())
        table = join_tables(table, pattern_vars, solutions)
        if not table.solutions:
            return SolutionTable(table.variables, [])
    return table


# ---------------------------------------------------------------------------
# Expressions


class ExprError(ValueError):
    """Internal: expression evaluation error; the enclosing filter drops the row."""


def _to_number(value):
    if isinstance(value, bool):
        raise ExprError("boolean is not a number")
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, Literal):
        if value.datatype in _XSD_NUMERIC and value.language is None:
            if not _NUMERIC_RE.fullmatch(value.lexical.strip()):
                raise ExprError(f"invalid numeric lexical form {value.lexical!r}")
            num = float(value.lexical)
            return int(num) if num.is_integer() and "." not in value.lexical \
                and "e" not in value.lexical.lower() else num
        raise ExprError(f"not a numeric literal: {value}")
    raise ExprError(f"not a number: {value!r}")


def _to_datetime(value):
    from datetime import datetime

    if isinstance(value, datetime):
        return value
    if isinstance(value, Literal) and value.datatype in (XSD_DATETIME, XSD_DATE):
        parsed = parse_datetime(value.lexical)
        if parsed is None:
            raise ExprError(f"invalid dateTime lexical form {value.lexical!r}")
        return parsed
    raise ExprError(f"not a dateTime: {value!r}")


def _to_text(value):
    if isinstance(value, str):
        return value
    if isinstance(value, Literal) and (value.language is not None
                                       or value.datatype == XSD_STRING):
        return value.lexical
    raise ExprError(f"not a string: {value!r}")


def _effective_boolean(value) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return value != 0
    if isinstance(value, str):
        return len(value) > 0
    if isinstance(value, Literal):
        if value.datatype == XSD_BOOLEAN:
            return value.lexical in ("true", "1")
        if value.datatype in _XSD_NUMERIC:
            return _to_number(value) != 0
        if value.language is not None or value.datatype == XSD_STRING:
            return len(value.lexical) > 0
    raise ExprError(f"no effective boolean value for {value!r}")


def _equal(left, right) -> bool:
    try:
        return _to_number(left) == _to_number(right)
    except ExprError:
        pass
    try:
        return _to_datetime(left) == _to_datetime(right)
    except ExprError:
        pass
    try:
        return _to_text(left) == _to_text(right)
    except ExprError:
        pass
    if isinstance(left, (Iri, Literal)) and isinstance(right, (Iri, Literal)):
        return canonical_key(left) == canonical_key(right)
    raise ExprError(f"incomparable values {left!r} and {right!r}")


def _evaluate(expr, solution: dict):
    from datetime import datetime

    if isinstance(expr, Var):
        if expr.name not in solution:
            raise ExprError(f"unbound variable ?{expr.name}")
        return solution[expr.name]
    if isinstance(expr, (Iri, Literal)):
        return expr
    if isinstance(expr, BinaryOp):
        if expr.op == "&&":
            # three-valued AND: any false operand wins over an error
            state = True
            for side in (expr.left, expr.right):
                try:
                    if not _effective_boolean(_evaluate(side, solution)):
                        return False
                except ExprError:
                    state = None
            if state is None:
                raise ExprError("error operand in &&")
            return True
        left = _evaluate(expr.left, solution)
        right = _evaluate(expr.right, solution)
        if expr.op in ("+", "-"):
            a, b = _to_number(left), _to_number(right)
            return a + b if expr.op == "+" else a - b
        if expr.op == "=":
            return _equal(left, right)
        try:
            a, b = _to_number(left), _to_number(right)
        except ExprError:
            a, b = _to_datetime(left), _to_datetime(right)
        return a > b if expr.op == ">" else a < b
    if isinstance(expr, FuncCall):
        name = expr.name
        if name == "BOUND":
            return expr.args[0].name in solution
        if name == "STR":
            value = _evaluate(expr.args[0], solution)
            if isinstance(value, Iri):
                return value.value
            if isinstance(value, Literal):
                return value.lexical
            if isinstance(value, bool):
                return "true" if value else "false"
            if isinstance(value, datetime):
                from .rdf import format_datetime
                return format_datetime(value)
            return str(value)
        if name == "REGEX":
            text = _to_text(_evaluate(expr.args[0], solution))
            pattern = _to_text(_evaluate(expr.args[1], solution))
            try:
                return re.search(pattern, text) is not None
            except re.error as exc:
                raise ExprError(f"bad regex: {exc}") from exc
        if name == "YEAR":
            return _to_datetime(_evaluate(expr.args[0], solution)).year
        if name == XSD_DATETIME:
            value = _evaluate(expr.args[0], solution)
            if isinstance(value, datetime):
                return value
            if isinstance(value, Literal):
                parsed = parse_datetime(value.lexical)
                if parsed is not None and (value.language is not None
                                           or value.datatype in (XSD_DATETIME, XSD_DATE,
                                                                 XSD_STRING)):
                    return parsed
            if isinstance(value, str):
                parsed = parse_datetime(value)
                if parsed is not None:
                    return parsed
            raise ExprError(f"cannot cast to dateTime: {value!r}")
        if name == "http://www.w3.org/2001/XMLSchema#integer":
            value = _evaluate(expr.args[0], solution)
            if isinstance(value, bool):
                return 1 if value else 0
            if isinstance(value, (int, float)):
                return int(value)
            if isinstance(value, str) and re.fullmatch(r"[+-]?\d+", value.strip()):
                return int(value)
            if isinstance(value, Literal):
                return int(_to_number(value))
            raise ExprError(f"cannot cast to integer: {value!r}")
        if name in ("http://www.w3.org/2001/XMLSchema#double",
                    "http://www.w3.org/2001/XMLSchema#decimal"):
            value = _evaluate(expr.args[0], solution)
            try:
                return float(_to_number(value))
            except ExprError:
                if isinstance(value, str):
                    try:
                        return float(value)
                    except ValueError:
                        pass
                raise
        raise ExprError(f"unknown function {name!r}")
    raise ExprError(f"cannot evaluate {expr!r}")


def eval_expr(expr, solution: dict) -> bool:
    """Effective boolean value with SPARQL error semantics (error means False)."""
    try:
        return _effective_boolean(_evaluate(expr, solution))
    except ExprError:
        return False


def apply_filter(table: SolutionTable, flt: Filter) -> SolutionTable:
    kept = [s for s in table.solutions if eval_expr(flt.expr, s)]
    return SolutionTable(table.variables, kept)


# ---------------------------------------------------------------------------
# Whole-query evaluation (single endpoint: no SERVICE)


def project(table: SolutionTable, projection) -> SolutionTable:
    names = [v.name for v in projection]
    solutions = []
    for sol in table.solutions:
        solutions.append({n: sol[n] for n in names if n in sol})
    return SolutionTable(names, solutions)


def distinct(table: SolutionTable) -> SolutionTable:
    seen: set = set()
    out = []
    for sol in table.solutions:
        key = tuple(canonical_key(sol[v]) if v in sol else None for v in table.variables)
        if key not in seen:
            seen.add(key)
            out.append(sol)
    return SolutionTable(table.variables, out)


def evaluate_query(ast: SelectQuery, ctx: EvalContext) -> SolutionTable:
    if any(isinstance(e, Service) for e in ast.body):
        raise UnsupportedFeatureError(
            "SERVICE is not supported by a SQL rewriting endpoint; "
            "use the federated endpoint")
    patterns = [e for e in ast.body if isinstance(e, TriplePattern)]
    table = evaluate_bgp(patterns, ctx) if patterns else SolutionTable.unit()
    for element in ast.body:
        if isinstance(element, Filter):
            table = apply_filter(table, element)
    table = project(table, ast.projection)
    if ast.distinct:
        table = distinct(table)
    return table


def explain(ast: SelectQuery, ctx: EvalContext) -> list[dict]:
    """Per-pattern rendering of matched mappings and the SQL that would run."""
    if any(isinstance(e, Service) for e in ast.body):
        raise UnsupportedFeatureError("SERVICE blocks cannot be translated to SQL")
    report = []
    for pattern in (e for e in ast.body if isinstance(e, TriplePattern)):
        entry = {"pattern": pattern, "matches": []}
        for source in ctx.sources:
            for mapping, slot_constraints in match_mappings(
                    pattern, ctx.ontology, source.registry):
                query = mapping.source
                schema = source.database.table(query.table).schema
                pushdown = []
                for slot, text in slot_constraints.items():
                    projection = next(p for p in query.projections if p.output == slot)
                    if projection.func is None:
                        converted = value_for_kind(text, schema.kind_of(projection.column))
                        if converted is not None:
                            pushdown.append((projection.column, converted))
                entry["matches"].append({
                    "database": source.database.name,
                    "mapping": mapping.id,
                    "sql": query.with_constraints(pushdown).to_sql(),
                })
        report.append(entry)
    return report
