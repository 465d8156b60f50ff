"""In-memory triple store with direct BGP evaluation.

Backs the mock external endpoints and the materialize-then-evaluate oracle.
Besides plain triples it holds "argument tuple" facts, so magic predicates
written as `?x pred(arg1 arg2 "const")` can be answered from fixtures.

Fixture files are N-Triples, optionally extended with tuple-fact lines of the
form `<s> <p> (term term term) .`
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .ontology import OntologyModel
from .rdf import (
    RDF_TYPE,
    Iri,
    Literal,
    NTriplesError,
    Term,
    Triple,
    canonical_key,
    parse_ntriples_line,
)
from .rdf import _parse_term as _parse_rdf_term  # shared term grammar
from .rewriter import SolutionTable, apply_filter, distinct, join_tables, project
from .sparql import (
    Filter,
    SelectQuery,
    Service,
    TermTuple,
    TriplePattern,
    UnsupportedFeatureError,
    Var,
)


@dataclass(frozen=True)
class TupleFact:
    subject: Iri
    predicate: Iri
    arguments: tuple[Term, ...]


@dataclass
class GraphStore:
    triples: set[Triple] = field(default_factory=set)
    tuple_facts: list[TupleFact] = field(default_factory=list)

    @classmethod
    def from_text(cls, document: str) -> "GraphStore":
        store = cls()
        for number, raw in enumerate(document.splitlines(), start=1):
            stripped = raw.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fact = _parse_tuple_fact_line(stripped, number)
            if fact is not None:
                store.tuple_facts.append(fact)
                continue
            triple = parse_ntriples_line(raw, number)
            if triple is not None:
                store.triples.add(triple)
        return store

    def pattern_solutions(self, pattern: TriplePattern,
                          ontology: OntologyModel | None = None) -> list[dict]:
        if isinstance(pattern.object, TermTuple):
            return self._tuple_solutions(pattern)
        predicates = None
        classes = None
        if isinstance(pattern.predicate, Iri):
            if ontology is not None:
                if pattern.predicate.value == RDF_TYPE:
                    predicates = {RDF_TYPE}
                    if isinstance(pattern.object, Iri):
                        classes = ontology.subclasses_of(pattern.object.value)
                else:
                    predicates = ontology.subproperties_of(pattern.predicate.value)
            else:
                predicates = {pattern.predicate.value}

        solutions: list[dict] = []
        seen: set = set()
        for triple in self.triples:
            if predicates is not None and triple.predicate.value not in predicates:
                continue
            binding = _match(pattern, triple, classes)
            if binding is None:
                continue
            key = tuple(sorted(binding.items(), key=lambda kv: kv[0]))
            if key in seen:
                continue
            seen.add(key)
            solutions.append(binding)
        return solutions

    def _tuple_solutions(self, pattern: TriplePattern) -> list[dict]:
        solutions = []
        for fact in self.tuple_facts:
            if isinstance(pattern.predicate, Iri) and \
                    pattern.predicate.value != fact.predicate.value:
                continue
            if len(pattern.object.items) != len(fact.arguments):
                continue
            binding: dict[str, Term] = {}
            ok = _unify_term(pattern.subject, fact.subject, binding)
            if ok and isinstance(pattern.predicate, Var):
                ok = _unify_term(pattern.predicate, fact.predicate, binding)
            if ok:
                for part, term in zip(pattern.object.items, fact.arguments):
                    if not _unify_term(part, term, binding):
                        ok = False
                        break
            if ok:
                solutions.append(binding)
        return solutions

    def evaluate(self, ast: SelectQuery,
                 ontology: OntologyModel | None = None) -> SolutionTable:
        """SELECT evaluation over the stored triples (no SERVICE)."""
        if any(isinstance(e, Service) for e in ast.body):
            raise UnsupportedFeatureError("SERVICE not supported on a plain graph")
        table = SolutionTable.unit()
        for element in ast.body:
            if isinstance(element, TriplePattern):
                sols = self.pattern_solutions(element, ontology)
                table = join_tables(table, sorted(element.variables()), sols)
        for element in ast.body:
            if isinstance(element, Filter):
                table = apply_filter(table, element)
        table = project(table, ast.projection)
        if ast.distinct:
            table = distinct(table)
        return table


def _unify_term(part, term: Term, binding: dict) -> bool:
    if isinstance(part, Var):
        if part.name in binding:
            return canonical_key(binding[part.name]) == canonical_key(term)
        binding[part.name] = term
        return True
    if isinstance(part, Iri):
        return isinstance(term, Iri) and part.value == term.value
    if isinstance(part, Literal):
        return isinstance(term, Literal) and canonical_key(part) == canonical_key(term)
    return False


def _match(pattern: TriplePattern, triple: Triple, classes) -> dict | None:
    binding: dict[str, Term] = {}
    if not _unify_term(pattern.subject, triple.subject, binding):
        return None
    if isinstance(pattern.predicate, Var):
        if not _unify_term(pattern.predicate, triple.predicate, binding):
            return None
    if classes is not None:
        # type pattern with constant class: accept any subclass assertion
        if not isinstance(triple.object, Iri) or triple.object.value not in classes:
            return None
        return binding
    if not _unify_term(pattern.object, triple.object, binding):
        return None
    return binding


_TUPLE_LINE_RE = re.compile(r"^(<[^>]*>)\s+(<[^>]*>)\s+\((.*)\)\s*\.$")


def _parse_tuple_fact_line(line: str, number: int) -> TupleFact | None:
    m = _TUPLE_LINE_RE.match(line)
    if not m:
        return None
    subject = Iri(m.group(1)[1:-1])
    predicate = Iri(m.group(2)[1:-1])
    body = m.group(3).strip()
    arguments: list[Term] = []
    pos = 0
    while pos < len(body):
        if body[pos] in " \t":
            pos += 1
            continue
        term, pos = _parse_rdf_term(body, pos, number)
        arguments.append(term)
    if not arguments:
        raise NTriplesError("empty argument tuple", number)
    return TupleFact(subject, predicate, tuple(arguments))
