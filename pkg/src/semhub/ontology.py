"""Class/property hierarchy with subsumption closure for query rewriting.

The model is loaded once from an N-Triples document (rdfs:subClassOf,
rdfs:subPropertyOf, owl:Class/owl:DatatypeProperty/owl:ObjectProperty typing,
rdfs:range) and is immutable afterwards, so concurrent readers need no locks.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .rdf import (
    OWL_CLASS,
    OWL_DATATYPE_PROPERTY,
    OWL_OBJECT_PROPERTY,
    RDF_TYPE,
    RDFS_RANGE,
    RDFS_SUBCLASSOF,
    RDFS_SUBPROPERTYOF,
    Iri,
    parse_ntriples,
)


class OntologyError(ValueError):
    pass


class HierarchyCycleError(OntologyError):
    """Subclass/subproperty graph has a cycle; reports one offending path."""

    def __init__(self, kind: str, path: list[str]):
        self.path = path
        super().__init__(f"cycle in {kind} hierarchy: " + " -> ".join(path))


@dataclass(frozen=True)
class OntologyModel:
    classes: frozenset[str]
    data_properties: frozenset[str]
    object_properties: frozenset[str]
    subclass_axioms: frozenset[tuple[str, str]]
    subproperty_axioms: frozenset[tuple[str, str]]
    datatype_range: dict[str, str] = field(default_factory=dict)

    @property
    def properties(self) -> frozenset[str]:
        return self.data_properties | self.object_properties

    def subclasses_of(self, iri: str) -> set[str]:
        """Reflexive-transitive closure below `iri`; unknown IRIs map to themselves."""
        return _closure(iri, self.subclass_axioms)

    def subproperties_of(self, iri: str) -> set[str]:
        return _closure(iri, self.subproperty_axioms)


def _closure(root: str, axioms: frozenset[tuple[str, str]]) -> set[str]:
    below: dict[str, set[str]] = {}
    for sub, sup in axioms:
        below.setdefault(sup, set()).add(sub)
    seen = {root}
    stack = [root]
    while stack:
        node = stack.pop()
        for child in below.get(node, ()):
            if child not in seen:
                seen.add(child)
                stack.append(child)
    return seen


def _check_acyclic(kind: str, axioms: set[tuple[str, str]]) -> None:
    children: dict[str, set[str]] = {}
    for sub, sup in axioms:
        children.setdefault(sup, set()).add(sub)
    WHITE, GREY, BLACK = 0, 1, 2
    state: dict[str, int] = {}

    def visit(node: str, trail: list[str]) -> None:
        state[node] = GREY
        trail.append(node)
        for child in children.get(node, ()):
            if state.get(child, WHITE) == GREY:
                cycle = trail[trail.index(child):] + [child]
                raise HierarchyCycleError(kind, cycle)
            if state.get(child, WHITE) == WHITE:
                visit(child, trail)
        trail.pop()
        state[node] = BLACK

    for start in children:
        if state.get(start, WHITE) == WHITE:
            visit(start, [])


def load_ontology(document: str) -> OntologyModel:
    """Build an OntologyModel from an N-Triples document.

    Axiom endpoints are registered as classes/properties automatically;
    vocabulary triples outside the recognized set are ignored.
    """
    classes: set[str] = set()
    data_properties: set[str] = set()
    object_properties: set[str] = set()
    subclass_axioms: set[tuple[str, str]] = set()
    subproperty_axioms: set[tuple[str, str]] = set()
    datatype_range: dict[str, str] = {}

    for triple in parse_ntriples(document):
        s = triple.subject.value
        p = triple.predicate.value
        o = triple.object
        if p == RDF_TYPE and isinstance(o, Iri):
            if o.value == OWL_CLASS:
                classes.add(s)
            elif o.value == OWL_DATATYPE_PROPERTY:
                data_properties.add(s)
            elif o.value == OWL_OBJECT_PROPERTY:
                object_properties.add(s)
        elif p == RDFS_SUBCLASSOF and isinstance(o, Iri):
            subclass_axioms.add((s, o.value))
            classes.update((s, o.value))
        elif p == RDFS_SUBPROPERTYOF and isinstance(o, Iri):
            subproperty_axioms.add((s, o.value))
        elif p == RDFS_RANGE and isinstance(o, Iri):
            datatype_range[s] = o.value

    # Subproperty axioms may name properties never typed explicitly.
    for sub, sup in subproperty_axioms:
        for iri in (sub, sup):
            if iri not in data_properties and iri not in object_properties:
                data_properties.add(iri)

    _check_acyclic("subclass", subclass_axioms)
    _check_acyclic("subproperty", subproperty_axioms)

    return OntologyModel(
        classes=frozenset(classes),
        data_properties=frozenset(data_properties),
        object_properties=frozenset(object_properties),
        subclass_axioms=frozenset(subclass_axioms),
        subproperty_axioms=frozenset(subproperty_axioms),
        datatype_range=datatype_range,
    )
