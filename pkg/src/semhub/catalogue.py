"""Hypercat catalogue: JSON document and RDF flavour over the hub's items.

Feeds and datastreams are advertised as catalogue items with their API hrefs.
The mandatory relations (content type, English description) use the standard
Hypercat rel URNs; they are constants here and documented in the README.
"""
from __future__ import annotations

from pydantic import BaseModel, Field

from .hub import Hub
from .mappings import materialize
from .ontology import OntologyModel
from .rdf import RDF_TYPE, Iri, Triple

IS_CONTENT_TYPE_REL = "urn:X-hypercat:rels:isContentType"
DESCRIPTION_REL = "urn:X-hypercat:rels:hasDescription:en"
CATALOGUE_MEDIA_TYPE = "application/vnd.hypercat.catalogue+json"
ITEM_MEDIA_TYPE = "application/json"

BT_HYPERCAT_NS = "http://portal.bt-hypercat.com/ontologies/bt-hypercat#"
FEED_CLASS = BT_HYPERCAT_NS + "Feed"
DATASTREAM_CLASS = BT_HYPERCAT_NS + "Datastream"


class Relation(BaseModel):
    rel: str
    val: str


class CatalogueItem(BaseModel):
    href: str
    item_metadata: list[Relation] = Field(alias="item-metadata")

    model_config = {"populate_by_name": True}


class Catalogue(BaseModel):
    catalogue_metadata: list[Relation] = Field(alias="catalogue-metadata")
    items: list[CatalogueItem]

    model_config = {"populate_by_name": True}


def _local_name(iri: str) -> str:
    for sep in ("#", "/"):
        if sep in iri:
            tail = iri.rsplit(sep, 1)[1]
            if tail:
                return tail
    return iri


def _item_classes(ontology: OntologyModel) -> set[str]:
    return ontology.subclasses_of(FEED_CLASS) | ontology.subclasses_of(DATASTREAM_CLASS)


def _typed_subjects(hub: Hub) -> list[tuple[str, str]]:
    """(href, class IRI) for every feed/datastream item, deterministic order."""
    advertised = _item_classes(hub.ontology)
    found: dict[str, str] = {}
    for entry in hub.databases.values():
        for mapping in entry.registry.mappings:
            cls = mapping.type_class
            if cls is None or cls not in advertised:
                continue
            for triple in materialize(mapping, entry.database):
                found[triple.subject.value] = cls
    return sorted(found.items())


def build_catalogue(hub: Hub, description: str = "Semantic IoT data hub catalogue") -> Catalogue:
    items = []
    for href, cls in _typed_subjects(hub):
        items.append(CatalogueItem(
            href=href,
            item_metadata=[
                Relation(rel=IS_CONTENT_TYPE_REL, val=ITEM_MEDIA_TYPE),
                Relation(rel=DESCRIPTION_REL, val=f"{_local_name(cls)} {_local_name(href)}"),
            ]))
    return Catalogue(
        catalogue_metadata=[
            Relation(rel=IS_CONTENT_TYPE_REL, val=CATALOGUE_MEDIA_TYPE),
            Relation(rel=DESCRIPTION_REL, val=description),
        ],
        items=items)


def catalogue_triples(hub: Hub) -> set[Triple]:
    """RDF flavour: items typed with their ontology class, feeds linked to streams."""
    triples: set[Triple] = set()
    for href, cls in _typed_subjects(hub):
        triples.add(Triple(Iri(href), Iri(RDF_TYPE), Iri(cls)))
    object_properties = hub.ontology.object_properties
    for entry in hub.databases.values():
        for mapping in entry.registry.mappings:
            if mapping.target.predicate.value in object_properties:
                triples |= materialize(mapping, entry.database)
    return triples
