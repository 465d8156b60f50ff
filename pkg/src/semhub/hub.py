"""Hub state: ontology, databases with their registries, endpoint wiring.

Every configured database gets a SPARQL-to-SQL context under its own name;
the reserved name "default" is the union over all databases and is what the
federated layer uses for bare patterns.  All state is immutable once loaded.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .config import HubConfig, load_config
from .federation import (
    DEFAULT_ENDPOINT,
    EndpointRegistry,
    FederationPolicy,
    GraphEndpoint,
    InProcessEndpoint,
    RemoteEndpoint,
    evaluate_federated,
)
from .graphstore import GraphStore
from .mappings import MappingRegistry, parse_mapping_document
from .ontology import OntologyModel, load_ontology
from .relstore import Database, load_fixture
from .rewriter import EvalContext, SolutionTable, Source, evaluate_query
from .sparql import SelectQuery

UNION_DB = "default"
FEDERATED_ROUTE = "federated"


class UnknownDatabaseError(KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name


@dataclass
class HubDatabase:
    name: str
    database: Database
    registry: MappingRegistry
    ingestion_report: dict[str, int] = field(default_factory=dict)


@dataclass
class Hub:
    config: HubConfig
    ontology: OntologyModel
    databases: dict[str, HubDatabase]
    endpoints: EndpointRegistry
    policy: FederationPolicy

    @classmethod
    def load(cls, config: HubConfig) -> "Hub":
        ontology = load_ontology(
            config.resolve(config.ontology).read_text(encoding="utf-8"))
        databases: dict[str, HubDatabase] = {}
        for db_config in config.databases:
            database = Database(db_config.name)
            report = load_fixture(
                database, config.resolve(db_config.fixture).read_text(encoding="utf-8"))
            registry = parse_mapping_document(
                config.resolve(db_config.mappings).read_text(encoding="utf-8"))
            databases[db_config.name] = HubDatabase(
                db_config.name, database, registry, report)

        policy = FederationPolicy(
            bind_join=config.federation.bind_join,
            timeout=config.federation.timeout,
            max_service_solutions=config.federation.max_service_solutions)

        hub = cls(config, ontology, databases, EndpointRegistry(), policy)
        hub.endpoints.register(
            DEFAULT_ENDPOINT, InProcessEndpoint(hub.context(UNION_DB)))
        for alias in config.aliases:
            hub.endpoints.register(alias.iri, InProcessEndpoint(hub.context(alias.db)))
        for mock in config.graphs:
            store = GraphStore.from_text(
                config.resolve(mock.fixture).read_text(encoding="utf-8"))
            hub.endpoints.register(mock.iri, GraphEndpoint(store))
        for remote in config.remotes:
            hub.endpoints.register(
                remote.iri, RemoteEndpoint(remote.iri, remote.url, remote.use_post))
        return hub

    @classmethod
    def from_config_file(cls, path: str | Path) -> "Hub":
        return cls.load(load_config(path))

    def database_names(self) -> list[str]:
        return list(self.databases) + [UNION_DB]

    def context(self, name: str) -> EvalContext:
        """Evaluation context for one database, or the union under "default"."""
        if name == UNION_DB:
            sources = [Source(db.registry, db.database)
                       for db in self.databases.values()]
        elif name in self.databases:
            entry = self.databases[name]
            sources = [Source(entry.registry, entry.database)]
        else:
            raise UnknownDatabaseError(name)
        return EvalContext(self.ontology, sources)

    def evaluate(self, db_name: str, ast: SelectQuery) -> SolutionTable:
        return evaluate_query(ast, self.context(db_name))

    def evaluate_federated(self, ast: SelectQuery) -> SolutionTable:
        return evaluate_federated(ast, self.endpoints, self.policy)

    def sparql_routes(self) -> list[str]:
        return [f"/sparql/{name}" for name in self.database_names()] \
            + [f"/sparql/{FEDERATED_ROUTE}"]
