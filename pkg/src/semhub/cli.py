"""Operator command line: serve the hub, inspect translations, export, query.

`serve`, `ingest`, `translate` and `export` work on a local config; `query`
and `catalogue` are thin HTTP clients against a running endpoint.  Exit codes:
0 ok, 1 environment/config problem, 2 bad user query, 3 remote failure.
"""
from __future__ import annotations

import socket
import sys
from pathlib import Path

import click
import httpx

from .config import ConfigError, demo_config_path, load_config
from .hub import Hub, UnknownDatabaseError
from .mappings import materialize_all
from .rdf import serialize_ntriples
from .relstore import Database, load_fixture
from .rewriter import explain
from .sparql import SparqlSyntaxError, parse_query

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_QUERY = 2
EXIT_REMOTE = 3


def _fail(code: int, message: str):
    click.echo(message, err=True)
    sys.exit(code)


def _load_hub(config_path: str) -> Hub:
    path = demo_config_path() if config_path == "demo" else Path(config_path)
    try:
        return Hub.from_config_file(path)
    except (ConfigError, OSError, ValueError) as exc:
        _fail(EXIT_CONFIG, f"cannot load hub: {exc}")


def _read_query(query: str | None, query_file: str | None) -> str:
    if query:
        return query
    if query_file:
        try:
            return Path(query_file).read_text(encoding="utf-8")
        except OSError as exc:
            _fail(EXIT_CONFIG, f"cannot read query file: {exc}")
    _fail(EXIT_QUERY, "provide --query or --query-file")


@click.group()
def main():
    """Semantic IoT data hub."""


@main.command()
@click.option("--config", "config_path", required=True,
              help="Hub config file, or 'demo' for the packaged demo hub.")
@click.option("--host", default=None, help="Override the listen host.")
@click.option("--port", default=None, type=int, help="Override the listen port.")
def serve(config_path: str, host: str | None, port: int | None):
    """Run the SPARQL endpoints and catalogues until interrupted."""
    import uvicorn

    from .service import announced_routes, create_app

    hub = _load_hub(config_path)
    bind_host = host or hub.config.host
    bind_port = port if port is not None else hub.config.port
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        probe.bind((bind_host, bind_port))
    except OSError as exc:
        _fail(EXIT_CONFIG, f"cannot listen on {bind_host}:{bind_port}: {exc}")
    finally:
        probe.close()
    app = create_app(hub)
    click.echo(f"listening on http://{bind_host}:{bind_port}")
    for route in announced_routes(hub):
        click.echo(f"route {route}")
    uvicorn.run(app, host=bind_host, port=bind_port, log_level="warning")


@main.command()
@click.option("--config", "config_path", required=True)
@click.option("--db", "db_name", required=True)
@click.option("--fixture", "fixture_path", default=None,
              help="Fixture to load instead of the configured one.")
def ingest(config_path: str, db_name: str, fixture_path: str | None):
    """Load a fixture into a fresh database and print the ingestion report."""
    path = demo_config_path() if config_path == "demo" else Path(config_path)
    try:
        config = load_config(path)
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))
    entry = next((db for db in config.databases if db.name == db_name), None)
    if entry is None:
        _fail(EXIT_CONFIG, f"unknown database {db_name!r}")
    source = Path(fixture_path) if fixture_path else config.resolve(entry.fixture)
    try:
        document = source.read_text(encoding="utf-8")
        report = load_fixture(Database(db_name), document)
    except (OSError, ValueError) as exc:
        _fail(EXIT_CONFIG, f"ingestion failed: {exc}")
    total = 0
    for table, count in report.items():
        click.echo(f"{table}: {count} rows")
        total += count
    click.echo(f"ingested {total} rows into {len(report)} tables")


@main.command()
@click.option("--config", "config_path", required=True)
@click.option("--db", "db_name", required=True)
@click.option("--query", default=None)
@click.option("--query-file", default=None)
def translate(config_path: str, db_name: str, query: str | None, query_file: str | None):
    """Show, per triple pattern, the matched mappings and the SQL to run."""
    hub = _load_hub(config_path)
    text = _read_query(query, query_file)
    try:
        ast = parse_query(text)
        report = explain(ast, hub.context(db_name))
    except SparqlSyntaxError as exc:
        _fail(EXIT_QUERY, f"query error: {exc}")
    except UnknownDatabaseError:
        _fail(EXIT_CONFIG, f"unknown database {db_name!r}; "
                           f"available: {', '.join(hub.database_names())}")
    from .sparql import serialize_term

    for entry in report:
        pattern = entry["pattern"]
        click.echo(f"pattern: {serialize_term(pattern.subject)} "
                   f"{serialize_term(pattern.predicate)} "
                   f"{serialize_term(pattern.object)}")
        if not entry["matches"]:
            click.echo("  (no mapping matches; empty result)")
        for match in entry["matches"]:
            click.echo(f"  {match['mapping']} [{match['database']}]")
            click.echo(f"    {match['sql']}")


@main.command()
@click.option("--config", "config_path", required=True)
@click.option("--db", "db_name", required=True)
@click.option("--out", "out_path", required=True)
def export(config_path: str, db_name: str, out_path: str):
    """Materialize one database's virtual graph to an N-Triples file."""
    hub = _load_hub(config_path)
    if db_name not in hub.databases:
        _fail(EXIT_CONFIG, f"unknown database {db_name!r}; "
                           f"available: {', '.join(hub.databases)}")
    entry = hub.databases[db_name]
    triples = materialize_all(entry.registry, entry.database)
    try:
        Path(out_path).write_text(serialize_ntriples(triples), encoding="utf-8")
    except OSError as exc:
        _fail(EXIT_CONFIG, f"cannot write {out_path}: {exc}")
    click.echo(f"wrote {len(triples)} triples to {out_path}")


@main.command()
@click.option("--endpoint", required=True, help="SPARQL endpoint URL.")
@click.option("--query", default=None)
@click.option("--query-file", default=None)
@click.option("--format", "fmt", default=None,
              type=click.Choice(["json", "xml", "csv", "tsv", "html"]))
def query(endpoint: str, query: str | None, query_file: str | None, fmt: str | None):
    """Send a query to an endpoint and print the raw response body."""
    text = _read_query(query, query_file)
    params = {"query": text}
    if fmt:
        params["format"] = fmt
    try:
        response = httpx.get(endpoint, params=params, timeout=30.0)
    except httpx.HTTPError as exc:
        _fail(EXIT_REMOTE, f"request failed: {exc}")
    if response.status_code != 200:
        click.echo(response.text)
        _fail(EXIT_REMOTE, f"HTTP {response.status_code}")
    click.echo(response.text, nl=False)


@main.command()
@click.option("--endpoint", required=True, help="Hub base URL, e.g. http://127.0.0.1:8080")
@click.option("--rdf", is_flag=True, help="Fetch /cat-rdf instead of /cat.")
def catalogue(endpoint: str, rdf: bool):
    """Fetch the Hypercat catalogue from a running hub."""
    url = endpoint.rstrip("/") + ("/cat-rdf" if rdf else "/cat")
    try:
        response = httpx.get(url, timeout=30.0)
    except httpx.HTTPError as exc:
        _fail(EXIT_REMOTE, f"request failed: {exc}")
    if response.status_code != 200:
        click.echo(response.text)
        _fail(EXIT_REMOTE, f"HTTP {response.status_code}")
    click.echo(response.text, nl=False)


if __name__ == "__main__":
    main()
