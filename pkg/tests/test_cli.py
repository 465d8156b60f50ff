from __future__ import annotations

import socket
from pathlib import Path

import pytest
from click.testing import CliRunner

from semhub import sample_queries as corpus
from semhub.cli import main
from semhub.config import demo_config_path
from semhub.rdf import parse_ntriples


@pytest.fixture()
def runner():
    return CliRunner()


def test_translate_feed_query_shows_mapping_and_sql(runner):
    result = runner.invoke(main, [
        "translate", "--config", "demo", "--db", "sensors",
        "--query", corpus.FEEDS_QUERY])
    assert result.exit_code == 0
    assert "mapping:SensorFeed" in result.output
    assert "SELECT feed.id FROM feed" in result.output


def test_translate_datastream_query_shows_both_stream_mappings(runner):
    result = runner.invoke(main, [
        "translate", "--config", "demo", "--db", "default",
        "--query", corpus.DATASTREAMS_QUERY])
    assert result.exit_code == 0
    assert "mapping:SensorStream" in result.output
    assert "mapping:EventStream" in result.output


def test_translate_malformed_query_exit_2(runner):
    result = runner.invoke(main, [
        "translate", "--config", "demo", "--db", "sensors",
        "--query", "SELECT ?s WHERE {"])
    assert result.exit_code == 2


def test_export_matches_golden(runner, tmp_path):
    out = tmp_path / "sensors.nt"
    result = runner.invoke(main, [
        "export", "--config", "demo", "--db", "sensors", "--out", str(out)])
    assert result.exit_code == 0
    assert "89 triples" in result.output
    golden = (Path(__file__).parent / "golden" / "sensors.nt").read_text()
    assert out.read_text() == golden


def test_export_round_trips_through_parser(runner, tmp_path, hub):
    from semhub.mappings import materialize_all

    out = tmp_path / "events.nt"
    result = runner.invoke(main, [
        "export", "--config", "demo", "--db", "events", "--out", str(out)])
    assert result.exit_code == 0
    entry = hub.databases["events"]
    assert parse_ntriples(out.read_text()) == materialize_all(
        entry.registry, entry.database)


def test_export_unknown_db_exit_1(runner, tmp_path):
    result = runner.invoke(main, [
        "export", "--config", "demo", "--db", "nope",
        "--out", str(tmp_path / "x.nt")])
    assert result.exit_code == 1


def test_ingest_reports_counts(runner):
    result = runner.invoke(main, ["ingest", "--config", "demo", "--db", "sensors"])
    assert result.exit_code == 0
    assert "feed: 2 rows" in result.output
    assert "datastream: 3 rows" in result.output
    assert "datapoint: 4 rows" in result.output


def test_ingest_type_mismatch_exit_1(runner, tmp_path):
    bad = tmp_path / "bad.fix"
    bad.write_text("table t\ncol n int64\nrow oops\n")
    result = runner.invoke(main, [
        "ingest", "--config", "demo", "--db", "sensors", "--fixture", str(bad)])
    assert result.exit_code == 1
    assert "column n" in result.output


def test_serve_announces_routes(runner, monkeypatch):
    monkeypatch.setattr("uvicorn.run", lambda *a, **kw: None)
    result = runner.invoke(main, ["serve", "--config", "demo", "--port", "0"])
    assert result.exit_code == 0
    for route in ("/sparql/sensors", "/sparql/events", "/sparql/federated",
                  "/cat", "/cat-rdf"):
        assert f"route {route}" in result.output


def test_serve_missing_fixture_exit_1(runner, tmp_path):
    config = tmp_path / "hub.yaml"
    config.write_text(
        "listen: 127.0.0.1:0\nontology: missing.nt\ndatabases: []\n")
    result = runner.invoke(main, ["serve", "--config", str(config)])
    assert result.exit_code == 1
    assert "missing.nt" in result.output


def test_serve_port_already_bound_exit_1(runner):
    blocker = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    blocker.bind(("127.0.0.1", 0))
    port = blocker.getsockname()[1]
    blocker.listen(1)
    try:
        result = runner.invoke(main, [
            "serve", "--config", "demo", "--port", str(port)])
        assert result.exit_code == 1
        assert str(port) in result.output
    finally:
        blocker.close()


def test_query_csv_against_live_hub(runner, live_server):
    result = runner.invoke(main, [
        "query", "--endpoint", f"{live_server}/sparql/sensors",
        "--query", corpus.FEEDS_QUERY, "--format", "csv"])
    assert result.exit_code == 0
    lines = result.output.strip().split("\n")
    assert lines[0].strip() == "s"
    assert len(lines) == 3


def test_query_tsv_format_selected(runner, live_server):
    result = runner.invoke(main, [
        "query", "--endpoint", f"{live_server}/sparql/sensors",
        "--query", corpus.FEEDS_QUERY, "--format", "tsv"])
    assert result.exit_code == 0
    assert "?s" in result.output


def test_query_unreachable_host_exit_3(runner):
    result = runner.invoke(main, [
        "query", "--endpoint", "http://127.0.0.1:9/sparql",
        "--query", corpus.FEEDS_QUERY])
    assert result.exit_code == 3


def test_query_http_error_echoes_body_exit_3(runner, live_server):
    result = runner.invoke(main, [
        "query", "--endpoint", f"{live_server}/sparql/sensors",
        "--query", "SELECT ?s WHERE {"])
    assert result.exit_code == 3
    assert "line" in result.output


def test_catalogue_fetch(runner, live_server):
    result = runner.invoke(main, ["catalogue", "--endpoint", live_server])
    assert result.exit_code == 0
    assert '"items"' in result.output
    rdf = runner.invoke(main, ["catalogue", "--endpoint", live_server, "--rdf"])
    assert rdf.exit_code == 0
    assert "SensorFeed" in rdf.output


def test_demo_config_path_exists():
    assert demo_config_path().exists()


def test_export_empty_db_writes_empty_file(runner, tmp_path, data_dir):
    fixtures = {}
    for name in ("sensors", "events"):
        text = (data_dir / f"{name}.fix").read_text()
        trimmed = "\n".join(l for l in text.split("\n") if not l.startswith("row "))
        (tmp_path / f"{name}.fix").write_text(trimmed)
        fixtures[name] = f"{name}.fix"
    for name in ("ontology.nt", "sensors.map", "events.map"):
        (tmp_path / name).write_text((data_dir / name).read_text())
    config = tmp_path / "hub.yaml"
    config.write_text(
        "ontology: ontology.nt\n"
        "databases:\n"
        "  - {name: sensors, fixture: sensors.fix, mappings: sensors.map}\n"
        "  - {name: events, fixture: events.fix, mappings: events.map}\n")
    out = tmp_path / "out.nt"
    result = runner.invoke(main, [
        "export", "--config", str(config), "--db", "sensors", "--out", str(out)])
    assert result.exit_code == 0
    assert "0 triples" in result.output
    assert out.read_text() == ""


def test_translate_rejects_service_queries(runner):
    result = runner.invoke(main, [
        "translate", "--config", "demo", "--db", "sensors",
        "--query", corpus.BUSSTOP_QUERY])
    assert result.exit_code == 2


def test_query_transport_adds_nothing(runner, live_server, hub):
    """HTTP query results equal in-process evaluation across the corpus."""
    import json as json_mod

    from query_corpus import full_corpus
    from semhub.rdf import canonical_key
    from semhub.rewriter import evaluate_query
    from semhub.sparql import parse_query as parse

    from semhub.federation import parse_results

    for text in full_corpus():
        result = runner.invoke(main, [
            "query", "--endpoint", f"{live_server}/sparql/default",
            "--query", text, "--format", "json"])
        assert result.exit_code == 0, text
        remote = parse_results("sparql-json", result.output)
        local = evaluate_query(parse(text), hub.context("default"))
        def rows(table):
            return sorted(
                repr(tuple(canonical_key(s[v]) if v in s else None
                           for v in table.variables))
                for s in table.solutions)
        assert rows(remote) == rows(local), text
