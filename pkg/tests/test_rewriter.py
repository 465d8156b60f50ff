from __future__ import annotations

import itertools
import random
from collections import Counter

import pytest

from query_corpus import full_corpus
from semhub.graphstore import GraphStore
from semhub.mappings import materialize_all
from semhub.ontology import load_ontology
from semhub.rdf import (
    Iri,
    Literal,
    RDF_TYPE,
    XSD_DATETIME,
    XSD_DOUBLE,
    XSD_INTEGER,
    XSD_STRING,
    canonical_key,
)
from semhub.rewriter import (
    eval_expr,
    evaluate_bgp,
    evaluate_query,
    match_mappings,
)
from semhub.sparql import (
    BinaryOp,
    FuncCall,
    TriplePattern,
    UnsupportedFeatureError,
    Var,
    parse_query,
)

BT = "http://portal.bt-hypercat.com/ontologies/bt-hypercat#"
SENSORS = "http://api.bt-hypercat.com/sensors/"


def canonical_rows(table):
    return Counter(
        tuple(canonical_key(sol[v]) if v in sol else None for v in table.variables)
        for sol in table.solutions)


def union_graph(hub):
    triples = set()
    for entry in hub.databases.values():
        triples |= materialize_all(entry.registry, entry.database)
    return GraphStore(triples)


# --- match_mappings ---------------------------------------------------------


def test_feed_pattern_matches_sensorfeed_mapping(hub):
    registry = hub.databases["sensors"].registry
    pattern = TriplePattern(Var("s"), Iri(RDF_TYPE), Iri(BT + "Feed"))
    matched = match_mappings(pattern, hub.ontology, registry)
    assert [m.id for m, _ in matched] == ["mapping:SensorFeed"]


def test_datastream_pattern_matches_both_stream_mappings(hub):
    pattern = TriplePattern(Var("s"), Iri(RDF_TYPE), Iri(BT + "Datastream"))
    ids = set()
    for entry in hub.databases.values():
        for mapping, _ in match_mappings(pattern, hub.ontology, entry.registry):
            ids.add(mapping.id)
    assert ids == {"mapping:SensorStream", "mapping:EventStream"}


def test_constant_subject_becomes_equality_constraint(hub):
    registry = hub.databases["sensors"].registry
    pattern = TriplePattern(Iri(SENSORS + "feeds/f1"),
                            Iri(BT + "feed_title"), Var("t"))
    matched = match_mappings(pattern, hub.ontology, registry)
    assert len(matched) == 1
    mapping, constraints = matched[0]
    assert mapping.id == "mapping:feed_title"
    assert constraints == {"feed.id": "f1"}


def test_foreign_constant_subject_eliminates_mapping(hub):
    registry = hub.databases["sensors"].registry
    pattern = TriplePattern(Iri("http://elsewhere.example/feeds/f1"),
                            Iri(BT + "feed_title"), Var("t"))
    assert match_mappings(pattern, hub.ontology, registry) == []


def test_unknown_class_matches_nothing(hub):
    registry = hub.databases["sensors"].registry
    pattern = TriplePattern(Var("s"), Iri(RDF_TYPE), Iri(BT + "Mystery"))
    assert match_mappings(pattern, hub.ontology, registry) == []


def test_variable_predicate_matches_all_mappings(hub):
    registry = hub.databases["sensors"].registry
    pattern = TriplePattern(Var("s"), Var("p"), Var("o"))
    matched = match_mappings(pattern, hub.ontology, registry)
    assert len(matched) == len(registry.mappings)


def test_subproperty_expansion():
    ontology = load_ontology(
        f"<{BT}p1> <http://www.w3.org/2000/01/rdf-schema#subPropertyOf> <{BT}p0> .\n")
    doc = (
        "prefix bt: http://portal.bt-hypercat.com/ontologies/bt-hypercat#\n"
        "prefix ex: http://x.example/\n"
        "prefix xsd: http://www.w3.org/2001/XMLSchema#\n"
        "mappingId m:p1\n"
        "target ex:{t.id} bt:p1 \"{t.id}\"^^xsd:string .\n"
        "source SELECT t.id FROM t\n")
    from semhub.mappings import parse_mapping_document
    registry = parse_mapping_document(doc)
    pattern = TriplePattern(Var("s"), Iri(BT + "p0"), Var("o"))
    assert [m.id for m, _ in match_mappings(pattern, ontology, registry)] == ["m:p1"]


# --- evaluate_bgp -----------------------------------------------------------


def test_feed_bgp_two_solutions(hub):
    ctx = hub.context("sensors")
    table = evaluate_bgp(
        [TriplePattern(Var("s"), Iri(RDF_TYPE), Iri(BT + "Feed"))], ctx)
    values = sorted(sol["s"].value for sol in table.solutions)
    assert values == [SENSORS + "feeds/f1", SENSORS + "feeds/f2"]


def test_join_feeds_to_datastreams(hub):
    ctx = hub.context("sensors")
    table = evaluate_bgp([
        TriplePattern(Var("f"), Iri(BT + "hasSensorStream"), Var("d")),
        TriplePattern(Var("d"), Iri(BT + "datastream_id"), Var("i")),
    ], ctx)
    assert len(table.solutions) == 3
    assert {sol["i"].lexical for sol in table.solutions} == {"0", "1"}


def test_empty_pattern_gives_empty_join(hub):
    ctx = hub.context("sensors")
    table = evaluate_bgp([
        TriplePattern(Var("f"), Iri(BT + "hasSensorStream"), Var("d")),
        TriplePattern(Var("d"), Iri(BT + "nonexistent_property"), Var("x")),
    ], ctx)
    assert table.solutions == []


# --- eval_expr --------------------------------------------------------------


def _num(x, dt=XSD_DOUBLE):
    return Literal(str(x), datatype=dt)


def test_bounding_box_arithmetic():
    expr = BinaryOp(">", Var("a"), BinaryOp("-", Var("b"), _num(0.1)))
    assert eval_expr(expr, {"a": _num(53.40), "b": _num(53.48)}) is True
    assert eval_expr(expr, {"a": _num(53.30), "b": _num(53.48)}) is False


def test_bound_unbound_is_false():
    expr = FuncCall("BOUND", (Var("d"),))
    assert eval_expr(expr, {}) is False
    assert eval_expr(expr, {"d": Iri("http://x.example/d")}) is True


def test_year_of_datetime_cast():
    expr = FuncCall("http://www.w3.org/2001/XMLSchema#integer", (
        FuncCall("YEAR", (FuncCall(XSD_DATETIME, (
            Literal("2017-07-14T02:40:00Z", datatype=XSD_STRING),)),)),))
    comparison = BinaryOp("=", expr, Literal("2017", datatype=XSD_INTEGER))
    assert eval_expr(comparison, {}) is True


def test_year_comparison_chronological():
    newer = Literal("2018-06-01", datatype=XSD_STRING)
    older = Literal("2016-05-23T10:40:00Z", datatype=XSD_DATETIME)
    expr = BinaryOp(
        ">",
        FuncCall("http://www.w3.org/2001/XMLSchema#integer",
                 (FuncCall("YEAR", (FuncCall(XSD_DATETIME, (Var("date"),)),)),)),
        FuncCall("http://www.w3.org/2001/XMLSchema#integer",
                 (FuncCall("YEAR", (FuncCall(XSD_DATETIME, (Var("event_date"),)),)),)))
    assert eval_expr(expr, {"date": newer, "event_date": older}) is True
    assert eval_expr(expr, {"date": older, "event_date": newer}) is False


def test_regex_substring_match():
    expr = FuncCall("REGEX", (FuncCall("STR", (Var("t"),)),
                              Literal(" Pollutant ", datatype=XSD_STRING)))
    title = Literal("European Pollutant Release register", datatype=XSD_STRING)
    assert eval_expr(expr, {"t": title}) is True
    assert eval_expr(expr, {"t": Literal("pollutant digest", datatype=XSD_STRING)}) is False


def test_type_error_drops_solution():
    expr = BinaryOp(">", Var("a"), _num(1))
    assert eval_expr(expr, {"a": Literal("not a number", datatype=XSD_STRING)}) is False
    assert eval_expr(expr, {}) is False  # unbound


def test_and_error_semantics():
    false_side = BinaryOp(">", _num(1), _num(2))
    error_side = BinaryOp(">", Var("missing"), _num(1))
    assert eval_expr(BinaryOp("&&", false_side, error_side), {}) is False
    assert eval_expr(BinaryOp("&&", error_side, false_side), {}) is False
    true_side = BinaryOp("<", _num(1), _num(2))
    assert eval_expr(BinaryOp("&&", true_side, error_side), {}) is False


def test_numeric_promotion_int_to_double():
    expr = BinaryOp("=", _num(2, XSD_INTEGER), _num(2.0))
    assert eval_expr(expr, {}) is True


# --- evaluate_query ----------------------------------------------------------


def test_feed_query_returns_two_iris(hub):
    from semhub import sample_queries as corpus
    table = evaluate_query(parse_query(corpus.FEEDS_QUERY), hub.context("sensors"))
    assert sorted(s["s"].value for s in table.solutions) == [
        SENSORS + "feeds/f1", SENSORS + "feeds/f2"]


def test_distinct_collapses_duplicate_values(hub):
    query = ("PREFIX hypercat: <http://portal.bt-hypercat.com/ontologies/bt-hypercat#>\n"
             "SELECT DISTINCT ?v WHERE { ?f hypercat:feed_exposure ?v . }")
    table = evaluate_query(parse_query(query), hub.context("default"))
    assert sorted(s["v"].lexical for s in table.solutions) == ["indoor", "outdoor"]


def test_datastream_query_across_both_databases(hub):
    from semhub import sample_queries as corpus
    table = evaluate_query(parse_query(corpus.DATASTREAMS_QUERY),
                           hub.context("default"))
    assert len(table.solutions) == 5


def test_service_rejected_at_this_level(hub):
    from semhub import sample_queries as corpus
    with pytest.raises(UnsupportedFeatureError):
        evaluate_query(parse_query(corpus.BUSSTOP_QUERY), hub.context("default"))


# --- oracle equivalence and algebraic invariants ------------------------------


def test_corpus_oracle_equivalence(hub):
    graph = union_graph(hub)
    for text in full_corpus():
        ast = parse_query(text)
        engine = evaluate_query(ast, hub.context("default"))
        oracle = graph.evaluate(ast, hub.ontology)
        assert canonical_rows(engine) == canonical_rows(oracle), text


def test_subsumption_soundness(hub):
    """Answers for a class always include answers for each of its subclasses."""
    ctx = hub.context("default")
    prologue = "PREFIX hypercat: <http://portal.bt-hypercat.com/ontologies/bt-hypercat#>\n"
    pairs = [("Item", "Feed"), ("Feed", "SensorFeed"), ("Feed", "EventFeed"),
             ("Datastream", "SensorStream"), ("Datastream", "EventStream")]
    for super_class, sub_class in pairs:
        sup = evaluate_query(parse_query(
            prologue + f"SELECT ?s WHERE {{ ?s a hypercat:{super_class} . }}"), ctx)
        sub = evaluate_query(parse_query(
            prologue + f"SELECT ?s WHERE {{ ?s a hypercat:{sub_class} . }}"), ctx)
        sup_values = {s["s"].value for s in sup.solutions}
        sub_values = {s["s"].value for s in sub.solutions}
        assert sub_values <= sup_values


def test_join_commutativity_at_result_level(hub):
    ctx = hub.context("sensors")
    patterns = [
        TriplePattern(Var("f"), Iri(BT + "hasSensorStream"), Var("d")),
        TriplePattern(Var("d"), Iri(BT + "datastream_id"), Var("i")),
        TriplePattern(Var("f"), Iri(BT + "feed_id"), Var("fid")),
    ]
    reference = None
    for perm in itertools.permutations(patterns):
        table = evaluate_bgp(list(perm), ctx)
        rows = frozenset(
            tuple(sorted((k, canonical_key(v)) for k, v in sol.items()))
            for sol in table.solutions)
        if reference is None:
            reference = rows
        assert rows == reference


def test_filter_monotonicity(hub):
    ctx = hub.context("default")
    rng = random.Random(7)
    base = ("PREFIX hypercat: <http://portal.bt-hypercat.com/ontologies/bt-hypercat#>\n"
            "SELECT ?d ?v WHERE { ?d hypercat:datastream_current_value ?v . %s}")
    unfiltered = evaluate_query(parse_query(base % ""), ctx)
    for _ in range(10):
        bound = round(rng.uniform(-5, 30), 2)
        op = rng.choice([">", "<"])
        filtered = evaluate_query(
            parse_query(base % f"FILTER(?v {op} {bound}) "), ctx)
        assert len(filtered.solutions) <= len(unfiltered.solutions)
        kept = {tuple(canonical_key(s[v]) for v in filtered.variables if v in s)
                for s in filtered.solutions}
        everything = {tuple(canonical_key(s[v]) for v in unfiltered.variables if v in s)
                      for s in unfiltered.solutions}
        assert kept <= everything


def test_datetime_comparison_is_chronological():
    earlier = Literal("2017-07-14T02:40:00Z", datatype=XSD_DATETIME)
    later = Literal("2017-07-14T04:40:00+01:00", datatype=XSD_DATETIME)  # 03:40Z
    assert eval_expr(BinaryOp("<", Var("a"), Var("b")),
                     {"a": earlier, "b": later}) is True
    assert eval_expr(BinaryOp(">", Var("a"), Var("b")),
                     {"a": earlier, "b": later}) is False
    same_instant = Literal("2017-07-14T03:40:00+01:00", datatype=XSD_DATETIME)
    utc_form = Literal("2017-07-14T02:40:00Z", datatype=XSD_DATETIME)
    assert eval_expr(BinaryOp("=", Var("a"), Var("b")),
                     {"a": same_instant, "b": utc_form}) is True


def test_oracle_equivalence_on_generated_bulk_fixture(hub, data_dir, tmp_path):
    """Same-engine/oracle agreement on a much larger generated database."""
    import random as random_mod

    from semhub.mappings import parse_mapping_document
    from semhub.relstore import Database, load_fixture
    from semhub.rewriter import EvalContext, Source, evaluate_query as run

    rng = random_mod.Random(99)
    schema = "\n".join(
        l for l in (data_dir / "sensors.fix").read_text().split("\n")
        if not l.startswith("row "))
    blocks = {"feed": [], "datastream": [], "datapoint": []}
    statuses = ["live", "frozen", "broken"]
    for i in range(120):
        tag = "|".join(rng.sample(["a", "b", "c", "d"], rng.randint(0, 3)))
        title = f"Feed {i}" if rng.random() < 0.8 else "\\N"
        blocks["feed"].append(
            f"row g{i}\tmaker{i % 7}\t{1500000000 + i}\t{title}\thttp://u.example/{i}"
            f"\t{rng.choice(statuses)}\t{'true' if i % 3 == 0 else 'false'}\tdesc"
            f"\t\\N\t\\N\t\\N\t{tag}\tLoc{i % 5}\toutdoor\tdom{i % 4}\tfixed"
            f"\t{round(rng.uniform(50, 56), 3)}\t{round(rng.uniform(-3, 1), 3)}"
            f"\t\\N\t\\N")
    for i in range(300):
        feed = f"g{rng.randrange(120)}"
        blocks["datastream"].append(
            f"row {feed}\ts{i}\t\t{1500003600 + i}\t{round(rng.uniform(-10, 40), 2)}"
            f"\t\\N\t\\N\t\\N\t\\N\t\\N")
    for i in range(100):
        blocks["datapoint"].append(
            f"row p{i}\t{1500007200 + i}\t{round(rng.uniform(-3, 0), 3)}"
            f"\t{round(rng.uniform(50, 54), 3)}\t{round(rng.uniform(-2, 1), 3)}"
            f"\t{round(rng.uniform(51, 56), 3)}")
    parts = schema.split("\n\n")
    text = "\n\n".join(
        part + "\n" + "\n".join(blocks[part.split("\n")[0].split()[1]])
        for part in parts if part.strip())
    db = Database("bulk")
    load_fixture(db, text)
    registry = parse_mapping_document((data_dir / "sensors.map").read_text())
    ctx = EvalContext(hub.ontology, [Source(registry, db)])
    graph = GraphStore(materialize_all(registry, db))

    prologue = ("PREFIX hypercat: <http://portal.bt-hypercat.com/ontologies/bt-hypercat#>\n"
                "PREFIX wgs84_pos: <http://www.w3.org/2003/01/geo/wgs84_pos#>\n")
    queries = [
        "SELECT DISTINCT ?s WHERE { ?s a hypercat:Item . }",
        "SELECT ?f ?t WHERE { ?f hypercat:feed_title ?t . ?f hypercat:feed_status \"live\" . }",
        "SELECT DISTINCT ?tag WHERE { ?f hypercat:feed_tag ?tag . }",
        "SELECT ?f ?d ?v WHERE { ?f hypercat:hasSensorStream ?d . "
        "?d hypercat:datastream_current_value ?v . FILTER(?v > 20.0) }",
        "SELECT ?f ?lat WHERE { ?f wgs84_pos:lat ?lat . FILTER(?lat > 53.0 - 0.5) }",
        "SELECT ?t WHERE { <http://api.bt-hypercat.com/sensors/feeds/g7> "
        "hypercat:feed_title ?t . }",
    ]
    for body in queries:
        ast = parse_query(prologue + body)
        assert canonical_rows(run(ast, ctx)) \
            == canonical_rows(graph.evaluate(ast, hub.ontology)), body
