from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semhub.rdf import (
    Iri,
    Literal,
    NTriplesError,
    Triple,
    XSD_BOOLEAN,
    XSD_DOUBLE,
    XSD_INTEGER,
    XSD_STRING,
    canonical_key,
    format_datetime,
    parse_datetime,
    parse_ntriples,
    serialize_ntriples,
)

FEED_ID_LINE = (
    '<http://api.bt-hypercat.com/sensors/feeds/feedID> '
    '<http://portal.bt-hypercat.com/ontologies/bt-hypercat#feed_id> '
    '"feedID"^^<http://www.w3.org/2001/XMLSchema#string> .'
)


def test_serialize_feed_id_triple_exact():
    triple = Triple(
        Iri("http://api.bt-hypercat.com/sensors/feeds/feedID"),
        Iri("http://portal.bt-hypercat.com/ontologies/bt-hypercat#feed_id"),
        Literal("feedID", datatype=XSD_STRING))
    assert serialize_ntriples({triple}) == FEED_ID_LINE + "\n"


def test_parse_feed_id_line():
    (triple,) = parse_ntriples(FEED_ID_LINE)
    assert triple.subject.value == "http://api.bt-hypercat.com/sensors/feeds/feedID"
    assert triple.object == Literal("feedID", datatype=XSD_STRING)


def test_empty_set_serializes_to_empty_text():
    assert serialize_ntriples(set()) == ""
    assert parse_ntriples("") == set()


def test_double_quote_escaping_round_trips():
    triple = Triple(Iri("http://x.example/s"), Iri("http://x.example/p"),
                    Literal('say "hi"\n', datatype=XSD_STRING))
    text = serialize_ntriples({triple})
    assert '\\"hi\\"' in text and "\\n" in text
    assert parse_ntriples(text) == {triple}


def test_language_tagged_literal_round_trips():
    triple = Triple(Iri("http://x.example/s"), Iri("http://x.example/p"),
                    Literal("Active", language="en"))
    text = serialize_ntriples({triple})
    assert text.strip().endswith('"Active"@en .')
    assert parse_ntriples(text) == {triple}


def test_plain_literal_is_xsd_string():
    (triple,) = parse_ntriples('<http://x.example/s> <http://x.example/p> "v" .')
    assert triple.object == Literal("v", datatype=XSD_STRING)


def test_comments_and_blank_lines_ignored():
    text = "# header\n\n" + FEED_ID_LINE + "\n"
    assert len(parse_ntriples(text)) == 1


def test_malformed_line_reports_line_number():
    with pytest.raises(NTriplesError) as err:
        parse_ntriples(FEED_ID_LINE + "\n<http://x.example/only-subject>\n")
    assert err.value.line == 2


def test_missing_dot_rejected():
    with pytest.raises(NTriplesError):
        parse_ntriples('<http://x.example/s> <http://x.example/p> "v"')


def test_unicode_escape_parses():
    (triple,) = parse_ntriples(
        '<http://x.example/s> <http://x.example/p> "caf\\u00E9" .')
    assert triple.object.lexical == "café"


def test_datetime_parsing_and_formatting():
    parsed = parse_datetime("2017-07-14T02:40:00Z")
    assert parsed is not None and parsed.year == 2017
    assert format_datetime(parsed) == "2017-07-14T02:40:00Z"
    assert parse_datetime("2016-03-15") is not None
    assert parse_datetime("not a date") is None


def test_canonical_key_collapses_equal_numbers():
    a = Literal("21.50", datatype=XSD_DOUBLE)
    b = Literal("21.5", datatype=XSD_DOUBLE)
    c = Literal("21.5", datatype=XSD_INTEGER)  # invalid lexical, still numeric-keyed
    assert canonical_key(a) == canonical_key(b)
    assert canonical_key(a) != canonical_key(Literal("21.5", datatype=XSD_STRING))
    assert canonical_key(Literal("true", datatype=XSD_BOOLEAN)) \
        == canonical_key(Literal("1", datatype=XSD_BOOLEAN))
    assert c is not None


_iri_text = st.text(
    alphabet=st.characters(whitelist_categories=("Ll", "Lu", "Nd"),
                           whitelist_characters="/#-_.~%"),
    min_size=1, max_size=20).map(lambda s: "http://x.example/" + s)

_literal = st.one_of(
    st.builds(lambda lex: Literal(lex, datatype=XSD_STRING),
              st.text(max_size=30)),
    st.builds(lambda n: Literal(str(n), datatype=XSD_INTEGER),
              st.integers(-10**6, 10**6)),
    st.builds(lambda lex, lang: Literal(lex, language=lang),
              st.text(max_size=10),
              st.sampled_from(["en", "de", "en-GB"])),
)

_triples = st.sets(
    st.builds(Triple, st.builds(Iri, _iri_text), st.builds(Iri, _iri_text),
              st.one_of(st.builds(Iri, _iri_text), _literal)),
    max_size=25)


@settings(max_examples=150, deadline=None)
@given(_triples)
def test_ntriples_round_trip_property(triples):
    assert parse_ntriples(serialize_ntriples(triples)) == triples
