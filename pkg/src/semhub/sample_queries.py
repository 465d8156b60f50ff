"""Preloaded example queries served to clients and exercised by the test suite."""
from __future__ import annotations

FEEDS_QUERY = """\
PREFIX hypercat: <http://portal.bt-hypercat.com/ontologies/bt-hypercat#>
SELECT DISTINCT ?s
WHERE{ ?s a hypercat:Feed . }
"""

DATASTREAMS_QUERY = """\
PREFIX hypercat: <http://portal.bt-hypercat.com/ontologies/bt-hypercat#>
SELECT DISTINCT ?s
WHERE{ ?s a hypercat:Datastream . }
"""

BUSSTOP_QUERY = """\
PREFIX geo: <http://www.w3.org/2003/01/geo/wgs84_pos#>
PREFIX hypercat: <http://portal.bt-hypercat.com/ontologies/bt-hypercat#>
PREFIX naptan: <http://transport.data.gov.uk/def/naptan/>
PREFIX skos: <http://www.w3.org/2004/02/skos/core#>

SELECT distinct ?d ?at_time ?western_longitude ?southern_latitude
       ?eastern_longitude ?northern_latitude ?stop ?lat ?long
WHERE {
   SERVICE <http://gov.tso.co.uk/transport/sparql>
   {
      ?stop a naptan:CustomBusStop;
            naptan:naptanCode ?naptanCode;
            naptan:stopValidity ?stopValidity;
            naptan:street "Kingswood Road";
            geo:lat ?lat;
            geo:long ?long.
      ?stopValidity naptan:stopStatus ?stopStatus.
      ?stopStatus skos:prefLabel "Active"@en.
   }
   SERVICE <http://portal.bt-hypercat.com/BT-SPARQL-Endpoint/sparql>
    {
      ?d a hypercat:Datapoint.
      ?d hypercat:datapoint_at_time ?at_time.
      ?d hypercat:datapoint_western_longitude ?western_longitude.
      ?d hypercat:datapoint_southern_latitude ?southern_latitude.
      ?d hypercat:datapoint_eastern_longitude ?eastern_longitude.
      ?d hypercat:datapoint_northern_latitude ?northern_latitude.
      FILTER (?western_longitude > ?long - 0.1)
      FILTER (?southern_latitude > ?lat - 0.1)
      FILTER (?eastern_longitude < ?long + 0.1)
      FILTER (?northern_latitude < ?lat + 0.1)
   }
   FILTER(BOUND(?d))
}
"""

AIRPORT_QUERY = """\
PREFIX geo: <http://www.w3.org/2003/01/geo/wgs84_pos#>
PREFIX prop: <http://dbpedia.org/property/>
PREFIX hypercat: <http://portal.bt-hypercat.com/ontologies/bt-hypercat#>
PREFIX omgeo: <http://www.ontotext.com/owlim/geo#>
PREFIX dbpediar: <http://dbpedia.org/resource/>
PREFIX dbp-ont: <http://dbpedia.org/ontology/>
PREFIX ff: <http://factforge.net/>
PREFIX om: <http://www.ontotext.com/owlim/>

SELECT distinct ?e ?event_date ?western_longitude ?southern_latitude
       ?eastern_longitude ?northern_latitude ?label ?lat ?long
WHERE {
   SERVICE <http://factforge.net/sparql>
   {
      dbpediar:London geo:lat ?latBase;
      geo:long ?longBase.
      ?airport omgeo:nearby(?latBase ?longBase "50mi");
               a dbp-ont:Airport;
               ff:preferredLabel ?label;
               om:hasRDFRank ?RR;
               geo:lat ?lat;
               geo:long ?long.
   }
   SERVICE <http://portal.bt-hypercat.com/BT-SPARQL-Endpoint/sparql>
   {
      ?e a hypercat:Event.
      ?e hypercat:event_sent ?event_date.
      ?e hypercat:event_western_longitude ?western_longitude.
      ?e hypercat:event_southern_latitude ?southern_latitude.
      ?e hypercat:event_eastern_longitude ?eastern_longitude.
      ?e hypercat:event_northern_latitude ?northern_latitude.
      FILTER (?western_longitude > ?long - 0.5)
      FILTER (?southern_latitude > ?lat - 0.5)
      FILTER (?eastern_longitude < ?long + 0.5)
      FILTER (?northern_latitude < ?lat + 0.5)
   }
   FILTER(BOUND(?e))
}
"""

POLLUTANT_QUERY = """\
PREFIX hypercat: <http://portal.bt-hypercat.com/ontologies/bt-hypercat#>
PREFIX xsd:   <http://www.w3.org/2001/XMLSchema#>
PREFIX purl: <http://purl.org/dc/terms/>

SELECT distinct ?e ?event_date ?western_longitude ?southern_latitude
       ?eastern_longitude ?northern_latitude ?t ?date
WHERE {
   SERVICE <http://semantic.eea.europa.eu/sparql>
   {
      ?s purl:title ?t.
      ?s purl:issued ?date
      FILTER(regex(str(?t)," Pollutant "))
   }
   SERVICE <http://portal.bt-hypercat.com/BT-SPARQL-Endpoint/sparql>
   {
      ?e a hypercat:Event.
      ?e hypercat:event_sent ?event_date.
      ?e hypercat:event_western_longitude ?western_longitude.
      ?e hypercat:event_southern_latitude ?southern_latitude.
      ?e hypercat:event_eastern_longitude ?eastern_longitude.
      ?e hypercat:event_northern_latitude ?northern_latitude.
      FILTER(BOUND(?e))
   }
   FILTER(xsd:integer(year(xsd:dateTime(?date))) >
          xsd:integer(year(xsd:dateTime(?event_date))))
}
"""

EXAMPLES = {
    "feeds": {
        "title": "All feeds (sensors database)",
        "endpoint": "/sparql/sensors",
        "query": FEEDS_QUERY,
    },
    "datastreams": {
        "title": "All datastreams (with subclass reasoning)",
        "endpoint": "/sparql/federated",
        "query": DATASTREAMS_QUERY,
    },
    "busstop": {
        "title": "Datapoints near an active bus stop",
        "endpoint": "/sparql/federated",
        "query": BUSSTOP_QUERY,
    },
    "airport": {
        "title": "Events close to airports near London",
        "endpoint": "/sparql/federated",
        "query": AIRPORT_QUERY,
    },
    "pollutant": {
        "title": "Events older than a pollutant release",
        "endpoint": "/sparql/federated",
        "query": POLLUTANT_QUERY,
    },
}
