"""Semantic IoT data hub: virtual RDF over relational feeds with SPARQL access."""

__version__ = "0.1.0"
