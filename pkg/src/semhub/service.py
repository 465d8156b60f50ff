"""HTTP service: SPARQL protocol routes, catalogues, and the query editor assets.

Two levels are exposed: /sparql/<db> answers straight from one database (the
reserved name "default" spans all of them), while /sparql/federated accepts
SERVICE blocks and drives the federation layer.  Queries arrive as a GET
`query` parameter or a POST body; results are negotiated among the five
formats via the `format` parameter or the Accept header.
"""
from __future__ import annotations

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .catalogue import CATALOGUE_MEDIA_TYPE, build_catalogue, catalogue_triples
from .federation import FederationError
from .hub import Hub
from .rdf import serialize_ntriples
from .results import UnknownFormatError, format_results
from .rewriter import EvaluationError
from .sparql import SparqlSyntaxError, parse_query

_ACCEPT_FORMATS = {
    "application/sparql-results+json": "json",
    "application/json": "json",
    "application/sparql-results+xml": "xml",
    "application/xml": "xml",
    "text/xml": "xml",
    "text/csv": "csv",
    "text/tab-separated-values": "tsv",
    "text/html": "html",
}

SPARQL_QUERY_MEDIA_TYPE = "application/sparql-query"


def _format_from_accept(accept: str | None, default: str) -> str:
    if not accept:
        return default
    for item in accept.split(","):
        media = item.split(";")[0].strip().lower()
        if media in _ACCEPT_FORMATS:
            return _ACCEPT_FORMATS[media]
        if media == "*/*":
            return default
    return default


async def _extract_query(request: Request) -> str | None:
    query = request.query_params.get("query")
    if request.method == "POST":
        content_type = request.headers.get("content-type", "").split(";")[0].strip()
        if content_type == SPARQL_QUERY_MEDIA_TYPE:
            body = await request.body()
            return body.decode("utf-8")
        if content_type in ("application/x-www-form-urlencoded", "multipart/form-data"):
            form = await request.form()
            value = form.get("query")
            if value is not None:
                return str(value)
        body = await request.body()
        if body and query is None:
            return body.decode("utf-8")
    return query


def create_app(hub: Hub) -> FastAPI:
    app = FastAPI(title="semhub", description="Semantic IoT data hub", version="0.1.0")

    async def handle_sparql(request: Request, db_name: str | None) -> Response:
        if db_name is not None and db_name not in hub.database_names():
            return PlainTextResponse(
                f"unknown database route: {db_name!r}; "
                f"available: {', '.join(hub.database_names())}",
                status_code=404)
        query_text = await _extract_query(request)
        if not query_text:
            return PlainTextResponse(
                "missing SPARQL query: use the 'query' parameter or POST the "
                "query text", status_code=400)
        fmt = request.query_params.get("format")
        if fmt is None:
            fmt = _format_from_accept(request.headers.get("accept"),
                                      hub.config.default_format)
        try:
            ast = parse_query(query_text)
            if db_name is None:
                table = hub.evaluate_federated(ast)
            else:
                table = hub.evaluate(db_name, ast)
            payload, media_type = format_results(table, fmt)
        except SparqlSyntaxError as exc:  # includes unsupported features
            return PlainTextResponse(str(exc), status_code=400)
        except UnknownFormatError as exc:
            return PlainTextResponse(str(exc), status_code=415)
        except FederationError as exc:
            return PlainTextResponse(str(exc), status_code=502)
        except EvaluationError as exc:
            return PlainTextResponse(str(exc), status_code=500)
        return Response(content=payload, media_type=media_type)

    @app.get("/sparql/federated")
    @app.post("/sparql/federated")
    async def sparql_federated(request: Request) -> Response:
        return await handle_sparql(request, None)

    @app.get("/sparql/{db_name}")
    @app.post("/sparql/{db_name}")
    async def sparql_database(db_name: str, request: Request) -> Response:
        return await handle_sparql(request, db_name)

    @app.get("/cat")
    async def hypercat_catalogue() -> Response:
        doc = build_catalogue(hub)
        return JSONResponse(content=doc.model_dump(by_alias=True),
                            media_type=CATALOGUE_MEDIA_TYPE)

    @app.get("/cat-rdf")
    async def hypercat_catalogue_rdf() -> Response:
        text = serialize_ntriples(catalogue_triples(hub))
        return Response(content=text, media_type="application/n-triples")

    ui_dir = None
    if hub.config.ui_assets:
        candidate = hub.config.resolve(hub.config.ui_assets)
        if candidate.is_dir():
            ui_dir = candidate

    @app.get("/")
    async def root():
        info = {
            "service": "semhub",
            "sparql": hub.sparql_routes(),
            "catalogues": ["/cat", "/cat-rdf"],
        }
        if ui_dir is not None:
            info["ui"] = "/ui/"
        return info

    if ui_dir is not None:
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def announced_routes(hub: Hub) -> list[str]:
    return hub.sparql_routes() + ["/cat", "/cat-rdf"]
