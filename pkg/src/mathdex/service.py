"""HTTP facade over the pipeline: search, statement detail, document graphs,
health, and config echo, consumed by the CLI and the browser UI.

Search requests run against an immutable index snapshot reference; rebuilds
swap the reference atomically, so in-flight requests always see a coherent
index.
"""

from __future__ import annotations

import time
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .index import SearchFilters, VectorIndex
from .pipeline import Pipeline

MAX_K = 100


class SearchRequest(BaseModel):
    query: str = ""
    k: int = 10
    filters: dict | None = None


def create_app(pipeline: Pipeline, index: VectorIndex | None = None) -> FastAPI:
    app = FastAPI(title="mathdex", version="0.1.0")
    app.state.pipeline = pipeline
    app.state.index = index if index is not None else pipeline.load_index()

    app.add_middleware(
        CORSMiddleware,
        allow_origins=pipeline.config.cors_origins,
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def _malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": "malformed request"})

    @app.post("/v1/search")
    def search(body: SearchRequest):
        if app.state.index is None:
            raise HTTPException(status_code=503, detail="index not ready")
        k = max(0, min(body.k, MAX_K))
        if k > 0 and not body.query.strip():
            raise HTTPException(status_code=400, detail="query must be non-empty")
        filters = SearchFilters.from_dict(body.filters)
        started = time.perf_counter()
        hits = pipeline.search(body.query, k=k, filters=filters, index=app.state.index)
        took_ms = (time.perf_counter() - started) * 1000.0
        response = {"hits": hits, "took_ms": took_ms, "k": k}
        if k != body.k:
            response["k_clamped"] = True
        return response

    @app.get("/v1/statements/{stmt_id}")
    def statement_detail(stmt_id: str):
        stmt = pipeline.store.get_statement(stmt_id)
        if stmt is None:
            raise HTTPException(status_code=404, detail=f"unknown statement {stmt_id!r}")
        unfolded = pipeline.store.get_unfolded(stmt_id)
        graph = pipeline.store.load_graph_json(stmt.doc_id)
        deps: list[str] = []
        dependents: list[str] = []
        layer = None
        if graph:
            deps = [e["source"] for e in graph.get("edges", []) if e["target"] == stmt_id]
            dependents = [e["target"] for e in graph.get("edges", []) if e["source"] == stmt_id]
            for node in graph.get("nodes", []):
                if node["stmt_id"] == stmt_id:
                    layer = node.get("layer")
                    break
        return {
            "statement": stmt.to_json_dict(),
            "unfolded": unfolded.to_json_dict() if unfolded else None,
            "deps": deps,
            "dependents": dependents,
            "layer": layer,
        }

    @app.get("/v1/documents/{doc_id}/graph")
    def document_graph(doc_id: str):
        graph = pipeline.store.load_graph_json(doc_id)
        if graph is None:
            raise HTTPException(status_code=404, detail=f"no graph for document {doc_id!r}")
        return graph

    @app.get("/healthz")
    def healthz():
        return {
            "status": "ok",
            "index_size": len(app.state.index) if app.state.index is not None else 0,
            "docs": pipeline.store.count_documents(),
            "statements": pipeline.store.total_statements(),
        }

    @app.get("/v1/config")
    def config_echo():
        return pipeline.config.to_dict()

    ui_dir = pipeline.config.ui_dir
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
