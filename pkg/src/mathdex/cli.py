"""Command-line umbrella: corpus | extract | graph | unfold | index | search | serve.

Every flag mirrors a PipelineConfig field; a config file (TOML or JSON) can
be passed with --config and individual flags override it.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import PipelineConfig, load_config
from .corpus import count_icm_citations, load_metadata, select_journals
from .index import SearchFilters
from .pipeline import Pipeline
from .store import CorpusStore


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    config = load_config(args.config) if getattr(args, "config", None) else PipelineConfig()
    overrides = {
        "store": "store_path",
        "provider": "provider",
        "client": "client",
        "batch_size": "batch_size",
        "window": "window_length",
        "overlap": "overlap",
        "expander": "expander",
        "budget": "budget",
        "embedder": "embedder",
        "dim": "embed_dim",
        "host": "host",
        "port": "port",
    }
    for arg_name, field in overrides.items():
        value = getattr(args, arg_name, None)
        if value is not None:
            setattr(config, field, value)
    return config


def _pipeline(args: argparse.Namespace) -> Pipeline:
    config = _build_config(args)
    return Pipeline(CorpusStore(config.store_path), config)


def _print_json(obj) -> None:
    print(json.dumps(obj, ensure_ascii=False, indent=2))


def _print_jsonl(objs) -> None:
    for obj in objs:
        print(json.dumps(obj, ensure_ascii=False))


# -- command handlers ---------------------------------------------------


def cmd_select_journals(args) -> int:
    meta = load_metadata(args.metadata)
    records = meta.journals
    if meta.events:
        counts = count_icm_citations(meta.events, args.year_from, args.year_to)
        records = [
            type(r)(
                journal_id=r.journal_id,
                name=r.name,
                papers_2007_2021=r.papers_2007_2021,
                icm_citations_2007_2021=counts.get(r.journal_id, 0),
            )
            for r in records
        ]
    selected = select_journals(records, args.citations, args.min_papers)
    _print_json({"selected": sorted(selected), "total_journals": len(records)})
    return 0


def cmd_ingest(args) -> int:
    pipeline = _pipeline(args)
    meta = load_metadata(args.meta)
    by_id = {m.doc_id: m for m in meta.documents}
    ingested, skipped = [], []
    for path in sorted(Path(args.directory).glob("*.md")):
        doc_id = path.stem
        if doc_id not in by_id:
            skipped.append(doc_id)
            continue
        pipeline.store.ingest(path.read_text("utf-8"), by_id[doc_id], replace=args.replace)
        ingested.append(doc_id)
    _print_json({"ingested": ingested, "skipped_no_metadata": skipped})
    return 0


def cmd_locate(args) -> int:
    pipeline = _pipeline(args)
    spans = pipeline.locate(args.doc_id, refresh_patterns=args.refresh_patterns)
    _print_jsonl(
        {
            "doc_id": s.doc_id,
            "start": s.start,
            "end": s.end,
            "kind_hint": s.kind_hint.value if s.kind_hint else None,
        }
        for s in spans
    )
    return 0


def cmd_extract_run(args) -> int:
    pipeline = _pipeline(args)
    _statements, report = pipeline.extract_document(args.doc_id)
    _print_json(report)
    return 0


def cmd_graph_build(args) -> int:
    pipeline = _pipeline(args)
    _print_json(pipeline.build_document_graph(args.doc_id))
    return 0


def cmd_graph_layers(args) -> int:
    pipeline = _pipeline(args)
    export = pipeline.build_document_graph(args.doc_id)
    layers = {node["stmt_id"]: node["layer"] for node in export["nodes"]}
    _print_json(
        {
            "doc_id": args.doc_id,
            "max_layer": max(layers.values(), default=-1),
            "layers": layers,
        }
    )
    return 0


def cmd_unfold(args) -> int:
    pipeline = _pipeline(args)
    unfolded = pipeline.unfold_document(args.doc_id)
    _print_jsonl(u.to_json_dict() for u in unfolded)
    return 0


def cmd_index_build(args) -> int:
    pipeline = _pipeline(args)
    index = pipeline.build_index()
    _print_json({"entries": len(index), "dim": index.dim, "snapshot": str(pipeline.store.snapshot_path)})
    return 0


def cmd_search(args) -> int:
    pipeline = _pipeline(args)
    filters = SearchFilters(
        kinds=frozenset(args.kind) if args.kind else None,
        year_from=args.year_from,
        year_to=args.year_to,
        journal_ids=frozenset(args.journal) if args.journal else None,
        source_kind=args.source_kind,
    )
    hits = pipeline.search(args.query, k=args.k, filters=filters)
    _print_jsonl(hits)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    pipeline = _pipeline(args)
    app = create_app(pipeline)
    uvicorn.run(app, host=pipeline.config.host, port=pipeline.config.port)
    return 0


# -- parser ---------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--store", help="store directory (default: ./store)")
    parser.add_argument("--config", help="TOML or JSON config file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mathdex")
    sub = parser.add_subparsers(dest="command", required=True)

    corpus = sub.add_parser("corpus", help="journal selection and ingestion")
    corpus_sub = corpus.add_subparsers(dest="subcommand", required=True)
    sel = corpus_sub.add_parser("select-journals", help="filter journals by citation counts")
    sel.add_argument("--metadata", required=True, help="JSON Lines metadata file")
    sel.add_argument("--citations", type=int, default=50, help="strict lower bound")
    sel.add_argument("--min-papers", type=int, default=100, help="inclusive lower bound")
    sel.add_argument("--year-from", type=int, default=2007)
    sel.add_argument("--year-to", type=int, default=2021)
    sel.set_defaults(func=cmd_select_journals)
    ing = corpus_sub.add_parser("ingest", help="ingest a directory of .md documents")
    ing.add_argument("directory")
    ing.add_argument("--meta", required=True, help="JSON Lines file with document metadata")
    ing.add_argument("--replace", action="store_true")
    _add_common(ing)
    ing.set_defaults(func=cmd_ingest)

    extract = sub.add_parser("extract", help="statement extraction")
    extract_sub = extract.add_subparsers(dest="subcommand", required=True)
    loc = extract_sub.add_parser("locate", help="print candidate spans as JSON Lines")
    loc.add_argument("doc_id")
    loc.add_argument("--provider", choices=["heuristic", "model"])
    loc.add_argument("--refresh-patterns", action="store_true")
    _add_common(loc)
    loc.set_defaults(func=cmd_locate)
    run = extract_sub.add_parser("run", help="run extraction for one document")
    run.add_argument("doc_id")
    run.add_argument("--client", choices=["mock", "model"])
    run.add_argument("--provider", choices=["heuristic", "model"])
    run.add_argument("--batch-size", type=int, dest="batch_size")
    run.add_argument("--window", type=int)
    run.add_argument("--overlap", type=int)
    _add_common(run)
    run.set_defaults(func=cmd_extract_run)

    graph = sub.add_parser("graph", help="dependency graphs")
    graph_sub = graph.add_subparsers(dest="subcommand", required=True)
    gb = graph_sub.add_parser("build", help="build and print the graph export")
    gb.add_argument("doc_id")
    _add_common(gb)
    gb.set_defaults(func=cmd_graph_build)
    gl = graph_sub.add_parser("layers", help="print the layer assignment")
    gl.add_argument("doc_id")
    _add_common(gl)
    gl.set_defaults(func=cmd_graph_layers)

    unf = sub.add_parser("unfold", help="unfold one document's statements")
    unf.add_argument("doc_id")
    unf.add_argument("--expander", choices=["concat", "model"])
    unf.add_argument("--budget", type=int)
    _add_common(unf)
    unf.set_defaults(func=cmd_unfold)

    index = sub.add_parser("index", help="build and query the vector index")
    index_sub = index.add_subparsers(dest="subcommand", required=True)
    ib = index_sub.add_parser("build", help="embed unfolded statements and write the snapshot")
    ib.add_argument("--embedder", choices=["test", "service"])
    ib.add_argument("--dim", type=int)
    _add_common(ib)
    ib.set_defaults(func=cmd_index_build)
    isearch = index_sub.add_parser("search", help="top-k query against the snapshot")
    _add_search_args(isearch)
    isearch.set_defaults(func=cmd_search)

    search = sub.add_parser("search", help="alias for `index search`")
    _add_search_args(search)
    search.set_defaults(func=cmd_search)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)
    _add_common(serve)
    serve.set_defaults(func=cmd_serve)

    return parser


def _add_search_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("query")
    parser.add_argument("-k", type=int, default=10)
    parser.add_argument("--kind", action="append", help="repeatable kind filter")
    parser.add_argument("--year-from", type=int)
    parser.add_argument("--year-to", type=int)
    parser.add_argument("--journal", action="append", help="repeatable journal filter")
    parser.add_argument("--source-kind", choices=["journal_paper", "textbook"])
    parser.add_argument("--embedder", choices=["test", "service"])
    parser.add_argument("--dim", type=int)
    _add_common(parser)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
