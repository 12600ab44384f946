"""End-to-end orchestration: locate -> structure -> reconcile -> graph ->
unfold -> index -> search, persisting each stage's artifacts in the store.

Distinct documents are processed in parallel up to the configured in-flight
cap; batches within a document always run sequentially in ordinal order
because reconciliation depends on it.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

from .clients import HttpCompletionClient
from .config import PipelineConfig
from .corpus import Document
from .graph import (
    ConcatExpander,
    Expander,
    ModelExpander,
    build_graph,
    graph_to_json,
    partition_layers,
    repair_cycles,
    unfold,
)
from .index import (
    Embedder,
    HashEmbedder,
    IndexEntry,
    SearchFilters,
    ServiceEmbedder,
    VectorIndex,
    build_query_text,
)
from .locator import (
    CandidateSpan,
    HeuristicPatternProvider,
    ModelPatternProvider,
    PatternProvider,
    PatternSet,
    ProviderError,
    locate_candidates,
)
from .store import CorpusStore
from .structurer import (
    RuleBasedStructurerClient,
    CompletionStructurerClient,
    StructuredStatement,
    StructurerClient,
    StructurerError,
    build_windows,
    fallback_statement,
    make_batches,
    reconcile,
    structure_batch,
)

logger = logging.getLogger(__name__)


def _default_provider(config: PipelineConfig) -> PatternProvider:
    if config.provider == "model":
        if not config.completion_service_url:
            raise ValueError("provider 'model' requires completion_service_url")
        client = HttpCompletionClient(config.completion_service_url)
        return ModelPatternProvider(client, sample_chars=config.pattern_sample_chars)
    return HeuristicPatternProvider()


def _default_structurer(config: PipelineConfig) -> StructurerClient:
    if config.client == "model":
        if not config.completion_service_url:
            raise ValueError("client 'model' requires completion_service_url")
        return CompletionStructurerClient(HttpCompletionClient(config.completion_service_url))
    return RuleBasedStructurerClient()


def _default_embedder(config: PipelineConfig) -> Embedder:
    if config.embedder == "service":
        if not config.embed_service_url:
            raise ValueError("embedder 'service' requires embed_service_url")
        return ServiceEmbedder(config.embed_service_url, dim=config.embed_dim)
    return HashEmbedder(dim=config.embed_dim)


def _default_expander(config: PipelineConfig) -> Expander:
    if config.expander == "model":
        if not config.completion_service_url:
            raise ValueError("expander 'model' requires completion_service_url")
        return ModelExpander(HttpCompletionClient(config.completion_service_url))
    return ConcatExpander()


class Pipeline:
    """Wires the stages together over one store and one configuration.

    Any pluggable component (pattern provider, structurer client, embedder,
    expander) can be injected; the defaults follow the configuration.
    """

    def __init__(
        self,
        store: CorpusStore,
        config: PipelineConfig | None = None,
        pattern_provider: PatternProvider | None = None,
        structurer_client: StructurerClient | None = None,
        embedder: Embedder | None = None,
        expander: Expander | None = None,
    ) -> None:
        self.store = store
        self.config = config or PipelineConfig()
        self.pattern_provider = pattern_provider or _default_provider(self.config)
        self.structurer_client = structurer_client or _default_structurer(self.config)
        self.embedder = embedder or _default_embedder(self.config)
        self.expander = expander or _default_expander(self.config)

    # -- stage 1: localization  ------------------------------------------

    def get_patterns(self, doc_id: str, refresh: bool = False) -> PatternSet:
        """Propose patterns, using the per-document cache when present. A
        failing model-backed provider falls back to the heuristic one."""
        if not refresh:
            cached = self.store.load_patterns(doc_id)
            if cached is not None:
                return cached
        document = self.store.get_document(doc_id)
        try:
            patterns = self.pattern_provider.propose(document)
        except ProviderError as exc:
            logger.warning("pattern provider failed for %s (%s); using heuristic", doc_id, exc)
            patterns = HeuristicPatternProvider().propose(document)
        self.store.save_patterns(patterns)
        return patterns

    def locate(self, doc_id: str, refresh_patterns: bool = False) -> list[CandidateSpan]:
        document = self.store.get_document(doc_id)
        patterns = self.get_patterns(doc_id, refresh=refresh_patterns)
        return locate_candidates(
            document,
            patterns,
            span_cap=self.config.span_cap,
            match_budget=self.config.match_budget,
        )

    # -- stage 2: structuring ------------------------------------------------

    def extract_document(self, doc_id: str) -> tuple[list[StructuredStatement], dict]:
        """Run both extraction stages for one document and persist the
        statements plus an extraction report."""
        cfg = self.config
        document = self.store.get_document(doc_id)
        candidates = self.locate(doc_id)
        batches = make_batches(len(candidates), cfg.batch_size, cfg.overlap)

        batch_results: list[list[StructuredStatement]] = []
        failed_batches: list[int] = []
        for batch in batches:
            context = build_windows(
                document, batch, candidates, cfg.window_length, cfg.back_margin
            )
            members = [candidates[i] for i in batch.members]
            try:
                result = structure_batch(context, members, self.structurer_client, cfg.retries)
            except StructurerError as exc:
                logger.warning("batch %d of %s failed: %s", batch.ordinal, doc_id, exc)
                failed_batches.append(batch.ordinal)
                result = [fallback_statement(c, context) for c in members]
            batch_results.append(result)

        statements, rec_report = reconcile(batch_results)
        self.store.save_statements(doc_id, statements)
        report = {
            "doc_id": doc_id,
            "candidates": len(candidates),
            "structured": sum(1 for s in statements if not s.low_confidence),
            "low_confidence": sum(1 for s in statements if s.low_confidence),
            "unresolved_deps": [list(u) for u in rec_report.unresolved],
            "conflicts": [list(c) for c in rec_report.kind_conflicts],
            "duplicates_merged": rec_report.duplicates_merged,
            "failed_batches": failed_batches,
        }
        self.store.save_report(doc_id, report)
        return statements, report

    def extract_all(self, doc_ids: Sequence[str] | None = None) -> dict[str, dict]:
        """Extract several documents, in parallel up to the in-flight cap."""
        ids = list(doc_ids) if doc_ids is not None else self.store.list_doc_ids()
        reports: dict[str, dict] = {}
        if not ids:
            return reports
        with ThreadPoolExecutor(max_workers=max(1, self.config.max_inflight)) as pool:
            for doc_id, (_stmts, report) in zip(ids, pool.map(self.extract_document, ids)):
                reports[doc_id] = report
        return reports

    # -- graphs and unfolding -----------------------------------------------

    def build_document_graph(self, doc_id: str) -> dict:
        """Build, repair, and layer the dependency graph; persist the export."""
        statements = self.store.load_statements(doc_id)
        graph, build_report = build_graph(statements)
        repaired, removed = repair_cycles(graph)
        assignment = partition_layers(repaired)
        export = graph_to_json(repaired, assignment, {s.stmt_id: s for s in statements})
        export["doc_id"] = doc_id
        export["removed_edges"] = [list(e) for e in sorted(removed)]
        export["build_report"] = build_report.to_json_dict()
        self.store.save_graph_json(doc_id, export)
        return export

    def unfold_document(self, doc_id: str):
        statements = self.store.load_statements(doc_id)
        by_id = {s.stmt_id: s for s in statements}
        graph, _ = build_graph(statements)
        repaired, _ = repair_cycles(graph)
        unfolded = unfold(repaired, by_id, expander=self.expander, budget=self.config.budget)
        self.store.save_unfolded(doc_id, unfolded)
        return unfolded

    # -- retrieval ----------------------------------------------------------

    def build_index(self) -> VectorIndex:
        """Embed every unfolded statement (raw text, no instruction) and
        write the snapshot."""
        index = VectorIndex(dim=self.embedder.dim)
        for doc_id in self.store.list_doc_ids():
            unfolded = self.store.load_unfolded(doc_id)
            if not unfolded:
                continue
            document = self.store.get_document(doc_id)
            statements = {s.stmt_id: s for s in self.store.load_statements(doc_id)}
            vectors = self.embedder.embed([u.unfolded_text for u in unfolded])
            entries = []
            for u, vec in zip(unfolded, vectors):
                stmt = statements.get(u.stmt_id)
                entries.append(
                    IndexEntry(
                        stmt_id=u.stmt_id,
                        vector=vec,
                        payload={
                            "doc_id": doc_id,
                            "label": stmt.label if stmt else None,
                            "kind": stmt.kind.value if stmt else "other",
                            "year": document.meta.year,
                            "journal_id": document.meta.journal_id,
                            "source_kind": document.meta.source_kind,
                        },
                    )
                )
            index.add(entries)
        index.save(self.store.snapshot_path)
        dirty = self.store.root / "index" / "dirty"
        if dirty.exists():
            dirty.unlink()
        return index

    def load_index(self) -> VectorIndex | None:
        path = self.store.snapshot_path
        if not path.exists():
            return None
        return VectorIndex.load(path)

    def search(
        self,
        text: str,
        k: int = 10,
        filters: SearchFilters | None = None,
        index: VectorIndex | None = None,
        snippet_chars: int = 240,
    ) -> list[dict]:
        """Instruction-prefixed query against the index, hits joined with
        stored statement payloads. Hit order is exactly the index order."""
        if index is None:
            index = self.load_index()
            if index is None:
                raise FileNotFoundError("no index snapshot; run build_index first")
        query_vec = self.embedder.embed([build_query_text(text, self.config.instruction)])[0]
        result = index.search(query_vec, k=k, filters=filters)

        stmt_cache: dict[str, dict] = {}
        unfolded_cache: dict[str, dict] = {}
        hits = []
        for hit in result.hits:
            doc_id = hit.payload.get("doc_id", "")
            if doc_id not in stmt_cache:
                stmt_cache[doc_id] = {s.stmt_id: s for s in self.store.load_statements(doc_id)}
                unfolded_cache[doc_id] = {u.stmt_id: u for u in self.store.load_unfolded(doc_id)}
            stmt = stmt_cache[doc_id].get(hit.stmt_id)
            unfolded = unfolded_cache[doc_id].get(hit.stmt_id)
            hits.append(
                {
                    "stmt_id": hit.stmt_id,
                    "score": hit.score,
                    "label": hit.payload.get("label"),
                    "kind": hit.payload.get("kind"),
                    "doc_id": doc_id,
                    "year": hit.payload.get("year"),
                    "journal": hit.payload.get("journal_id"),
                    "snippet": (stmt.content[:snippet_chars] if stmt else ""),
                    "unfolded_text": (unfolded.unfolded_text if unfolded else ""),
                }
            )
        return hits

    # -- convenience ----------------------------------------------------------

    def run_all(self, documents: Sequence[Document] | None = None, replace: bool = False) -> VectorIndex:
        """Ingest documents (optional), extract, graph, unfold, and index."""
        if documents:
            for doc in documents:
                self.store.ingest(doc.markdown, doc.meta, replace=replace)
        self.extract_all()
        for doc_id in self.store.list_doc_ids():
            self.build_document_graph(doc_id)
            self.unfold_document(doc_id)
        return self.build_index()
