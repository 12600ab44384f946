"""mathdex: typed mathematical statement extraction, dependency-graph
unfolding, and semantic top-k retrieval over OCR-markdown corpora."""

from .clients import (
    CompletionClient,
    HttpCompletionClient,
    ScriptedCompletionClient,
    TransportError,
)
from .config import PipelineConfig, load_config
from .corpus import (
    CitationEvent,
    CorpusError,
    Document,
    DocumentMeta,
    JournalRecord,
    count_icm_citations,
    load_metadata,
    select_journals,
)
from .graph import (
    Block,
    ConcatExpander,
    DependencyGraph,
    Expander,
    ExpanderError,
    GraphCycleError,
    GraphError,
    LayerAssignment,
    ModelExpander,
    UnfoldedStatement,
    build_graph,
    graph_to_json,
    partition_layers,
    repair_cycles,
    strongly_connected_components,
    unfold,
)
from .index import (
    DEFAULT_INSTRUCTION,
    Embedder,
    HashEmbedder,
    IndexEntry,
    Query,
    SearchFilters,
    SearchHit,
    SearchResult,
    ServiceEmbedder,
    VectorIndex,
    build_query_text,
    normalize_vector,
)
from .kinds import StatementKind, coerce_kind
from .locator import (
    CandidateSpan,
    HeuristicPatternProvider,
    LocatorError,
    MatchBudgetError,
    ModelPatternProvider,
    PatternDialectError,
    PatternSet,
    ProviderError,
    StatementPattern,
    builtin_patterns,
    compile_pattern,
    locate_candidates,
)
from .pipeline import Pipeline
from .store import CorpusStore, StoreError
from .structurer import (
    Batch,
    CompletionStructurerClient,
    ContextWindow,
    MergedContext,
    ReconcileReport,
    RuleBasedStructurerClient,
    StructureRequest,
    StructuredStatement,
    StructurerClient,
    StructurerError,
    build_windows,
    make_batches,
    make_stmt_id,
    reconcile,
    split_stmt_id,
    structure_batch,
)
from .synthetic import OracleStructurerClient, SyntheticCorpus, make_corpus, write_corpus_files

__version__ = "0.1.0"
