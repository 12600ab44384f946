import pytest

from mathdex import (
    CorpusStore,
    HashEmbedder,
    HeuristicPatternProvider,
    OracleStructurerClient,
    Pipeline,
    PipelineConfig,
    make_corpus,
)


@pytest.fixture(scope="session")
def synth_corpus():
    return make_corpus(n_docs=10, seed=7)


def build_pipeline(corpus, root, **config_kwargs):
    config = PipelineConfig(store_path=str(root), **config_kwargs)
    return Pipeline(
        CorpusStore(root),
        config,
        pattern_provider=HeuristicPatternProvider(),
        structurer_client=OracleStructurerClient(corpus),
        embedder=HashEmbedder(config.embed_dim),
    )


@pytest.fixture()
def synth_small(tmp_path):
    """Three-document corpus run through the full pipeline (fresh per test)."""
    corpus = make_corpus(n_docs=3, seed=11)
    pipeline = build_pipeline(corpus, tmp_path / "store")
    pipeline.run_all(corpus.documents)
    return corpus, pipeline
