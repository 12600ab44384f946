"""The whole pipeline behind the HTTP facade.

Generates a synthetic ground-truth corpus, runs ingest -> extract -> graph ->
unfold -> index, then queries the service endpoints in-process.
"""

import tempfile

from fastapi.testclient import TestClient

from mathdex import (
    CorpusStore,
    HashEmbedder,
    HeuristicPatternProvider,
    OracleStructurerClient,
    Pipeline,
    PipelineConfig,
    make_corpus,
)
from mathdex.service import create_app

corpus = make_corpus(n_docs=5, seed=7)

with tempfile.TemporaryDirectory() as td:
    config = PipelineConfig(store_path=td)
    pipeline = Pipeline(
        CorpusStore(td),
        config,
        pattern_provider=HeuristicPatternProvider(),
        structurer_client=OracleStructurerClient(corpus),  # scripted perfect model
        embedder=HashEmbedder(config.embed_dim),
    )
    index = pipeline.run_all(corpus.documents)
    client = TestClient(create_app(pipeline, index=index))

    health = client.get("/healthz").json()
    print(f"service up: {health['docs']} docs, {health['statements']} statements, "
          f"{health['index_size']} vectors\n")

    qtext, target = corpus.queries()[0]
    print(f"POST /v1/search  query={qtext[:60]!r}...")
    body = client.post("/v1/search", json={"query": qtext, "k": 3}).json()
    for rank, hit in enumerate(body["hits"], start=1):
        marker = "  <- planted target" if hit["stmt_id"] == target else ""
        print(f"  {rank}. {hit['score']:.3f} {hit['label']:18s} {hit['stmt_id']}{marker}")

    detail = client.get(f"/v1/statements/{body['hits'][0]['stmt_id']}").json()
    print(f"\nstatement detail: layer={detail['layer']}, "
          f"{len(detail['deps'])} deps, {len(detail['dependents'])} dependents")

    doc_id = corpus.docs[0].doc_id
    graph = client.get(f"/v1/documents/{doc_id}/graph").json()
    by_layer = {}
    for node in graph["nodes"]:
        by_layer.setdefault(node["layer"], []).append(node["label"])
    print(f"\ndependency graph of {doc_id}:")
    for layer in sorted(by_layer):
        print(f"  layer {layer}: {', '.join(by_layer[layer])}")
