"""Dense retrieval over a handful of statements.

The deterministic hash embedder turns text into unit vectors; the index
ranks by cosine (a dot product after normalization), applies payload
filters, and round-trips through its binary snapshot bit-exactly.
"""

import tempfile
from pathlib import Path

from mathdex import (
    HashEmbedder,
    IndexEntry,
    SearchFilters,
    VectorIndex,
    build_query_text,
)

texts = {
    "d1:00000001": ("Every compact operator on a separable space is a norm limit of finite rank operators.", "theorem", 1956),
    "d1:00000002": ("A lattice is distributive precisely when it embeds no diamond or pentagon.", "theorem", 1940),
    "d2:00000001": ("The resolvent of a bounded operator is analytic on the complement of the spectrum.", "lemma", 1930),
    "d2:00000002": ("Distributive lattices admit spectral representations.", "theorem", 1937),
}

embedder = HashEmbedder(dim=256)
index = VectorIndex(dim=256)
vectors = embedder.embed([t for t, _, _ in texts.values()])
index.add(
    [
        IndexEntry(sid, vec, {"doc_id": sid.split(":")[0], "kind": kind, "year": year,
                              "journal_id": "J", "source_kind": "journal_paper", "label": None})
        for (sid, (_t, kind, year)), vec in zip(texts.items(), vectors)
    ]
)

instruction = "Given a mathematical query, retrieve theorem statements that answer or match it:"
query = "distributive lattice embedding characterization"
qvec = embedder.embed([build_query_text(query, instruction)])[0]

print(f"query: {query!r}\n")
for hit in index.search(qvec, k=4).hits:
    print(f"  {hit.score:.3f}  {hit.stmt_id}  ({hit.payload['kind']}, {hit.payload['year']})")

print("\nwith kind=theorem and year >= 1935:")
filters = SearchFilters(kinds=frozenset({"theorem"}), year_from=1935)
for hit in index.search(qvec, k=4, filters=filters).hits:
    print(f"  {hit.score:.3f}  {hit.stmt_id}  ({hit.payload['kind']}, {hit.payload['year']})")

with tempfile.TemporaryDirectory() as td:
    path = Path(td) / "snapshot.mtlx"
    index.save(path)
    loaded = VectorIndex.load(path)
    a = [(h.stmt_id, h.score) for h in index.search(qvec, k=4).hits]
    b = [(h.stmt_id, h.score) for h in loaded.search(qvec, k=4).hits]
    print(f"\nsnapshot round-trip identical: {a == b} ({path.stat().st_size} bytes)")
