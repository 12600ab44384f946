import json
import random

import httpx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mathdex import (
    HashEmbedder,
    IndexEntry,
    Query,
    SearchFilters,
    ServiceEmbedder,
    VectorIndex,
    build_query_text,
    normalize_vector,
)
from mathdex.index import (
    DimensionMismatchError,
    EmbeddingServiceError,
    InvalidVectorError,
    SnapshotFormatError,
    VectorIndexError,
)


def _cos(a, b):
    return float(np.dot(a.astype(np.float64), b.astype(np.float64)))


class TestNormalization:
    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(
            st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False),
            min_size=1,
            max_size=512,
        ).filter(lambda v: any(x != 0 for x in v))
    )
    def test_unit_norm_within_tolerance(self, values):
        out = normalize_vector(values)
        assert out.dtype == np.float32
        assert abs(float(np.linalg.norm(out.astype(np.float64))) - 1.0) <= 1e-6

    def test_zero_vector_rejected(self):
        with pytest.raises(InvalidVectorError):
            normalize_vector([0.0, 0.0])

    def test_nan_rejected(self):
        with pytest.raises(InvalidVectorError):
            normalize_vector([1.0, float("nan")])


class TestHashEmbedder:
    def test_deterministic(self):
        emb = HashEmbedder(256)
        a = emb.embed(["theorem"])[0]
        b = emb.embed(["theorem"])[0]
        assert np.array_equal(a, b)

    def test_bag_of_words_order_invariance(self):
        emb = HashEmbedder(256)
        a, b = emb.embed(["a b", "b a"])
        assert np.array_equal(a, b)

    def test_case_and_separator_folding(self):
        emb = HashEmbedder(256)
        a, b = emb.embed(["Prime-Number  Theorem", "prime number theorem"])
        assert np.array_equal(a, b)

    def test_empty_tokens_reserved_basis_vector(self):
        emb = HashEmbedder(8)
        for text in ["", "   ", "⟦…⟧"]:
            vec = emb.embed([text])[0]
            expected = np.zeros(8, dtype=np.float32)
            expected[0] = 1.0
            assert np.array_equal(vec, expected)

    def test_similarity_ordering_example(self):
        emb = HashEmbedder(256)
        q, close, far = emb.embed(
            ["prime numbers theorem", "prime number theorem", "elliptic curve rank"]
        )
        assert _cos(q, close) > _cos(q, far)

    def test_counts_accumulate(self):
        emb = HashEmbedder(256)
        single, double = emb.embed(["alpha beta", "alpha alpha beta"])
        assert not np.array_equal(single, double)


class TestBuildQueryText:
    def test_prepends_instruction_with_newline(self):
        assert build_query_text("Brouwer fixed point", "INSTR:") == "INSTR:\nBrouwer fixed point"

    def test_empty_instruction_identity(self):
        assert build_query_text("q", "") == "q"


class TestQueryValidation:
    def test_negative_k_rejected(self):
        with pytest.raises(VectorIndexError):
            Query(text="x", k=-1)

    def test_empty_text_with_positive_k_rejected(self):
        with pytest.raises(VectorIndexError):
            Query(text="", k=5)

    def test_k_zero_allows_empty_text(self):
        assert Query(text="", k=0).k == 0


def _entry(sid, vec, **payload):
    base = {"doc_id": "d", "label": None, "kind": "theorem", "year": 2000,
            "journal_id": "J", "source_kind": "journal_paper"}
    base.update(payload)
    return IndexEntry(stmt_id=sid, vector=np.asarray(vec, dtype=np.float32), payload=base)


def _random_index(rng, n, dim=256, with_duplicates=False):
    index = VectorIndex(dim=dim)
    entries = []
    base_vecs = []
    for i in range(n):
        if with_duplicates and base_vecs and rng.random() < 0.2:
            vec = base_vecs[rng.randrange(len(base_vecs))]
        else:
            vec = np.array([rng.gauss(0, 1) for _ in range(dim)], dtype=np.float32)
            base_vecs.append(vec)
        entries.append(
            _entry(
                f"s{i:05d}",
                vec,
                kind=rng.choice(["theorem", "lemma", "definition"]),
                year=rng.randint(1900, 2020),
                journal_id=rng.choice(["J1", "J2", "J3"]),
            )
        )
    index.add(entries)
    return index, entries


def _brute_force(index, qvec, k, filters=None):
    """Rank the index's own scores with plain python sorting: independent
    selection and tie-break logic over the shared scoring primitive."""
    ids, scores, payloads = index.score_all(qvec)
    scored = [
        (sid, float(s))
        for sid, s, p in zip(ids, scores, payloads)
        if filters is None or filters.matches(p)
    ]
    scored.sort(key=lambda t: (-t[1], t[0]))
    return scored[:k]


class TestVectorIndex:
    def test_add_and_size(self):
        index = VectorIndex(dim=4)
        added = index.add([_entry("a", [1, 0, 0, 0]), _entry("b", [0, 1, 0, 0]), _entry("c", [0, 0, 1, 0])])
        assert added == 3
        assert len(index) == 3

    def test_duplicate_without_replace_rejected(self):
        index = VectorIndex(dim=2)
        index.add([_entry("a", [1, 0])])
        with pytest.raises(VectorIndexError):
            index.add([_entry("a", [0, 1])])

    def test_upsert_with_replace(self):
        index = VectorIndex(dim=2)
        index.add([_entry("a", [1, 0])])
        added = index.add([_entry("a", [0, 1])], replace=True)
        assert added == 0
        assert len(index) == 1
        hits = index.search(np.array([0, 1], dtype=np.float32), k=1)
        assert hits.hits[0].score == pytest.approx(1.0, abs=1e-6)

    def test_nan_vector_typed_error(self):
        index = VectorIndex(dim=2)
        with pytest.raises(InvalidVectorError):
            index.add([_entry("a", [float("nan"), 1.0])])

    def test_zero_vector_rejected_entry_others_kept(self, caplog):
        index = VectorIndex(dim=2)
        added = index.add([_entry("a", [0.0, 0.0]), _entry("b", [1.0, 0.0])])
        assert added == 1
        assert len(index) == 1

    def test_dimension_mismatch_rejected(self):
        index = VectorIndex(dim=3)
        with pytest.raises(DimensionMismatchError):
            index.add([_entry("a", [1.0, 0.0])])
        with pytest.raises(DimensionMismatchError):
            index.search(np.zeros(2, dtype=np.float32), k=1)

    def test_k_zero_empty(self):
        index = VectorIndex(dim=2)
        index.add([_entry("a", [1, 0])])
        assert index.search(np.array([1, 0], dtype=np.float32), k=0).hits == ()

    def test_self_similarity_rank_one(self):
        rng = random.Random(0)
        index, entries = _random_index(rng, 50, dim=16)
        target = entries[7]
        hits = index.search(target.vector, k=1).hits
        assert hits[0].stmt_id == target.stmt_id
        assert hits[0].score == pytest.approx(1.0, abs=1e-6)

    def test_matches_brute_force_with_ties(self):
        rng = random.Random(1)
        for trial in range(10):
            index, entries = _random_index(rng, rng.randint(1, 200), dim=16, with_duplicates=True)
            for _ in range(5):
                q = np.array([rng.gauss(0, 1) for _ in range(16)], dtype=np.float32)
                k = rng.randint(1, 20)
                got = [(h.stmt_id, h.score) for h in index.search(q, k=k).hits]
                assert got == _brute_force(index, q, k)

    def test_scores_are_true_cosines(self):
        rng = random.Random(11)
        index, entries = _random_index(rng, 100, dim=16)
        by_id = {e.stmt_id: normalize_vector(e.vector) for e in entries}
        q = np.array([rng.gauss(0, 1) for _ in range(16)], dtype=np.float32)
        q64 = normalize_vector(q).astype(np.float64)
        for hit in index.search(q, k=100).hits:
            expected = float(np.dot(by_id[hit.stmt_id].astype(np.float64), q64))
            assert hit.score == pytest.approx(expected, abs=1e-6)
            assert -1.0 - 1e-6 <= hit.score <= 1.0 + 1e-6

    def test_filters_sound_and_never_boost(self):
        rng = random.Random(2)
        index, entries = _random_index(rng, 120, dim=16)
        q = np.array([rng.gauss(0, 1) for _ in range(16)], dtype=np.float32)
        filters = SearchFilters(kinds=frozenset({"theorem"}), year_from=1950, year_to=2010)
        filtered = index.search(q, k=50, filters=filters).hits
        unfiltered = {h.stmt_id: h.score for h in index.search(q, k=120).hits}
        for hit in filtered:
            assert hit.payload["kind"] == "theorem"
            assert 1950 <= hit.payload["year"] <= 2010
            assert unfiltered[hit.stmt_id] == hit.score
        got = [(h.stmt_id, h.score) for h in filtered]
        assert got == _brute_force(index, q, 50, filters)

    def test_journal_and_source_filters(self):
        rng = random.Random(3)
        index, _ = _random_index(rng, 60, dim=8)
        q = np.array([rng.gauss(0, 1) for _ in range(8)], dtype=np.float32)
        hits = index.search(q, k=60, filters=SearchFilters(journal_ids=frozenset({"J1"}))).hits
        assert hits and all(h.payload["journal_id"] == "J1" for h in hits)
        hits = index.search(q, k=60, filters=SearchFilters(source_kind="textbook")).hits
        assert hits == ()


class TestSnapshot:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = random.Random(4)
        index, _ = _random_index(rng, 300, dim=32, with_duplicates=True)
        path = tmp_path / "snap.mtlx"
        index.save(path)
        loaded = VectorIndex.load(path)
        assert len(loaded) == len(index)
        assert np.array_equal(loaded._state.vectors, index._state.vectors)
        for _ in range(20):
            q = np.array([rng.gauss(0, 1) for _ in range(32)], dtype=np.float32)
            a = [(h.stmt_id, h.score, h.payload) for h in index.search(q, k=10).hits]
            b = [(h.stmt_id, h.score, h.payload) for h in loaded.search(q, k=10).hits]
            assert a == b

    def test_header_layout(self, tmp_path):
        index = VectorIndex(dim=2)
        index.add([_entry("a", [1, 0])])
        path = tmp_path / "snap.mtlx"
        index.save(path)
        raw = path.read_bytes()
        assert raw[:4] == b"MTLX"
        assert int.from_bytes(raw[4:8], "little") == 1  # format version
        assert int.from_bytes(raw[8:12], "little") == 2  # dimension
        assert int.from_bytes(raw[12:20], "little") == 1  # entry count

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "snap.mtlx"
        path.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(SnapshotFormatError):
            VectorIndex.load(path)

    def test_truncated_rejected(self, tmp_path):
        index = VectorIndex(dim=4)
        index.add([_entry("a", [1, 0, 0, 0])])
        path = tmp_path / "snap.mtlx"
        index.save(path)
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(SnapshotFormatError):
            VectorIndex.load(path)

    def test_empty_index_round_trip(self, tmp_path):
        index = VectorIndex(dim=8)
        path = tmp_path / "snap.mtlx"
        index.save(path)
        loaded = VectorIndex.load(path)
        assert len(loaded) == 0
        assert loaded.dim == 8


class TestServiceEmbedder:
    def _client(self, handler):
        return httpx.Client(transport=httpx.MockTransport(handler))

    def test_batching_and_dimension_check(self):
        calls = []

        def handler(request):
            payload = json.loads(request.content)
            calls.append(len(payload["texts"]))
            return httpx.Response(200, json={"vectors": [[1.0, 0.0] for _ in payload["texts"]]})

        emb = ServiceEmbedder("http://svc/embed", dim=2, batch_size=3, client=self._client(handler))
        out = emb.embed([f"t{i}" for i in range(8)])
        assert calls == [3, 3, 2]
        assert len(out) == 8
        assert all(v.shape == (2,) for v in out)

    def test_retry_then_success(self):
        attempts = []

        def handler(request):
            attempts.append(1)
            if len(attempts) < 3:
                return httpx.Response(503)
            return httpx.Response(200, json={"vectors": [[0.0, 1.0]]})

        emb = ServiceEmbedder(
            "http://svc/embed", dim=2, max_retries=3, backoff=0.0, client=self._client(handler)
        )
        out = emb.embed(["x"])
        assert len(attempts) == 3
        assert np.array_equal(out[0], np.array([0.0, 1.0], dtype=np.float32))

    def test_exhausted_retries_typed_error(self):
        def handler(request):
            return httpx.Response(500)

        emb = ServiceEmbedder(
            "http://svc/embed", dim=2, max_retries=2, backoff=0.0, client=self._client(handler)
        )
        with pytest.raises(EmbeddingServiceError):
            emb.embed(["x"])

    def test_wrong_count_rejected(self):
        def handler(request):
            return httpx.Response(200, json={"vectors": []})

        emb = ServiceEmbedder(
            "http://svc/embed", dim=2, max_retries=1, backoff=0.0, client=self._client(handler)
        )
        with pytest.raises(EmbeddingServiceError):
            emb.embed(["x"])
