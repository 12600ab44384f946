from mathdex import StatementKind, make_corpus, make_stmt_id
from mathdex.synthetic import OracleStructurerClient


class TestGenerator:
    def test_deterministic_for_seed(self):
        a = make_corpus(n_docs=3, seed=5)
        b = make_corpus(n_docs=3, seed=5)
        assert [d.document.markdown for d in a.docs] == [d.document.markdown for d in b.docs]
        assert make_corpus(n_docs=3, seed=6).docs[0].document.markdown != a.docs[0].document.markdown

    def test_truth_offsets_point_at_headers(self):
        corpus = make_corpus(n_docs=5, seed=8)
        for doc in corpus.docs:
            md = doc.document.markdown
            for t in doc.statements:
                head = md[t.start : t.start + len(t.label) + 4]
                assert t.label in head
                assert t.content in md

    def test_deps_reference_earlier_statements_only(self):
        corpus = make_corpus(n_docs=8, seed=8)
        for doc in corpus.docs:
            seen = set()
            for t in doc.statements:
                for dep in t.dep_labels:
                    assert dep in seen
                seen.add(t.label)

    def test_query_targets_are_theorems_and_sinks(self):
        corpus = make_corpus(n_docs=6, seed=8)
        for doc in corpus.docs:
            target = next(
                t for t in doc.statements if make_stmt_id(doc.doc_id, t.start) == doc.query_target
            )
            assert target.kind is StatementKind.THEOREM
            assert all(target.label not in t.dep_labels for t in doc.statements)

    def test_labels_unique_within_document(self):
        corpus = make_corpus(n_docs=6, seed=9)
        for doc in corpus.docs:
            labels = [t.label for t in doc.statements]
            assert len(labels) == len(set(labels))


class TestOracleClient:
    def test_ignores_unknown_candidates(self):
        corpus = make_corpus(n_docs=1, seed=3)
        client = OracleStructurerClient(corpus)
        from mathdex.structurer import MergedContext, StructureRequest
        from mathdex import CandidateSpan

        request = StructureRequest(
            doc_id=corpus.docs[0].doc_id,
            context=MergedContext((), ""),
            candidates=(CandidateSpan(doc_id=corpus.docs[0].doc_id, start=999_999, end=1_000_000),),
        )
        assert client.structure(request) == "[]"
