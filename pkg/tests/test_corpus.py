import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mathdex import (
    CitationEvent,
    CorpusError,
    CorpusStore,
    DocumentMeta,
    JournalRecord,
    StoreError,
    count_icm_citations,
    load_metadata,
    select_journals,
)


def _event(journal: str, year: int) -> CitationEvent:
    return CitationEvent(citing_proceeding_id="icm", cited_journal_id=journal, cited_paper_year=year)


class TestCountCitations:
    def test_empty_input(self):
        assert count_icm_citations([]) == {}

    def test_window_inclusive_both_ends(self):
        events = [_event("J", 2007), _event("J", 2021), _event("J", 2022)]
        assert count_icm_citations(events) == {"J": 2}

    def test_random_events_match_brute_force(self):
        rng = random.Random(0)
        journals = [f"j{i}" for i in range(10)]
        events = [_event(rng.choice(journals), rng.randint(2000, 2030)) for _ in range(1000)]
        counts = count_icm_citations(events)
        for j in journals:
            expected = sum(1 for e in events if e.cited_journal_id == j and 2007 <= e.cited_paper_year <= 2021)
            assert counts.get(j, 0) == expected

    def test_total_equals_in_window_events(self):
        rng = random.Random(1)
        events = [_event(f"j{rng.randint(0, 5)}", rng.randint(1990, 2030)) for _ in range(500)]
        counts = count_icm_citations(events, 2000, 2010)
        assert sum(counts.values()) == sum(1 for e in events if 2000 <= e.cited_paper_year <= 2010)

    def test_bad_window_rejected(self):
        with pytest.raises(CorpusError):
            count_icm_citations([], 2021, 2007)


class TestSelectJournals:
    @pytest.mark.parametrize(
        "citations,papers,selected",
        [
            (51, 100, True),  # strict > 50, inclusive >= 100
            (50, 500, False),
            (10000, 99, False),
            (51, 99, False),
            (50, 100, False),
        ],
    )
    def test_boundaries(self, citations, papers, selected):
        rec = JournalRecord("J", "Journal", papers_2007_2021=papers, icm_citations_2007_2021=citations)
        assert (("J" in select_journals([rec]))) is selected

    def test_duplicate_journal_rejected(self):
        recs = [JournalRecord("J", papers_2007_2021=1), JournalRecord("J", papers_2007_2021=2)]
        with pytest.raises(CorpusError):
            select_journals(recs)

    @given(
        st.lists(
            st.tuples(st.integers(0, 200), st.integers(0, 300)),
            max_size=50,
        )
    )
    def test_matches_brute_force_filter(self, counts):
        recs = [
            JournalRecord(f"j{i}", papers_2007_2021=p, icm_citations_2007_2021=c)
            for i, (c, p) in enumerate(counts)
        ]
        expected = {r.journal_id for r in recs if r.icm_citations_2007_2021 > 50 and r.papers_2007_2021 >= 100}
        assert select_journals(recs) == expected

    def test_order_independent(self):
        rng = random.Random(2)
        recs = [
            JournalRecord(f"j{i}", papers_2007_2021=rng.randint(0, 300), icm_citations_2007_2021=rng.randint(0, 100))
            for i in range(40)
        ]
        shuffled = recs[:]
        rng.shuffle(shuffled)
        assert select_journals(recs) == select_journals(shuffled)


class TestMetadataLoading:
    def test_mixed_records_and_unknown_fields(self, tmp_path):
        path = tmp_path / "meta.jsonl"
        lines = [
            {"journal_id": "J1", "name": "Ann.", "papers_2007_2021": 150, "icm_citations_2007_2021": 60, "extra": 1},
            {"citing_proceeding_id": "p1", "cited_journal_id": "J1", "cited_paper_year": 2010},
            {"doc_id": "d1", "source_kind": "textbook", "year": 1999, "title": "T"},
        ]
        path.write_text("\n".join(json.dumps(o) for o in lines), encoding="utf-8")
        meta = load_metadata(path)
        assert [r.journal_id for r in meta.journals] == ["J1"]
        assert len(meta.events) == 1
        assert meta.documents[0].doc_id == "d1"

    def test_invalid_json_line_reports_position(self, tmp_path):
        path = tmp_path / "meta.jsonl"
        path.write_text('{"journal_id": "J"}\nnot json\n', encoding="utf-8")
        with pytest.raises(CorpusError, match=":2:"):
            load_metadata(path)


class TestStore:
    def _meta(self, doc_id="d1"):
        return DocumentMeta(doc_id=doc_id, source_kind="journal_paper", journal_id="J", year=2001, title="t")

    def test_ingest_round_trip(self, tmp_path):
        store = CorpusStore(tmp_path)
        doc = store.ingest("\\section{Intro} Theorem 1.1. x", self._meta())
        assert doc.doc_id == "d1"
        loaded = store.get_document("d1")
        assert loaded.markdown == doc.markdown
        assert loaded.meta == doc.meta

    def test_empty_markdown_rejected(self, tmp_path):
        store = CorpusStore(tmp_path)
        with pytest.raises(CorpusError):
            store.ingest("   \n", self._meta())

    def test_duplicate_without_replace_rejected(self, tmp_path):
        store = CorpusStore(tmp_path)
        store.ingest("text", self._meta())
        with pytest.raises(StoreError):
            store.ingest("other", self._meta())

    def test_replace_resets_derived_statements(self, tmp_path, synth_small):
        corpus, pipeline = synth_small
        store = pipeline.store
        doc_id = corpus.docs[0].doc_id
        assert store.statement_count(doc_id) > 0
        store.ingest("replacement text", store.get_document(doc_id).meta, replace=True)
        assert store.statement_count(doc_id) == 0
        assert store.load_statements(doc_id) == []
        assert store.load_unfolded(doc_id) == []

    def test_replace_is_idempotent_bytewise(self, tmp_path):
        store = CorpusStore(tmp_path)
        store.ingest("same content", self._meta())
        first = (store.root / "documents" / "d1.md").read_bytes()
        first_meta = (store.root / "documents" / "d1.meta.json").read_bytes()
        store.ingest("same content", self._meta(), replace=True)
        assert (store.root / "documents" / "d1.md").read_bytes() == first
        assert (store.root / "documents" / "d1.meta.json").read_bytes() == first_meta

    def test_no_statements_flag(self, tmp_path):
        store = CorpusStore(tmp_path)
        store.ingest("no headers here, just prose", self._meta())
        store.save_statements("d1", [])
        assert store.get_flags("d1")["no_statements"] is True

    def test_doc_ids_with_unsafe_characters(self, tmp_path):
        store = CorpusStore(tmp_path)
        meta = DocumentMeta(doc_id="a/b c#1", source_kind="textbook", year=1990, title="t")
        store.ingest("content", meta)
        assert store.has_document("a/b c#1")
        assert store.list_doc_ids() == ["a/b c#1"]
