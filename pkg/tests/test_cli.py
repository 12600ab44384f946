import json

import pytest

from mathdex import make_corpus, write_corpus_files
from mathdex.cli import main


def _lines(capsys):
    out = capsys.readouterr().out.strip()
    return [json.loads(line) for line in out.splitlines() if line.strip()]


def _json(capsys):
    return json.loads(capsys.readouterr().out)


@pytest.fixture()
def workdir(tmp_path):
    corpus = make_corpus(n_docs=2, seed=5)
    docs_dir, meta_path = write_corpus_files(corpus, tmp_path)
    store = tmp_path / "store"
    return corpus, docs_dir, meta_path, store


class TestSelectJournalsCommand:
    def test_thresholds_applied(self, tmp_path, capsys):
        path = tmp_path / "meta.jsonl"
        rows = [
            {"journal_id": "keep", "papers_2007_2021": 100, "icm_citations_2007_2021": 51},
            {"journal_id": "few-cites", "papers_2007_2021": 500, "icm_citations_2007_2021": 50},
            {"journal_id": "few-papers", "papers_2007_2021": 99, "icm_citations_2007_2021": 10000},
        ]
        path.write_text("\n".join(json.dumps(r) for r in rows), encoding="utf-8")
        assert main(["corpus", "select-journals", "--metadata", str(path)]) == 0
        assert _json(capsys)["selected"] == ["keep"]

    def test_citation_events_recounted(self, tmp_path, capsys):
        path = tmp_path / "meta.jsonl"
        rows = [{"journal_id": "J", "papers_2007_2021": 200, "icm_citations_2007_2021": 0}]
        rows += [
            {"citing_proceeding_id": f"p{i}", "cited_journal_id": "J", "cited_paper_year": 2010}
            for i in range(60)
        ]
        path.write_text("\n".join(json.dumps(r) for r in rows), encoding="utf-8")
        main(["corpus", "select-journals", "--metadata", str(path)])
        assert _json(capsys)["selected"] == ["J"]


class TestPipelineCommands:
    def test_full_cli_flow(self, workdir, capsys):
        corpus, docs_dir, meta_path, store = workdir
        doc_id = corpus.docs[0].doc_id

        assert main(["corpus", "ingest", str(docs_dir), "--meta", str(meta_path), "--store", str(store)]) == 0
        body = _json(capsys)
        assert body["ingested"] == [d.doc_id for d in corpus.docs]

        assert main(["extract", "locate", doc_id, "--store", str(store)]) == 0
        spans = _lines(capsys)
        assert [s["start"] for s in spans] == [t.start for t in corpus.docs[0].statements]

        # rule-based offline client ("mock") parses header and dep mentions
        assert main(["extract", "run", doc_id, "--client", "mock", "--store", str(store)]) == 0
        report = _json(capsys)
        assert report["candidates"] == len(corpus.docs[0].statements)
        assert report["low_confidence"] == 0
        assert main(["extract", "run", corpus.docs[1].doc_id, "--client", "mock", "--store", str(store)]) == 0
        capsys.readouterr()

        assert main(["graph", "build", doc_id, "--store", str(store)]) == 0
        export = _json(capsys)
        assert len(export["nodes"]) == len(corpus.docs[0].statements)

        assert main(["graph", "layers", doc_id, "--store", str(store)]) == 0
        layers = _json(capsys)
        assert layers["max_layer"] >= 0

        assert main(["unfold", doc_id, "--store", str(store)]) == 0
        unfolded = _lines(capsys)
        assert {u["schema"] for u in unfolded} == {"unfolded/v1"}
        assert main(["unfold", corpus.docs[1].doc_id, "--store", str(store)]) == 0
        capsys.readouterr()

        assert main(["index", "build", "--embedder", "test", "--store", str(store)]) == 0
        built = _json(capsys)
        assert built["entries"] == sum(len(d.statements) for d in corpus.docs)
        assert built["dim"] == 256

        qtext, target = corpus.queries()[0]
        assert main(["index", "search", qtext, "-k", "3", "--store", str(store)]) == 0
        hits = _lines(capsys)
        assert hits[0]["stmt_id"] == target

        # top-level alias and a kind filter
        assert main(["search", qtext, "-k", "3", "--kind", "theorem", "--store", str(store)]) == 0
        hits = _lines(capsys)
        assert hits and all(h["kind"] == "theorem" for h in hits)

    def test_budget_flag_truncates(self, workdir, capsys):
        corpus, docs_dir, meta_path, store = workdir
        doc_id = corpus.docs[0].doc_id
        main(["corpus", "ingest", str(docs_dir), "--meta", str(meta_path), "--store", str(store)])
        main(["extract", "run", doc_id, "--store", str(store)])
        capsys.readouterr()
        assert main(["unfold", doc_id, "--budget", "50", "--store", str(store)]) == 0
        unfolded = _lines(capsys)
        assert all(len(u["unfolded_text"]) <= 50 for u in unfolded)
        assert any(u["truncated"] for u in unfolded)

    def test_config_file_respected(self, workdir, capsys, tmp_path):
        corpus, docs_dir, meta_path, store = workdir
        config = tmp_path / "conf.json"
        config.write_text(json.dumps({"store_path": str(store), "batch_size": 3}), encoding="utf-8")
        main(["corpus", "ingest", str(docs_dir), "--meta", str(meta_path), "--config", str(config)])
        capsys.readouterr()
        doc_id = corpus.docs[0].doc_id
        assert main(["extract", "run", doc_id, "--config", str(config)]) == 0
        assert _json(capsys)["doc_id"] == doc_id
