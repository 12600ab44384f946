"""File-backed corpus store: documents with metadata sidecars plus the
derived artifacts each pipeline stage persists (pattern cache, statements,
extraction reports, graphs, unfolded texts, index snapshot).

Documents are addressed by doc_id; every write goes through a temp file and
an atomic rename, so readers never observe a torn file. Writes to the same
doc_id are serialized; distinct documents can be written concurrently.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from urllib.parse import quote

from .corpus import CorpusError, Document, DocumentMeta
from .graph import UnfoldedStatement
from .locator import PatternSet
from .structurer import StructuredStatement, split_stmt_id


class StoreError(Exception):
    """Store-level failure: unknown document, duplicate ingest, bad layout."""


class CorpusStore:
    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        for sub in ("documents", "patterns", "statements", "reports", "graphs", "unfolded", "index"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._master_lock = threading.Lock()
        self._doc_locks: dict[str, threading.Lock] = {}

    # -- paths ------------------------------------------------------------

    def _doc_lock(self, doc_id: str) -> threading.Lock:
        with self._master_lock:
            return self._doc_locks.setdefault(doc_id, threading.Lock())

    @staticmethod
    def _fname(doc_id: str) -> str:
        return quote(doc_id, safe="")

    def _path(self, kind: str, doc_id: str, suffix: str) -> Path:
        return self.root / kind / f"{self._fname(doc_id)}{suffix}"

    @property
    def snapshot_path(self) -> Path:
        return self.root / "index" / "snapshot.mtlx"

    # -- atomic file primitives --------------------------------------------

    @staticmethod
    def _write_atomic(path: Path, data: bytes) -> None:
        tmp = path.with_name(f"{path.name}.tmp.{os.getpid()}.{threading.get_ident()}")
        tmp.write_bytes(data)
        os.replace(tmp, path)

    def _write_json(self, path: Path, obj) -> None:
        self._write_atomic(path, (json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n").encode("utf-8"))

    def _write_jsonl(self, path: Path, objs) -> None:
        lines = "".join(json.dumps(o, ensure_ascii=False, sort_keys=True) + "\n" for o in objs)
        self._write_atomic(path, lines.encode("utf-8"))

    @staticmethod
    def _read_jsonl(path: Path) -> list[dict]:
        out = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    out.append(json.loads(line))
        return out

    # -- documents ----------------------------------------------------------

    def ingest(self, markdown: str, meta: DocumentMeta, replace: bool = False) -> Document:
        """Persist a document; with replace, prior content and every derived
        artifact for that doc_id are dropped."""
        if not markdown.strip():
            raise CorpusError(f"refusing to ingest empty markdown for {meta.doc_id!r}")
        doc = Document(meta=meta, markdown=markdown)
        with self._doc_lock(meta.doc_id):
            doc_path = self._path("documents", meta.doc_id, ".md")
            if doc_path.exists() and not replace:
                raise StoreError(f"document {meta.doc_id!r} already ingested (use replace)")
            if doc_path.exists():
                self._invalidate_derived(meta.doc_id)
            self._write_atomic(doc_path, markdown.encode("utf-8"))
            sidecar = {
                "doc_id": meta.doc_id,
                "source_kind": meta.source_kind,
                "journal_id": meta.journal_id,
                "year": meta.year,
                "title": meta.title,
                "flags": {},
                "statement_count": 0,
            }
            self._write_json(self._path("documents", meta.doc_id, ".meta.json"), sidecar)
        return doc

    def _invalidate_derived(self, doc_id: str) -> None:
        for kind, suffix in (
            ("patterns", ".json"),
            ("statements", ".jsonl"),
            ("reports", ".json"),
            ("graphs", ".json"),
            ("unfolded", ".jsonl"),
        ):
            path = self._path(kind, doc_id, suffix)
            if path.exists():
                path.unlink()
        # derived index entries are stale until the next rebuild
        (self.root / "index" / "dirty").touch()

    def has_document(self, doc_id: str) -> bool:
        return self._path("documents", doc_id, ".md").exists()

    def get_document(self, doc_id: str) -> Document:
        path = self._path("documents", doc_id, ".md")
        if not path.exists():
            raise StoreError(f"unknown document {doc_id!r}")
        sidecar = json.loads(self._path("documents", doc_id, ".meta.json").read_text("utf-8"))
        meta = DocumentMeta(
            doc_id=sidecar["doc_id"],
            source_kind=sidecar["source_kind"],
            journal_id=sidecar.get("journal_id"),
            year=sidecar.get("year", 0),
            title=sidecar.get("title", ""),
        )
        return Document(meta=meta, markdown=path.read_text("utf-8"))

    def list_doc_ids(self) -> list[str]:
        from urllib.parse import unquote

        return sorted(
            unquote(p.name[: -len(".meta.json")])
            for p in (self.root / "documents").glob("*.meta.json")
        )

    def count_documents(self) -> int:
        return len(list((self.root / "documents").glob("*.meta.json")))

    def _update_sidecar(self, doc_id: str, **updates) -> None:
        path = self._path("documents", doc_id, ".meta.json")
        if not path.exists():
            raise StoreError(f"unknown document {doc_id!r}")
        sidecar = json.loads(path.read_text("utf-8"))
        flags = updates.pop("flags", None)
        if flags:
            sidecar.setdefault("flags", {}).update(flags)
        sidecar.update(updates)
        self._write_json(path, sidecar)

    def get_flags(self, doc_id: str) -> dict:
        path = self._path("documents", doc_id, ".meta.json")
        if not path.exists():
            raise StoreError(f"unknown document {doc_id!r}")
        return json.loads(path.read_text("utf-8")).get("flags", {})

    # -- derived artifacts ---------------------------------------------------

    def save_patterns(self, patterns: PatternSet) -> None:
        self._write_json(self._path("patterns", patterns.doc_id, ".json"), patterns.to_json_dict())

    def load_patterns(self, doc_id: str) -> PatternSet | None:
        path = self._path("patterns", doc_id, ".json")
        if not path.exists():
            return None
        return PatternSet.from_json_dict(json.loads(path.read_text("utf-8")))

    def save_statements(self, doc_id: str, statements: list[StructuredStatement]) -> None:
        with self._doc_lock(doc_id):
            self._write_jsonl(
                self._path("statements", doc_id, ".jsonl"),
                (s.to_json_dict() for s in statements),
            )
            self._update_sidecar(
                doc_id,
                statement_count=len(statements),
                flags={"no_statements": len(statements) == 0},
            )

    def load_statements(self, doc_id: str) -> list[StructuredStatement]:
        path = self._path("statements", doc_id, ".jsonl")
        if not path.exists():
            return []
        return [StructuredStatement.from_json_dict(obj) for obj in self._read_jsonl(path)]

    def statement_count(self, doc_id: str) -> int:
        path = self._path("documents", doc_id, ".meta.json")
        if not path.exists():
            return 0
        return int(json.loads(path.read_text("utf-8")).get("statement_count", 0))

    def total_statements(self) -> int:
        return sum(self.statement_count(doc_id) for doc_id in self.list_doc_ids())

    def get_statement(self, stmt_id: str) -> StructuredStatement | None:
        doc_id, _ = split_stmt_id(stmt_id)
        for stmt in self.load_statements(doc_id):
            if stmt.stmt_id == stmt_id:
                return stmt
        return None

    def save_report(self, doc_id: str, report: dict) -> None:
        self._write_json(self._path("reports", doc_id, ".json"), report)

    def load_report(self, doc_id: str) -> dict | None:
        path = self._path("reports", doc_id, ".json")
        if not path.exists():
            return None
        return json.loads(path.read_text("utf-8"))

    def save_graph_json(self, doc_id: str, obj: dict) -> None:
        self._write_json(self._path("graphs", doc_id, ".json"), obj)

    def load_graph_json(self, doc_id: str) -> dict | None:
        path = self._path("graphs", doc_id, ".json")
        if not path.exists():
            return None
        return json.loads(path.read_text("utf-8"))

    def save_unfolded(self, doc_id: str, unfolded: list[UnfoldedStatement]) -> None:
        self._write_jsonl(
            self._path("unfolded", doc_id, ".jsonl"), (u.to_json_dict() for u in unfolded)
        )

    def load_unfolded(self, doc_id: str) -> list[UnfoldedStatement]:
        path = self._path("unfolded", doc_id, ".jsonl")
        if not path.exists():
            return []
        return [UnfoldedStatement.from_json_dict(obj) for obj in self._read_jsonl(path)]

    def get_unfolded(self, stmt_id: str) -> UnfoldedStatement | None:
        doc_id, _ = split_stmt_id(stmt_id)
        for u in self.load_unfolded(doc_id):
            if u.stmt_id == stmt_id:
                return u
        return None
