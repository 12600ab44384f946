"""Corpus curation: journal selection by proceedings-citation counts and
document metadata handling.

Journal selection keeps venues whose 2007-2021 papers drew more than
``citation_threshold`` citations from the proceedings set (strict) and that
published at least ``min_papers`` papers in the same window (inclusive).
The boundary semantics matter: an off-by-one here silently changes which
journals enter the corpus.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

DEFAULT_YEAR_LO = 2007
DEFAULT_YEAR_HI = 2021
DEFAULT_CITATION_THRESHOLD = 50
DEFAULT_MIN_PAPERS = 100

SOURCE_KINDS = ("journal_paper", "textbook")


class CorpusError(ValueError):
    """Invalid corpus input (bad metadata, duplicate ids, empty documents)."""


@dataclass(frozen=True)
class JournalRecord:
    """Per-journal aggregate counts over the selection window."""

    journal_id: str
    name: str = ""
    papers_2007_2021: int = 0
    icm_citations_2007_2021: int = 0

    def __post_init__(self) -> None:
        if self.papers_2007_2021 < 0 or self.icm_citations_2007_2021 < 0:
            raise CorpusError(f"negative counts for journal {self.journal_id!r}")


@dataclass(frozen=True)
class CitationEvent:
    """One citation from a proceedings paper to a journal paper."""

    citing_proceeding_id: str
    cited_journal_id: str
    cited_paper_year: int

    def __post_init__(self) -> None:
        if self.cited_paper_year <= 0:
            raise CorpusError(f"invalid year {self.cited_paper_year!r}")


@dataclass(frozen=True)
class DocumentMeta:
    doc_id: str
    source_kind: str = "journal_paper"
    journal_id: str | None = None
    year: int = 0
    title: str = ""

    def __post_init__(self) -> None:
        if self.source_kind not in SOURCE_KINDS:
            raise CorpusError(f"unknown source_kind {self.source_kind!r}")
        if self.source_kind == "journal_paper" and not self.journal_id:
            raise CorpusError(f"journal_paper {self.doc_id!r} missing journal_id")


@dataclass(frozen=True)
class Document:
    """One OCR-markdown paper or textbook; character offsets into
    ``markdown`` are the coordinate system used by every downstream stage."""

    meta: DocumentMeta
    markdown: str

    def __post_init__(self) -> None:
        if not self.markdown.strip():
            raise CorpusError(f"document {self.meta.doc_id!r} has empty markdown")

    @property
    def doc_id(self) -> str:
        return self.meta.doc_id


def count_icm_citations(
    events: Iterable[CitationEvent],
    year_lo: int = DEFAULT_YEAR_LO,
    year_hi: int = DEFAULT_YEAR_HI,
) -> dict[str, int]:
    """Count citations per journal for papers published in [year_lo, year_hi].

    Both endpoints are inclusive. Every event is counted; citations are not
    deduplicated per citing proceeding, since the provenance data gives no
    basis for collapsing them.
    """
    if year_lo > year_hi:
        raise CorpusError(f"year_lo {year_lo} > year_hi {year_hi}")
    counts: dict[str, int] = {}
    for ev in events:
        if year_lo <= ev.cited_paper_year <= year_hi:
            counts[ev.cited_journal_id] = counts.get(ev.cited_journal_id, 0) + 1
    return counts


def select_journals(
    records: Iterable[JournalRecord],
    citation_threshold: int = DEFAULT_CITATION_THRESHOLD,
    min_papers: int = DEFAULT_MIN_PAPERS,
) -> set[str]:
    """Select journal ids with citations strictly above the threshold and a
    paper count at or above ``min_papers``.

    Deterministic and order-independent; duplicate journal ids are rejected.
    """
    if citation_threshold < 0 or min_papers < 0:
        raise CorpusError("thresholds must be nonnegative")
    seen: set[str] = set()
    selected: set[str] = set()
    for rec in records:
        if rec.journal_id in seen:
            raise CorpusError(f"duplicate journal_id {rec.journal_id!r}")
        seen.add(rec.journal_id)
        if rec.icm_citations_2007_2021 > citation_threshold and rec.papers_2007_2021 >= min_papers:
            selected.add(rec.journal_id)
    return selected


@dataclass
class MetadataSet:
    """Parsed contents of a JSON Lines metadata file."""

    journals: list[JournalRecord] = field(default_factory=list)
    events: list[CitationEvent] = field(default_factory=list)
    documents: list[DocumentMeta] = field(default_factory=list)


def load_metadata(path: str | Path) -> MetadataSet:
    """Read a JSON Lines metadata file (UTF-8, one object per line).

    Record kind is inferred from the fields present; unknown fields are
    ignored. Journal records carry ``journal_id`` plus counts, citation
    events carry ``citing_proceeding_id``, document entries carry ``doc_id``.
    """
    out = MetadataSet()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise CorpusError(f"{path}:{lineno}: expected an object")
            if "citing_proceeding_id" in obj:
                out.events.append(
                    CitationEvent(
                        citing_proceeding_id=str(obj["citing_proceeding_id"]),
                        cited_journal_id=str(obj["cited_journal_id"]),
                        cited_paper_year=int(obj["cited_paper_year"]),
                    )
                )
            elif "doc_id" in obj:
                out.documents.append(
                    DocumentMeta(
                        doc_id=str(obj["doc_id"]),
                        source_kind=str(obj.get("source_kind", "journal_paper")),
                        journal_id=obj.get("journal_id"),
                        year=int(obj.get("year", 0)),
                        title=str(obj.get("title", "")),
                    )
                )
            elif "journal_id" in obj:
                out.journals.append(
                    JournalRecord(
                        journal_id=str(obj["journal_id"]),
                        name=str(obj.get("name", "")),
                        papers_2007_2021=int(obj.get("papers_2007_2021", 0)),
                        icm_citations_2007_2021=int(obj.get("icm_citations_2007_2021", 0)),
                    )
                )
            else:
                raise CorpusError(f"{path}:{lineno}: unrecognized record shape")
    return out
