"""Stage 2 of extraction: batch candidates with overlap, merge forward
context windows, and turn each candidate into a typed statement with local
dependency links via a pluggable structurer client.

Batches within a document are processed in ordinal order; overlapping
batches see boundary candidates twice, and :func:`reconcile` merges the
duplicate sightings, taking the union of their reported dependencies.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from typing import Protocol

from .clients import TransportError
from .corpus import Document
from .kinds import HEADER_WORDS, StatementKind, coerce_kind
from .locator import CandidateSpan

DEFAULT_BATCH_SIZE = 5
DEFAULT_WINDOW_LENGTH = 4000
DEFAULT_OVERLAP = 1
DEFAULT_RETRIES = 2

GAP_MARKER = "⟦…⟧"  # rendered between non-adjacent intervals

STATEMENT_SCHEMA = "stmt/v1"


class StructurerError(Exception):
    """Batch could not be structured (transport failures after retries)."""


def make_stmt_id(doc_id: str, start: int) -> str:
    """Statement ids are document-scoped and sort in document order."""
    return f"{doc_id}:{start:08d}"


def split_stmt_id(stmt_id: str) -> tuple[str, int]:
    doc_id, _, offset = stmt_id.rpartition(":")
    return doc_id, int(offset)


def normalize_label(label: str) -> str:
    """Collapse whitespace runs; matching stays case-sensitive."""
    return " ".join(label.split())


@dataclass(frozen=True)
class Batch:
    ordinal: int
    members: tuple[int, ...]


@dataclass(frozen=True)
class ContextWindow:
    start: int
    end: int


@dataclass(frozen=True)
class MergedContext:
    """Disjoint, sorted intervals of the document plus their rendered text."""

    intervals: tuple[ContextWindow, ...]
    text: str
    doc_id: str = ""

    def slice(self, start: int, end: int) -> str:
        """Document-coordinate text of [start, end) restricted to the
        covered intervals (used to recover raw span text for fallbacks)."""
        sep_len = len(GAP_MARKER) + 2
        parts = []
        offset = 0  # position of the current interval's text within self.text
        for i, iv in enumerate(self.intervals):
            if i:
                offset += sep_len
            lo = max(start, iv.start)
            hi = min(end, iv.end)
            if lo < hi:
                base = offset + (lo - iv.start)
                parts.append(self.text[base : base + (hi - lo)])
            offset += iv.end - iv.start
        return "".join(parts)


@dataclass(frozen=True)
class StructuredStatement:
    stmt_id: str
    doc_id: str
    span: tuple[int, int]
    kind: StatementKind
    label: str | None
    content: str
    local_deps: tuple[str, ...] = ()
    low_confidence: bool = False

    def __post_init__(self) -> None:
        if not self.content:
            raise ValueError(f"statement {self.stmt_id} has empty content")
        if not (0 <= self.span[0] < self.span[1]):
            raise ValueError(f"statement {self.stmt_id} has invalid span {self.span}")

    def to_json_dict(self) -> dict:
        return {
            "schema": STATEMENT_SCHEMA,
            "stmt_id": self.stmt_id,
            "doc_id": self.doc_id,
            "span": list(self.span),
            "kind": self.kind.value,
            "label": self.label,
            "content": self.content,
            "local_deps": list(self.local_deps),
            "low_confidence": self.low_confidence,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "StructuredStatement":
        if obj.get("schema", STATEMENT_SCHEMA) != STATEMENT_SCHEMA:
            raise ValueError(f"unsupported statement schema {obj.get('schema')!r}")
        return cls(
            stmt_id=obj["stmt_id"],
            doc_id=obj["doc_id"],
            span=(obj["span"][0], obj["span"][1]),
            kind=StatementKind(obj["kind"]),
            label=obj.get("label"),
            content=obj["content"],
            local_deps=tuple(obj.get("local_deps", [])),
            low_confidence=bool(obj.get("low_confidence", False)),
        )


def make_batches(
    n_candidates: int,
    batch_size: int = DEFAULT_BATCH_SIZE,
    overlap: int = DEFAULT_OVERLAP,
) -> list[Batch]:
    """Partition candidate indices into overlapping batches.

    Batch k starts at ``k * (batch_size - overlap)``; consecutive batches
    share exactly ``overlap`` members, and the last batch may be shorter.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    if not 0 <= overlap < batch_size:
        raise ValueError(f"overlap must satisfy 0 <= overlap < batch_size, got {overlap}")
    if n_candidates < 0:
        raise ValueError(f"negative candidate count {n_candidates}")
    stride = batch_size - overlap
    batches: list[Batch] = []
    k = 0
    while True:
        start = k * stride
        if start >= n_candidates:
            break
        end = min(start + batch_size, n_candidates)
        batches.append(Batch(ordinal=k, members=tuple(range(start, end))))
        if end >= n_candidates:
            break
        k += 1
    return batches


def build_windows(
    document: Document,
    batch: Batch,
    candidates: list[CandidateSpan],
    window_length: int = DEFAULT_WINDOW_LENGTH,
    back_margin: int = 0,
) -> MergedContext:
    """Forward context windows for a batch, merged into disjoint intervals.

    One window per member, anchored at the candidate start and extending
    ``window_length`` characters forward (clipped at document bounds);
    overlapping or touching windows merge. Interval texts are joined with an
    explicit gap marker so the model sees where material was elided.
    """
    text = document.markdown
    raw: list[ContextWindow] = []
    for idx in batch.members:
        if not 0 <= idx < len(candidates):
            raise ValueError(f"batch member {idx} out of range for {len(candidates)} candidates")
        c = candidates[idx]
        start = max(0, c.start - back_margin)
        end = min(c.start + window_length, len(text))
        raw.append(ContextWindow(start, end))

    raw.sort(key=lambda w: w.start)
    merged: list[ContextWindow] = []
    for w in raw:
        if merged and w.start <= merged[-1].end:
            if w.end > merged[-1].end:
                merged[-1] = ContextWindow(merged[-1].start, w.end)
        else:
            merged.append(w)

    rendered = f"\n{GAP_MARKER}\n".join(text[w.start : w.end] for w in merged)
    return MergedContext(intervals=tuple(merged), text=rendered, doc_id=document.doc_id)


@dataclass(frozen=True)
class StructureRequest:
    doc_id: str
    context: MergedContext
    candidates: tuple[CandidateSpan, ...]
    retry_hint: str | None = None


class StructurerClient(Protocol):
    """Turns a merged context plus candidate offsets into a JSON array of
    statement objects: ``[{"start": int, "kind": str, "label": str,
    "content": str, "deps": [str, ...]}, ...]``."""

    def structure(self, request: StructureRequest) -> str: ...


_STRUCTURE_PROMPT = """\
The text below contains mathematical statements. For each candidate listed,
produce one JSON object with fields:
  "start": the candidate's offset (copy it verbatim),
  "kind": definition|theorem|lemma|proposition|corollary|remark|notation|assumption|other,
  "label": the display label (e.g. "Theorem 3.1") or null,
  "content": the full statement text,
  "deps": labels of earlier statements in this document that it relies on.
Reply with a JSON array only.
{retry_hint}
Candidates:
{candidates}

Text (gaps elided as {gap}):
{context}
"""


class CompletionStructurerClient:
    """Structurer backed by a completion client."""

    def __init__(self, client) -> None:
        self._client = client

    def structure(self, request: StructureRequest) -> str:
        lines = "\n".join(
            f"- start={c.start} header={request.context.slice(c.start, min(c.start + 80, c.end))!r}"
            for c in request.candidates
        )
        prompt = _STRUCTURE_PROMPT.format(
            retry_hint=request.retry_hint or "",
            candidates=lines,
            gap=GAP_MARKER,
            context=request.context.text,
        )
        return self._client.complete(prompt)


_HEADER_RE = re.compile(
    r"^\s*(?:\*\*|__)?(?P<word>[A-Z][a-z]+)s?\s*(?P<num>\d+(?:\.\d+)*)?\s*[.:]?(?:\*\*|__)?\s*"
)
_MENTION_RE = re.compile(
    r"(?P<word>" + "|".join(HEADER_WORDS) + r")\s+(?P<num>\d+(?:\.\d+)*)"
)


class RuleBasedStructurerClient:
    """Deterministic offline structurer: parses the candidate span text
    directly. Header word and number give the kind and label; label-style
    mentions in the body become dependency links."""

    def structure(self, request: StructureRequest) -> str:
        items = []
        for c in request.candidates:
            raw = request.context.slice(c.start, c.end)
            kind, label, content = self._parse_header(raw)
            deps = []
            for m in _MENTION_RE.finditer(content):
                mention = f"{m.group('word')} {m.group('num')}"
                if mention != label and mention not in deps:
                    deps.append(mention)
            items.append(
                {"start": c.start, "kind": kind, "label": label, "content": content, "deps": deps}
            )
        return json.dumps(items, ensure_ascii=False)

    @staticmethod
    def _parse_header(raw: str) -> tuple[str, str | None, str]:
        m = _HEADER_RE.match(raw)
        if m and m.group("word") in HEADER_WORDS:
            kind = coerce_kind(m.group("word")).value
            label = m.group("word") + (f" {m.group('num')}" if m.group("num") else "")
            return kind, label, raw[m.end() :].strip() or raw.strip()
        return StatementKind.OTHER.value, None, raw.strip()


def _parse_reply(reply: str) -> list[dict] | None:
    start = reply.find("[")
    end = reply.rfind("]")
    if start < 0 or end <= start:
        return None
    try:
        parsed = json.loads(reply[start : end + 1])
    except json.JSONDecodeError:
        return None
    if not isinstance(parsed, list):
        return None
    return [item for item in parsed if isinstance(item, dict)]


def _call_with_retries(client: StructurerClient, request: StructureRequest, retries: int) -> str:
    last: Exception | None = None
    for _ in range(retries + 1):
        try:
            return client.structure(request)
        except TransportError as exc:
            last = exc
    raise StructurerError(f"structurer client failed after {retries + 1} attempts: {last}")


def fallback_statement(c: CandidateSpan, context: MergedContext) -> StructuredStatement:
    raw = context.slice(c.start, c.end).strip() or "(unreadable span)"
    return StructuredStatement(
        stmt_id=make_stmt_id(c.doc_id, c.start),
        doc_id=c.doc_id,
        span=(c.start, c.end),
        kind=StatementKind.OTHER,
        label=None,
        content=raw,
        local_deps=(),
        low_confidence=True,
    )


def structure_batch(
    context: MergedContext,
    batch_candidates: list[CandidateSpan],
    client: StructurerClient,
    retries: int = DEFAULT_RETRIES,
) -> list[StructuredStatement]:
    """Structure one batch: exactly one statement per candidate.

    Candidates the client fails to structure fall back to kind=other with
    the raw span text, flagged low_confidence. Malformed JSON triggers one
    reprompt; transport failures are retried up to ``retries`` times and
    then raise :class:`StructurerError`.
    """
    if not batch_candidates:
        return []
    request = StructureRequest(
        doc_id=batch_candidates[0].doc_id,
        context=context,
        candidates=tuple(batch_candidates),
    )
    items = _parse_reply(_call_with_retries(client, request, retries))
    if items is None:
        reprompt = replace(request, retry_hint="Your previous reply was not valid JSON. Reply with only a JSON array.")
        items = _parse_reply(_call_with_retries(client, reprompt, retries))
    by_start: dict[int, dict] = {}
    for item in items or []:
        try:
            by_start.setdefault(int(item["start"]), item)
        except (KeyError, TypeError, ValueError):
            continue

    out: list[StructuredStatement] = []
    for c in batch_candidates:
        item = by_start.get(c.start)
        content = str(item.get("content", "")).strip() if item else ""
        if not item or not content:
            out.append(fallback_statement(c, context))
            continue
        label = item.get("label")
        deps = []
        for dep in item.get("deps", []) or []:
            dep = normalize_label(str(dep))
            if dep and dep not in deps:
                deps.append(dep)
        out.append(
            StructuredStatement(
                stmt_id=make_stmt_id(c.doc_id, c.start),
                doc_id=c.doc_id,
                span=(c.start, c.end),
                kind=coerce_kind(item.get("kind", c.kind_hint)),
                label=normalize_label(str(label)) if label else None,
                content=content,
                local_deps=tuple(deps),
            )
        )
    return out


@dataclass
class ReconcileReport:
    duplicates_merged: int = 0
    kind_conflicts: list[tuple[str, str, str]] = field(default_factory=list)
    unresolved: list[tuple[str, str]] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "duplicates_merged": self.duplicates_merged,
            "kind_conflicts": [list(c) for c in self.kind_conflicts],
            "unresolved": [list(u) for u in self.unresolved],
        }


def reconcile(
    batch_results: list[list[StructuredStatement]],
) -> tuple[list[StructuredStatement], ReconcileReport]:
    """Merge overlapping batch outputs into one statement list per document.

    Duplicate sightings of a candidate keep the first occurrence's kind,
    content, and label but take the union of dependency links. Dependency
    labels are then resolved to statement ids by exact match (whitespace
    normalized, case-sensitive) against earlier statements; unresolvable
    labels stay as label strings and are reported.
    """
    report = ReconcileReport()
    merged: dict[tuple[str, int], StructuredStatement] = {}
    deps_acc: dict[tuple[str, int], list[str]] = {}
    for batch in batch_results:
        for stmt in batch:
            key = (stmt.doc_id, stmt.span[0])
            if key not in merged:
                merged[key] = stmt
                deps_acc[key] = list(stmt.local_deps)
            else:
                report.duplicates_merged += 1
                first = merged[key]
                if stmt.kind != first.kind:
                    report.kind_conflicts.append((first.stmt_id, first.kind.value, stmt.kind.value))
                for dep in stmt.local_deps:
                    if dep not in deps_acc[key]:
                        deps_acc[key].append(dep)

    ordered = [merged[key] for key in sorted(merged)]
    label_to_id: dict[str, str] = {}
    known_ids = {s.stmt_id for s in ordered}
    out: list[StructuredStatement] = []
    for stmt in ordered:
        resolved: list[str] = []
        for dep in deps_acc[(stmt.doc_id, stmt.span[0])]:
            if dep in known_ids:
                target = dep
            elif dep in label_to_id:
                target = label_to_id[dep]
            else:
                report.unresolved.append((stmt.stmt_id, dep))
                target = dep
            if target not in resolved and target != stmt.stmt_id:
                resolved.append(target)
        out.append(replace(stmt, local_deps=tuple(resolved)))
        if stmt.label:
            label_to_id[normalize_label(stmt.label)] = stmt.stmt_id
    return out, report
