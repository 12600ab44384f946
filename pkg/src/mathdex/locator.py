"""Stage 1 of extraction: propose document-specific header patterns and
localize candidate statement spans in the OCR markdown.

Patterns use Python ``re`` syntax restricted to a linear-time-matchable
dialect: backreferences and conditional groups are rejected at compile time.
Span ends are header-anchored: a candidate runs from its header match to the
next candidate start, a configurable cap, or the end of the document,
whichever comes first.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from typing import Protocol

from .corpus import Document
from .kinds import HEADER_WORDS, StatementKind, coerce_kind

try:  # renamed to re._parser in 3.11
    from re import _parser as _sre_parse  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover
    import sre_parse as _sre_parse  # type: ignore[no-redef]

logger = logging.getLogger(__name__)

DEFAULT_SPAN_CAP = 4000
DEFAULT_MATCH_BUDGET = 1_000_000
DEFAULT_SAMPLE_CHARS = 8000

_FORBIDDEN_OPS = {"GROUPREF", "GROUPREF_EXISTS"}


class LocatorError(Exception):
    """Base error for pattern proposal and candidate localization."""


class PatternDialectError(LocatorError):
    """Regex does not compile or falls outside the supported dialect."""


class MatchBudgetError(LocatorError):
    """A pattern exceeded the per-document match budget."""

    def __init__(self, pattern: str, budget: int) -> None:
        super().__init__(f"match budget of {budget} steps exceeded by pattern {pattern!r}")
        self.pattern = pattern
        self.budget = budget


class ProviderError(LocatorError):
    """Pattern provider failed (transport or unparseable reply)."""


@dataclass(frozen=True)
class StatementPattern:
    regex_source: str
    kind_hint: StatementKind | None = None


@dataclass(frozen=True)
class PatternSet:
    doc_id: str
    patterns: tuple[StatementPattern, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "patterns": [
                {"regex": p.regex_source, "kind_hint": p.kind_hint.value if p.kind_hint else None}
                for p in self.patterns
            ],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "PatternSet":
        patterns = tuple(
            StatementPattern(
                regex_source=item["regex"],
                kind_hint=StatementKind(item["kind_hint"]) if item.get("kind_hint") else None,
            )
            for item in obj.get("patterns", [])
        )
        return cls(doc_id=obj["doc_id"], patterns=patterns)


@dataclass(frozen=True, order=True)
class CandidateSpan:
    doc_id: str
    start: int
    end: int
    kind_hint: StatementKind | None = None

    def __post_init__(self) -> None:
        if not (0 <= self.start < self.end):
            raise LocatorError(f"invalid span ({self.start}, {self.end})")


def _scan_parse_tree(node: object, source: str) -> None:
    if isinstance(node, _sre_parse.SubPattern):
        for op, av in node.data:
            if getattr(op, "name", str(op)) in _FORBIDDEN_OPS:
                raise PatternDialectError(f"backreference in pattern {source!r} is not supported")
            _scan_parse_tree(av, source)
    elif isinstance(node, (tuple, list)):
        for item in node:
            _scan_parse_tree(item, source)


def compile_pattern(source: str) -> re.Pattern[str]:
    """Compile a pattern, rejecting anything outside the supported dialect."""
    try:
        tree = _sre_parse.parse(source)
    except re.error as exc:
        raise PatternDialectError(f"pattern {source!r} does not compile: {exc}") from exc
    _scan_parse_tree(tree, source)
    return re.compile(source)


def _header_pattern(word: str) -> str:
    # "Theorem 3.1.", "Definition 2:", "**Lemma 4**", with optional bold marks
    return rf"(?m)^[ \t]{{0,8}}(?:\*\*|__)?{word}s?\s+\d+(?:\.\d+)*\s*[.:]?(?:\*\*|__)?"


def _unnumbered_pattern(word: str) -> str:
    # "**Theorem.** ..." style headers without a number
    return rf"(?m)^[ \t]{{0,8}}(?:\*\*|__){word}\s*[.:]?(?:\*\*|__)"


def _environment_pattern(word: str) -> str:
    return rf"\\begin\{{{word.lower()}\*?\}}"


def builtin_patterns() -> tuple[StatementPattern, ...]:
    """Built-in header patterns for common OCR markdown formats."""
    patterns: list[StatementPattern] = []
    for word, kind in HEADER_WORDS.items():
        hint = None if kind is StatementKind.OTHER else kind
        patterns.append(StatementPattern(_header_pattern(word), hint))
        patterns.append(StatementPattern(_unnumbered_pattern(word), hint))
        patterns.append(StatementPattern(_environment_pattern(word), hint))
    return tuple(patterns)


class PatternProvider(Protocol):
    def propose(self, document: Document) -> PatternSet: ...


class HeuristicPatternProvider:
    """Deterministic provider: returns the built-in patterns that actually
    match the document at least once."""

    def propose(self, document: Document) -> PatternSet:
        matched = []
        for pattern in builtin_patterns():
            compiled = compile_pattern(pattern.regex_source)
            if compiled.search(document.markdown):
                matched.append(pattern)
        return PatternSet(doc_id=document.doc_id, patterns=tuple(matched))


_MODEL_PROMPT = """\
You are given the beginning of a mathematical document in OCR markdown.
Identify the formatting of statement headers (theorems, definitions, lemmas,
and similar) and reply with a JSON array of objects, each with:
  "pattern": a Python regular expression matching one header style.
  "kind": one of definition, theorem, lemma, proposition, corollary, remark,
          notation, assumption, or null when the pattern is generic.
Do not use backreferences. Reply with the JSON array only.

Document sample:
{sample}
"""


class ModelPatternProvider:
    """Provider backed by a completion client; prompts with a truncated
    document sample and parses pattern/kind pairs from the JSON reply.

    Regexes that do not compile under the dialect are dropped with a warning;
    transport failures and unparseable replies raise :class:`ProviderError`
    so the caller can fall back to the heuristic provider.
    """

    def __init__(self, client, sample_chars: int = DEFAULT_SAMPLE_CHARS) -> None:
        self._client = client
        self._sample_chars = sample_chars

    def propose(self, document: Document) -> PatternSet:
        from .clients import TransportError

        prompt = _MODEL_PROMPT.format(sample=document.markdown[: self._sample_chars])
        try:
            reply = self._client.complete(prompt)
        except TransportError as exc:
            raise ProviderError(f"pattern provider transport failure: {exc}") from exc
        items = _extract_json_array(reply)
        if items is None:
            raise ProviderError("pattern provider reply contained no JSON array")
        patterns: list[StatementPattern] = []
        for item in items:
            if not isinstance(item, dict) or "pattern" not in item:
                continue
            source = str(item["pattern"])
            try:
                compile_pattern(source)
            except PatternDialectError as exc:
                logger.warning("dropping proposed pattern %r: %s", source, exc)
                continue
            hint = coerce_kind(item.get("kind")) if item.get("kind") else None
            if hint is StatementKind.OTHER:
                hint = None
            patterns.append(StatementPattern(source, hint))
        return PatternSet(doc_id=document.doc_id, patterns=tuple(patterns))


def _extract_json_array(reply: str) -> list | None:
    start = reply.find("[")
    end = reply.rfind("]")
    if start < 0 or end <= start:
        return None
    try:
        parsed = json.loads(reply[start : end + 1])
    except json.JSONDecodeError:
        return None
    return parsed if isinstance(parsed, list) else None


def _find_matches(
    text: str, compiled: re.Pattern[str], source: str, steps_left: int
) -> tuple[list[tuple[int, int]], int]:
    """finditer with scan-position accounting against the match budget."""
    spans: list[tuple[int, int]] = []
    pos = 0
    n = len(text)
    while pos <= n:
        m = compiled.search(text, pos)
        if m is None:
            steps_left -= n - pos
            break
        advance = max(m.end(), m.start() + 1)
        steps_left -= advance - pos
        if steps_left < 0:
            raise MatchBudgetError(source, 0)
        if m.start() < n:
            spans.append((m.start(), m.end()))
        pos = advance
    return spans, steps_left


def locate_candidates(
    document: Document,
    patterns: PatternSet,
    span_cap: int = DEFAULT_SPAN_CAP,
    match_budget: int = DEFAULT_MATCH_BUDGET,
) -> list[CandidateSpan]:
    """Apply header patterns and return sorted, non-overlapping candidate spans.

    Each kept header match opens a candidate at its start; the candidate ends
    at the next candidate start, ``start + span_cap``, or the document end,
    whichever is smallest. When two matches share a start or nest, the
    earliest-starting then longest match wins. Pure function of its inputs.
    """
    text = document.markdown
    matches: list[tuple[int, int, StatementKind | None]] = []
    steps_left = match_budget
    for pattern in patterns.patterns:
        compiled = compile_pattern(pattern.regex_source)
        try:
            spans, steps_left = _find_matches(text, compiled, pattern.regex_source, steps_left)
        except MatchBudgetError:
            raise MatchBudgetError(pattern.regex_source, match_budget) from None
        matches.extend((s, e, pattern.kind_hint) for s, e in spans)

    matches.sort(key=lambda m: (m[0], -m[1]))
    kept: list[tuple[int, int, StatementKind | None]] = []
    for m in matches:
        if kept and (m[0] == kept[-1][0] or m[1] <= kept[-1][1]):
            continue  # same-start duplicate or nested match
        kept.append(m)

    out: list[CandidateSpan] = []
    for i, (start, _end, hint) in enumerate(kept):
        next_start = kept[i + 1][0] if i + 1 < len(kept) else len(text)
        end = min(next_start, start + span_cap, len(text))
        out.append(CandidateSpan(doc_id=document.doc_id, start=start, end=end, kind_hint=hint))
    return out
