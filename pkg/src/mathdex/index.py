"""Dense retrieval: pluggable embedders, an exact flat-scan vector index
ranked by cosine similarity, and a versioned binary snapshot format.

Vectors are unit-normalized at insert so similarity reduces to a dot
product. Queries get an instruction prefix before embedding; indexed
statements never do.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import struct
import threading
import time
from dataclasses import dataclass
from typing import NamedTuple, Protocol, Sequence

import httpx
import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_DIM = 256
DEFAULT_INSTRUCTION = "Given a mathematical query, retrieve theorem statements that answer or match it:"

SNAPSHOT_MAGIC = b"MTLX"
SNAPSHOT_VERSION = 1


class VectorIndexError(Exception):
    """Base error for index operations."""


class InvalidVectorError(VectorIndexError):
    """Vector is non-finite, zero, or not one-dimensional."""


class DimensionMismatchError(VectorIndexError):
    """Vector dimension differs from the index dimension."""


class SnapshotFormatError(VectorIndexError):
    """Snapshot file is corrupt or has an unsupported version."""


class EmbeddingServiceError(Exception):
    """Embedding backend failed after the configured retries."""


def normalize_vector(values) -> np.ndarray:
    """Return a float32 unit vector; rejects zero and non-finite input.

    Components are rescaled by the max magnitude first so the squared norm
    cannot under- or overflow; a second normalization pass after the float32
    cast keeps the stored norm within 1e-6 of 1.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise InvalidVectorError(f"expected a 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidVectorError("vector has non-finite values")
    scale = float(np.max(np.abs(v)))
    if scale == 0.0:
        raise InvalidVectorError("zero vector cannot be normalized")
    scaled = v / scale
    out = (scaled / float(np.linalg.norm(scaled))).astype(np.float32)
    norm32 = float(np.linalg.norm(out.astype(np.float64)))
    return (out.astype(np.float64) / norm32).astype(np.float32)


class Embedder(Protocol):
    @property
    def dim(self) -> int: ...

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]: ...


_TOKEN_RE = re.compile(r"[0-9a-z]+")


def _bucket(token: str, dim: int) -> int:
    # fixed hash: first 8 bytes of SHA-256, big-endian, mod dim
    return int.from_bytes(hashlib.sha256(token.encode("utf-8")).digest()[:8], "big") % dim


class HashEmbedder:
    """Deterministic test embedder: bag-of-words feature hashing.

    Lowercase, split on non-alphanumerics, hash each token into ``dim``
    buckets, accumulate counts, L2-normalize. Texts with no tokens map to
    the reserved basis vector e0.
    """

    def __init__(self, dim: int = DEFAULT_DIM) -> None:
        if dim < 1:
            raise VectorIndexError(f"dimension must be >= 1, got {dim}")
        self._dim = dim

    @property
    def dim(self) -> int:
        return self._dim

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        out = []
        for text in texts:
            counts = np.zeros(self._dim, dtype=np.float64)
            tokens = _TOKEN_RE.findall(text.lower())
            if not tokens:
                e0 = np.zeros(self._dim, dtype=np.float32)
                e0[0] = 1.0
                out.append(e0)
                continue
            for token in tokens:
                counts[_bucket(token, self._dim)] += 1.0
            out.append(normalize_vector(counts))
        return out


class ServiceEmbedder:
    """HTTP embedding client with request batching and bounded retry.

    POSTs ``{"texts": [...]}`` and expects ``{"vectors": [[...], ...]}``.
    """

    def __init__(
        self,
        url: str,
        dim: int,
        batch_size: int = 32,
        max_retries: int = 3,
        backoff: float = 0.5,
        timeout: float = 60.0,
        client: httpx.Client | None = None,
    ) -> None:
        self.url = url
        self._dim = dim
        self.batch_size = batch_size
        self.max_retries = max_retries
        self.backoff = backoff
        self._client = client or httpx.Client(timeout=timeout)

    @property
    def dim(self) -> int:
        return self._dim

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for lo in range(0, len(texts), self.batch_size):
            chunk = list(texts[lo : lo + self.batch_size])
            out.extend(self._embed_batch(chunk))
        return out

    def _embed_batch(self, chunk: list[str]) -> list[np.ndarray]:
        last: Exception | None = None
        for attempt in range(self.max_retries):
            try:
                resp = self._client.post(self.url, json={"texts": chunk})
                if resp.status_code >= 500:
                    raise EmbeddingServiceError(f"embedding service returned {resp.status_code}")
                resp.raise_for_status()
                vectors = resp.json()["vectors"]
                if len(vectors) != len(chunk):
                    raise EmbeddingServiceError(
                        f"service returned {len(vectors)} vectors for {len(chunk)} texts"
                    )
                arrays = [np.asarray(v, dtype=np.float32) for v in vectors]
                for a in arrays:
                    if a.shape != (self._dim,):
                        raise DimensionMismatchError(
                            f"service vector has shape {a.shape}, expected ({self._dim},)"
                        )
                return arrays
            except (httpx.HTTPError, EmbeddingServiceError, KeyError, ValueError) as exc:
                last = exc
                if attempt + 1 < self.max_retries:
                    time.sleep(self.backoff * (attempt + 1))
        raise EmbeddingServiceError(
            f"embedding request failed after {self.max_retries} attempts: {last}"
        )


def build_query_text(text: str, instruction: str) -> str:
    """Prefix the retrieval instruction to a query (queries only; indexed
    statements are embedded raw)."""
    if not instruction:
        return text
    return f"{instruction}\n{text}"


@dataclass(frozen=True)
class IndexEntry:
    stmt_id: str
    vector: np.ndarray
    payload: dict


@dataclass(frozen=True)
class SearchFilters:
    kinds: frozenset[str] | None = None
    year_from: int | None = None
    year_to: int | None = None
    journal_ids: frozenset[str] | None = None
    source_kind: str | None = None

    def matches(self, payload: dict) -> bool:
        if self.kinds is not None and payload.get("kind") not in self.kinds:
            return False
        year = payload.get("year")
        if self.year_from is not None and (year is None or year < self.year_from):
            return False
        if self.year_to is not None and (year is None or year > self.year_to):
            return False
        if self.journal_ids is not None and payload.get("journal_id") not in self.journal_ids:
            return False
        if self.source_kind is not None and payload.get("source_kind") != self.source_kind:
            return False
        return True

    @classmethod
    def from_dict(cls, obj: dict | None) -> "SearchFilters":
        if not obj:
            return cls()
        return cls(
            kinds=frozenset(obj["kinds"]) if obj.get("kinds") else None,
            year_from=obj.get("year_from"),
            year_to=obj.get("year_to"),
            journal_ids=frozenset(obj["journal_ids"]) if obj.get("journal_ids") else None,
            source_kind=obj.get("source_kind"),
        )


@dataclass(frozen=True)
class Query:
    text: str
    k: int = 10
    filters: SearchFilters = SearchFilters()

    def __post_init__(self) -> None:
        if self.k < 0:
            raise VectorIndexError(f"k must be >= 0, got {self.k}")
        if self.k > 0 and not self.text:
            raise VectorIndexError("query text must be non-empty when k > 0")


class SearchHit(NamedTuple):
    stmt_id: str
    score: float
    payload: dict


@dataclass(frozen=True)
class SearchResult:
    hits: tuple[SearchHit, ...]


class _State(NamedTuple):
    """Immutable index contents; readers grab one reference and never see a
    torn write."""

    ids: tuple[str, ...]
    id_array: np.ndarray
    vectors: np.ndarray  # (n, dim) float32, rows unit-normalized
    payloads: tuple[dict, ...]
    pos: dict[str, int]


def _empty_state(dim: int) -> _State:
    return _State(
        ids=(),
        id_array=np.empty(0, dtype=str),
        vectors=np.empty((0, dim), dtype=np.float32),
        payloads=(),
        pos={},
    )


class VectorIndex:
    """Exact flat-scan index over unit vectors; cosine = dot product."""

    def __init__(self, dim: int = DEFAULT_DIM) -> None:
        if dim < 1:
            raise VectorIndexError(f"dimension must be >= 1, got {dim}")
        self._dim = dim
        self._lock = threading.Lock()
        self._state = _empty_state(dim)

    @property
    def dim(self) -> int:
        return self._dim

    def __len__(self) -> int:
        return len(self._state.ids)

    def add(self, entries: Sequence[IndexEntry], replace: bool = False) -> int:
        """Insert entries; returns the number of new ids added.

        Vectors are normalized here. Non-finite vectors raise before anything
        is applied; zero vectors are rejected per entry and logged. Duplicate
        ids require the replace flag and update in place.
        """
        prepared: list[tuple[str, np.ndarray, dict]] = []
        for entry in entries:
            vec = np.asarray(entry.vector)
            if vec.shape != (self._dim,):
                raise DimensionMismatchError(
                    f"entry {entry.stmt_id}: vector shape {vec.shape}, index dimension {self._dim}"
                )
            if not np.all(np.isfinite(vec)):
                raise InvalidVectorError(f"entry {entry.stmt_id}: non-finite vector")
            if float(np.linalg.norm(vec)) == 0.0:
                logger.warning("rejecting zero vector for %s", entry.stmt_id)
                continue
            prepared.append((entry.stmt_id, normalize_vector(vec), dict(entry.payload)))

        with self._lock:
            state = self._state
            for sid, _, _ in prepared:
                if sid in state.pos and not replace:
                    raise VectorIndexError(f"duplicate stmt_id {sid!r} without replace")
            ids = list(state.ids)
            rows = [state.vectors[i] for i in range(len(ids))]
            payloads = list(state.payloads)
            pos = dict(state.pos)
            added = 0
            for sid, vec, payload in prepared:
                if sid in pos:
                    rows[pos[sid]] = vec
                    payloads[pos[sid]] = payload
                else:
                    pos[sid] = len(ids)
                    ids.append(sid)
                    rows.append(vec)
                    payloads.append(payload)
                    added += 1
            matrix = (
                np.vstack(rows).astype(np.float32)
                if rows
                else np.empty((0, self._dim), dtype=np.float32)
            )
            self._state = _State(
                ids=tuple(ids),
                id_array=np.array(ids, dtype=str) if ids else np.empty(0, dtype=str),
                vectors=matrix,
                payloads=tuple(payloads),
                pos=pos,
            )
            return added

    def score_all(self, query_vector) -> tuple[tuple[str, ...], np.ndarray, tuple[dict, ...]]:
        """Cosine score of every stored entry against the query, in insertion
        order. This is the single scoring primitive; search ranks exactly
        these values, so correctness oracles can re-rank them independently."""
        state = self._state
        q = self._check_query(query_vector)
        return state.ids, state.vectors @ q, state.payloads

    def _check_query(self, query_vector) -> np.ndarray:
        q = np.asarray(query_vector)
        if q.shape != (self._dim,):
            raise DimensionMismatchError(
                f"query vector shape {q.shape}, index dimension {self._dim}"
            )
        return normalize_vector(q)

    def search(
        self,
        query_vector,
        k: int = 10,
        filters: SearchFilters | None = None,
    ) -> SearchResult:
        """Exact top-k by cosine over entries passing the filters.

        Scores are non-increasing; exact ties break by stmt_id ascending.
        """
        if k < 0:
            raise VectorIndexError(f"k must be >= 0, got {k}")
        state = self._state
        q = self._check_query(query_vector)
        if k == 0 or not state.ids:
            return SearchResult(hits=())
        scores = state.vectors @ q

        if filters is None or filters == SearchFilters():
            candidate = np.arange(len(state.ids))
        else:
            candidate = np.array(
                [i for i, p in enumerate(state.payloads) if filters.matches(p)], dtype=int
            )
            if candidate.size == 0:
                return SearchResult(hits=())
        sub_scores = scores[candidate]
        sub_ids = state.id_array[candidate]
        order = np.lexsort((sub_ids, -sub_scores))[:k]
        hits = tuple(
            SearchHit(
                stmt_id=state.ids[candidate[i]],
                score=float(sub_scores[i]),
                payload=dict(state.payloads[candidate[i]]),
            )
            for i in order
        )
        return SearchResult(hits=hits)

    def save(self, path) -> None:
        """Write the snapshot: magic, version u32, dim u32, count u64, then
        per entry id, payload JSON, and little-endian float32 values."""
        state = self._state
        tmp = f"{path}.tmp.{os.getpid()}"
        with open(tmp, "wb") as fh:
            fh.write(SNAPSHOT_MAGIC)
            fh.write(struct.pack("<I", SNAPSHOT_VERSION))
            fh.write(struct.pack("<I", self._dim))
            fh.write(struct.pack("<Q", len(state.ids)))
            for i, sid in enumerate(state.ids):
                id_bytes = sid.encode("utf-8")
                payload_bytes = json.dumps(
                    state.payloads[i], ensure_ascii=False, sort_keys=True, separators=(",", ":")
                ).encode("utf-8")
                fh.write(struct.pack("<I", len(id_bytes)))
                fh.write(id_bytes)
                fh.write(struct.pack("<I", len(payload_bytes)))
                fh.write(payload_bytes)
                fh.write(state.vectors[i].astype("<f4").tobytes())
        os.replace(tmp, path)

    @classmethod
    def load(cls, path) -> "VectorIndex":
        with open(path, "rb") as fh:
            data = fh.read()
        if data[:4] != SNAPSHOT_MAGIC:
            raise SnapshotFormatError(f"bad magic bytes {data[:4]!r}")
        (version,) = struct.unpack_from("<I", data, 4)
        if version != SNAPSHOT_VERSION:
            raise SnapshotFormatError(f"unsupported snapshot version {version}")
        (dim,) = struct.unpack_from("<I", data, 8)
        (count,) = struct.unpack_from("<Q", data, 12)
        offset = 20
        index = cls(dim=dim)
        ids: list[str] = []
        rows: list[np.ndarray] = []
        payloads: list[dict] = []
        try:
            for _ in range(count):
                (id_len,) = struct.unpack_from("<I", data, offset)
                offset += 4
                sid = data[offset : offset + id_len].decode("utf-8")
                offset += id_len
                (payload_len,) = struct.unpack_from("<I", data, offset)
                offset += 4
                payload = json.loads(data[offset : offset + payload_len].decode("utf-8"))
                offset += payload_len
                vec = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).copy()
                offset += 4 * dim
                ids.append(sid)
                rows.append(vec)
                payloads.append(payload)
        except (struct.error, UnicodeDecodeError, json.JSONDecodeError, ValueError) as exc:
            raise SnapshotFormatError(f"truncated or corrupt snapshot: {exc}") from exc
        if offset != len(data):
            raise SnapshotFormatError(f"{len(data) - offset} trailing bytes in snapshot")
        matrix = (
            np.vstack(rows).astype(np.float32) if rows else np.empty((0, dim), dtype=np.float32)
        )
        index._state = _State(
            ids=tuple(ids),
            id_array=np.array(ids, dtype=str) if ids else np.empty(0, dtype=str),
            vectors=matrix,
            payloads=tuple(payloads),
            pos={sid: i for i, sid in enumerate(ids)},
        )
        return index
