"""Synthetic desk-scale corpus with known ground truth.

The generator plants statement headers in a format the heuristic locator
recognizes, gives every statement a distinctive vocabulary so retrieval
tests have unambiguous targets, and records exact offsets, kinds, labels,
and dependency links. The oracle structurer client answers from this ground
truth through the regular client protocol, standing in for a perfect model.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .corpus import Document, DocumentMeta
from .kinds import StatementKind
from .structurer import StructureRequest, make_stmt_id

_KIND_WORDS = [
    (StatementKind.DEFINITION, "Definition"),
    (StatementKind.LEMMA, "Lemma"),
    (StatementKind.THEOREM, "Theorem"),
    (StatementKind.PROPOSITION, "Proposition"),
    (StatementKind.COROLLARY, "Corollary"),
    (StatementKind.REMARK, "Remark"),
    (StatementKind.NOTATION, "Notation"),
    (StatementKind.ASSUMPTION, "Assumption"),
]

_SYLLABLES = ["ba", "ce", "di", "fo", "gu", "ka", "le", "mi", "no", "pu", "ra", "se", "ti", "vo", "wu", "za"]

_FILLER = [
    "the ambient construction behaves well under mild perturbation of the data.",
    "standard compactness arguments apply throughout this section.",
    "we work over a fixed base field of characteristic zero.",
    "all maps are assumed continuous unless stated otherwise.",
    "the estimates below are uniform in the relevant parameters.",
]

_ADJECTIVES = [
    "abelian", "admissible", "analytic", "bounded", "closed", "coherent", "compact",
    "convex", "cyclic", "dense", "discrete", "dominant", "elliptic", "finite",
    "generic", "harmonic", "integral", "maximal", "monotone", "nilpotent",
    "normal", "parabolic", "rational", "reduced", "regular", "separable",
    "singular", "smooth", "stable", "transitive", "unital", "weighted",
]

_NOUNS = [
    "algebra", "bundle", "category", "cocycle", "complex", "fibration", "filtration",
    "foliation", "functor", "germ", "groupoid", "ideal", "isometry", "kernel",
    "lattice", "manifold", "module", "morphism", "operator", "pencil",
    "polytope", "quiver", "resolvent", "semigroup", "sheaf", "spectrum",
    "stratum", "subvariety", "tensor", "variety",
]

_VERBS = [
    "absorbs", "admits", "bounds", "contracts", "controls",
    "dominates", "fixes", "generates",
    "interpolates", "normalizes", "preserves", "refines", "stabilizes",
]

_CONNECTIVES = [
    "whenever", "provided", "moreover", "relative", "along", "against",
    "towards", "beneath", "modulo", "despite", "beyond", "amid",
]


@dataclass(frozen=True)
class TruthStatement:
    start: int
    kind: StatementKind
    label: str
    content: str
    core: str  # distinctive sentence without the dependency tail
    dep_labels: tuple[str, ...] = ()


@dataclass
class SyntheticDoc:
    document: Document
    statements: list[TruthStatement]
    query_target: str  # stmt_id of the planted theorem this doc's query should hit
    query_text: str

    @property
    def doc_id(self) -> str:
        return self.document.doc_id


@dataclass
class SyntheticCorpus:
    docs: list[SyntheticDoc]
    seed: int

    @property
    def documents(self) -> list[Document]:
        return [d.document for d in self.docs]

    def queries(self) -> list[tuple[str, str]]:
        return [(d.query_text, d.query_target) for d in self.docs]

    def truth_stmt_ids(self, doc: SyntheticDoc) -> dict[str, str]:
        """Label -> stmt_id for one document's ground truth."""
        return {t.label: make_stmt_id(doc.doc_id, t.start) for t in doc.statements}


def _fresh_token(rng: random.Random, used: set[str]) -> str:
    while True:
        token = "".join(rng.choice(_SYLLABLES) for _ in range(3)) + str(rng.randrange(10, 99))
        if token not in used:
            used.add(token)
            return token


def make_corpus(
    n_docs: int = 10,
    seed: int = 7,
    min_statements: int = 5,
    max_statements: int = 8,
) -> SyntheticCorpus:
    rng = random.Random(seed)
    used_tokens: set[str] = set()
    docs: list[SyntheticDoc] = []
    for i in range(n_docs):
        doc_id = f"synth-{i:03d}"
        parts: list[str] = []
        offset = 0

        def emit(text: str) -> int:
            nonlocal offset
            start = offset
            parts.append(text)
            offset += len(text)
            return start

        emit(f"# Notes on layered structures, volume {i + 1}\n\n")
        emit(rng.choice(_FILLER) + "\n\n")

        n_stmts = rng.randint(min_statements, max_statements)
        theorem_positions = [j for j in range(1, n_stmts)]
        rng.shuffle(theorem_positions)
        # force at least one theorem after the first statement so the query
        # target can carry dependencies
        forced_theorem = theorem_positions[0] if theorem_positions else 0

        statements: list[TruthStatement] = []
        section = rng.randint(1, 3)
        for j in range(n_stmts):
            if j == forced_theorem:
                kind, word = StatementKind.THEOREM, "Theorem"
            else:
                kind, word = _KIND_WORDS[rng.randrange(len(_KIND_WORDS))]
            label = f"{word} {section}.{j + 1}"

            # no universal filler tokens (shared vocabulary is limited to rare
            # pool collisions), and each distinctive term appears twice so its
            # term frequency dominates cosine against unrelated statements
            unique = [_fresh_token(rng, used_tokens) for _ in range(8)]
            words = (
                unique * 2
                + rng.sample(_ADJECTIVES, 3)
                + rng.sample(_NOUNS, 4)
                + rng.sample(_VERBS, 2)
                + rng.sample(_CONNECTIVES, 1)
            )
            rng.shuffle(words)
            core = " ".join(words) + "."
            # the planted query target stays a sink (nothing may depend on it,
            # so no other unfolded text swallows its content) and draws its own
            # deps from dependency-free statements, keeping its unfolding
            # shallow enough that ancestor mass cannot drown the query match
            if j == forced_theorem:
                dep_candidates = [t.label for t in statements if not t.dep_labels]
            else:
                dep_candidates = [
                    t.label for i_t, t in enumerate(statements) if i_t != forced_theorem
                ]
            n_deps = rng.randint(0, min(2, len(dep_candidates)))
            dep_labels = tuple(rng.sample(dep_candidates, n_deps)) if n_deps else ()
            content = core
            if dep_labels:
                content += " This relies on " + " and ".join(dep_labels) + "."

            bold = rng.random() < 0.6
            header = f"**{label}.**" if bold else f"{label}."
            start = emit(f"{header} {content}\n\n")
            emit(rng.choice(_FILLER) + "\n\n")
            statements.append(
                TruthStatement(
                    start=start, kind=kind, label=label, content=content, core=core, dep_labels=dep_labels
                )
            )

        markdown = "".join(parts)
        meta = DocumentMeta(
            doc_id=doc_id,
            source_kind="journal_paper",
            journal_id=f"jrnl-{i % 3}",
            year=1990 + i,
            title=f"Notes on layered structures, volume {i + 1}",
        )
        target = statements[forced_theorem]
        docs.append(
            SyntheticDoc(
                document=Document(meta=meta, markdown=markdown),
                statements=statements,
                query_target=make_stmt_id(doc_id, target.start),
                query_text=target.core,
            )
        )
    return SyntheticCorpus(docs=docs, seed=seed)


class OracleStructurerClient:
    """Scripted structurer that answers from the generator's ground truth,
    exercising the same reply-parsing path as a live model."""

    def __init__(self, corpus: SyntheticCorpus) -> None:
        self._truth: dict[str, dict[int, TruthStatement]] = {
            d.doc_id: {t.start: t for t in d.statements} for d in corpus.docs
        }
        self.requests: list[StructureRequest] = []

    def structure(self, request: StructureRequest) -> str:
        self.requests.append(request)
        truth = self._truth.get(request.doc_id, {})
        items = []
        for c in request.candidates:
            t = truth.get(c.start)
            if t is None:
                continue
            items.append(
                {
                    "start": t.start,
                    "kind": t.kind.value,
                    "label": t.label,
                    "content": t.content,
                    "deps": list(t.dep_labels),
                }
            )
        return json.dumps(items, ensure_ascii=False)


def write_corpus_files(corpus: SyntheticCorpus, target_dir: str | Path) -> tuple[Path, Path]:
    """Write documents as .md files plus a JSON Lines metadata file; returns
    (documents_dir, metadata_path). Layout matches the ingest CLI."""
    target = Path(target_dir)
    docs_dir = target / "docs"
    docs_dir.mkdir(parents=True, exist_ok=True)
    meta_path = target / "meta.jsonl"
    with open(meta_path, "w", encoding="utf-8") as fh:
        for doc in corpus.documents:
            (docs_dir / f"{doc.doc_id}.md").write_text(doc.markdown, encoding="utf-8")
            fh.write(
                json.dumps(
                    {
                        "doc_id": doc.meta.doc_id,
                        "source_kind": doc.meta.source_kind,
                        "journal_id": doc.meta.journal_id,
                        "year": doc.meta.year,
                        "title": doc.meta.title,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
    return docs_dir, meta_path
