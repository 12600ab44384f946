"""Two-stage statement extraction on a hand-written document.

Stage 1 proposes header patterns and localizes candidate spans; stage 2
batches the candidates, merges their forward context windows, and structures
each one. Here the offline rule-based client stands in for the model.
"""

from mathdex import (
    Document,
    DocumentMeta,
    HeuristicPatternProvider,
    RuleBasedStructurerClient,
    build_windows,
    locate_candidates,
    make_batches,
    reconcile,
    structure_batch,
)

markdown = """\
# A tiny example paper

We recall the basic notions first.

**Definition 1.1.** A widget is called stable when every bounded morphism
fixes its spectrum.

Some connecting prose that the locator should skip.

**Lemma 1.2.** Every stable widget admits a regular resolvent, using Definition 1.1.

**Theorem 1.3.** The resolvent of a stable widget interpolates its spectrum.
This relies on Lemma 1.2 and also on Definition 1.1.
"""

doc = Document(
    meta=DocumentMeta(doc_id="demo-paper", source_kind="journal_paper", journal_id="demo", year=2024, title="A tiny example paper"),
    markdown=markdown,
)

# stage 1: localization
patterns = HeuristicPatternProvider().propose(doc)
print(f"{len(patterns.patterns)} built-in patterns matched this document")
candidates = locate_candidates(doc, patterns)
for c in candidates:
    print(f"  candidate at {c.start:4d}..{c.end:4d}  hint={c.kind_hint.value if c.kind_hint else '?'}")

# stage 2: batches of five with one-candidate overlap, 4000-char windows
batches = make_batches(len(candidates))
client = RuleBasedStructurerClient()
results = []
for batch in batches:
    context = build_windows(doc, batch, candidates)
    members = [candidates[i] for i in batch.members]
    results.append(structure_batch(context, members, client))

statements, report = reconcile(results)
print("\nstructured statements:")
for s in statements:
    deps = ", ".join(s.local_deps) or "-"
    print(f"  {s.label:16s} kind={s.kind.value:11s} deps: {deps}")
print(f"\nunresolved dependency labels: {report.unresolved or 'none'}")
