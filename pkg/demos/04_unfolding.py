"""Statement unfolding, layer by layer.

Each statement is expanded with the already-unfolded texts of its direct
prerequisites only; shared ancestors are emitted once, and a character
budget caps runaway expansions.
"""

from mathdex import (
    DependencyGraph,
    StatementKind,
    StructuredStatement,
    make_stmt_id,
    unfold,
)

ids = [make_stmt_id("demo", i * 100) for i in range(4)]
statements = {}
for i, (sid, label, content) in enumerate(
    zip(
        ids,
        ["Definition 1", "Lemma 2", "Proposition 3", "Theorem 4"],
        [
            "A gadget is a pointed set with a marked involution.",
            "Every gadget splits.",
            "Split gadgets admit sections.",
            "Sections of gadgets are unique.",
        ],
    )
):
    statements[sid] = StructuredStatement(
        stmt_id=sid,
        doc_id="demo",
        span=(i * 100, i * 100 + 10),
        kind=StatementKind.THEOREM,
        label=label,
        content=content,
    )

# diamond: Theorem 4 needs Lemma 2 and Proposition 3, both need Definition 1
dag = DependencyGraph(
    "demo",
    tuple(ids),
    frozenset({(ids[0], ids[1]), (ids[0], ids[2]), (ids[1], ids[3]), (ids[2], ids[3])}),
)

print("unfolded texts (note Definition 1 appears once in Theorem 4):\n")
for u in unfold(dag, statements):
    print(f"layer {u.layer} | {u.stmt_id}")
    print(f"  {u.unfolded_text}\n")

print("with a 120-character budget:")
for u in unfold(dag, statements, budget=120):
    flag = " [truncated]" if u.truncated else ""
    print(f"  {len(u.unfolded_text):3d} chars{flag}: {u.unfolded_text[:60]}...")
