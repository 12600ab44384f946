"""Dependency graphs: construction, cycle repair, and peel layering.

The edge direction is dep -> statement: an edge from A to B says B depends
on A. Layer 0 collects the statements with no prerequisites; deleting it
exposes layer 1, and so on. Extraction noise can produce cycles, which the
repair step breaks deterministically using document order.
"""

from mathdex import (
    DependencyGraph,
    StatementKind,
    StructuredStatement,
    build_graph,
    make_stmt_id,
    partition_layers,
    repair_cycles,
)


def stmt(start, label, deps=()):
    return StructuredStatement(
        stmt_id=make_stmt_id("demo", start),
        doc_id="demo",
        span=(start, start + 10),
        kind=StatementKind.LEMMA,
        label=label,
        content=f"content of {label}",
        local_deps=tuple(make_stmt_id("demo", d) for d in deps),
    )


# a diamond: D needs B and C, which both need A
statements = [
    stmt(0, "A"),
    stmt(100, "B", deps=[0]),
    stmt(200, "C", deps=[0]),
    stmt(300, "D", deps=[100, 200]),
]
graph, report = build_graph(statements)
layers = partition_layers(graph)
print("diamond layers:")
for v in graph.nodes:
    print(f"  layer {layers.layers[v]}: {v}")

# forward references are dropped at build time and reported
noisy = [stmt(0, "A", deps=[100]), stmt(100, "B")]
graph2, report2 = build_graph(noisy)
print("\nforward reference dropped:", report2.forward_refs)

# a cycle that survived extraction: repair removes the backward edge
a, b, c = (make_stmt_id("demo", i) for i in (0, 1, 2))
cyclic = DependencyGraph("demo", (a, b, c), frozenset({(a, b), (b, c), (c, a)}))
repaired, removed = repair_cycles(cyclic)
print("\ncycle repair removed:", sorted(removed))
print("layers after repair:", partition_layers(repaired).layers)
