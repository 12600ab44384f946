"""Per-document dependency graphs: build, repair cycles, partition into peel
layers, and unfold statements in layer order into self-contained texts.

An edge (a, b) means b depends on a. Layer 0 holds the zero-in-degree nodes;
layer k holds the nodes of zero in-degree once layers 0..k-1 are deleted.
Unfolding walks the layers upward, expanding each statement with only its
direct in-neighbors, which are already unfolded by the time it is reached.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Mapping, NamedTuple, Protocol, Sequence

from .clients import TransportError
from .structurer import StructuredStatement

DEFAULT_BUDGET = 20_000

UNFOLDED_SCHEMA = "unfolded/v1"


class GraphError(Exception):
    """Invalid graph input (mixed documents, duplicate ids, missing nodes)."""


class GraphCycleError(GraphError):
    """Layer partitioning was asked to run on a cyclic graph."""


class ExpanderError(Exception):
    """A pluggable expander failed; the caller falls back to concatenation."""


@dataclass(frozen=True)
class DependencyGraph:
    """Dependency digraph with nodes kept in document order."""

    doc_id: str
    nodes: tuple[str, ...]
    edges: frozenset[tuple[str, str]]

    def __post_init__(self) -> None:
        if len(set(self.nodes)) != len(self.nodes):
            raise GraphError("duplicate node ids")
        node_set = set(self.nodes)
        for u, v in self.edges:
            if u == v:
                raise GraphError(f"self-loop on {u}")
            if u not in node_set or v not in node_set:
                raise GraphError(f"edge ({u}, {v}) references unknown node")

    @cached_property
    def position(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.nodes)}

    @cached_property
    def successors(self) -> dict[str, tuple[str, ...]]:
        adj: dict[str, list[str]] = {v: [] for v in self.nodes}
        for u, v in self.edges:
            adj[u].append(v)
        return {v: tuple(sorted(ws, key=self.position.__getitem__)) for v, ws in adj.items()}

    @cached_property
    def predecessors(self) -> dict[str, tuple[str, ...]]:
        adj: dict[str, list[str]] = {v: [] for v in self.nodes}
        for u, v in self.edges:
            adj[v].append(u)
        return {v: tuple(sorted(us, key=self.position.__getitem__)) for v, us in adj.items()}


@dataclass
class GraphBuildReport:
    forward_refs: list[tuple[str, str]] = field(default_factory=list)
    dangling: list[tuple[str, str]] = field(default_factory=list)
    self_loops: int = 0
    duplicate_edges: int = 0

    def to_json_dict(self) -> dict:
        return {
            "forward_refs": [list(e) for e in self.forward_refs],
            "dangling": [list(d) for d in self.dangling],
            "self_loops": self.self_loops,
            "duplicate_edges": self.duplicate_edges,
        }


def build_graph(
    statements: Sequence[StructuredStatement],
) -> tuple[DependencyGraph, GraphBuildReport]:
    """Build the dependency graph for one document's statements.

    Resolved dependency ids become edges dep -> statement. Self-loops,
    duplicate edges, unresolved dependency strings, and forward references
    (a dependency on a statement that appears later in the document) are
    dropped and reported.
    """
    report = GraphBuildReport()
    if not statements:
        return DependencyGraph(doc_id="", nodes=(), edges=frozenset()), report
    doc_ids = {s.doc_id for s in statements}
    if len(doc_ids) != 1:
        raise GraphError(f"statements span multiple documents: {sorted(doc_ids)}")
    ordered = sorted(statements, key=lambda s: s.span[0])
    ids = [s.stmt_id for s in ordered]
    if len(set(ids)) != len(ids):
        raise GraphError("duplicate statement ids")
    pos = {sid: i for i, sid in enumerate(ids)}

    edges: set[tuple[str, str]] = set()
    for stmt in ordered:
        for dep in stmt.local_deps:
            if dep == stmt.stmt_id:
                report.self_loops += 1
                continue
            if dep not in pos:
                report.dangling.append((stmt.stmt_id, dep))
                continue
            if pos[dep] > pos[stmt.stmt_id]:
                report.forward_refs.append((dep, stmt.stmt_id))
                continue
            edge = (dep, stmt.stmt_id)
            if edge in edges:
                report.duplicate_edges += 1
            else:
                edges.add(edge)
    graph = DependencyGraph(doc_id=ordered[0].doc_id, nodes=tuple(ids), edges=frozenset(edges))
    return graph, report


def strongly_connected_components(graph: DependencyGraph) -> list[list[str]]:
    """Tarjan's algorithm, iterative to stay safe on deep dependency chains."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    sccs: list[list[str]] = []
    counter = 0
    adj = graph.successors

    for root in graph.nodes:
        if root in index:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        frames: list[tuple[str, Iterator[str]]] = [(root, iter(adj[root]))]
        while frames:
            node, it = frames[-1]
            pushed = False
            for succ in it:
                if succ not in index:
                    index[succ] = low[succ] = counter
                    counter += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    frames.append((succ, iter(adj[succ])))
                    pushed = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if pushed:
                continue
            frames.pop()
            if frames:
                parent = frames[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                scc = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    scc.append(w)
                    if w == node:
                        break
                sccs.append(scc)
    return sccs


def repair_cycles(
    graph: DependencyGraph,
) -> tuple[DependencyGraph, frozenset[tuple[str, str]]]:
    """Break cycles deterministically: inside every strongly connected
    component of size > 1, drop the edges that point backward in document
    order. Remaining intra-component edges all point forward, so the result
    is acyclic; edges outside such components are untouched."""
    scc_of: dict[str, int] = {}
    sizes: dict[int, int] = {}
    for i, scc in enumerate(strongly_connected_components(graph)):
        sizes[i] = len(scc)
        for v in scc:
            scc_of[v] = i
    pos = graph.position
    removed = frozenset(
        (u, v)
        for u, v in graph.edges
        if scc_of[u] == scc_of[v] and sizes[scc_of[u]] > 1 and pos[u] > pos[v]
    )
    repaired = DependencyGraph(
        doc_id=graph.doc_id, nodes=graph.nodes, edges=graph.edges - removed
    )
    return repaired, removed


@dataclass(frozen=True)
class LayerAssignment:
    layers: dict[str, int]

    @property
    def max_layer(self) -> int:
        return max(self.layers.values(), default=-1)

    def groups(self, graph: DependencyGraph) -> list[list[str]]:
        """Nodes per layer, document order within each layer."""
        out: list[list[str]] = [[] for _ in range(self.max_layer + 1)]
        for v in graph.nodes:
            out[self.layers[v]].append(v)
        return out


def partition_layers(dag: DependencyGraph) -> LayerAssignment:
    """Peel layering: layer k is the zero-in-degree set after deleting
    layers 0..k-1. Equivalently layer(v) = 1 + max layer over in-neighbors."""
    indeg = {v: 0 for v in dag.nodes}
    for _u, v in dag.edges:
        indeg[v] += 1
    frontier = [v for v in dag.nodes if indeg[v] == 0]
    layers: dict[str, int] = {}
    k = 0
    seen = 0
    while frontier:
        nxt: list[str] = []
        for v in frontier:
            layers[v] = k
        seen += len(frontier)
        for v in frontier:
            for w in dag.successors[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    nxt.append(w)
        frontier = sorted(nxt, key=dag.position.__getitem__)
        k += 1
    if seen != len(dag.nodes):
        raise GraphCycleError(
            f"graph for {dag.doc_id!r} is cyclic: {len(dag.nodes) - seen} nodes unreachable by peeling"
        )
    return LayerAssignment(layers=layers)


class Block(NamedTuple):
    """One statement's contribution to an unfolded text."""

    stmt_id: str
    label: str
    text: str


@dataclass(frozen=True)
class UnfoldedStatement:
    stmt_id: str
    layer: int
    unfolded_text: str
    ancestors: frozenset[str]
    truncated: bool = False
    fallback: bool = False
    blocks: tuple[Block, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "schema": UNFOLDED_SCHEMA,
            "stmt_id": self.stmt_id,
            "layer": self.layer,
            "unfolded_text": self.unfolded_text,
            "ancestors": sorted(self.ancestors),
            "truncated": self.truncated,
            "fallback": self.fallback,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "UnfoldedStatement":
        if obj.get("schema", UNFOLDED_SCHEMA) != UNFOLDED_SCHEMA:
            raise ValueError(f"unsupported unfolded schema {obj.get('schema')!r}")
        return cls(
            stmt_id=obj["stmt_id"],
            layer=int(obj["layer"]),
            unfolded_text=obj["unfolded_text"],
            ancestors=frozenset(obj.get("ancestors", [])),
            truncated=bool(obj.get("truncated", False)),
            fallback=bool(obj.get("fallback", False)),
        )


def merge_blocks(
    statement: StructuredStatement, deps: Sequence[UnfoldedStatement]
) -> tuple[Block, ...]:
    """Collect ancestor blocks from the direct dependencies (document order),
    emitting each ancestor exactly once, then the statement's own content."""
    emitted: set[str] = set()
    out: list[Block] = []
    for dep in deps:
        for block in dep.blocks:
            if block.stmt_id not in emitted:
                emitted.add(block.stmt_id)
                out.append(block)
    own_label = statement.label or statement.stmt_id
    out.append(Block(statement.stmt_id, own_label, statement.content))
    return tuple(out)


def render_blocks(blocks: Sequence[Block]) -> str:
    """Deterministic concatenation: each prerequisite block is prefixed with
    its label (or id), followed by the statement's own content."""
    parts = [f"[Requires {b.label}] {b.text}" for b in blocks[:-1]]
    parts.append(blocks[-1].text)
    return " ".join(parts)


class Expander(Protocol):
    def expand(self, statement: StructuredStatement, deps: Sequence[UnfoldedStatement]) -> str: ...


class ConcatExpander:
    """Reference expander: deterministic concatenation with ancestor dedup."""

    def expand(self, statement: StructuredStatement, deps: Sequence[UnfoldedStatement]) -> str:
        return render_blocks(merge_blocks(statement, deps))


_EXPAND_PROMPT = """\
Rewrite the statement below so it is fully self-contained, inlining the
prerequisite statements where they are used. Keep the mathematical content
unchanged. Reply with the rewritten statement only.

Prerequisites:
{deps}

Statement ({label}):
{content}
"""


class ModelExpander:
    """Completion-client rewriter; raises ExpanderError on failure so the
    caller can fall back to concatenation."""

    def __init__(self, client) -> None:
        self._client = client

    def expand(self, statement: StructuredStatement, deps: Sequence[UnfoldedStatement]) -> str:
        rendered = "\n".join(f"- {d.stmt_id}: {d.unfolded_text}" for d in deps) or "(none)"
        prompt = _EXPAND_PROMPT.format(
            deps=rendered, label=statement.label or statement.stmt_id, content=statement.content
        )
        try:
            reply = self._client.complete(prompt)
        except TransportError as exc:
            raise ExpanderError(f"rewrite failed: {exc}") from exc
        text = reply.strip()
        if not text:
            raise ExpanderError("rewriter returned empty text")
        return text


def unfold(
    dag: DependencyGraph,
    statements: Mapping[str, StructuredStatement],
    expander: Expander | None = None,
    budget: int | None = DEFAULT_BUDGET,
) -> list[UnfoldedStatement]:
    """Unfold every statement, processing layers from 0 upward.

    Each statement's expansion sees only its direct in-neighbors, already
    unfolded; within a layer, statements are processed in document order.
    Expander failures fall back to concatenation and are flagged; texts
    longer than ``budget`` characters are cut and flagged truncated.
    """
    assignment = partition_layers(dag)
    missing = [v for v in dag.nodes if v not in statements]
    if missing:
        raise GraphError(f"no statement for nodes: {missing[:5]}")

    done: dict[str, UnfoldedStatement] = {}
    out: list[UnfoldedStatement] = []
    for layer_idx, group in enumerate(assignment.groups(dag)):
        for v in group:
            stmt = statements[v]
            deps = [done[p] for p in dag.predecessors[v]]
            blocks = merge_blocks(stmt, deps)
            fallback = False
            if expander is None or isinstance(expander, ConcatExpander):
                text = render_blocks(blocks)
            else:
                try:
                    text = expander.expand(stmt, deps)
                except ExpanderError:
                    text = render_blocks(blocks)
                    fallback = True
            truncated = False
            if budget is not None and len(text) > budget:
                text = text[:budget]
                truncated = True
            unfolded = UnfoldedStatement(
                stmt_id=v,
                layer=layer_idx,
                unfolded_text=text,
                ancestors=frozenset(b.stmt_id for b in blocks[:-1]),
                truncated=truncated,
                fallback=fallback,
                blocks=blocks,
            )
            done[v] = unfolded
            out.append(unfolded)
    return out


def graph_to_json(
    graph: DependencyGraph,
    assignment: LayerAssignment,
    statements: Mapping[str, StructuredStatement],
) -> dict:
    """Export a graph with layers for the search service and the UI."""
    nodes = [
        {
            "stmt_id": v,
            "label": statements[v].label if v in statements else None,
            "kind": statements[v].kind.value if v in statements else "other",
            "layer": assignment.layers[v],
        }
        for v in graph.nodes
    ]
    edges = [{"source": u, "target": v} for u, v in sorted(graph.edges)]
    return {"doc_id": graph.doc_id, "nodes": nodes, "edges": edges}


def dump_graph_json(
    graph: DependencyGraph,
    assignment: LayerAssignment,
    statements: Mapping[str, StructuredStatement],
) -> str:
    return json.dumps(graph_to_json(graph, assignment, statements), ensure_ascii=False)
