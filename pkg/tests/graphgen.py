"""Random graph generators and independent brute-force oracles used by the
graph tests and the acceptance suite."""

from __future__ import annotations

import random

from mathdex import DependencyGraph


def node_ids(n: int, doc_id: str = "doc") -> tuple[str, ...]:
    return tuple(f"{doc_id}:{i:08d}" for i in range(n))


def random_dag(rng: random.Random, n_max: int = 40) -> DependencyGraph:
    """Random DAG: edges only point forward in node (document) order."""
    n = rng.randint(0, n_max)
    nodes = node_ids(n)
    p = rng.uniform(0.05, 0.5)
    edges = frozenset(
        (nodes[i], nodes[j])
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < p
    )
    return DependencyGraph(doc_id="doc", nodes=nodes, edges=edges)


def random_digraph(rng: random.Random, n_max: int = 30) -> DependencyGraph:
    """Random digraph without self-loops; cycles are likely."""
    n = rng.randint(0, n_max)
    nodes = node_ids(n)
    p = rng.uniform(0.02, 0.3)
    edges = frozenset(
        (u, v) for u in nodes for v in nodes if u != v and rng.random() < p
    )
    return DependencyGraph(doc_id="doc", nodes=nodes, edges=edges)


# -- oracles ------------------------------------------------------------


def longest_path_layers(graph: DependencyGraph) -> dict[str, int]:
    """layer(v) = length of the longest path from any zero-in-degree node,
    computed by memoized DP straight off the edge set."""
    preds: dict[str, list[str]] = {v: [] for v in graph.nodes}
    for u, v in graph.edges:
        preds[v].append(u)
    memo: dict[str, int] = {}

    def depth(v: str) -> int:
        stack = [v]
        while stack:
            cur = stack[-1]
            if cur in memo:
                stack.pop()
                continue
            pending = [p for p in preds[cur] if p not in memo]
            if pending:
                stack.extend(pending)
                continue
            memo[cur] = 1 + max((memo[p] for p in preds[cur]), default=-1)
            stack.pop()
        return memo[v]

    return {v: depth(v) for v in graph.nodes}


def peel_layers_oracle(graph: DependencyGraph) -> list[set[str]]:
    """Literal peel: repeatedly collect and delete the zero-in-degree set."""
    remaining = set(graph.nodes)
    edges = set(graph.edges)
    layers: list[set[str]] = []
    while remaining:
        blocked = {v for _u, v in edges}
        layer = {v for v in remaining if v not in blocked}
        if not layer:
            raise AssertionError("cycle reached the peel oracle")
        layers.append(layer)
        remaining -= layer
        edges = {(u, v) for u, v in edges if u not in layer}
    return layers


def is_acyclic(graph: DependencyGraph) -> bool:
    remaining = set(graph.nodes)
    edges = set(graph.edges)
    while remaining:
        blocked = {v for _u, v in edges}
        layer = {v for v in remaining if v not in blocked}
        if not layer:
            return False
        remaining -= layer
        edges = {(u, v) for u, v in edges if u not in layer}
    return True


def reachability_sccs(graph: DependencyGraph) -> list[set[str]]:
    """SCCs by mutual reachability (quadratic, independent of Tarjan)."""
    adj: dict[str, list[str]] = {v: [] for v in graph.nodes}
    for u, v in graph.edges:
        adj[u].append(v)

    def reach(start: str) -> set[str]:
        seen = {start}
        stack = [start]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    reachable = {v: reach(v) for v in graph.nodes}
    assigned: set[str] = set()
    sccs: list[set[str]] = []
    for v in graph.nodes:
        if v in assigned:
            continue
        scc = {w for w in reachable[v] if v in reachable[w]}
        sccs.append(scc)
        assigned |= scc
    return sccs


def transitive_ancestors(graph: DependencyGraph) -> dict[str, set[str]]:
    preds: dict[str, list[str]] = {v: [] for v in graph.nodes}
    for u, v in graph.edges:
        preds[v].append(u)
    out: dict[str, set[str]] = {}

    def walk(v: str) -> set[str]:
        seen: set[str] = set()
        stack = list(preds[v])
        while stack:
            u = stack.pop()
            if u not in seen:
                seen.add(u)
                stack.extend(preds[u])
        return seen

    for v in graph.nodes:
        out[v] = walk(v)
    return out
