"""Prerequisite concept graph: loading, agreement, analytics, adjacency.

A graph is a set of named concepts plus directed edges src -> tgt meaning
"src is a prerequisite of tgt". Annotator edge files are merged by
intersection (default), union, or taken singly.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

log = logging.getLogger("prereqchain.graph")


@dataclass(frozen=True)
class Concept:
    index: int
    name: str


@dataclass
class ConceptGraph:
    concepts: list[Concept]
    edges: set[tuple[int, int]]
    name_to_index: dict[str, int] = field(init=False)

    def __post_init__(self):
        self.name_to_index = {c.name.casefold(): c.index for c in self.concepts}
        if len(self.name_to_index) != len(self.concepts):
            raise ValueError("concept names collide after casefolding")
        n = len(self.concepts)
        for s, t in self.edges:
            if not (0 <= s < n and 0 <= t < n):
                raise ValueError(f"edge ({s}, {t}) outside concept range 0..{n - 1}")
            if s == t:
                raise ValueError(f"self-loop on concept index {s}")

    @property
    def n(self) -> int:
        return len(self.concepts)

    def resolve(self, name: str) -> int:
        key = name.casefold().strip()
        if key not in self.name_to_index:
            raise KeyError(f"unknown concept {name!r}")
        return self.name_to_index[key]

    def successors(self, idx: int) -> list[int]:
        return sorted(t for s, t in self.edges if s == idx)

    def predecessors(self, idx: int) -> list[int]:
        return sorted(s for s, t in self.edges if t == idx)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.float64)
        for s, t in self.edges:
            a[s, t] = 1.0
        return a


@dataclass
class GraphStats:
    n_concepts: int
    n_edges: int
    n_negative_pairs: int
    mutual_pairs: list[tuple[str, str]]
    isolated: list[str]
    longest_path_len: int
    longest_path: list[str]
    top_in: list[tuple[str, int]]
    top_out: list[tuple[str, int]]


def _read_concepts(path: Path) -> list[Concept]:
    concepts = []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{path}:{line_no}: expected 'index<TAB>name', got {line!r}")
        concepts.append(Concept(index=int(parts[0]), name=parts[1].strip()))
    concepts.sort(key=lambda c: c.index)
    if [c.index for c in concepts] != list(range(len(concepts))):
        raise ValueError(f"{path}: concept indices must be 0..n-1 without gaps")
    return concepts


def _read_edges(path: Path, name_to_index: dict[str, int]) -> set[tuple[int, int]]:
    edges = set()
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{path}:{line_no}: expected 'src<TAB>tgt', got {line!r}")
        pair = []
        for name in parts:
            key = name.casefold().strip()
            if key not in name_to_index:
                raise ValueError(f"{path}:{line_no}: unknown concept {name.strip()!r}")
            pair.append(name_to_index[key])
        if pair[0] == pair[1]:
            raise ValueError(f"{path}:{line_no}: self-loop on {parts[0].strip()!r}")
        if (pair[0], pair[1]) in edges:
            log.warning("%s:%d: duplicate edge %s -> %s, keeping one",
                        path, line_no, parts[0].strip(), parts[1].strip())
        edges.add((pair[0], pair[1]))
    return edges


def load_concept_graph(concepts_path: str | Path, edge_paths: list[str | Path],
                       merge: str = "intersection") -> ConceptGraph:
    """Load concepts.tsv plus one or more annotator edge files.

    merge: "intersection" keeps edges all annotators agree on, "union" keeps
    any, "single" requires exactly one edge file.
    """
    concepts = _read_concepts(Path(concepts_path))
    name_to_index = {c.name.casefold(): c.index for c in concepts}
    if not edge_paths:
        raise ValueError("at least one edge file is required")
    edge_sets = [_read_edges(Path(p), name_to_index) for p in edge_paths]

    if merge == "single":
        if len(edge_sets) != 1:
            raise ValueError(f"merge='single' takes exactly one edge file, got {len(edge_sets)}")
        edges = edge_sets[0]
    elif merge == "intersection":
        edges = set.intersection(*edge_sets)
    elif merge == "union":
        edges = set.union(*edge_sets)
    else:
        raise ValueError(f"unknown merge mode {merge!r}")
    return ConceptGraph(concepts=concepts, edges=edges)


def strongly_connected_components(n: int, edges: set[tuple[int, int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative to survive deep graphs."""
    adj: list[list[int]] = [[] for _ in range(n)]
    for s, t in edges:
        adj[s].append(t)
    index = [-1] * n
    lowlink = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    components: list[list[int]] = []
    counter = 0

    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work.pop()
            if pi == 0:
                index[v] = lowlink[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            for i in range(pi, len(adj[v])):
                w = adj[v][i]
                if index[w] == -1:
                    work.append((v, i + 1))
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    lowlink[v] = min(lowlink[v], index[w])
            if recurse:
                continue
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                components.append(comp)
    return components


def condensation(n: int, edges: set[tuple[int, int]]) -> tuple[list[list[int]], list[int], set[tuple[int, int]]]:
    """Collapse SCCs; returns (components, vertex -> component id, DAG edges)."""
    comps = strongly_connected_components(n, edges)
    comp_of = [0] * n
    for cid, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = cid
    dag_edges = {(comp_of[s], comp_of[t]) for s, t in edges if comp_of[s] != comp_of[t]}
    return comps, comp_of, dag_edges


def _longest_dag_path(n_comps: int, dag_edges: set[tuple[int, int]]) -> list[int]:
    """Longest path over a DAG by DP in topological order; vertices weighted 1."""
    adj: list[list[int]] = [[] for _ in range(n_comps)]
    indeg = [0] * n_comps
    for s, t in dag_edges:
        adj[s].append(t)
        indeg[t] += 1
    order = []
    ready = [v for v in range(n_comps) if indeg[v] == 0]
    while ready:
        v = ready.pop()
        order.append(v)
        for w in adj[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
    if len(order) != n_comps:
        raise ValueError("condensation is not acyclic")
    best = [1] * n_comps
    parent = [-1] * n_comps
    for v in order:
        for w in adj[v]:
            if best[v] + 1 > best[w]:
                best[w] = best[v] + 1
                parent[w] = v
    end = max(range(n_comps), key=lambda v: best[v])
    path = [end]
    while parent[path[-1]] != -1:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def _top_k(degrees: dict[int, int], concepts: list[Concept], k: int) -> list[tuple[str, int]]:
    # ties broken by name so rankings are reproducible
    ranked = sorted(((c.name, degrees.get(c.index, 0)) for c in concepts),
                    key=lambda item: (-item[1], item[0].casefold()))
    return ranked[:k]


def graph_statistics(graph: ConceptGraph, top_k: int = 15) -> GraphStats:
    """Degree rankings, mutual pairs, isolated concepts, longest dependency
    chain measured in concepts over the SCC condensation."""
    indeg: dict[int, int] = {}
    outdeg: dict[int, int] = {}
    for s, t in graph.edges:
        outdeg[s] = outdeg.get(s, 0) + 1
        indeg[t] = indeg.get(t, 0) + 1

    mutual = []
    for s, t in graph.edges:
        if s < t and (t, s) in graph.edges:
            a, b = graph.concepts[s].name, graph.concepts[t].name
            mutual.append((a, b) if a.casefold() <= b.casefold() else (b, a))
    mutual.sort(key=lambda p: (p[0].casefold(), p[1].casefold()))

    isolated = sorted(
        (c.name for c in graph.concepts
         if indeg.get(c.index, 0) == 0 and outdeg.get(c.index, 0) == 0),
        key=str.casefold)

    comps, comp_of, dag_edges = condensation(graph.n, graph.edges)
    comp_path = _longest_dag_path(len(comps), dag_edges)
    # components expand in name order; length counts condensation vertices
    longest = []
    for cid in comp_path:
        longest.extend(sorted((graph.concepts[v].name for v in comps[cid]),
                              key=str.casefold))

    n = graph.n
    n_ordered = n * (n - 1)
    return GraphStats(
        n_concepts=n,
        n_edges=len(graph.edges),
        n_negative_pairs=n_ordered - len(graph.edges),
        mutual_pairs=mutual,
        isolated=isolated,
        longest_path_len=len(comp_path),
        longest_path=longest,
        top_in=_top_k(indeg, graph.concepts, top_k),
        top_out=_top_k(outdeg, graph.concepts, top_k),
    )


def normalized_adjacency(adjacency: np.ndarray, symmetrize: bool = True,
                         self_loops: bool = True) -> np.ndarray:
    """Symmetric degree normalization D^-1/2 (A + I) D^-1/2.

    symmetrize ORs each edge with its reverse first. A zero-degree vertex
    without self_loops has no defined normalization, so that is an error.
    """
    a = np.asarray(adjacency, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"adjacency must be square, got shape {a.shape}")
    a = (a > 0).astype(np.float64)
    if symmetrize:
        a = np.maximum(a, a.T)
    if self_loops:
        a = a + np.eye(a.shape[0])
    deg = a.sum(axis=1)
    if np.any(deg == 0):
        vertex = int(np.argmax(deg == 0))
        raise ValueError(f"vertex {vertex} has degree zero; normalization undefined "
                         "(enable self_loops or connect it)")
    inv_sqrt = 1.0 / np.sqrt(deg)
    return a * inv_sqrt[:, None] * inv_sqrt[None, :]


def cohen_kappa(labels_a, labels_b) -> float:
    """Chance-corrected agreement between two binary label sequences."""
    a = list(labels_a)
    b = list(labels_b)
    if len(a) != len(b):
        raise ValueError(f"label lists differ in length: {len(a)} vs {len(b)}")
    if not a:
        raise ValueError("kappa needs at least one label")
    n = len(a)
    p_o = sum(1 for x, y in zip(a, b) if x == y) / n
    q_a = sum(1 for x in a if x) / n
    q_b = sum(1 for y in b if y) / n
    p_e = q_a * q_b + (1 - q_a) * (1 - q_b)
    if p_e == 1.0:
        # both annotators constant and identical; agreement is total
        return 1.0
    return (p_o - p_e) / (1 - p_e)


def agreement_labels(edges_a: set[tuple[int, int]], edges_b: set[tuple[int, int]],
                     n_concepts: int) -> tuple[list[int], list[int]]:
    """Binary verdicts of two annotators over all ordered concept pairs."""
    labels_a, labels_b = [], []
    for s in range(n_concepts):
        for t in range(n_concepts):
            if s == t:
                continue
            labels_a.append(1 if (s, t) in edges_a else 0)
            labels_b.append(1 if (s, t) in edges_b else 0)
    return labels_a, labels_b


def ancestors_of(graph: ConceptGraph, target: int) -> set[int]:
    """All concepts from which target is reachable (prerequisite closure)."""
    rev: dict[int, list[int]] = {}
    for s, t in graph.edges:
        rev.setdefault(t, []).append(s)
    seen: set[int] = set()
    frontier = [target]
    while frontier:
        v = frontier.pop()
        for p in rev.get(v, ()):
            if p not in seen:
                seen.add(p)
                frontier.append(p)
    seen.discard(target)
    return seen


def topological_order(graph: ConceptGraph, subset: set[int]) -> list[int]:
    """Kahn's algorithm over the SCC condensation restricted to subset.

    Cycles collapse to components whose members are emitted adjacently in
    name order; among ready components the one with the most outgoing edges
    inside the subset goes first (foundational concepts surface early).
    """
    sub_edges = {(s, t) for s, t in graph.edges if s in subset and t in subset}
    comps, comp_of, dag_edges = condensation(graph.n, sub_edges)
    active = sorted({comp_of[v] for v in subset})
    remap = {cid: i for i, cid in enumerate(active)}
    n = len(active)
    adj: list[list[int]] = [[] for _ in range(n)]
    indeg = [0] * n
    for s, t in dag_edges:
        if s in remap and t in remap:
            adj[remap[s]].append(remap[t])
            indeg[remap[t]] += 1

    def members(i: int) -> list[int]:
        return sorted((v for v in comps[active[i]] if v in subset),
                      key=lambda v: graph.concepts[v].name.casefold())

    def key(i: int):
        outward = sum(len([t for t in graph.successors(v) if t in subset]) for v in members(i))
        return (-outward, graph.concepts[members(i)[0]].name.casefold())

    heap = [(key(i), i) for i in range(n) if indeg[i] == 0]
    heapq.heapify(heap)
    order: list[int] = []
    emitted = 0
    while heap:
        _, i = heapq.heappop(heap)
        order.extend(members(i))
        emitted += 1
        for j in adj[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(heap, (key(j), j))
    if emitted != n:
        raise ValueError("cycle survived condensation; this is a bug")
    return order
