"""Finite directed graphs with infinite-degree markers.

Orientation convention used throughout the package: an edge runs from its
``source`` ("from") to its ``target`` ("to").  On the metric edge [0, 1] the
target sits at x = 0 and the source at x = 1.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .errors import (
    DanglingEndpoint,
    DuplicateId,
    EmptyGraph,
    IsolatedVertex,
    LoopPresent,
    UnknownEdge,
)


@dataclass(frozen=True)
class Vertex:
    id: str
    infinite: bool = False


@dataclass(frozen=True)
class Edge:
    id: str
    source: str
    target: str


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class Graph:
    """Immutable directed multigraph; vertex and edge order is input order."""

    def __init__(self, vertices: Sequence[Vertex], edges: Sequence[Edge]):
        self.vertices: tuple[Vertex, ...] = tuple(vertices)
        self.edges: tuple[Edge, ...] = tuple(edges)
        if not self.vertices or not self.edges:
            raise EmptyGraph("a graph needs at least one vertex and one edge")
        self._vindex: dict[str, int] = {}
        for k, v in enumerate(self.vertices):
            if not v.id:
                raise DuplicateId("vertex ids must be non-empty")
            if v.id in self._vindex:
                raise DuplicateId(f"duplicate vertex id {v.id!r}")
            self._vindex[v.id] = k
        self._eindex: dict[str, int] = {}
        for i, e in enumerate(self.edges):
            if not e.id:
                raise DuplicateId("edge ids must be non-empty")
            if e.id in self._eindex:
                raise DuplicateId(f"duplicate edge id {e.id!r}")
            for end in (e.source, e.target):
                if end not in self._vindex:
                    raise DanglingEndpoint(
                        f"edge {e.id!r} references unknown vertex {end!r}"
                    )
            self._eindex[e.id] = i
        self.source = _frozen(np.array([self._vindex[e.source] for e in self.edges]))
        self.target = _frozen(np.array([self._vindex[e.target] for e in self.edges]))
        n = len(self.vertices)
        self.in_degree = _frozen(np.bincount(self.target, minlength=n))
        self.out_degree = _frozen(np.bincount(self.source, minlength=n))
        self.flagged = _frozen(np.array([v.infinite for v in self.vertices], dtype=bool))

    # -- basic accessors -------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def vertex_ids(self) -> list[str]:
        return [v.id for v in self.vertices]

    @property
    def edge_ids(self) -> list[str]:
        return [e.id for e in self.edges]

    @property
    def degree(self) -> np.ndarray:
        return self.in_degree + self.out_degree

    @property
    def loops(self) -> list[str]:
        return [e.id for e in self.edges if e.source == e.target]

    @property
    def finite_vertices(self) -> list[int]:
        """Indices of vertices that carry a node value."""
        return [k for k in range(self.n_vertices) if not self.flagged[k]]

    def vertex_index(self, vid: str) -> int:
        return self._vindex[vid]

    def edge_index(self, eid: str) -> int:
        try:
            return self._eindex[eid]
        except KeyError:
            raise UnknownEdge(f"unknown edge {eid!r}") from None

    def incident_edges(self, k: int) -> list[int]:
        return [i for i in range(self.n_edges) if self.source[i] == k or self.target[i] == k]

    # -- derived graphs --------------------------------------------------
    def reversed(self) -> Graph:
        return Graph(self.vertices, [Edge(e.id, e.target, e.source) for e in self.edges])

    def relabeled(self, vmap: Mapping[str, str], emap: Mapping[str, str]) -> Graph:
        vs = [Vertex(vmap[v.id], v.infinite) for v in self.vertices]
        es = [Edge(emap[e.id], vmap[e.source], vmap[e.target]) for e in self.edges]
        return Graph(vs, es)

    def with_flags(self, flagged: Iterable[str]) -> Graph:
        flagged = set(flagged)
        return Graph([Vertex(v.id, v.id in flagged) for v in self.vertices], self.edges)

    def to_dict(self) -> dict:
        return {
            "vertices": [{"id": v.id, "infinite": v.infinite} for v in self.vertices],
            "edges": [{"id": e.id, "from": e.source, "to": e.target} for e in self.edges],
        }

    def __repr__(self) -> str:
        return f"Graph(|V|={self.n_vertices}, |E|={self.n_edges})"


def build_graph(spec: Mapping) -> Graph:
    """Build a graph from the JSON structure of a graph file."""
    try:
        vertices = [Vertex(str(v["id"]), bool(v.get("infinite", False))) for v in spec["vertices"]]
        edges = [Edge(str(e["id"]), str(e["from"]), str(e["to"])) for e in spec["edges"]]
    except (KeyError, TypeError) as exc:
        raise EmptyGraph(f"malformed graph description: {exc}") from None
    return Graph(vertices, edges)


def from_edges(
    pairs: Sequence[tuple[str, str]],
    infinite: Iterable[str] = (),
    vertices: Sequence[str] | None = None,
) -> Graph:
    """Graph with edges ``e1, e2, ...`` given as (from, to) pairs."""
    if vertices is None:
        vertices = []
        for a, b in pairs:
            for v in (a, b):
                if v not in vertices:
                    vertices.append(v)
    infinite = set(infinite)
    return Graph(
        [Vertex(v, v in infinite) for v in vertices],
        [Edge(f"e{i + 1}", a, b) for i, (a, b) in enumerate(pairs)],
    )


# -- matrices ---------------------------------------------------------------
@dataclass(frozen=True)
class IncidenceMatrices:
    plus: np.ndarray
    minus: np.ndarray

    @property
    def signed(self) -> np.ndarray:
        return self.plus - self.minus


def incidence(graph: Graph) -> IncidenceMatrices:
    """Incoming and outgoing incidence matrices (|V| x |E|)."""
    if graph.loops:
        raise LoopPresent(
            f"loops {graph.loops} cancel in the incidence matrix; use adjacency()"
        )
    n, m = graph.n_vertices, graph.n_edges
    plus = np.zeros((n, m), dtype=int)
    minus = np.zeros((n, m), dtype=int)
    plus[graph.target, np.arange(m)] = 1
    minus[graph.source, np.arange(m)] = 1
    return IncidenceMatrices(_frozen(plus), _frozen(minus))


def adjacency(graph: Graph) -> np.ndarray:
    """a[k, l] = number of edges starting in v_k and ending in v_l."""
    n = graph.n_vertices
    a = np.zeros((n, n), dtype=int)
    np.add.at(a, (graph.source, graph.target), 1)
    return a


# -- connectivity -------------------------------------------------------------
def vertex_components(graph: Graph) -> np.ndarray:
    """Component label per vertex of the underlying undirected graph."""
    n = graph.n_vertices
    g = coo_matrix((np.ones(graph.n_edges), (graph.source, graph.target)), shape=(n, n))
    return connected_components(g, directed=False)[1]


def is_connected(graph: Graph) -> bool:
    return len(set(vertex_components(graph))) == 1


# -- classification -----------------------------------------------------------
@dataclass(frozen=True)
class LayerStructure:
    """Canonical layering: lambda(source) = lambda(target) + 1 (mod count)."""

    count: int
    cyclic: bool
    vertex_layer: tuple[int, ...]
    edge_layer: tuple[int, ...]
    edge_order: tuple[int, ...]
    thresholds: tuple[int, ...]
    in_degree: tuple[int | None, ...]
    out_degree: tuple[int | None, ...]

    @property
    def symmetric(self) -> bool:
        return all(d is not None for d in self.in_degree + self.out_degree)

    def edges_in_layer(self, p: int) -> list[int]:
        return [i for i in self.edge_order if self.edge_layer[i] == p]


@dataclass(frozen=True)
class Classification:
    completely_unconnected: bool
    star: str
    star_center: str | None
    simple: bool
    bipartite: bool
    eulerian: bool
    layer: LayerStructure
    uniformly_locally_finite: bool
    degree_bound: int | None

    def to_dict(self) -> dict:
        lay = self.layer
        return {
            "completely_unconnected": self.completely_unconnected,
            "star": self.star,
            "star_center": self.star_center,
            "simple": self.simple,
            "bipartite": self.bipartite,
            "eulerian": self.eulerian,
            "layer": {
                "count": lay.count,
                "cyclic": lay.cyclic,
                "symmetric": lay.symmetric,
                "in_degree": list(lay.in_degree),
                "out_degree": list(lay.out_degree),
                "thresholds": list(lay.thresholds),
            },
            "uniformly_locally_finite": {
                "holds": self.uniformly_locally_finite,
                "bound": self.degree_bound,
            },
        }


def _potentials(graph: Graph) -> tuple[np.ndarray, np.ndarray, int]:
    """BFS potentials with pot[source] = pot[target] + 1 and the cycle gcd."""
    n = graph.n_vertices
    nbrs: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for s, t in zip(graph.source, graph.target):
        nbrs[t].append((s, 1))
        nbrs[s].append((t, -1))
    pot = np.zeros(n, dtype=int)
    comp = -np.ones(n, dtype=int)
    g = 0
    c = 0
    for root in range(n):
        if comp[root] >= 0:
            continue
        comp[root] = c
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for w, delta in nbrs[u]:
                if comp[w] < 0:
                    comp[w] = c
                    pot[w] = pot[u] + delta
                    queue.append(w)
                else:
                    g = math.gcd(g, abs(pot[u] + delta - pot[w]))
        c += 1
    return pot, comp, g


def layering(graph: Graph) -> LayerStructure:
    pot, comp, g = _potentials(graph)
    if g > 0:
        lam = pot % g
        count = g
    else:
        lam = pot.copy()
        for c in set(comp):
            mask = comp == c
            lam[mask] -= lam[mask].min()
        count = int(lam.max()) + 1
    edge_layer = tuple(int(lam[s]) for s in graph.source)
    order = tuple(sorted(range(graph.n_edges), key=lambda i: (edge_layer[i], i)))
    counts = np.bincount(edge_layer, minlength=count)
    thresholds = tuple(int(x) for x in np.concatenate([[0], np.cumsum(counts)]))

    def per_layer(deg: np.ndarray) -> tuple[int | None, ...]:
        out = []
        for p in range(count):
            vals = set(int(d) for d in deg[lam == p])
            out.append(vals.pop() if len(vals) == 1 else None)
        return tuple(out)

    return LayerStructure(
        count=count,
        cyclic=g > 0,
        vertex_layer=tuple(int(x) for x in lam),
        edge_layer=edge_layer,
        edge_order=order,
        thresholds=thresholds,
        in_degree=per_layer(graph.in_degree),
        out_degree=per_layer(graph.out_degree),
    )


def classify(graph: Graph) -> Classification:
    isolated = [graph.vertices[k].id for k in np.flatnonzero(graph.degree == 0)]
    if isolated:
        raise IsolatedVertex(f"isolated vertices {isolated}")
    deg = graph.degree
    star, center = "none", None
    targets, sources = set(graph.target), set(graph.source)
    if len(targets) == 1:
        star, center = "outbound", graph.vertices[targets.pop()].id
    elif len(sources) == 1:
        star, center = "inbound", graph.vertices[sources.pop()].id
    pairs = list(zip(graph.source, graph.target))
    both = (graph.in_degree > 0) & (graph.out_degree > 0)
    ulf = not graph.flagged.any()
    return Classification(
        completely_unconnected=bool((deg == 1).all()),
        star=star,
        star_center=center,
        simple=len(set(pairs)) == len(pairs),
        bipartite=not both.any(),
        eulerian=bool((graph.in_degree == graph.out_degree).all()),
        layer=layering(graph),
        uniformly_locally_finite=ulf,
        degree_bound=int(deg.max()) if ulf else None,
    )


# -- distances ----------------------------------------------------------------
@dataclass(frozen=True)
class Distances:
    vertex: np.ndarray
    vertex_generalized: np.ndarray
    edge: np.ndarray
    edge_generalized: np.ndarray


def distances(graph: Graph) -> Distances:
    """Path distances and degree-weighted (generalized) distances.

    Generalized lengths sum vertex degrees along a path; a flagged vertex has
    infinite degree, so no finite path passes through it.
    """
    n, m = graph.n_vertices, graph.n_edges
    und = coo_matrix((np.ones(m), (graph.source, graph.target)), shape=(n, n)).tocsr()
    und = ((und + und.T) > 0).astype(float)
    d = dijkstra(und, directed=False, unweighted=True)

    weight = np.where(graph.flagged, np.inf, graph.degree.astype(float))
    dv = np.full((n, n), np.inf)
    fin = np.flatnonzero(~graph.flagged)
    if fin.size:
        sub = und[fin][:, fin].tocoo()
        # arc a -> b costs the weight of b; add the weight of the start vertex
        arcs = coo_matrix((weight[fin][sub.col], (sub.row, sub.col)), shape=(fin.size, fin.size))
        sp = dijkstra(arcs.tocsr(), directed=True)
        dv[np.ix_(fin, fin)] = sp + weight[fin][:, None]

    ends = np.stack([graph.source, graph.target], axis=1)
    de = np.full((m, m), np.inf)
    dE = np.full((m, m), np.inf)
    for i in range(m):
        for j in range(m):
            if i == j:
                de[i, j] = dE[i, j] = 0.0
                continue
            de[i, j] = 1.0 + d[np.ix_(ends[i], ends[j])].min()
            dE[i, j] = dv[np.ix_(ends[i], ends[j])].min()
    return Distances(d, dv, de, dE)


# -- subgraphs ----------------------------------------------------------------
@dataclass(frozen=True)
class Subgraph:
    vertices: tuple[str, ...]
    edges: tuple[str, ...]
    boundary: tuple[str, ...] = field(default=())


def induced_subgraph(
    graph: Graph, vertices: Iterable[str] = (), edges: Iterable[str] = ()
) -> Subgraph:
    """Subgraph induced by a vertex set and an edge set.

    A vertex belongs to it if listed or incident to a listed edge; an edge
    belongs to it if listed or if both its endpoints are listed vertices.
    """
    vset = set(vertices)
    eset = {graph.edge_index(e) for e in edges}
    for i, e in enumerate(graph.edges):
        if e.source in vset and e.target in vset:
            eset.add(i)
    vs = set(vset)
    for i in eset:
        vs.update((graph.edges[i].source, graph.edges[i].target))
    rest = set(range(graph.n_edges)) - eset
    rest_v = set()
    for i in rest:
        rest_v.update((graph.edges[i].source, graph.edges[i].target))
    order = graph.vertex_ids
    return Subgraph(
        vertices=tuple(v for v in order if v in vs),
        edges=tuple(graph.edges[i].id for i in sorted(eset)),
        boundary=tuple(v for v in order if v in vs and v in rest_v),
    )


def finite_span(graph: Graph, e: str) -> Subgraph:
    """Edges reachable from ``e`` through non-flagged vertices."""
    start = graph.edge_index(e)
    at_vertex: list[list[int]] = [[] for _ in range(graph.n_vertices)]
    for i in range(graph.n_edges):
        at_vertex[graph.source[i]].append(i)
        if graph.target[i] != graph.source[i]:
            at_vertex[graph.target[i]].append(i)
    seen = {start}
    heap = [start]
    while heap:
        i = heapq.heappop(heap)
        for k in (graph.source[i], graph.target[i]):
            if graph.flagged[k]:
                continue
            for j in at_vertex[k]:
                if j not in seen:
                    seen.add(j)
                    heapq.heappush(heap, j)
    return induced_subgraph(graph, edges=[graph.edges[i].id for i in seen])
