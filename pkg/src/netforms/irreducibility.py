"""Invariant ideals of network heat semigroups.

The ideals are spanned by the finite spans: edge components that remain
after deleting flagged (infinite-degree) vertices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded, GraphDisconnected
from .graph import Graph, Subgraph, finite_span, is_connected
from .mesh import EdgeMesh, DofMap
from .semigroup import NetworkHeat, Stepper, run

MAX_EDGES = 64
MAX_N = 64


@dataclass(frozen=True)
class IdealDecomposition:
    spans: tuple[Subgraph, ...]
    intersections: dict[tuple[int, int], tuple[str, ...]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "spans": [{"edges": list(s.edges), "boundary": list(s.boundary)} for s in self.spans],
            "intersections": {f"{a},{b}": list(v) for (a, b), v in sorted(self.intersections.items())},
        }


@dataclass(frozen=True)
class IrreducibilityResult:
    verdict: bool
    decomposition: IdealDecomposition

    def to_dict(self) -> dict:
        return {"irreducible": self.verdict, **self.decomposition.to_dict()}


def decomposition(graph: Graph) -> IdealDecomposition:
    spans: list[Subgraph] = []
    covered: set[str] = set()
    for e in graph.edges:
        if e.id not in covered:
            s = finite_span(graph, e.id)
            spans.append(s)
            covered.update(s.edges)
    inter = {}
    for a in range(len(spans)):
        for b in range(a + 1, len(spans)):
            common = set(spans[a].vertices) & set(spans[b].vertices)
            if common:
                inter[(a, b)] = tuple(v for v in graph.vertex_ids if v in common)
    return IdealDecomposition(tuple(spans), inter)


def irreducible(graph: Graph) -> IrreducibilityResult:
    if not is_connected(graph):
        raise GraphDisconnected("irreducibility is decided for connected graphs")
    first = finite_span(graph, graph.edges[0].id)
    verdict = len(first.edges) == graph.n_edges
    return IrreducibilityResult(verdict, decomposition(graph))


@dataclass(frozen=True)
class SpanCheck:
    span: int
    start_edge: str
    leakage: float
    min_interior: float | None


@dataclass(frozen=True)
class CrossCheckReport:
    verdict: bool
    simulated_verdict: bool
    spans: tuple[SpanCheck, ...]
    leakage_ok: bool
    positivity_ok: bool

    @property
    def agrees(self) -> bool:
        return self.verdict == self.simulated_verdict and self.leakage_ok and self.positivity_ok

    def to_dict(self) -> dict:
        return {
            "irreducible": self.verdict,
            "simulated_irreducible": self.simulated_verdict,
            "leakage_ok": self.leakage_ok,
            "positivity_ok": self.positivity_ok,
            "spans": [s.__dict__ for s in self.spans],
        }


def _central_edge(graph: Graph, edges: list[int]) -> int:
    """Edge of a span with the smallest eccentricity (ties by order)."""
    adj = {i: set() for i in edges}
    for i in edges:
        for j in edges:
            shared = {graph.source[i], graph.target[i]} & {graph.source[j], graph.target[j]}
            if i != j and any(not graph.flagged[k] for k in shared):
                adj[i].add(j)
    best, best_ecc = edges[0], None
    for i in edges:
        dist = {i: 0}
        frontier = [i]
        while frontier:
            nxt = []
            for a in frontier:
                for b in adj[a]:
                    if b not in dist:
                        dist[b] = dist[a] + 1
                        nxt.append(b)
            frontier = nxt
        ecc = max(dist.values())
        if best_ecc is None or ecc < best_ecc:
            best, best_ecc = i, ecc
    return best


def cross_check(
    graph: Graph,
    n: int = 16,
    dt: float = 1e-3,
    T: float = 0.2,
    threshold: float = 1e-10,
    leak_tol: float = 1e-12,
) -> CrossCheckReport:
    """Run Kirchhoff heat from an edge indicator in every span.

    Mass must not reach other spans; inside the span every interior node
    must be strictly positive at time T.
    """
    if graph.n_edges > MAX_EDGES or n > MAX_N:
        raise BudgetExceeded(f"cross-check is limited to {MAX_EDGES} edges and n <= {MAX_N}")
    result = irreducible(graph)
    dofs = DofMap(graph, EdgeMesh(n))
    stepper = Stepper("backward_euler", dt, T)
    checks = []
    reached_all = []
    for s, span in enumerate(result.decomposition.spans):
        inside = [graph.edge_index(e) for e in span.edges]
        start = _central_edge(graph, inside)
        u0 = np.zeros(dofs.n_dofs)
        u0[dofs.interior(start)] = 1.0
        traj = run(NetworkHeat(graph, n, u0, lumped=True), stepper)
        outside = [i for i in range(graph.n_edges) if i not in inside]
        out_idx = np.concatenate([dofs.interior(i) for i in outside]) if outside else np.array([], int)
        leak = float(np.abs(traj.states[:, out_idx]).max(initial=0.0))
        in_idx = np.concatenate([dofs.interior(i) for i in inside])
        min_in = float(traj.states[-1, in_idx].min())
        checks.append(SpanCheck(s, graph.edges[start].id, leak, min_in))
        final = traj.states[-1]
        reached_all.append(all(final[dofs.interior(i)].min() > threshold for i in range(graph.n_edges)))
    leak_ok = all(c.leakage <= leak_tol for c in checks)
    pos_ok = all(c.min_interior is not None and c.min_interior > threshold for c in checks)
    return CrossCheckReport(result.verdict, all(reached_all), tuple(checks), leak_ok, pos_ok)
