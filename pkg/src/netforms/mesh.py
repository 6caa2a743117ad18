"""P1 finite elements on networks whose edges are copies of [0, 1].

Every edge carries the same uniform mesh with ``n`` interior points.  Vertex
values are shared degrees of freedom, so assembled functions are continuous
at non-flagged vertices and vanish at flagged ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

import numpy as np
import scipy.sparse as sp

from .errors import (
    ContinuityViolation,
    FlaggedNonzero,
    FlaggedVertexInM,
    InputError,
    ShapeMismatch,
)
from .graph import Graph

CouplingSpec = Union[None, str, Mapping, np.ndarray, Callable[[float], np.ndarray]]


@dataclass(frozen=True)
class EdgeMesh:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InputError(f"need at least one interior point per edge, got n={self.n}")

    @property
    def h(self) -> float:
        return 1.0 / (self.n + 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n + 2)


class DofMap:
    """Global numbering: non-flagged vertices first, then edge interiors."""

    def __init__(self, graph: Graph, mesh: EdgeMesh):
        self.graph = graph
        self.mesh = mesh
        vdof = -np.ones(graph.n_vertices, dtype=int)
        fin = graph.finite_vertices
        vdof[fin] = np.arange(len(fin))
        self.vertex_dof = vdof
        self.n_vertex_dofs = len(fin)
        n, m = mesh.n, graph.n_edges
        self.n_dofs = self.n_vertex_dofs + m * n

        nodes = np.empty((m, n + 2), dtype=int)
        nodes[:, 1:-1] = self.n_vertex_dofs + np.arange(m * n).reshape(m, n)
        nodes[:, 0] = vdof[graph.target]
        nodes[:, -1] = vdof[graph.source]
        self.nodes = nodes
        rows = np.flatnonzero(nodes.ravel() >= 0)
        self.extension = sp.csr_matrix(
            (np.ones(rows.size), (rows, nodes.ravel()[rows])),
            shape=(m * (n + 2), self.n_dofs),
        )

    def edge_values(self, u: np.ndarray) -> np.ndarray:
        """Nodal values per edge, shape (|E|, n + 2)."""
        u = np.asarray(u)
        if u.shape[0] != self.n_dofs:
            raise ShapeMismatch(f"expected {self.n_dofs} dofs, got {u.shape[0]}")
        return (self.extension @ u).reshape(self.graph.n_edges, self.mesh.n + 2, *u.shape[1:])

    def vertex_values(self, u: np.ndarray) -> np.ndarray:
        """Values at all vertices (zero at flagged ones)."""
        d = np.zeros(self.graph.n_vertices, dtype=np.asarray(u).dtype)
        fin = self.vertex_dof >= 0
        d[fin] = np.asarray(u)[self.vertex_dof[fin]]
        return d

    def interior(self, edge: int) -> np.ndarray:
        return self.nodes[edge, 1:-1]


@dataclass
class AssembledSystem:
    graph: Graph
    mesh: EdgeMesh
    dofs: DofMap
    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    lumped: sp.csr_matrix
    laplacian: sp.csr_matrix
    coupling: Callable[[float], np.ndarray]
    coupling_constant: np.ndarray | None
    node_matrix: np.ndarray

    @property
    def n_dofs(self) -> int:
        return self.dofs.n_dofs

    @property
    def h1_gram(self) -> sp.csr_matrix:
        """Gram matrix of the H1 inner product on the discrete space."""
        return (self.laplacian + self.mass).tocsr()


def resolve_coupling(spec: CouplingSpec, m: int):
    """Return (C(x) callable, constant matrix or None)."""
    if spec is None or (isinstance(spec, str) and spec == "identity"):
        c = np.eye(m)
    elif isinstance(spec, Mapping):
        kind = spec.get("kind", "identity")
        if kind == "identity":
            c = np.eye(m)
        elif kind == "constant":
            c = _complex_rows(spec["rows"])
        elif kind == "diagonal":
            c = np.diag(_complex_rows([spec["values"]])[0])
        else:
            raise InputError(f"unknown coupling kind {kind!r}")
    elif callable(spec):
        probe = np.asarray(spec(0.5))
        if probe.shape != (m, m):
            raise ShapeMismatch(f"C(x) must be {m}x{m}, got {probe.shape}")
        return spec, None
    else:
        c = np.asarray(spec)
        if c.ndim == 1:
            c = np.diag(c)
    if c.shape != (m, m):
        raise ShapeMismatch(f"coupling must be {m}x{m}, got {c.shape}")
    return (lambda x, c=c: c), c


def _complex_rows(rows) -> np.ndarray:
    """Rows of numbers or [re, im] pairs."""
    def entry(z):
        if isinstance(z, (list, tuple)):
            return complex(z[0], z[1])
        return z
    a = np.array([[entry(z) for z in row] for row in rows])
    if np.iscomplexobj(a) and not np.any(a.imag):
        a = a.real
    return a


def resolve_node_matrix(graph: Graph, M) -> np.ndarray:
    fin = graph.finite_vertices
    nf = len(fin)
    if M is None:
        return np.zeros((nf, nf))
    if isinstance(M, Mapping):
        M = _complex_rows(M["rows"])
    M = np.asarray(M)
    if M.shape == (nf, nf):
        return M
    n = graph.n_vertices
    if M.shape == (n, n):
        flagged = graph.flagged
        if np.any(M[flagged, :]) or np.any(M[:, flagged]):
            raise FlaggedVertexInM("node matrix couples a flagged vertex")
        return M[np.ix_(fin, fin)]
    raise ShapeMismatch(f"node matrix must be {nf}x{nf}, got {M.shape}")


def _edge_blocks(m: int, n: int, coeff: np.ndarray, local: np.ndarray) -> sp.coo_matrix:
    """Broken matrix with block coeff[k][i, j] * local on element k of edges (i, j).

    ``coeff`` has shape (n + 1, m, m); rows of the result are indexed by
    (edge, node) flattened as edge * (n + 2) + node.
    """
    k, i, j = np.nonzero(coeff)
    vals = coeff[k, i, j]
    rows, cols, data = [], [], []
    for a in range(2):
        for b in range(2):
            rows.append(i * (n + 2) + k + a)
            cols.append(j * (n + 2) + k + b)
            data.append(vals * local[a, b])
    size = m * (n + 2)
    return sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
    )


def build(graph: Graph, mesh: EdgeMesh, C: CouplingSpec = None, M=None) -> AssembledSystem:
    """Assemble a(u, v) = sum_ij int c_ij u_j' conj(v_i') - (M d_u | d_v)."""
    m, n, h = graph.n_edges, mesh.n, mesh.h
    dofs = DofMap(graph, mesh)
    cfun, cconst = resolve_coupling(C, m)
    node = resolve_node_matrix(graph, M)

    mids = (np.arange(n + 1) + 0.5) * h
    if cconst is not None:
        coeff = np.broadcast_to(cconst, (n + 1, m, m))
    else:
        coeff = np.stack([np.asarray(cfun(x)) for x in mids])
    grad = np.array([[1.0, -1.0], [-1.0, 1.0]]) / h
    E = dofs.extension
    K = (E.T @ _edge_blocks(m, n, coeff, grad).tocsr() @ E).tocsr()
    eye = np.broadcast_to(np.eye(m), (n + 1, m, m))
    K0 = (E.T @ _edge_blocks(m, n, eye, grad).tocsr() @ E).tocsr()
    Mc = (E.T @ _edge_blocks(m, n, eye, np.array([[2.0, 1.0], [1.0, 2.0]]) * h / 6).tocsr() @ E).tocsr()
    Ml = (E.T @ _edge_blocks(m, n, eye, np.eye(2) * h / 2).tocsr() @ E).tocsr()
    if np.any(node):
        r, c = np.nonzero(node)
        K = (K - sp.csr_matrix((node[r, c], (r, c)), shape=K.shape)).tocsr()
    for mat in (K, K0, Mc, Ml):
        mat.sum_duplicates()
        mat.eliminate_zeros()
    return AssembledSystem(graph, mesh, dofs, K, Mc, Ml, K0, cfun, cconst, node)


def endpoint_derivatives(sys: AssembledSystem, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One-sided three-point derivatives psi'(0), psi'(1) per edge."""
    w = sys.dofs.edge_values(u)
    h = sys.mesh.h
    d0 = (-3 * w[:, 0] + 4 * w[:, 1] - w[:, 2]) / (2 * h)
    d1 = (3 * w[:, -1] - 4 * w[:, -2] + w[:, -3]) / (2 * h)
    return d0, d1


def kirchhoff_residual(sys: AssembledSystem, u: np.ndarray) -> np.ndarray:
    """Flux balance minus node coupling at every non-flagged vertex."""
    u = np.asarray(u)
    if u.shape != (sys.n_dofs,):
        raise ShapeMismatch(f"expected a vector of {sys.n_dofs} dofs, got shape {u.shape}")
    d0, d1 = endpoint_derivatives(sys, u)
    f0 = np.asarray(sys.coupling(0.0)) @ d0
    f1 = np.asarray(sys.coupling(1.0)) @ d1
    g = sys.graph
    flux = np.zeros(g.n_vertices, dtype=np.result_type(f0, f1, float))
    np.add.at(flux, g.source, f1)
    np.add.at(flux, g.target, -f0)
    fin = g.finite_vertices
    d = u[: sys.dofs.n_vertex_dofs]
    return flux[fin] - sys.node_matrix @ d


# -- interpolation -------------------------------------------------------------
EdgeData = Union[Callable, Sequence, np.ndarray, Mapping]


def _samples(item, x: np.ndarray) -> np.ndarray:
    if item is None:
        return np.zeros_like(x)
    if callable(item):
        return np.broadcast_to(np.asarray(item(x)), x.shape).copy()
    arr = np.asarray(item)
    if arr.shape != x.shape:
        raise ShapeMismatch(f"edge samples must have {x.size} values, got {arr.shape}")
    return arr


def edge_samples(graph: Graph, mesh: EdgeMesh, data: EdgeData) -> np.ndarray:
    """Evaluate per-edge data on the mesh, shape (|E|, n + 2)."""
    x = mesh.points
    m = graph.n_edges
    if callable(data):
        items = [data] * m
    elif isinstance(data, Mapping):
        for key in data:
            graph.edge_index(key)
        items = [data.get(e.id) for e in graph.edges]
    else:
        items = list(data)
        if len(items) != m:
            raise ShapeMismatch(f"need data for {m} edges, got {len(items)}")
    rows = [_samples(it, x) for it in items]
    dtype = np.result_type(*rows, float)
    return np.array(rows, dtype=dtype)


def interpolate(
    graph: Graph,
    mesh: EdgeMesh,
    data: EdgeData,
    node_values: Mapping[str, complex] | Sequence[complex] | None = None,
    tol: float = 1e-10,
) -> np.ndarray:
    """Dof vector of a function given by per-edge closed forms or samples."""
    w = edge_samples(graph, mesh, data)
    dofs = DofMap(graph, mesh)
    if node_values is not None:
        if isinstance(node_values, Mapping):
            d = np.zeros(graph.n_vertices, dtype=complex)
            for vid, val in node_values.items():
                d[graph.vertex_index(vid)] = val
        else:
            d = np.asarray(node_values, dtype=complex)
            if d.shape != (graph.n_vertices,):
                raise ShapeMismatch(f"node vector must have {graph.n_vertices} entries")
        if not np.any(d.imag):
            d = d.real
    else:
        d = None
    scale = max(1.0, float(np.abs(w).max()) if w.size else 1.0)
    u = np.zeros(dofs.n_dofs, dtype=np.result_type(w, d if d is not None else w))
    for k, v in enumerate(graph.vertices):
        vals = np.concatenate([w[graph.target == k, 0], w[graph.source == k, -1]])
        if v.infinite:
            if np.abs(vals).max(initial=0.0) > tol * scale or (d is not None and abs(d[k]) > tol * scale):
                raise FlaggedNonzero(f"nonzero value at flagged vertex {v.id!r}")
            continue
        ref = d[k] if d is not None else vals[0]
        if np.abs(vals - ref).max(initial=0.0) > tol * scale:
            raise ContinuityViolation(
                f"endpoint values {vals.tolist()} disagree at vertex {v.id!r}"
            )
        u[dofs.vertex_dof[k]] = ref
    for i in range(graph.n_edges):
        u[dofs.interior(i)] = w[i, 1:-1]
    return u


def affine(graph: Graph, mesh: EdgeMesh, d: Sequence[complex]) -> np.ndarray:
    """Piecewise-affine interpolant of a node vector over all vertices."""
    d = np.asarray(d)
    if d.shape != (graph.n_vertices,):
        raise ShapeMismatch(f"node vector must have {graph.n_vertices} entries")
    x = mesh.points
    w = np.outer(d[graph.target], 1 - x) + np.outer(d[graph.source], x)
    return interpolate(graph, mesh, w)
