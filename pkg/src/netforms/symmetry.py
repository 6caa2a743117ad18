"""Symmetry projections on networks: admissibility, invariance, node blocks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import (
    DimensionMismatch,
    GraphDisconnected,
    FlaggedVertexPresent,
    InadmissibleSubspace,
    InputError,
    NotAProjection,
)
from .graph import Edge, Graph, Vertex, is_connected, layering
from .incidence import boundary_map, orthonormal_basis, range_basis
from .mesh import AssembledSystem, _complex_rows, endpoint_derivatives

ADMISSIBLE_TOL = 1e-10
PROJECTION_TOL = 1e-12
KINDS = ("averaging", "layer_averaging", "coordinate", "span", "matrix", "full", "zero")


@dataclass(frozen=True)
class SubspaceSpec:
    kind: str
    edges: tuple[str, ...] = ()
    basis: tuple[tuple, ...] | None = None
    rows: tuple[tuple, ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown subspace kind {self.kind!r}")

    @classmethod
    def from_json(cls, spec: Mapping) -> SubspaceSpec:
        kind = spec.get("kind")
        basis = spec.get("basis")
        rows = spec.get("rows")
        return cls(
            kind=kind,
            edges=tuple(spec.get("edges", ())),
            basis=tuple(map(tuple, basis)) if basis is not None else None,
            rows=tuple(map(tuple, rows)) if rows is not None else None,
        )


Subspace = Union[SubspaceSpec, np.ndarray, str]


def projection_matrix(graph: Graph, Y: Subspace, tol: float = PROJECTION_TOL) -> np.ndarray:
    """Resolve a subspace description to an orthogonal projection on l2(E)."""
    m = graph.n_edges
    if isinstance(Y, str):
        Y = SubspaceSpec(Y)
    if isinstance(Y, SubspaceSpec):
        if Y.kind == "averaging":
            return np.full((m, m), 1.0 / m)
        if Y.kind == "full":
            return np.eye(m)
        if Y.kind == "zero":
            return np.zeros((m, m))
        if Y.kind == "layer_averaging":
            lay = layering(graph)
            P = np.zeros((m, m))
            for p in range(lay.count):
                idx = lay.edges_in_layer(p)
                if idx:
                    P[np.ix_(idx, idx)] = 1.0 / len(idx)
            return P
        if Y.kind == "coordinate":
            idx = [graph.edge_index(e) for e in Y.edges]
            P = np.zeros((m, m))
            P[idx, idx] = 1.0
            return P
        if Y.kind == "span":
            vecs = _complex_rows(Y.basis or ())
            if vecs.size == 0:
                return np.zeros((m, m))
            if vecs.shape[1] != m:
                raise DimensionMismatch(f"basis vectors must have {m} entries, got {vecs.shape[1]}")
            q = orthonormal_basis(vecs.T)
            return q @ q.conj().T
        Y = _complex_rows(Y.rows or ())
    P = np.asarray(Y)
    if P.shape != (m, m):
        raise DimensionMismatch(f"projection must be {m}x{m}, got {P.shape}")
    check_projection(P, tol)
    return P


def check_projection(P: np.ndarray, tol: float = PROJECTION_TOL) -> None:
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise DimensionMismatch(f"projection must be square, got {P.shape}")
    if np.abs(P @ P - P).max(initial=0.0) > tol:
        raise NotAProjection("matrix is not idempotent")
    if np.abs(P - P.conj().T).max(initial=0.0) > tol:
        raise NotAProjection("matrix is not self-adjoint")


def embed_projection(P_sub: np.ndarray, edges: Sequence[int], m: int) -> np.ndarray:
    """Projection acting as ``P_sub`` on the given edges and as identity elsewhere."""
    P = np.eye(m, dtype=np.result_type(P_sub, float))
    edges = list(edges)
    rest = [i for i in range(m) if i not in edges]
    P[np.ix_(edges, edges)] = P_sub
    P[np.ix_(rest, edges)] = 0
    P[np.ix_(edges, rest)] = 0
    return P


# -- admissibility ------------------------------------------------------------
def continuity_defect(graph: Graph, p0: np.ndarray, p1: np.ndarray) -> np.ndarray:
    """Per-vertex spread of endpoint values (absolute value at flagged vertices)."""
    out = np.zeros(graph.n_vertices)
    for k in range(graph.n_vertices):
        vals = np.concatenate([p0[graph.target == k], p1[graph.source == k]])
        if vals.size == 0:
            continue
        if graph.flagged[k]:
            out[k] = np.abs(vals).max()
        else:
            out[k] = np.abs(vals[:, None] - vals[None, :]).max()
    return out


@dataclass(frozen=True)
class Witness:
    """A piecewise-affine function whose projection breaks node continuity."""

    node_values: dict[str, float]
    vertex: str
    defect: float
    endpoint_values: tuple[tuple[complex, complex], ...]
    projected_values: tuple[tuple[complex, complex], ...]

    def to_dict(self) -> dict:
        def num(z):
            z = complex(z)
            return z.real if z.imag == 0 else [z.real, z.imag]
        return {
            "node_values": self.node_values,
            "vertex": self.vertex,
            "defect": self.defect,
            "psi": [[num(a), num(b)] for a, b in self.endpoint_values],
            "projected": [[num(a), num(b)] for a, b in self.projected_values],
        }


@dataclass(frozen=True)
class AdmissibilityVerdict:
    admissible: bool
    residual: float
    witness: Witness | None = None
    connected: bool = True
    warning: str | None = None

    def __bool__(self) -> bool:
        return self.admissible

    def to_dict(self) -> dict:
        return {
            "admissible": self.admissible,
            "residual": self.residual,
            "connected": self.connected,
            "warning": self.warning,
            "witness": self.witness.to_dict() if self.witness else None,
        }


def admissible(graph: Graph, Y: Subspace, tol: float = ADMISSIBLE_TOL) -> AdmissibilityVerdict:
    """Decide whether the projection maps the form domain into itself.

    Equivalent condition: diag(P, P) leaves the range of the boundary map
    invariant.
    """
    P = projection_matrix(graph, Y)
    bm = boundary_map(graph)
    B = range_basis(bm).basis
    Phat = sla.block_diag(P, P)

    def leak(x: np.ndarray) -> np.ndarray:
        y = Phat @ x
        return y - B @ (B.conj().T @ y)

    residual = float(np.linalg.norm(leak(B), axis=0).max(initial=0.0))
    ok = residual <= tol
    connected = is_connected(graph)
    warning = None if connected else "graph is disconnected; verdict is the range condition only"
    witness = None
    if not ok:
        norms = np.linalg.norm(leak(bm.matrix), axis=0)
        col = int(np.flatnonzero(norms > tol)[0])
        k = bm.columns[col]
        d = np.zeros(graph.n_vertices)
        d[k] = 1.0
        psi0, psi1 = d[graph.target], d[graph.source]
        p0, p1 = P @ psi0, P @ psi1
        defect = continuity_defect(graph, p0, p1)
        bad = int(np.argmax(defect))
        witness = Witness(
            node_values={graph.vertices[k].id: 1.0},
            vertex=graph.vertices[bad].id,
            defect=float(defect[bad]),
            endpoint_values=tuple(zip(psi0.tolist(), psi1.tolist())),
            projected_values=tuple(zip(p0.tolist(), p1.tolist())),
        )
    return AdmissibilityVerdict(ok, residual, witness, connected, warning)


def oracle_admissible(graph: Graph, Y: Subspace, samples: int = 1000, seed: int = 0) -> bool:
    """Definitional check: project sampled continuous affine functions.

    Tries every unit node vector first, then ``samples`` random ones, and
    looks for a vertex where the projected endpoint values disagree.
    """
    if samples < 1:
        raise InputError("samples must be at least 1")
    P = projection_matrix(graph, Y)
    rng = np.random.default_rng(seed)
    fin = [k for k in range(graph.n_vertices) if not graph.vertices[k].infinite]
    trials = [np.eye(graph.n_vertices)[k] for k in fin]
    for _ in range(samples):
        d = np.zeros(graph.n_vertices)
        d[fin] = rng.standard_normal(len(fin))
        trials.append(d)
    for d in trials:
        psi0 = np.array([d[graph.vertex_index(e.target)] for e in graph.edges])
        psi1 = np.array([d[graph.vertex_index(e.source)] for e in graph.edges])
        q0, q1 = P @ psi0, P @ psi1
        seen: dict[str, complex] = {}
        for i, e in enumerate(graph.edges):
            for vid, val in ((e.target, q0[i]), (e.source, q1[i])):
                if graph.vertices[graph.vertex_index(vid)].infinite:
                    if abs(val) > 1e-9:
                        return False
                elif vid in seen:
                    if abs(seen[vid] - val) > 1e-9:
                        return False
                else:
                    seen[vid] = val
    return True


def one_eigenvector_check(graph: Graph, Y: Subspace) -> bool:
    """True iff the constant vector is an eigenvector of the projection."""
    if not is_connected(graph):
        raise GraphDisconnected("graph is not connected")
    if graph.flagged.any():
        raise FlaggedVertexPresent("constants are not in the form domain when vertices are flagged")
    P = projection_matrix(graph, Y)
    one = np.ones(graph.n_edges)
    p1 = P @ one
    lam = p1.mean()
    return bool(np.abs(p1 - lam * one).max() <= 1e-10)


# -- subspace utilities -------------------------------------------------------
def intersection_dim(U: np.ndarray, W: np.ndarray, tol: float = 1e-10) -> int:
    """Dimension of span(U) ∩ span(W)."""
    u = orthonormal_basis(U, tol) if U.size else np.zeros((U.shape[0], 0))
    w = orthonormal_basis(W, tol) if W.size else np.zeros((W.shape[0], 0))
    if u.shape[1] == 0 or w.shape[1] == 0:
        return 0
    s = np.linalg.svd(u.conj().T @ w, compute_uv=False)
    return int(np.sum(s > 1 - tol))


def splits_along(K: np.ndarray, Ybasis: np.ndarray, tol: float = 1e-10) -> bool:
    """Whether span(Y) = (ker K ∩ Y) ⊕ (range K ∩ Y), by dimension count."""
    ker = sla.null_space(K, rcond=tol)
    ran = orthonormal_basis(K, tol)
    y = orthonormal_basis(Ybasis, tol)
    return intersection_dim(ker, y, tol) + intersection_dim(ran, y, tol) == y.shape[1]


def node_subspace(graph: Graph, P: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Node vectors (over non-flagged vertices) of Y-symmetric affine functions."""
    I_hat = boundary_map(graph).matrix
    Phat = sla.block_diag(P, P)
    return sla.null_space(I_hat - Phat @ I_hat, rcond=tol)


# -- invariance ---------------------------------------------------------------
def discrete_projection(sys: AssembledSystem, P: np.ndarray) -> sp.csr_matrix:
    """Pointwise application of P transferred to the dof space.

    Vertex values are averaged over the copies seen from incident edges, so
    the result is a projection exactly when P is admissible.
    """
    E = sys.dofs.extension
    counts = np.asarray(E.sum(axis=0)).ravel()
    Pb = sp.kron(sp.csr_matrix(P), sp.identity(sys.mesh.n + 2), format="csr")
    return (sp.diags(1.0 / counts) @ E.T @ Pb @ E).tocsr()


@dataclass(frozen=True)
class OrthogonalityReport:
    exact: bool | None
    exact_residual: float | None
    discrete_residual: float


def orthogonality_check(
    C: np.ndarray | None,
    M: np.ndarray | None,
    Y: Subspace,
    assembled: AssembledSystem,
    tol: float = 1e-10,
) -> OrthogonalityReport:
    """Check that the form couples Y-symmetric functions only to Y-symmetric ones.

    The exact branch needs an edgewise-constant C: it checks (I - P) C P = 0
    and that the node matrix does not couple node vectors of Y-symmetric
    functions to those of Y-orthogonal ones.  The discrete branch reports
    ||Q_h^H K_h P_h||_F for the assembled stiffness.
    """
    graph = assembled.graph
    m = graph.n_edges
    P = projection_matrix(graph, Y)
    if C is None:
        C = assembled.coupling_constant
    if M is None:
        M = assembled.node_matrix
    exact = exact_res = None
    if C is not None:
        C = np.asarray(C)
        if C.shape != (m, m):
            raise DimensionMismatch(f"coupling must be {m}x{m}, got {C.shape}")
        M = np.asarray(M)
        nf = len(graph.finite_vertices)
        if M.shape != (nf, nf):
            raise DimensionMismatch(f"node matrix must be {nf}x{nf}, got {M.shape}")
        Q = np.eye(m) - P
        exact_res = float(np.linalg.norm(Q @ C @ P))
        if np.any(M):
            dy = node_subspace(graph, P)
            dq = node_subspace(graph, Q)
            if dy.size and dq.size:
                exact_res += float(np.linalg.norm(dq.conj().T @ M @ dy))
        exact = exact_res <= tol
    Ph = discrete_projection(assembled, P)
    Qh = sp.identity(assembled.n_dofs, format="csr") - Ph
    disc = float(sp.linalg.norm(Qh.conj().T @ assembled.stiffness @ Ph))
    return OrthogonalityReport(exact, exact_res, disc)


def restricted_coercivity(assembled: AssembledSystem, Y: Subspace) -> float:
    """Largest alpha with Re a_h(u, u) >= alpha ||u||_V^2 on range(P_h)."""
    graph = assembled.graph
    P = projection_matrix(graph, Y)
    if not admissible(graph, P):
        raise InadmissibleSubspace("subspace is not admissible for this graph")
    Ph = discrete_projection(assembled, P).toarray()
    B = orthonormal_basis(Ph)
    if B.shape[1] == 0:
        return float("inf")
    K = assembled.stiffness.toarray()
    Ksym = (K + K.conj().T) / 2
    G = assembled.h1_gram.toarray()
    A_r = B.conj().T @ Ksym @ B
    G_r = B.conj().T @ G @ B
    return float(sla.eigh(A_r, G_r, eigvals_only=True)[0])


# -- invariant blocks and nodes ---------------------------------------------
@dataclass(frozen=True)
class BlockPartition:
    blocks: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.blocks)

    def block_of(self, index: int) -> int:
        for b, blk in enumerate(self.blocks):
            if index in blk:
                return b
        raise IndexError(index)


def invariant_blocks(A: np.ndarray, tol: float = 1e-12) -> BlockPartition:
    """Connected components of the support of |A| + |A^T|."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got {A.shape}")
    support = (np.abs(A) > tol) | (np.abs(A.T) > tol)
    _, labels = connected_components(sp.csr_matrix(support), directed=False)
    groups: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, []).append(i)
    blocks = sorted((tuple(g) for g in groups.values()), key=lambda b: b[0])
    return BlockPartition(tuple(blocks))


def nodes_from_boundary_subspace(Y: np.ndarray, tol: float = 1e-12) -> BlockPartition:
    """Nodes of a generalized network: invariant blocks of P_Y on endpoints.

    ``Y`` is either a projection on the 2|E|-dimensional endpoint space or a
    matrix whose columns span the subspace.  Endpoint i < |E| is psi_i(0),
    endpoint |E| + i is psi_i(1).
    """
    Y = np.asarray(Y)
    if Y.ndim == 2 and Y.shape[0] == Y.shape[1] and np.allclose(Y @ Y, Y, atol=1e-9):
        check_projection(Y, max(tol, PROJECTION_TOL))
        P = Y
    else:
        if Y.ndim != 2:
            raise NotAProjection("expected a projection or a basis matrix")
        q = orthonormal_basis(Y)
        P = q @ q.conj().T
    if P.shape[0] % 2:
        raise DimensionMismatch("endpoint space must have even dimension 2|E|")
    return invariant_blocks(P, tol=1e-10)


def endpoint_class_projection(graph: Graph) -> np.ndarray:
    """Projection onto functions of the endpoints that are constant per vertex.

    Endpoints at flagged vertices are set to zero.
    """
    m = graph.n_edges
    P = np.zeros((2 * m, 2 * m))
    ends = np.concatenate([graph.target, graph.source])
    for k in graph.finite_vertices:
        idx = np.flatnonzero(ends == k)
        P[np.ix_(idx, idx)] = 1.0 / idx.size
    return P


def graph_from_blocks(blocks: BlockPartition, m: int) -> Graph:
    """Rebuild a graph whose vertices are the blocks of the endpoint space."""
    name = {i: f"n{b}" for b, blk in enumerate(blocks.blocks) for i in blk}
    vertices = [Vertex(f"n{b}") for b in range(len(blocks))]
    edges = [Edge(f"e{i + 1}", name[m + i], name[i]) for i in range(m)]
    return Graph(vertices, edges)


def generalized_domain_residual(
    sys: AssembledSystem, u: np.ndarray, P: np.ndarray, Mhat: np.ndarray | None = None
) -> np.ndarray:
    """P (d_nu psi - Mhat psi|_boundary) on the endpoint space.

    The outer normal derivative is (-psi'(0), psi'(1)), with C applied.
    """
    d0, d1 = endpoint_derivatives(sys, u)
    f0 = np.asarray(sys.coupling(0.0)) @ d0
    f1 = np.asarray(sys.coupling(1.0)) @ d1
    dnu = np.concatenate([-f0, f1])
    w = sys.dofs.edge_values(u)
    trace = np.concatenate([w[:, 0], w[:, -1]])
    r = dnu if Mhat is None else dnu - Mhat @ trace
    return P @ r

