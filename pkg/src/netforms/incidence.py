"""Incidence operators, their norms, and the stacked boundary map."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .graph import Graph, incidence

RANK_TOL = 1e-12


@dataclass(frozen=True)
class BoundaryMap:
    """Node values -> endpoint values.

    Rows 0..m-1 hold psi_e(0) (value at the target of e), rows m..2m-1 hold
    psi_e(1) (value at the source).  Columns are the non-flagged vertices in
    vertex order; flagged vertices have no column, so their endpoint values
    are forced to vanish.
    """

    graph: Graph
    matrix: np.ndarray
    columns: tuple[int, ...]

    def endpoint_values(self, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        v = self.matrix @ d
        m = self.graph.n_edges
        return v[:m], v[m:]


def boundary_map(graph: Graph) -> BoundaryMap:
    inc = incidence(graph)
    cols = tuple(graph.finite_vertices)
    full = np.vstack([inc.plus.T, inc.minus.T]).astype(float)
    return BoundaryMap(graph, full[:, list(cols)], cols)


@dataclass(frozen=True)
class NormCheck:
    bounded: bool
    in_bound: int
    out_bound: int
    sigma_plus: float
    sigma_minus: float

    @property
    def estimate_holds(self) -> bool:
        eps = 1e-12
        return (
            self.sigma_plus**2 <= self.in_bound + eps
            and self.sigma_minus**2 <= self.out_bound + eps
        )


def operator_norm_check(graph: Graph) -> NormCheck:
    """Spectral norms of I+ and I- against the row-sum estimate sqrt(max degree)."""
    inc = incidence(graph)
    check = NormCheck(
        bounded=not graph.flagged.any(),
        in_bound=int(graph.in_degree.max()),
        out_bound=int(graph.out_degree.max()),
        sigma_plus=float(np.linalg.norm(inc.plus, 2)),
        sigma_minus=float(np.linalg.norm(inc.minus, 2)),
    )
    if not check.estimate_holds:
        raise ArithmeticError(f"incidence norm estimate violated: {check}")
    return check


@dataclass(frozen=True)
class RangeBasis:
    basis: np.ndarray
    rank: int
    tol: float

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T


def range_basis(bm: BoundaryMap, tol: float = RANK_TOL) -> RangeBasis:
    a = bm.matrix
    if a.shape[1] == 0:
        b = np.zeros((a.shape[0], 0))
    else:
        u, s, _ = np.linalg.svd(a, full_matrices=False)
        b = u[:, s > tol * max(1.0, s[0] if s.size else 0.0)]
    return RangeBasis(b, b.shape[1], tol)


def orthonormal_basis(a: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the column space of ``a``."""
    if a.size == 0:
        return np.zeros((a.shape[0], 0), dtype=a.dtype)
    return sla.orth(a, rcond=tol)
