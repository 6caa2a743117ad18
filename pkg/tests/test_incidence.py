from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netforms import generators as gen
from netforms.errors import LoopPresent
from netforms.graph import from_edges, incidence
from netforms.incidence import boundary_map, operator_norm_check, range_basis
from netforms.mesh import DofMap, EdgeMesh, affine


def test_single_edge_boundary_map():
    bm = boundary_map(from_edges([("v1", "v2")]))
    # top row is psi(0), read at the target v2; bottom row psi(1), read at the source v1
    assert bm.matrix.tolist() == [[0, 1], [1, 0]]


def test_outbound_star_boundary_map():
    g = gen.star(4, "outbound")
    B = boundary_map(g).matrix
    m = g.n_edges
    assert np.array_equal(B[:m, 0], np.ones(m)) and not B[:m, 1:].any()
    assert np.array_equal(B[m:, 1:], np.eye(m)) and not B[m:, 0].any()


def test_flagged_center_column_absent():
    g = gen.star(3, "outbound", flagged_center=True)
    bm = boundary_map(g)
    assert bm.columns == (1, 2, 3)
    assert not bm.matrix[:3].any()
    assert range_basis(bm).rank == 3


def test_loop_rejected():
    with pytest.raises(LoopPresent):
        boundary_map(from_edges([("a", "a")]))


def test_norm_examples():
    r = operator_norm_check(from_edges([("a", "b"), ("c", "d")]))
    assert r.sigma_plus == pytest.approx(1.0) and r.in_bound == 1
    r = operator_norm_check(gen.star(5, "outbound"))
    assert r.sigma_plus == pytest.approx(np.sqrt(5))
    r = operator_norm_check(gen.directed_cycle(3))
    assert r.sigma_plus == pytest.approx(1.0) and r.in_bound == 1
    assert r.bounded and r.estimate_holds


def test_ranks():
    assert range_basis(boundary_map(from_edges([("a", "b")]))).rank == 2
    assert range_basis(boundary_map(gen.directed_cycle(3))).rank == 3


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_range_basis_properties(seed):
    g = gen.random_graph(np.random.default_rng(seed), 8, 14, flag_prob=0.2)
    bm = boundary_map(g)
    rb = range_basis(bm)
    B = rb.basis
    assert np.abs(B.T @ B - np.eye(rb.rank)).max(initial=0.0) <= 1e-12
    assert np.linalg.norm(bm.matrix - B @ (B.T @ bm.matrix)) <= 1e-10
    s = np.linalg.svd(incidence(g).plus, compute_uv=False)[0]
    assert s**2 <= g.in_degree.max() + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_boundary_map_matches_affine_interpolant(seed):
    rng = np.random.default_rng(seed)
    g = gen.random_graph(rng, 6, 10, flag_prob=0.2)
    bm = boundary_map(g)
    d = rng.standard_normal(g.n_vertices)
    d[g.flagged] = 0.0
    u = affine(g, EdgeMesh(3), d)
    w = DofMap(g, EdgeMesh(3)).edge_values(u)
    top, bottom = bm.endpoint_values(d[list(bm.columns)])
    assert np.allclose(w[:, 0], top) and np.allclose(w[:, -1], bottom)
