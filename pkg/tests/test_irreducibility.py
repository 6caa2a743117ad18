from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netforms import generators as gen
from netforms.acceptance import union_find_spans
from netforms.errors import BudgetExceeded, GraphDisconnected
from netforms.graph import finite_span, from_edges, is_connected
from netforms.irreducibility import cross_check, decomposition, irreducible


def test_examples():
    assert irreducible(gen.kite()).verdict
    r = irreducible(gen.two_triangles(flagged=True))
    assert not r.verdict and len(r.decomposition.spans) == 2
    assert r.decomposition.intersections == {(0, 1): ("c",)}
    r = irreducible(from_edges([("a", "b")], infinite=["a", "b"]))
    assert r.verdict and r.decomposition.spans[0].edges == ("e1",)


def test_disconnected_rejected():
    with pytest.raises(GraphDisconnected):
        irreducible(from_edges([("a", "b"), ("c", "d")]))


def test_budget():
    with pytest.raises(BudgetExceeded):
        cross_check(gen.directed_cycle(3), n=1000)
    with pytest.raises(BudgetExceeded):
        cross_check(gen.directed_cycle(65), n=8)


def test_cross_check_examples():
    r = cross_check(gen.star(4, "outbound", flagged_center=True))
    assert not r.verdict and r.agrees
    assert all(s.leakage <= 1e-12 for s in r.spans)
    r = cross_check(gen.directed_cycle(3))
    assert r.verdict and r.agrees and r.spans[0].min_interior > 1e-10


def _connected(seed, flag_prob):
    rng = np.random.default_rng(seed)
    return gen.random_graph(rng, 7, 10, connected=True, flag_prob=flag_prob)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_verdict_invariant_under_relabel_and_reversal(seed):
    g = _connected(seed, 0.3)
    rng = np.random.default_rng(seed + 1)
    vmap = dict(zip(g.vertex_ids, [f"u{k}" for k in rng.permutation(g.n_vertices)]))
    emap = dict(zip(g.edge_ids, [f"f{k}" for k in rng.permutation(g.n_edges)]))
    v = irreducible(g).verdict
    assert irreducible(g.relabeled(vmap, emap)).verdict == v
    assert irreducible(g.reversed()).verdict == v


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_one_edge_equals_all_edges(seed):
    g = _connected(seed, 0.3)
    assert is_connected(g)
    all_e = all(len(finite_span(g, e).edges) == g.n_edges for e in g.edge_ids)
    assert irreducible(g).verdict == all_e


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_spans_match_union_find(seed):
    g = gen.random_graph(np.random.default_rng(seed), 8, 12, flag_prob=0.3)
    spans = {frozenset(s.edges) for s in decomposition(g).spans}
    assert spans == set(union_find_spans(g))


def test_single_flagged_boundary_vertex_degree_split():
    # two spans meeting at one flagged vertex share exactly that vertex's degree
    g = gen.two_triangles(flagged=True)
    d = decomposition(g)
    c = g.vertex_index("c")
    touching = [sum(1 for e in s.edges if c in (g.source[g.edge_index(e)], g.target[g.edge_index(e)])) for s in d.spans]
    assert sum(touching) == g.degree[c]
