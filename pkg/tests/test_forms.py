from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netforms import generators as gen
from netforms.acceptance import random_form_matrix
from netforms.errors import DiagonalNotCoercive, EmptySamples, IndexSetTooLarge, NonDiagonalGram, ShapeMismatch
from netforms.forms import (
    FormMatrix,
    coercivity,
    continuity_bound,
    domination_check,
    ellipticity,
    form_matrix_from_system,
    multiplication_family_bounds,
    positivity_criteria,
    restriction_coercivity,
    sample_family,
    two_by_two_criterion,
)
from netforms.mesh import EdgeMesh, build


def test_bounds_example():
    r = continuity_bound(FormMatrix.scalar(np.array([[1.0, 1.0], [-1.0, 1.0]])))
    assert r.matrix_bound == pytest.approx(2.0, abs=1e-12)
    assert r.exact == pytest.approx(np.sqrt(2), abs=1e-12)


def test_diagonal_continuity_and_identity_coercivity():
    r = continuity_bound(FormMatrix.scalar(np.diag([1.0, 3.0, 2.0])))
    assert r.exact == pytest.approx(3.0)
    c = coercivity(FormMatrix.from_full(np.eye(4), [2, 2]))
    assert c.exact == pytest.approx(1.0) and c.sufficient == pytest.approx(1.0)


def test_sign_structure_defeats_modulus_bound():
    c = coercivity(FormMatrix.scalar(np.array([[1.0, 1.0], [-1.0, 1.0]])))
    assert c.sufficient is None and c.exact == pytest.approx(1.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_coercivity_sweep(seed):
    fm = random_form_matrix(np.random.default_rng(seed))
    c = coercivity(fm)
    assert c.necessary_holds
    if c.sufficient is not None:
        assert c.exact >= c.sufficient - 1e-9
    r = continuity_bound(fm)
    assert r.exact <= r.matrix_bound * (1 + 1e-12)
    rr = restriction_coercivity(fm)
    assert rr.monotone
    for i, a in enumerate(c.diagonal):
        assert rr.alphas[(i,)] == pytest.approx(a, abs=1e-12)


def test_restriction_limit():
    with pytest.raises(IndexSetTooLarge):
        restriction_coercivity(FormMatrix.scalar(np.eye(13)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    fm = random_form_matrix(rng)
    U = [np.linalg.qr(rng.standard_normal((d, d)))[0] for d in fm.dims]
    gm = fm.transformed(U)
    assert coercivity(gm).exact == pytest.approx(coercivity(fm).exact, abs=1e-10)
    assert continuity_bound(gm).exact == pytest.approx(continuity_bound(fm).exact, abs=1e-10)
    e1, e2 = ellipticity(fm), ellipticity(gm)
    assert e1.elliptic == e2.elliptic
    assert e1.omega == pytest.approx(e2.omega, rel=1e-6, abs=1e-10)


def test_two_by_two_zero_coupling():
    r = two_by_two_criterion(FormMatrix.from_full(np.diag([2.0, 3.0, 1.0]), [2, 1]))
    assert r.exact_coercive and r.criterion
    assert r.criterion_alpha == pytest.approx(1.0)


def test_two_by_two_imaginary_coupling_has_no_real_cross_terms():
    v = 0.7
    A = np.array([[1.0, 1j * v], [1j * v, 2.0]])
    r = two_by_two_criterion(FormMatrix.scalar(A), samples=100)
    assert r.criterion_alpha == pytest.approx(1.0, abs=1e-9)
    assert r.exact_coercive


def test_two_by_two_needs_coercive_diagonal():
    with pytest.raises(DiagonalNotCoercive):
        two_by_two_criterion(FormMatrix.scalar(np.array([[-1.0, 0.0], [0.0, 1.0]])))
    with pytest.raises(ShapeMismatch):
        two_by_two_criterion(FormMatrix.scalar(np.eye(3)))


def _threshold(verdict, lo=0.0, hi=4.0, steps=40):
    for _ in range(steps):
        mid = (lo + hi) / 2
        if verdict(mid):
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def test_two_by_two_threshold_matches_eigenvalue_oracle():
    rng = np.random.default_rng(7)
    W12 = rng.standard_normal((2, 3))
    W21 = rng.standard_normal((3, 2))

    def fm(s):
        A = np.zeros((5, 5))
        A[:2, :2] = 1.5 * np.eye(2)
        A[2:, 2:] = 0.8 * np.eye(3)
        A[:2, 2:] = s * W12
        A[2:, :2] = s * W21
        return FormMatrix.from_full(A, [2, 3])

    crit = _threshold(lambda s: two_by_two_criterion(fm(s), samples=60, seed=1).criterion)
    exact = _threshold(lambda s: coercivity(fm(s)).exact > 1e-9)
    assert abs(crit - exact) <= 0.02 * exact


def test_ellipticity_cases():
    e = ellipticity(FormMatrix.scalar(np.eye(2)))
    assert e.elliptic and e.omega == 0.0
    e = ellipticity(FormMatrix.scalar(np.array([[1.0, 3.0], [3.0, 1.0]])))
    assert e.elliptic and e.omega == pytest.approx(2.0, rel=1e-6)
    fm = FormMatrix.from_full(-np.eye(2), [1, 1], None, [np.array([[1e-9]])] * 2)
    assert not ellipticity(fm).elliptic


def test_positivity_cases():
    p = positivity_criteria(FormMatrix.scalar(np.diag([1.0, 2.0])))
    assert p.criterion and p.empirical
    p = positivity_criteria(FormMatrix.scalar(np.array([[1.0, 0.5], [0.5, 1.0]])))
    assert not p.criterion and not p.empirical and p.worst_entry < 0
    sys = build(gen.kite(), EdgeMesh(8))
    p = positivity_criteria(form_matrix_from_system(sys, lumped=True))
    assert p.criterion and p.empirical
    with pytest.raises(NonDiagonalGram):
        positivity_criteria(form_matrix_from_system(sys, lumped=False))


def test_domination_cases():
    a = FormMatrix.scalar(np.array([[1.0, -0.5], [-0.5, 1.0]]))
    d = domination_check(a, a)
    assert d.criterion and d.empirical and d.a_positive
    b = FormMatrix.scalar(np.array([[1.0, 0.9], [0.9, 1.0]]))
    d = domination_check(a, b)
    assert not d.criterion and not d.empirical and d.violation > 0
    b = FormMatrix.scalar(np.array([[1.2, 0.3j], [-0.4, 1.0]]))
    d = domination_check(a, b)
    assert d.criterion and d.empirical
    with pytest.raises(ShapeMismatch):
        domination_check(a, FormMatrix.scalar(np.eye(3)))


def test_family_bounds():
    f = multiplication_family_bounds([np.eye(3)] * 4)
    assert f.sup_norm == pytest.approx(1.0) and f.inf_coercivity == pytest.approx(1.0)
    f = multiplication_family_bounds(sample_family(lambda x: np.diag([1.0, 1 / (1 + x)])))
    assert f.inf_coercivity == pytest.approx(0.5) and f.sup_norm == pytest.approx(1.0)

    def rot(x):
        t = x * np.pi / 3
        return np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])

    f = multiplication_family_bounds(sample_family(rot))
    assert f.sup_norm == pytest.approx(1.0) and f.inf_coercivity == pytest.approx(np.cos(np.pi / 3))
    with pytest.raises(EmptySamples):
        multiplication_family_bounds([])


def test_form_matrix_json_roundtrip():
    fm = FormMatrix.from_json({"dims": [1, 1], "rows": [[1, [0, 1]], [[0, -1], 2]]})
    assert fm.full()[0, 1] == 1j and fm.dims == [1, 1]
