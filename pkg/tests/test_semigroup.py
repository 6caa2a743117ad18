from __future__ import annotations

import numpy as np
import pytest
import scipy.sparse.linalg as spla
from hypothesis import given, settings, strategies as st

from netforms import generators as gen
from netforms.acceptance import cn_time_error
from netforms.errors import InputError, MeshMismatch
from netforms.graph import from_edges
from netforms.mesh import DofMap, EdgeMesh, affine, interpolate
from netforms.semigroup import (
    DampedWave,
    DynamicBC,
    NetworkHeat,
    Stepper,
    check_domination,
    check_energy,
    check_even_symmetry,
    check_Linf,
    check_mass,
    check_positivity,
    check_subspace_invariance,
    decay_rate,
    find_linf_violation,
    run,
    tol_inv,
)

BE = Stepper("backward_euler", 1e-3, 0.05)
CN = Stepper("crank_nicolson", 1e-3, 0.05)


def _edge_indicator(g, n, edge=0):
    d = DofMap(g, EdgeMesh(n))
    u = np.zeros(d.n_dofs)
    u[d.interior(edge)] = 1.0
    return u


def test_stepper_validation():
    with pytest.raises(InputError):
        Stepper("rk4", 0.1, 1.0)
    with pytest.raises(InputError):
        Stepper("backward_euler", 0.0, 1.0)
    with pytest.raises(InputError):
        Stepper("backward_euler", 0.1, 0.05)
    assert Stepper("crank_nicolson", 0.01, 0.1).steps == 10


def test_decay_on_dirichlet_edge():
    g = from_edges([("a", "b")], infinite=["a", "b"])
    n = 128
    u0 = interpolate(g, EdgeMesh(n), lambda x: np.sin(np.pi * x))
    tr = run(NetworkHeat(g, n, u0, lumped=False), Stepper("crank_nicolson", 1e-4, 0.1))
    ratio = tr.norms()[-1] / tr.norms()[0]
    assert ratio == pytest.approx(np.exp(-np.pi**2 * 0.1), rel=0.01)
    assert decay_rate(tr, np.pi**2).passed


def test_crank_nicolson_second_order():
    assert cn_time_error(0.01) / cn_time_error(0.005) == pytest.approx(4.0, rel=0.15)


@pytest.mark.parametrize("scheme", [BE, CN])
def test_zero_data_stays_zero(scheme):
    g = gen.kite()
    for sc in (
        NetworkHeat(g, 8, np.zeros(DofMap(g, EdgeMesh(8)).n_dofs)),
        DampedWave(8, 1.0, None),
        DynamicBC(8, None),
    ):
        tr = run(sc, scheme)
        assert not np.any(tr.states)


def test_backward_euler_lumped_step_is_nonnegative():
    sc = NetworkHeat(gen.kite(), 6, np.zeros(4 + 5 * 6), lumped=True)
    L, K = sc.operators("backward_euler")
    S = spla.inv((L + 0.01 * K).tocsc()).toarray() @ L.toarray()
    assert S.min() >= -1e-14


def test_positivity_probe():
    g = gen.kite()
    tr = run(NetworkHeat(g, 16, _edge_indicator(g, 16, 2), lumped=True), BE)
    assert check_positivity(tr).passed
    tr = run(NetworkHeat(g, 16, -_edge_indicator(g, 16, 2), lumped=True), BE)
    assert check_positivity(tr).status == "skipped"
    g = from_edges([("a", "b"), ("b", "c")])
    C = np.array([[1.0, 0.5], [0.5, 1.0]])
    tr = run(NetworkHeat(g, 16, _edge_indicator(g, 16), C=C, lumped=True), BE)
    r = check_positivity(tr)
    assert r.status == "fail" and r.value < -1e-3


@pytest.mark.parametrize("scheme", [BE, CN])
def test_mass_conservation(scheme):
    g = gen.directed_cycle(3)
    d = np.zeros(3)
    d[0] = 1.0
    tr = run(NetworkHeat(g, 16, affine(g, EdgeMesh(16), d)), scheme)
    assert check_mass(tr).passed
    tr = run(NetworkHeat(g, 16, np.zeros(tr.states.shape[1])), scheme)
    assert check_mass(tr).value == 0.0


def test_mass_not_applicable_with_flags():
    g = gen.two_triangles(flagged=True)
    tr = run(NetworkHeat(g, 8, _edge_indicator(g, 8)), BE)
    assert check_mass(tr).status == "not_applicable"


def test_invariance_probe():
    g = gen.directed_cycle(3)
    u0 = interpolate(g, EdgeMesh(32), lambda x: 1 + 0.5 * np.cos(2 * np.pi * x))
    tr = run(NetworkHeat(g, 32, u0), CN)
    r = check_subspace_invariance(tr, "averaging")
    assert r.passed and r.value <= r.detail["tol_inv"]
    assert r.detail["tol_inv"] == pytest.approx(tol_inv(tr))
    tr = run(NetworkHeat(gen.kite(), 8, _edge_indicator(gen.kite(), 8)), CN)
    assert check_subspace_invariance(tr, "full").value <= 1e-14


def test_invariance_leaks_for_inadmissible_subspace():
    g = gen.directed_path(3)
    n = 256
    u0 = interpolate(g, EdgeMesh(n), lambda x: np.sin(2 * np.pi * x))
    tr = run(NetworkHeat(g, n, u0), Stepper("crank_nicolson", 1e-4, 0.05))
    r = check_subspace_invariance(tr, "averaging")
    assert r.detail["initial_residual"] <= 1e-12
    assert r.value >= 100 * r.detail["tol_inv"]


def test_linf_for_heat():
    g = gen.kite()
    u0 = interpolate(g, EdgeMesh(16), lambda x: np.cos(np.pi * x) ** 2)
    assert check_Linf(run(NetworkHeat(g, 16, u0), BE)).passed
    tr = run(NetworkHeat(g, 16, np.zeros_like(u0)), BE)
    assert check_Linf(tr).value == 0.0


def test_linf_violation_for_dynamic_boundary():
    found, ratio, sc = find_linf_violation(32, Stepper("backward_euler", 1e-3, 0.2), seed=0)
    assert found and ratio > 1 + 1e-3 and isinstance(sc, DynamicBC)


def test_domination():
    g = from_edges([("a", "b"), ("b", "c")])
    u = _edge_indicator(g, 16)
    a = run(NetworkHeat(g, 16, u, lumped=True), BE)
    assert check_domination(a, a).value == 0.0
    b = run(NetworkHeat(g, 16, u, C=np.array([[1.0, -0.5], [-0.5, 1.0]]), lumped=True), BE)
    assert check_domination(a, b).status == "fail"
    with pytest.raises(MeshMismatch):
        check_domination(a, run(NetworkHeat(g, 8, _edge_indicator(g, 8)), BE))


@settings(max_examples=15, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_coupled_boundary_dominates_uncoupled(c0, c1, w0, w1):
    def f(x):
        return c0 + c1 * np.cos(3 * x)

    a = run(DynamicBC(16, lambda x: np.abs(f(x)), (abs(w0), abs(w1)), coupled=True), BE)
    b = run(DynamicBC(16, f, (w0, w1), coupled=False), BE)
    assert check_domination(a, b).passed


def test_even_symmetry():
    wave = run(DampedWave(32, 1.0, lambda x: np.cos(2 * np.pi * x)), CN)
    assert check_even_symmetry(wave).passed
    odd = run(DampedWave(32, 1.0, lambda x: np.cos(np.pi * x)), CN)
    assert check_even_symmetry(odd).status == "reported"
    dyn = run(DynamicBC(32, lambda x: np.cos(2 * np.pi * x), (0.3, 0.3)), BE)
    assert check_even_symmetry(dyn).passed
    assert check_even_symmetry(run(DampedWave(8, 1.0, None), CN)).value == 0.0


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("scheme", [BE, CN])
def test_wave_energy_non_increasing(alpha, scheme):
    tr = run(DampedWave(32, alpha, lambda x: np.cos(np.pi * x), lambda x: np.sin(np.pi * x)), scheme)
    r = check_energy(tr)
    assert r.passed
    assert tr.energy()[-1] < tr.energy()[0]


def test_complex_damping_is_reported():
    tr = run(DampedWave(16, complex(1.0, 0.5), lambda x: np.cos(np.pi * x)), CN)
    assert np.iscomplexobj(tr.states)
    assert check_energy(tr).status == "reported"
