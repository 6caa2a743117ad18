"""Time integration of discretized form semigroups and qualitative probes.

Every scenario reduces to a linear system G z' = -A z with constant sparse
matrices; steppers factor their step matrix once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InputError, MeshMismatch, SingularStepMatrix, UnstableStep
from .forms import FormMatrix
from .graph import Graph, from_edges
from .mesh import AssembledSystem, EdgeMesh, build, interpolate
from .symmetry import Subspace, discrete_projection, projection_matrix

SCHEMES = ("backward_euler", "crank_nicolson")
INV_CONSTANT = 50.0
UNSTABLE_NORM = 1e12

Profile = Union[Callable[[np.ndarray], np.ndarray], Sequence[float], np.ndarray, None]


@dataclass(frozen=True)
class Stepper:
    scheme: str = "backward_euler"
    dt: float = 1e-3
    T: float = 0.1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise InputError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if not (self.dt > 0) or not np.isfinite(self.dt):
            raise InputError(f"time step must be positive, got {self.dt}")
        if not (self.T >= self.dt):
            raise InputError(f"final time {self.T} is shorter than the step {self.dt}")

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))


def interval_graph() -> Graph:
    """[0, 1] as a single edge with vertex x0 at x = 0 and x1 at x = 1."""
    return from_edges([("x1", "x0")], vertices=["x0", "x1"])


def _profile(mesh: EdgeMesh, f: Profile) -> np.ndarray:
    x = mesh.points
    if f is None:
        return np.zeros_like(x)
    if callable(f):
        return np.broadcast_to(np.asarray(f(x)), x.shape).astype(np.result_type(f(x), float))
    arr = np.asarray(f)
    if arr.shape != x.shape:
        raise InputError(f"profile needs {x.size} samples, got {arr.shape}")
    return arr


# -- scenarios -------------------------------------------------------------------
@dataclass
class NetworkHeat:
    """u' = A u for the network form with coupling C and node matrix M."""

    graph: Graph
    n: int
    initial: np.ndarray
    C: object = None
    M: object = None
    lumped: bool | None = None
    kind: str = field(default="network_heat", init=False)

    @cached_property
    def system(self) -> AssembledSystem:
        return build(self.graph, EdgeMesh(self.n), self.C, self.M)

    @property
    def mesh(self) -> EdgeMesh:
        return self.system.mesh

    def mass_matrix(self, scheme: str) -> sp.csr_matrix:
        lumped = self.lumped if self.lumped is not None else scheme == "backward_euler"
        return self.system.lumped if lumped else self.system.mass

    def operators(self, scheme: str):
        return self.mass_matrix(scheme), self.system.stiffness

    def initial_state(self) -> np.ndarray:
        u0 = np.asarray(self.initial)
        if u0.shape != (self.system.n_dofs,):
            raise InputError(f"initial state must have {self.system.n_dofs} dofs, got {u0.shape}")
        return u0


@dataclass
class DampedWave:
    """u'' = Laplace(alpha u + u') on [0, 1] with Neumann conditions.

    State z = (u, v) with v = u'; the block operator is [[0, I], [alpha Lap, Lap]].
    """

    n: int
    alpha: complex
    u0: Profile
    v0: Profile = None
    lumped: bool = False
    kind: str = field(default="damped_wave", init=False)

    @cached_property
    def system(self) -> AssembledSystem:
        return build(interval_graph(), EdgeMesh(self.n))

    @property
    def mesh(self) -> EdgeMesh:
        return self.system.mesh

    def field_mass(self) -> sp.csr_matrix:
        return self.system.lumped if self.lumped else self.system.mass

    def operators(self, scheme: str):
        Mm = self.field_mass()
        K = self.system.laplacian
        G = sp.block_diag([Mm, Mm], format="csr")
        A = sp.bmat([[None, -Mm], [self.alpha * K, K]], format="csr")
        return G, A

    def initial_state(self) -> np.ndarray:
        g = interval_graph()
        u = interpolate(g, self.mesh, [_profile(self.mesh, self.u0)])
        v = interpolate(g, self.mesh, [_profile(self.mesh, self.v0)])
        return np.concatenate([u, v])

    def energy(self, z: np.ndarray) -> float:
        N = self.system.n_dofs
        u, v = z[:N], z[N:]
        K = self.system.laplacian
        return float((np.vdot(v, self.field_mass() @ v) + self.alpha * np.vdot(u, K @ u)).real)


@dataclass
class DynamicBC:
    """Heat equation on [0, 1] whose outward flux is a boundary state w.

    u' = u'' inside, du/dnu = w and w' = u at the two boundary points.  With
    ``coupled=False`` the boundary terms vanish (Neumann heat, frozen w).
    """

    n: int
    u0: Profile
    w0: Sequence[float] = (0.0, 0.0)
    coupled: bool = True
    lumped: bool = True
    kind: str = field(default="dynamic_bc", init=False)

    @cached_property
    def system(self) -> AssembledSystem:
        return build(interval_graph(), EdgeMesh(self.n))

    @property
    def mesh(self) -> EdgeMesh:
        return self.system.mesh

    def trace(self) -> sp.csr_matrix:
        N = self.system.n_dofs
        return sp.csr_matrix((np.ones(2), ([0, 1], [0, 1])), shape=(2, N))

    def form_matrix(self) -> FormMatrix:
        K = self.system.laplacian.toarray()
        Tr = self.trace().toarray() * (1.0 if self.coupled else 0.0)
        H = (self.system.lumped if self.lumped else self.system.mass).toarray()
        return FormMatrix(
            [[K, -Tr.T], [-Tr, np.zeros((2, 2))]],
            [self.system.h1_gram.toarray(), np.eye(2)],
            [H, np.eye(2)],
        )

    def operators(self, scheme: str):
        H = self.system.lumped if self.lumped else self.system.mass
        G = sp.block_diag([H, sp.identity(2)], format="csr")
        A = sp.csr_matrix(self.form_matrix().full())
        return G, A

    def initial_state(self) -> np.ndarray:
        u = interpolate(interval_graph(), self.mesh, [_profile(self.mesh, self.u0)])
        return np.concatenate([u, np.asarray(self.w0, dtype=u.dtype)])


Scenario = Union[NetworkHeat, DampedWave, DynamicBC]


# -- integration ------------------------------------------------------------------
@dataclass
class Trajectory:
    scenario: Scenario
    stepper: Stepper
    times: np.ndarray
    states: np.ndarray
    gram: sp.csr_matrix

    @property
    def initial(self) -> np.ndarray:
        return self.states[0]

    def norm(self, z: np.ndarray) -> float:
        return float(np.sqrt(abs(np.vdot(z, self.gram @ z))))

    def norms(self) -> np.ndarray:
        return np.array([self.norm(z) for z in self.states])

    def mass(self) -> np.ndarray:
        one = np.ones(self.states.shape[1])
        return self.states @ (self.gram @ one)

    def minimum(self) -> np.ndarray:
        return self.states.real.min(axis=1)

    def sup_norm(self) -> np.ndarray:
        return np.abs(self.states).max(axis=1)

    def energy(self) -> np.ndarray:
        if not isinstance(self.scenario, DampedWave):
            raise InputError("energy is defined for the damped wave scenario")
        return np.array([self.scenario.energy(z) for z in self.states])


def run(scenario: Scenario, stepper: Stepper, record_every: int = 1) -> Trajectory:
    G, A = scenario.operators(stepper.scheme)
    dt = stepper.dt
    if stepper.scheme == "backward_euler":
        lhs, rhs = G + dt * A, G
    else:
        lhs, rhs = G + (dt / 2) * A, G - (dt / 2) * A
    try:
        lu = spla.splu(sp.csc_matrix(lhs))
    except RuntimeError as exc:
        raise SingularStepMatrix(str(exc)) from None
    rhs = sp.csr_matrix(rhs)
    z = np.asarray(scenario.initial_state())
    if np.iscomplexobj(lhs.data) and not np.iscomplexobj(z):
        z = z.astype(complex)
    times, states = [0.0], [z.copy()]
    for k in range(1, stepper.steps + 1):
        z = lu.solve(rhs @ z)
        if not np.all(np.isfinite(z)) or np.abs(z).max(initial=0.0) > UNSTABLE_NORM:
            raise UnstableStep(f"state norm exceeded {UNSTABLE_NORM:g} at step {k}")
        if k % record_every == 0 or k == stepper.steps:
            times.append(k * dt)
            states.append(z.copy())
    return Trajectory(scenario, stepper, np.array(times), np.array(states), sp.csr_matrix(G))


# -- probes -----------------------------------------------------------------------
@dataclass(frozen=True)
class ProbeResult:
    name: str
    status: str
    value: float | None
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return {"status": self.status, "value": self.value, **self.detail}


def tol_inv(traj: Trajectory) -> float:
    h = traj.scenario.mesh.h
    return INV_CONSTANT * (h**2 + traj.stepper.dt**2) * traj.norm(traj.initial)


def decay_rate(traj: Trajectory, expected: float | None = None) -> ProbeResult:
    norms = traj.norms()
    T = traj.times[-1]
    rate = float(-np.log(norms[-1] / norms[0]) / T) if norms[0] > 0 and norms[-1] > 0 else float("nan")
    if expected is None:
        return ProbeResult("decay_rate", "reported", rate)
    err = abs(rate - expected) / abs(expected)
    return ProbeResult(
        "decay_rate", "pass" if err < 0.01 else "fail", rate, {"expected": expected, "relative_error": err}
    )


def check_subspace_invariance(traj: Trajectory, Y: Subspace) -> ProbeResult:
    sc = traj.scenario
    if not isinstance(sc, NetworkHeat):
        return ProbeResult("invariance", "not_applicable", None)
    P = projection_matrix(sc.graph, Y)
    Ph = discrete_projection(sc.system, P)
    curve = np.array([traj.norm(z - Ph @ z) for z in traj.states])
    tol = tol_inv(traj)
    value = float(curve.max())
    return ProbeResult(
        "invariance",
        "pass" if value <= tol else "fail",
        value,
        {"tol_inv": tol, "initial_residual": float(curve[0]), "curve": curve.tolist()},
    )


def check_positivity(traj: Trajectory) -> ProbeResult:
    z0 = traj.initial
    if np.iscomplexobj(z0) and np.any(z0.imag) or np.any(z0.real < 0):
        return ProbeResult("positivity", "skipped", None, {"reason": "initial data not nonnegative"})
    value = float(traj.minimum().min())
    return ProbeResult("positivity", "pass" if value >= -1e-12 else "fail", value)


def check_mass(traj: Trajectory) -> ProbeResult:
    sc = traj.scenario
    if not isinstance(sc, NetworkHeat) or sc.graph.flagged.any() or np.any(sc.system.node_matrix):
        return ProbeResult("mass", "not_applicable", None)
    L = sc.system.lumped
    one = np.ones(sc.system.n_dofs)
    mass = traj.states @ (L @ one)
    drift = float(np.abs(mass - mass[0]).max())
    bound = 1e-10 * traj.norm(traj.initial)
    return ProbeResult("mass", "pass" if drift <= bound else "fail", drift)


def check_Linf(traj: Trajectory) -> ProbeResult:
    sup = traj.sup_norm()
    curve = sup / sup[0] if sup[0] > 0 else np.zeros_like(sup)
    value = float(curve.max())
    if isinstance(traj.scenario, NetworkHeat):
        status = "pass" if value <= 1 + 1e-9 else "fail"
    else:
        status = "reported"
    return ProbeResult("linf", status, value, {"curve": curve.tolist()})


def check_domination(traj_a: Trajectory, traj_b: Trajectory) -> ProbeResult:
    if traj_a.states.shape != traj_b.states.shape or not np.allclose(traj_a.times, traj_b.times):
        raise MeshMismatch("trajectories use different meshes or time grids")
    violation = float((np.abs(traj_b.states) - traj_a.states.real).max())
    return ProbeResult("domination", "pass" if violation <= 1e-9 else "fail", violation)


def _reflection(sc: Scenario) -> np.ndarray:
    """Dof permutation for x -> 1 - x on the single-edge scenarios."""
    nodes = sc.system.dofs.nodes
    if nodes.shape[0] != 1:
        raise InputError("even symmetry is defined for single-edge scenarios")
    row = nodes[0]
    N = sc.system.n_dofs
    perm = np.arange(N)
    valid = row >= 0
    perm[row[valid]] = row[::-1][valid]
    if isinstance(sc, DampedWave):
        return np.concatenate([perm, perm + N])
    if isinstance(sc, DynamicBC):
        return np.concatenate([perm, [N + 1, N]])
    return perm


def check_even_symmetry(traj: Trajectory) -> ProbeResult:
    perm = _reflection(traj.scenario)
    curve = np.array([traj.norm(z - z[perm]) for z in traj.states])
    value = float(curve.max())
    tol = tol_inv(traj)
    even0 = curve[0] <= tol
    status = ("pass" if value <= tol else "fail") if even0 else "reported"
    return ProbeResult("even_symmetry", status, value, {"tol_inv": tol})


def check_energy(traj: Trajectory) -> ProbeResult:
    E = traj.energy()
    alpha = complex(traj.scenario.alpha)
    increase = float(np.diff(E).max(initial=0.0))
    if alpha.imag != 0 or alpha.real <= 0:
        return ProbeResult("energy", "reported", increase, {"curve": E.tolist()})
    ok = increase <= 1e-12 * max(E[0], 1e-300)
    return ProbeResult("energy", "pass" if ok else "fail", increase, {"curve": E.tolist()})


def find_linf_violation(
    n: int, stepper: Stepper, seed: int = 0, tries: int = 20, threshold: float = 1e-3
) -> tuple[bool, float, DynamicBC | None]:
    """Search for data in the unit ball of L-infinity that leaves it."""
    rng = np.random.default_rng(seed)
    candidates = [DynamicBC(n, lambda x: np.ones_like(x), (1.0, 1.0))]
    for _ in range(tries):
        c = rng.uniform(-1, 1, 3)
        w = rng.uniform(-1, 1, 2)
        candidates.append(
            DynamicBC(n, lambda x, c=c: np.clip(c[0] + c[1] * x + c[2] * x**2, -1, 1), tuple(w))
        )
    best, best_sc = 0.0, None
    for sc in candidates:
        traj = run(sc, stepper)
        sup = traj.sup_norm()
        ratio = float(sup.max() / sup[0]) if sup[0] > 0 else 0.0
        if ratio > best:
            best, best_sc = ratio, sc
        if ratio > 1 + threshold:
            return True, ratio, sc
    return False, best, best_sc
