"""Finite block matrices of sesquilinear forms.

A form matrix stores blocks A[i][j] with a(psi, phi) = sum_ij phi_i^H A[i][j] psi_j
together with Gram matrices of the V- and H-inner products of every block.
All bounds are computed after whitening by Cholesky factors of the Gram
matrices, which turns statements about V- and H-norms into plain spectral
statements.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize

from .errors import (
    DiagonalNotCoercive,
    EmptySamples,
    IndexSetTooLarge,
    NonDiagonalGram,
    ShapeMismatch,
    SingularGram,
)

T_GRID = (0.01, 0.1, 1.0)


def _sym(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2


def _lmin(a: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(_sym(a))[0])


def _cholesky(g: np.ndarray) -> np.ndarray:
    g = np.asarray(g)
    if not np.allclose(g, g.conj().T, atol=1e-12 * max(1.0, np.abs(g).max(initial=0.0))):
        raise SingularGram("Gram matrix is not symmetric")
    try:
        return np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise SingularGram("Gram matrix is not positive definite") from None


@dataclass
class FormMatrix:
    blocks: list[list[np.ndarray]]
    gram_v: list[np.ndarray]
    gram_h: list[np.ndarray]

    def __post_init__(self):
        k = len(self.blocks)
        if k == 0 or len(self.gram_v) != k or len(self.gram_h) != k:
            raise ShapeMismatch("need one row of blocks and one Gram pair per index")
        self.blocks = [[np.atleast_2d(np.asarray(b)) for b in row] for row in self.blocks]
        self.gram_v = [np.atleast_2d(np.asarray(g)) for g in self.gram_v]
        self.gram_h = [np.atleast_2d(np.asarray(g)) for g in self.gram_h]
        dims = self.dims
        for i, row in enumerate(self.blocks):
            if len(row) != k:
                raise ShapeMismatch(f"block row {i} has {len(row)} entries, expected {k}")
            for j, b in enumerate(row):
                if b.shape != (dims[i], dims[j]):
                    raise ShapeMismatch(f"block ({i},{j}) has shape {b.shape}, expected {(dims[i], dims[j])}")
            if self.gram_h[i].shape != (dims[i], dims[i]):
                raise ShapeMismatch(f"H-Gram of block {i} has shape {self.gram_h[i].shape}")

    @property
    def size(self) -> int:
        return len(self.blocks)

    @property
    def dims(self) -> list[int]:
        return [g.shape[0] for g in self.gram_v]

    def full(self) -> np.ndarray:
        return np.block(self.blocks)

    @classmethod
    def from_full(
        cls,
        A: np.ndarray,
        dims: Sequence[int],
        gram_v: Sequence[np.ndarray] | None = None,
        gram_h: Sequence[np.ndarray] | None = None,
    ) -> FormMatrix:
        A = np.asarray(A)
        if sum(dims) != A.shape[0] or A.shape[0] != A.shape[1]:
            raise ShapeMismatch(f"dims {list(dims)} do not fit matrix of shape {A.shape}")
        cuts = np.concatenate([[0], np.cumsum(dims)])
        blocks = [
            [A[cuts[i]:cuts[i + 1], cuts[j]:cuts[j + 1]] for j in range(len(dims))]
            for i in range(len(dims))
        ]
        gv = list(gram_v) if gram_v is not None else [np.eye(d) for d in dims]
        gh = list(gram_h) if gram_h is not None else [np.eye(d) for d in dims]
        return cls(blocks, gv, gh)

    @classmethod
    def scalar(cls, A: np.ndarray) -> FormMatrix:
        """One-dimensional blocks with unit Gram matrices."""
        A = np.asarray(A)
        return cls.from_full(A, [1] * A.shape[0])

    @classmethod
    def from_json(cls, spec: Mapping) -> FormMatrix:
        from .mesh import _complex_rows

        dims = list(spec["dims"])
        A = _complex_rows(spec["rows"])
        gv = [_complex_rows(g) for g in spec["gram_v"]] if "gram_v" in spec else None
        gh = [_complex_rows(g) for g in spec["gram_h"]] if "gram_h" in spec else None
        return cls.from_full(A, dims, gv, gh)

    def restrict(self, index: Sequence[int]) -> FormMatrix:
        idx = list(index)
        return FormMatrix(
            [[self.blocks[i][j] for j in idx] for i in idx],
            [self.gram_v[i] for i in idx],
            [self.gram_h[i] for i in idx],
        )

    def transformed(self, unitaries: Sequence[np.ndarray]) -> FormMatrix:
        """Same form written in the bases given by the columns of each unitary."""
        U = list(unitaries)
        return FormMatrix(
            [[U[i].conj().T @ self.blocks[i][j] @ U[j] for j in range(self.size)] for i in range(self.size)],
            [U[i].conj().T @ g @ U[i] for i, g in enumerate(self.gram_v)],
            [U[i].conj().T @ g @ U[i] for i, g in enumerate(self.gram_h)],
        )

    def whitened(self, space: str = "V") -> np.ndarray:
        grams = self.gram_v if space == "V" else self.gram_h
        Linv = sla.block_diag(*[np.linalg.inv(_cholesky(g)) for g in grams])
        return Linv @ self.full() @ Linv.conj().T

    def whitened_blocks(self, space: str = "V") -> list[list[np.ndarray]]:
        W = self.whitened(space)
        cuts = np.concatenate([[0], np.cumsum(self.dims)])
        k = self.size
        return [[W[cuts[i]:cuts[i + 1], cuts[j]:cuts[j + 1]] for j in range(k)] for i in range(k)]

    def h_in_v(self) -> np.ndarray:
        """H-Gram expressed in V-whitened coordinates."""
        Linv = sla.block_diag(*[np.linalg.inv(_cholesky(g)) for g in self.gram_v])
        return Linv @ sla.block_diag(*self.gram_h) @ Linv.conj().T


# -- continuity and coercivity ---------------------------------------------------
@dataclass(frozen=True)
class ContinuityReport:
    block_norms: np.ndarray
    matrix_bound: float
    exact: float


def continuity_bound(fm: FormMatrix) -> ContinuityReport:
    Wb = fm.whitened_blocks()
    M = np.array([[np.linalg.norm(b, 2) for b in row] for row in Wb])
    bound = float(np.linalg.norm(M, 2))
    exact = float(np.linalg.norm(fm.whitened(), 2))
    if exact > bound * (1 + 1e-12) + 1e-14:
        raise ArithmeticError(f"exact bound {exact} exceeds block bound {bound}")
    return ContinuityReport(M, bound, exact)


@dataclass(frozen=True)
class CoercivityReport:
    exact: float
    sufficient: float | None
    diagonal: tuple[float, ...]

    @property
    def necessary_holds(self) -> bool:
        return self.exact <= min(self.diagonal) + 1e-12


def coercivity(fm: FormMatrix) -> CoercivityReport:
    """Exact constant, the block-norm sufficient constant, and diagonal constants."""
    Wb = fm.whitened_blocks()
    k = fm.size
    diag = tuple(_lmin(Wb[i][i]) for i in range(k))
    S = np.array(
        [[diag[i] if i == j else -np.linalg.norm(Wb[i][j], 2) for j in range(k)] for i in range(k)]
    )
    s = _lmin(S)
    return CoercivityReport(_lmin(fm.whitened()), s if s > 0 else None, diag)


@dataclass(frozen=True)
class RestrictionReport:
    alphas: dict[tuple[int, ...], float]
    full: float

    @property
    def minimum(self) -> float:
        return min(self.alphas.values())

    @property
    def monotone(self) -> bool:
        return all(a >= self.full - 1e-12 for a in self.alphas.values())


def restriction_coercivity(fm: FormMatrix) -> RestrictionReport:
    """Exact coercivity constant of every principal restriction."""
    k = fm.size
    if k > 12:
        raise IndexSetTooLarge(f"{k} blocks; power-set enumeration is limited to 12")
    W = fm.whitened()
    cuts = np.concatenate([[0], np.cumsum(fm.dims)])
    alphas = {}
    for r in range(1, k + 1):
        for subset in itertools.combinations(range(k), r):
            idx = np.concatenate([np.arange(cuts[i], cuts[i + 1]) for i in subset])
            alphas[subset] = _lmin(W[np.ix_(idx, idx)])
    return RestrictionReport(alphas, alphas[tuple(range(k))])


# -- the 2x2 criterion -------------------------------------------------------------
@dataclass(frozen=True)
class TwoByTwoReport:
    criterion: bool
    exact_coercive: bool
    criterion_alpha: float
    exact_alpha: float
    alphas: tuple[float, float]


def _balanced_ratio(W12, W21, a1, a2, z1, z2) -> float:
    """Inequality ratio at the balanced scaling sqrt(a1)|z1| = sqrt(a2)|z2|."""
    n1, n2 = np.linalg.norm(z1), np.linalg.norm(z2)
    cross = (np.vdot(z1, W12 @ z2) + np.vdot(z2, W21 @ z1)).real
    root = np.sqrt(a1 * a2)
    return 1.0 + cross / (2 * root * n1 * n2)


def two_by_two_criterion(fm: FormMatrix, samples: int = 400, seed: int = 0, tol: float = 1e-9) -> TwoByTwoReport:
    """Cross-term criterion for two blocks, evaluated by sampling and local search.

    With optimal diagonal constants a1, a2 the inequality
    Re a12(z2, z1) + Re a21(z1, z2) + 2 sqrt(a1 a2)|z1||z2| >= alpha (a1|z1|^2 + a2|z2|^2)
    is only scale-consistent after rescaling (z1, z2) to balanced norms
    sqrt(a1)|z1| = sqrt(a2)|z2|; pairs are evaluated there, with both
    components nonzero.  The criterion constant is the infimum of the ratio.
    """
    if fm.size != 2:
        raise ShapeMismatch("the 2x2 criterion needs exactly two blocks")
    (W11, W12), (W21, W22) = fm.whitened_blocks()
    a1, a2 = _lmin(W11), _lmin(W22)
    if a1 <= 0 or a2 <= 0:
        raise DiagonalNotCoercive(f"diagonal constants {a1:.3g}, {a2:.3g} are not positive")
    d1, d2 = fm.dims
    cplx = np.iscomplexobj(W12) or np.iscomplexobj(W21)
    rng = np.random.default_rng(seed)

    def unpack(x):
        if cplx:
            z = x[: d1 + d2] + 1j * x[d1 + d2:]
        else:
            z = x
        return z[:d1], z[d1:]

    def f(x):
        z1, z2 = unpack(x)
        if np.linalg.norm(z1) < 1e-12 or np.linalg.norm(z2) < 1e-12:
            return 2.0
        return _balanced_ratio(W12, W21, a1, a2, z1, z2)

    nvar = (d1 + d2) * (2 if cplx else 1)
    starts = rng.standard_normal((samples, nvar))
    vals = np.array([f(x) for x in starts])
    best = float(vals.min())
    for i in np.argsort(vals)[:5]:
        res = minimize(f, starts[i], method="BFGS", options={"gtol": 1e-12})
        best = min(best, float(res.fun))
    exact = _lmin(fm.whitened())
    return TwoByTwoReport(best > tol, exact > tol, best, exact, (a1, a2))


# -- ellipticity ----------------------------------------------------------------------
@dataclass(frozen=True)
class EllipticityReport:
    elliptic: bool
    alpha: float | None
    omega: float | None


def ellipticity(fm: FormMatrix, cap: float = 1e6, rtol: float = 1e-8) -> EllipticityReport:
    """Smallest shift omega >= 0 making Re a + omega |.|_H^2 coercive on V."""
    S = _sym(fm.whitened())
    H = fm.h_in_v()

    def pd(w: float) -> bool:
        try:
            np.linalg.cholesky(S + w * H)
            return True
        except np.linalg.LinAlgError:
            return False

    if pd(0.0):
        return EllipticityReport(True, _lmin(S), 0.0)
    lo, hi = 0.0, 1.0
    while not pd(hi):
        lo, hi = hi, 2 * hi
        if lo > cap:
            return EllipticityReport(False, None, None)
    while hi - lo > rtol * hi:
        mid = (lo + hi) / 2
        if pd(mid):
            hi = mid
        else:
            lo = mid
    if hi > cap:
        return EllipticityReport(False, None, None)
    return EllipticityReport(True, _lmin(S + hi * H), hi)


# -- positivity and domination ---------------------------------------------------------
def _h_generator(fm: FormMatrix) -> np.ndarray:
    for i, g in enumerate(fm.gram_h):
        if np.abs(g - np.diag(np.diag(g))).max(initial=0.0) > 0:
            raise NonDiagonalGram(f"H-Gram of block {i} is not diagonal")
    d = np.concatenate([np.diag(g).real for g in fm.gram_h])
    if np.any(d <= 0):
        raise SingularGram("H-Gram has non-positive diagonal")
    s = 1 / np.sqrt(d)
    return s[:, None] * fm.full() * s[None, :]


@dataclass(frozen=True)
class PositivityReport:
    criterion: bool
    empirical: bool
    worst_entry: float
    generator_violation: float


def positivity_criteria(fm: FormMatrix, t_grid: Sequence[float] = T_GRID) -> PositivityReport:
    """Generator sign test against the entries of exp(-t A) on a time grid."""
    A = _h_generator(fm)
    off = A - np.diag(np.diag(A))
    viol = max(float(off.real.max(initial=0.0)), float(np.abs(A.imag).max(initial=0.0)))
    criterion = viol <= 1e-12
    worst = np.inf
    for t in t_grid:
        S = sla.expm(-t * A)
        worst = min(worst, float(S.real.min()))
        if np.abs(S.imag).max(initial=0.0) > 1e-9:
            worst = min(worst, -float(np.abs(S.imag).max()))
    return PositivityReport(criterion, worst >= -1e-9, worst, viol)


@dataclass(frozen=True)
class DominationReport:
    criterion: bool
    empirical: bool
    violation: float
    a_positive: bool

    def __bool__(self) -> bool:
        return self.empirical


def domination_check(
    fm_a: FormMatrix,
    fm_b: FormMatrix,
    t_grid: Sequence[float] = T_GRID,
    seed: int = 0,
    vectors: int = 20,
) -> DominationReport:
    """Does exp(-tA) dominate exp(-tB), i.e. |exp(-tB) u| <= exp(-tA)|u|?"""
    if fm_a.dims != fm_b.dims:
        raise ShapeMismatch(f"block dimensions differ: {fm_a.dims} vs {fm_b.dims}")
    if any(not np.allclose(ga, gb) for ga, gb in zip(fm_a.gram_h, fm_b.gram_h)):
        raise ShapeMismatch("the two forms must share the H inner product")
    A = _h_generator(fm_a)
    B = _h_generator(fm_b)
    a_pos = positivity_criteria(fm_a, t_grid).criterion
    n = A.shape[0]
    off = ~np.eye(n, dtype=bool)
    crit = bool(
        np.all(np.diag(B).real >= np.diag(A).real - 1e-12)
        and np.all(np.abs(B[off]) <= -A[off].real + 1e-12)
    )
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((n, vectors))
    if np.iscomplexobj(B):
        U = U + 1j * rng.standard_normal((n, vectors))
    U = np.hstack([U, np.eye(n)])
    violation = 0.0
    for t in t_grid:
        Sa = sla.expm(-t * A)
        Sb = sla.expm(-t * B)
        violation = max(violation, float((np.abs(Sb @ U) - Sa.real @ np.abs(U)).max()))
    return DominationReport(crit, violation <= 1e-9, violation, a_pos)


# -- multiplication operators --------------------------------------------------------
@dataclass(frozen=True)
class FamilyBounds:
    sup_norm: float
    inf_coercivity: float


def multiplication_family_bounds(C_samples: Sequence[np.ndarray]) -> FamilyBounds:
    """Grid stand-ins for ess sup ||C(x)|| and ess inf of the coercivity of C(x)."""
    samples = [np.atleast_2d(np.asarray(c)) for c in C_samples]
    if not samples:
        raise EmptySamples("no coupling samples given")
    return FamilyBounds(
        max(float(np.linalg.norm(c, 2)) for c in samples),
        min(_lmin(c) for c in samples),
    )


def sample_family(C: Callable[[float], np.ndarray], points: int = 257) -> list[np.ndarray]:
    return [np.asarray(C(x)) for x in np.linspace(0.0, 1.0, points)]


def form_matrix_from_system(sys, lumped: bool = True) -> FormMatrix:
    """Single-block form matrix of an assembled network system."""
    H = sys.lumped if lumped else sys.mass
    return FormMatrix([[sys.stiffness.toarray()]], [sys.h1_gram.toarray()], [H.toarray()])
