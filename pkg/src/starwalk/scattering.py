"""Vertex boundary matrices, on-shell scattering matrices and the sticky
bound state / time delay.

Process S-matrices have the rank-one structure ``S = 2 phi P - I`` with
``P = 1 w^T`` (so ``P^2 = P``); ``phi`` is the only regime-dependent piece.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import ProcessParams, Regime
from .errors import DomainError, PoleError, ValidationError

RANK_TOL = 1e-10
POLE_COND = 1e12


@dataclass(frozen=True)
class BoundaryMatrices:
    """Pair ``(A, B)`` encoding the vertex condition ``A F + B F' = 0``."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A))
        B = np.atleast_2d(np.asarray(self.B))
        if A.shape != B.shape or A.shape[0] != A.shape[1]:
            raise ValidationError(f"A and B must be equal square matrices, got {A.shape}, {B.shape}")
        n = A.shape[0]
        sv = np.linalg.svd(np.hstack([A, B]), compute_uv=False)
        if sv[0] == 0.0 or np.sum(sv > RANK_TOL * sv[0]) < n:
            raise ValidationError("rank (A, B) = n violated")
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def is_hermitian_pair(self, tol: float = 1e-12) -> bool:
        """Diagnostic: is ``A B^dagger`` hermitian?"""
        m = self.A @ self.B.conj().T
        return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)

    def scaled(self, C) -> "BoundaryMatrices":
        C = np.asarray(C)
        return BoundaryMatrices(C @ self.A, C @ self.B)


@dataclass(frozen=True)
class SMatrix:
    entries: np.ndarray
    spectral_param: float
    regime: Regime | None = None
    ab: BoundaryMatrices | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def det(self):
        return np.linalg.det(self.entries)

    def involution_residual(self) -> float:
        e = self.entries
        return float(np.max(np.abs(e @ e - np.eye(self.n))))


def _solve_guarded(M, R, where: str):
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > POLE_COND:
        raise PoleError(f"{where}: matrix condition number {cond:.3g} exceeds {POLE_COND:.0e}")
    return np.linalg.solve(M, R)


def onshell(ab: BoundaryMatrices, E: float) -> SMatrix:
    """``S_{A,B}(E) = -(A + i sqrt(E) B)^{-1} (A - i sqrt(E) B)``.

    For ``E < 0`` the resolvent-axis substitution ``i sqrt(E) = sqrt(-E)``
    keeps everything real; ``E = -2 lam`` gives the process matrices.
    """
    if E == 0.0 or not math.isfinite(E):
        raise DomainError("E finite and nonzero violated")
    if E < 0.0:
        p = math.sqrt(-E)
        A, B = ab.A.astype(float), ab.B.astype(float)
    else:
        p = 1j * math.sqrt(E)
        A, B = ab.A.astype(complex), ab.B.astype(complex)
    S = -_solve_guarded(A + p * B, A - p * B, f"S_(A,B)({E})")
    return SMatrix(S, E, None, ab)


def phi(params: ProcessParams, lam: float) -> float:
    """Regime factor: ``sqrt(2 lam) / (beta + sqrt(2 lam) + gamma lam)``."""
    if not lam > 0.0:
        raise DomainError("lambda > 0 violated")
    s = math.sqrt(2.0 * lam)
    return s / (params.beta + s + params.gamma * lam)


def _rank_one(w: np.ndarray, f) -> np.ndarray:
    n = len(w)
    return 2.0 * f * np.outer(np.ones(n), w) - np.eye(n)


def process_smatrix(params: ProcessParams, lam: float) -> SMatrix:
    """``S_km(lam) = 2 phi(lam) w_m - delta_km``."""
    if params.regime is Regime.ABSORBED_KILLED:
        raise ValidationError("no scattering matrix for the absorbed regime (b = 0)")
    return SMatrix(_rank_one(params.weights, phi(params, lam)), lam, params.regime)


def _walsh_like(w: np.ndarray, beta: float) -> BoundaryMatrices:
    n = len(w)
    A = np.zeros((n, n))
    for i in range(1, n):
        A[i, i - 1] = 1.0
        A[i, i] = -1.0
    A[0, n - 1] += beta
    B = np.zeros((n, n))
    B[0, :] = w
    return BoundaryMatrices(A, B)


def boundary_matrices(params: ProcessParams, lam0: float = 1.0) -> BoundaryMatrices:
    """Boundary matrices whose on-shell S-matrix is the process S-matrix.

    Walsh and Elastic: the explicit continuity-plus-flux matrices, valid for
    every ``lam``.  Sticky and General conditions involve ``f''`` and so
    depend on energy; there the pair is built from ``S0 = S(lam0)`` as
    ``A = -(S0 - I)/2``, ``B = (S0 + I)/(2 sqrt(2 lam0))``, which
    reproduces ``S(lam0)`` at ``E = -2 lam0``.
    """
    w = params.weights
    if params.regime is Regime.ABSORBED_KILLED:
        raise ValidationError("no boundary matrices for the absorbed regime (b = 0)")
    if params.regime is Regime.WALSH:
        return _walsh_like(w, 0.0)
    if params.regime is Regime.ELASTIC:
        return _walsh_like(w, params.beta)
    if not lam0 > 0.0:
        raise DomainError("lambda0 > 0 violated")
    s = math.sqrt(2.0 * lam0)
    if s + params.gamma * lam0 == 0.0:
        raise ValidationError("sqrt(2 lam0) + gamma lam0 != 0 violated")
    S0 = process_smatrix(params, lam0).entries
    I = np.eye(params.n_edges)
    return BoundaryMatrices(-0.5 * (S0 - I), (S0 + I) / (2.0 * s))


def sticky_smatrix_k(gamma: float, w, k: complex) -> np.ndarray:
    """Sticky S-matrix continued to real wavenumber ``k`` (``E = k^2``):
    ``phi(k) = 2i / (2i - gamma k)``."""
    w = np.asarray(w, dtype=float)
    f = 2j / (2j - gamma * k)
    n = len(w)
    return 2.0 * f * np.outer(np.ones(n), w) - np.eye(n)


def time_delay_matrix(gamma: float, w, k: float) -> np.ndarray:
    """``(2ik)^{-1} S(k)^{-1} dS/dk`` for the sticky vertex (closed form)."""
    w = np.asarray(w, dtype=float)
    n = len(w)
    S = sticky_smatrix_k(gamma, w, k)
    dphi = 2j * gamma / (2j - gamma * k) ** 2
    dS = 2.0 * dphi * np.outer(np.ones(n), w)
    return np.linalg.solve(S, dS) / (2j * k)


@dataclass(frozen=True)
class StickySpectrum:
    energy: float
    psi: Callable = field(repr=False)
    time_delay_eigenvalue: float
    n: int
    gamma: float

    def time_delay_spectrum(self) -> np.ndarray:
        """All eigenvalues: the nonzero one once, then ``n - 1`` zeros."""
        return np.array([self.time_delay_eigenvalue] + [0.0] * (self.n - 1))


def sticky_spectral(gamma: float, n: int, k: float) -> StickySpectrum:
    """Bound state and time delay of the sticky vertex with equal weights.

    ``E_b = -4/gamma^2`` with normalized eigenfunction
    ``psi_b = (2/sqrt(n gamma)) exp(-2 d(v, xi)/gamma)``.
    """
    if not gamma > 0.0:
        raise DomainError("gamma > 0 violated")
    if n < 1:
        raise DomainError("n >= 1 violated")
    if not k > 0.0:
        raise DomainError("k > 0 violated")
    amp = 2.0 / math.sqrt(n * gamma)

    def psi(x):
        return amp * np.exp(-2.0 * np.asarray(x, dtype=float) / gamma)

    T = -2.0 * gamma / (k * (4.0 + k * k * gamma * gamma))
    return StickySpectrum(-4.0 / gamma ** 2, psi, T, n, gamma)


def bound_state_pole(gamma: float) -> complex:
    """Wavenumber of the bound state, ``k_b = 2i/gamma`` (pole of ``phi(k)``)."""
    return cmath.sqrt(-4.0 / gamma ** 2)
