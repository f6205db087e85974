import math

import numpy as np
import pytest
from scipy import integrate

from starwalk.core import ProcessParams, Regime
from starwalk.errors import DomainError, PoleError, ValidationError
from starwalk.scattering import (BoundaryMatrices, boundary_matrices, bound_state_pole,
                                 onshell, phi, process_smatrix, sticky_smatrix_k,
                                 sticky_spectral, time_delay_matrix)


def test_walsh_example_matrix():
    S = process_smatrix(ProcessParams.walsh((1.0, 0.0, 0.0)), 1.0)
    assert np.allclose(S.entries, [[1, 0, 0], [2, -1, 0], [2, 0, -1]], atol=1e-15)
    assert S.det() == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("n", [1, 2, 4, 6])
def test_involution_and_determinant(n):
    rng = np.random.default_rng(n)
    for _ in range(20):
        w = rng.dirichlet(np.ones(n))
        S = process_smatrix(ProcessParams.walsh(tuple(w)), 0.5)
        assert S.involution_residual() <= 1e-12
        assert S.det() == pytest.approx((-1.0) ** (n - 1), abs=1e-10)


def test_phi_regimes():
    w = (0.5, 0.5)
    assert phi(ProcessParams.walsh(w), 3.0) == 1.0
    assert phi(ProcessParams.elastic(w, 1.0), 0.5) == pytest.approx(0.5)
    assert phi(ProcessParams.sticky(w, 2.0), 2.0) == pytest.approx(2.0 / 6.0)
    with pytest.raises(DomainError):
        phi(ProcessParams.walsh(w), 0.0)
    with pytest.raises(ValidationError):
        process_smatrix(ProcessParams.absorbed(2, 1.0), 1.0)


@pytest.mark.parametrize("params", [
    ProcessParams.walsh((0.2, 0.3, 0.5)),
    ProcessParams.elastic((0.2, 0.3, 0.5), 1.5),
])
@pytest.mark.parametrize("lam", [0.1, 1.0, 10.0])
def test_boundary_pair_round_trip_all_energies(params, lam):
    ab = boundary_matrices(params)
    S = onshell(ab, -2.0 * lam)
    assert np.allclose(S.entries, process_smatrix(params, lam).entries, atol=1e-12)


@pytest.mark.parametrize("params", [
    ProcessParams.sticky((0.2, 0.8), 0.7),
    ProcessParams.general((0.2, 0.8), 0.4, 0.7),
])
def test_boundary_pair_round_trip_reference_energy(params):
    ab = boundary_matrices(params, lam0=2.0)
    S = onshell(ab, -4.0)
    assert np.allclose(S.entries, process_smatrix(params, 2.0).entries, atol=1e-12)


def test_onshell_invariant_under_left_multiplication():
    ab = boundary_matrices(ProcessParams.walsh((0.3, 0.7)))
    C = np.array([[2.0, 1.0], [0.5, 3.0]])
    for E in (-1.0, 2.0):
        assert np.allclose(onshell(ab, E).entries, onshell(ab.scaled(C), E).entries,
                           atol=1e-12)


def test_real_energy_unitary_for_hermitian_pair():
    ab = boundary_matrices(ProcessParams.walsh((0.5, 0.5)))
    S = onshell(ab, 3.0).entries
    assert np.allclose(S.conj().T @ S, np.eye(2), atol=1e-12)


def test_boundary_matrix_errors():
    with pytest.raises(ValidationError):
        BoundaryMatrices(np.zeros((2, 2)), np.zeros((2, 2)))
    with pytest.raises(ValidationError):
        BoundaryMatrices(np.eye(2), np.eye(3))
    with pytest.raises(DomainError):
        onshell(boundary_matrices(ProcessParams.walsh((1.0,))), 0.0)
    # A + p B singular at p = 1
    with pytest.raises(PoleError):
        onshell(BoundaryMatrices(-np.eye(1), np.eye(1)), -1.0)


def test_regime_limits():
    w = (0.25, 0.75)
    for lam in (0.1, 1.0, 10.0):
        ref = process_smatrix(ProcessParams.walsh(w), lam).entries
        near = process_smatrix(ProcessParams.general(w, 1e-12, 1e-12), lam).entries
        assert np.max(np.abs(ref - near)) <= 1e-10
    assert process_smatrix(ProcessParams.walsh(w), 1.0).regime is Regime.WALSH


def test_sticky_bound_state():
    gamma, n = 0.8, 3
    sp = sticky_spectral(gamma, n, k=1.3)
    assert sp.energy == pytest.approx(-4.0 / gamma ** 2, rel=1e-15)
    norm = n * integrate.quad(lambda x: float(sp.psi(x)) ** 2, 0.0, np.inf)[0]
    assert norm == pytest.approx(1.0, abs=1e-10)
    kb = bound_state_pole(gamma)
    assert kb == pytest.approx(2j / gamma)
    assert abs(2j - gamma * kb) < 1e-14   # pole of the k-form factor
    # psi solves -psi'' = E psi on each edge
    h, x = 1e-4, 0.5
    d2 = (sp.psi(x + h) - 2 * sp.psi(x) + sp.psi(x - h)) / h ** 2
    assert -d2 == pytest.approx(sp.energy * sp.psi(x), rel=1e-6)


def test_time_delay():
    gamma, n, k = 0.6, 4, 1.7
    w = np.full(n, 1.0 / n)
    ev = np.linalg.eigvals(time_delay_matrix(gamma, w, k))
    sp = sticky_spectral(gamma, n, k)
    nonzero = ev[np.argmax(np.abs(ev))]
    assert nonzero.real == pytest.approx(sp.time_delay_eigenvalue, rel=1e-10)
    assert abs(nonzero.imag) < 1e-12
    assert np.sort(np.abs(ev))[:-1] == pytest.approx(np.zeros(n - 1), abs=1e-12)
    assert len(sp.time_delay_spectrum()) == n
    # k-form S-matrix is unitary for real k
    S = sticky_smatrix_k(gamma, w, k)
    assert np.allclose(S.conj().T @ S, np.eye(n), atol=1e-12)
    with pytest.raises(DomainError):
        sticky_spectral(0.0, 2, 1.0)
    assert math.isfinite(sp.time_delay_eigenvalue)
