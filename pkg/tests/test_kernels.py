import math

import mpmath as mp
import numpy as np
import pytest
from scipy import integrate

from starwalk.core import VERTEX, Interior, ProcessParams, StarGraph
from starwalk.errors import DomainError, ValidationError
from starwalk.kernels import (SpecialFnConfig, absorbed_atom, e_lambda, g_0gamma, g_beta0,
                              g_betagamma, gauss, hitting_density, log_g_0gamma, log_g_beta0,
                              point_density, resolvent, transition)
from starwalk.verify.numeric import laplace_transform

mp.mp.dps = 30

# frozen mpmath values (30 digits, rounded to double)
ORACLES = [
    (lambda: gauss(2.0, 1.0), 0.2196956447338612),
    (lambda: hitting_density(1.0, 1.0), 0.24197072451914335),
    (lambda: g_beta0(1.0, 0.0, 1.0), 0.1373639885363093),
    (lambda: g_0gamma(1.0, 0.0, 1.0), 0.336204002446341213),
    (lambda: g_betagamma(1.0, 0.5, 1.0, 1.0), 0.16840849612132858),
    (lambda: g_betagamma(0.25, 0.0, 2.0, 0.5), 0.37053661670587604),
    (lambda: g_betagamma(4.0, 1.5, 0.5, 2.0), 0.07109249436765449),
]


@pytest.mark.parametrize("fn,expected", ORACLES)
def test_frozen_oracles(fn, expected):
    assert fn() == pytest.approx(expected, rel=1e-10, abs=0.0)


def _mp_g_beta0(t, x, beta):
    t, x, beta = mp.mpf(t), mp.mpf(x), mp.mpf(beta)
    g = mp.exp(-x * x / (2 * t)) / mp.sqrt(2 * mp.pi * t)
    return g - beta / 2 * mp.exp(beta * x + beta ** 2 * t / 2) * mp.erfc(
        x / mp.sqrt(2 * t) + beta * mp.sqrt(t / 2))


def _mp_g_0gamma(t, x, gamma):
    t, x, gamma = mp.mpf(t), mp.mpf(x), mp.mpf(gamma)
    return mp.exp(2 * x / gamma + 2 * t / gamma ** 2) * mp.erfc(
        x / mp.sqrt(2 * t) + mp.sqrt(2 * t) / gamma) / gamma


GRID = [(t, x, p) for t in (0.01, 0.5, 1.0, 7.0) for x in (0.0, 0.3, 2.0)
        for p in (0.05, 1.0, 20.0, 1e3)]


@pytest.mark.parametrize("t,x,beta", GRID)
def test_g_beta0_against_mpmath(t, x, beta):
    ref = _mp_g_beta0(t, x, beta)
    got = g_beta0(t, x, beta)
    assert got > 0.0 or float(ref) < 1e-300
    assert got == pytest.approx(float(ref), rel=1e-10, abs=1e-300)


@pytest.mark.parametrize("t,x,gamma", GRID)
def test_g_0gamma_against_mpmath(t, x, gamma):
    ref = _mp_g_0gamma(t, x, gamma)
    assert g_0gamma(t, x, gamma) == pytest.approx(float(ref), rel=1e-10, abs=1e-300)


def test_g_beta0_huge_argument_underflows_cleanly():
    v = g_beta0(1.0, 50.0, 10.0)
    assert v == 0.0 and not math.isnan(v)
    assert log_g_beta0(1.0, 50.0, 10.0) == pytest.approx(-1251.1012045822157779, rel=1e-13)
    ref = mp.log(_mp_g_beta0(1.0, 50.0, 10.0))
    assert log_g_beta0(1.0, 50.0, 10.0) == pytest.approx(float(ref), rel=1e-12)


def test_log_forms_consistent():
    for t, x, p in [(0.5, 0.3, 2.0), (3.0, 1.0, 0.2), (1e-3, 0.01, 50.0)]:
        assert log_g_beta0(t, x, p) == pytest.approx(math.log(g_beta0(t, x, p)), rel=1e-12)
        assert log_g_0gamma(t, x, p) == pytest.approx(math.log(g_0gamma(t, x, p)), rel=1e-12)
    assert math.isfinite(log_g_0gamma(1.0, 60.0, 0.1))


def test_g_betagamma_against_defining_integral():
    t, x, beta, gamma = 2.0, 0.7, 0.8, 1.3

    def f(s):
        a = s + gamma * x
        return a / (t - s) ** 1.5 * mp.exp(-a * a / (2 * gamma ** 2 * (t - s)) - beta * s / gamma)
    ref = mp.quad(f, [0, t / 2, t]) / (gamma ** 2 * mp.sqrt(2 * mp.pi))
    assert g_betagamma(t, x, beta, gamma) == pytest.approx(float(ref), rel=1e-9)


@pytest.mark.parametrize("t,x", [(0.3, 0.0), (1.0, 0.5), (4.0, 2.0)])
def test_g_betagamma_limits(t, x):
    tiny = 1e-7
    assert g_betagamma(t, x, tiny, 0.7) == pytest.approx(g_0gamma(t, x, 0.7), rel=1e-5)
    assert g_betagamma(t, x, 0.7, tiny) == pytest.approx(g_beta0(t, x, 0.7), rel=1e-5)


def test_vectorized_matches_scalar():
    xs = np.array([0.0, 0.2, 1.5])
    assert np.allclose(g_beta0(1.0, xs, 2.0), [g_beta0(1.0, v, 2.0) for v in xs], rtol=1e-15)
    assert np.allclose(g_betagamma(1.0, xs, 0.5, 0.5),
                       [g_betagamma(1.0, v, 0.5, 0.5) for v in xs], rtol=1e-13)


def test_domain_errors():
    with pytest.raises(DomainError):
        gauss(0.0, 1.0)
    with pytest.raises(DomainError):
        g_beta0(1.0, -0.1, 1.0)
    with pytest.raises(DomainError):
        g_0gamma(1.0, 0.1, 0.0)
    with pytest.raises(DomainError):
        g_betagamma(1.0, 0.1, 0.0, 1.0)
    with pytest.raises(DomainError):
        e_lambda(0.0, 1.0)
    with pytest.raises(DomainError):
        SpecialFnConfig(quad_abs_tol=0.0)
    assert hitting_density(1.0, 0.0) == 0.0


PARAMS = {
    "walsh": ProcessParams.walsh((0.3, 0.7)),
    "elastic": ProcessParams.elastic((0.3, 0.7), 1.0),
    "sticky": ProcessParams.sticky((0.3, 0.7), 0.6),
    "general": ProcessParams.general((0.3, 0.7), 1.0, 0.6),
}


@pytest.mark.parametrize("name", PARAMS)
def test_positivity(name):
    p = PARAMS[name]
    g = StarGraph(2)
    for src in (VERTEX, Interior(1, 0.4)):
        K = transition(p, 0.7, src, g)
        assert K.atom >= 0.0
        for m in (1, 2):
            assert np.all(K.density(m, np.linspace(0.0, 6.0, 41)) >= 0.0)


def test_masses():
    g = StarGraph(2)
    src = Interior(2, 0.3)
    for name in ("walsh", "sticky"):
        assert transition(PARAMS[name], 1.3, src, g).total_mass() == pytest.approx(1.0, abs=1e-8)
    for name in ("elastic", "general"):
        m = [transition(PARAMS[name], t, src, g).total_mass() for t in (0.5, 1.0, 2.0)]
        assert 0.0 < m[2] < m[1] < m[0] < 1.0
    assert resolvent(PARAMS["walsh"], 0.8, src, g).total_mass() == pytest.approx(1 / 0.8,
                                                                                 rel=1e-8)
    assert resolvent(PARAMS["sticky"], 0.8, src, g).total_mass() == pytest.approx(1 / 0.8,
                                                                                  rel=1e-8)


def test_absorbed_kernel():
    p = ProcessParams.absorbed(3, 0.5)
    g = StarGraph(3)
    assert transition(p, 2.0, VERTEX, g).atom == pytest.approx(math.exp(-1.0), rel=1e-14)
    K = transition(p, 1.0, Interior(2, 0.5), g)
    assert K.density(1, 0.3) == 0.0 and K.density(3, 0.3) == 0.0
    assert K.density(2, 0.3) > 0.0
    assert 0.0 < K.total_mass() < 1.0
    # surviving mass = not yet absorbed + absorbed and still held
    ref = math.erf(0.5 / math.sqrt(2.0)) + absorbed_atom(1.0, 0.5, 0.5)
    assert K.total_mass() == pytest.approx(ref, abs=1e-9)


@pytest.mark.parametrize("name", PARAMS)
def test_detailed_balance(name):
    p = PARAMS[name]
    w = p.weights
    for (k, x), (m, y) in [((1, 0.3), (2, 1.1)), ((2, 0.5), (2, 0.2)), ((1, 0.0), (2, 0.9))]:
        kk = k if x > 0.0 else 0
        fwd = w[k - 1] * float(point_density(p, 0.8, kk, x, m, y))
        bwd = w[m - 1] * float(point_density(p, 0.8, m, y, kk, x) if kk else
                               point_density(p, 0.8, m, y, k, x))
        assert fwd == pytest.approx(bwd, rel=1e-12)


def _compose(p, lam, mu, src, m, y):
    """``(R_lam R_mu)(src, (m, y))`` including the vertex atom term."""
    g = StarGraph(p.n_edges)
    Rl = resolvent(p, lam, src, g)
    total = 0.0
    for j in range(1, p.n_edges + 1):
        def f(z, j=j):
            mid = VERTEX if z == 0.0 else Interior(j, z)
            return Rl.density(j, z) * resolvent(p, mu, mid, g).density(m, y)
        pts = sorted({v for v in (src.distance_to_vertex, y) if v > 0.0})
        val, _ = integrate.quad(f, 0.0, 40.0, points=pts, epsabs=1e-12, epsrel=1e-11,
                                limit=500)
        total += val
    return total + Rl.atom * resolvent(p, mu, VERTEX, g).density(m, y)


@pytest.mark.parametrize("name", ["walsh", "sticky", "general"])
def test_resolvent_identity(name):
    p = PARAMS[name]
    g = StarGraph(2)
    lam, mu = 0.7, 1.9
    src = Interior(1, 0.4)
    for m, y in [(1, 0.9), (2, 0.3)]:
        lhs = resolvent(p, lam, src, g).density(m, y) - resolvent(p, mu, src, g).density(m, y)
        rhs = (mu - lam) * _compose(p, lam, mu, src, m, y)
        assert lhs == pytest.approx(rhs, abs=1e-9)


@pytest.mark.parametrize("name", ["sticky", "general"])
def test_transition_laplace_is_resolvent(name):
    p = PARAMS[name]
    g = StarGraph(2)
    lam, x, y = 1.2, 0.4, 0.6
    target = resolvent(p, lam, Interior(1, x), g).density(2, y)
    val, _, tail = laplace_transform(lambda t: float(point_density(p, t, 1, x, 2, y)), lam,
                                     target, lambda T: 2.0 / p.gamma, rtol=1e-8)
    assert val == pytest.approx(target, rel=1e-7)
    atom_target = resolvent(p, lam, Interior(1, x), g).atom
    val, _, _ = laplace_transform(lambda t: transition(p, t, Interior(1, x), g).atom, lam,
                                  atom_target, lambda T: 1.0, rtol=1e-8)
    assert val == pytest.approx(atom_target, rel=1e-7)


def test_measure_errors():
    K = transition(PARAMS["walsh"], 1.0, VERTEX, StarGraph(2))
    with pytest.raises(ValidationError):
        K.density(3, 0.1)
    with pytest.raises(DomainError):
        K.density(1, -0.1)
    with pytest.raises(ValidationError):
        transition(PARAMS["walsh"], 1.0, VERTEX, StarGraph(3))
    with pytest.raises(DomainError):
        resolvent(PARAMS["walsh"], -1.0, VERTEX, StarGraph(2))
    assert K.mass_near_vertex(0.0) == 0.0
    assert 0.0 < K.mass_near_vertex(0.5) < 1.0
