"""Scalar heat-kernel building blocks on the half-line.

Everything with an ``exp(...) * erfc(...)`` product is evaluated through
``erfcx`` so that large ``beta * x`` or ``x / gamma`` cannot overflow.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from ..errors import DomainError, NumericalError

SQRT2PI = math.sqrt(2.0 * math.pi)
SQRTPI = math.sqrt(math.pi)


@dataclass(frozen=True)
class SpecialFnConfig:
    quad_abs_tol: float = 1e-10
    quad_max_subdiv: int = 2000
    quad_rel_tol: float = 1e-11

    def __post_init__(self):
        if not self.quad_abs_tol > 0.0:
            raise DomainError("quad_abs_tol > 0 violated")
        if self.quad_max_subdiv < 1:
            raise DomainError("quad_max_subdiv >= 1 violated")
        if not self.quad_rel_tol > 0.0:
            raise DomainError("quad_rel_tol > 0 violated")


DEFAULT_CONFIG = SpecialFnConfig()


def _check_time(t):
    if np.any(np.asarray(t) <= 0.0):
        raise DomainError("t > 0 violated")


def _check_nonneg(name, v):
    if np.any(np.asarray(v) < 0.0):
        raise DomainError(f"{name} >= 0 violated")


def _ret(v):
    return float(v) if np.ndim(v) == 0 else v


def gauss(t, x):
    """Gauss kernel ``exp(-x^2/2t) / sqrt(2 pi t)``."""
    _check_time(t)
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    return _ret(np.exp(-x * x / (2.0 * t)) / np.sqrt(2.0 * np.pi * t))


def hitting_density(t, d):
    """Density at ``t`` of the first time a Brownian motion started at
    distance ``d`` reaches the vertex.  Returns 0 for ``d == 0``, where the
    law is the unit atom at ``t = 0`` (see :func:`hitting_is_degenerate`)."""
    _check_time(t)
    _check_nonneg("d", d)
    t = np.asarray(t, dtype=float)
    d = np.asarray(d, dtype=float)
    return _ret(d / np.sqrt(2.0 * np.pi * t ** 3) * np.exp(-d * d / (2.0 * t)))


def hitting_is_degenerate(d) -> bool:
    return float(d) == 0.0


def e_lambda(lam, d):
    """Laplace transform of the hitting time: ``exp(-sqrt(2 lam) d)``."""
    if np.any(np.asarray(lam) <= 0.0):
        raise DomainError("lambda > 0 violated")
    _check_nonneg("d", d)
    return _ret(np.exp(-np.sqrt(2.0 * np.asarray(lam, dtype=float)) * np.asarray(d, dtype=float)))


def _one_minus_sqrtpi_y_erfcx(y, z):
    """``1 - sqrt(pi) * y * erfcx(z)`` for ``0 <= y <= z`` without cancellation.

    Written as ``q(z) + sqrt(pi) (z - y) erfcx(z)`` with
    ``q(z) = 1 - sqrt(pi) z erfcx(z)``; ``q`` uses its asymptotic series
    once ``z`` is large enough for the direct form to lose digits.
    """
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    q = np.empty(np.broadcast(y, z).shape)
    zb = np.broadcast_to(z, q.shape)
    big = zb >= 20.0
    small = ~big
    q[small] = 1.0 - SQRTPI * zb[small] * special.erfcx(zb[small])
    if np.any(big):
        u = 1.0 / (2.0 * zb[big] ** 2)
        # sqrt(pi) z erfcx(z) ~ sum_k (-1)^k (2k-1)!! u^k
        term = np.ones_like(u)
        acc = np.zeros_like(u)
        for k in range(1, 17):
            term = term * (-(2 * k - 1)) * u
            acc -= term
        q[big] = acc
    return q + SQRTPI * (zb - y) * special.erfcx(zb)


def g_beta0(t, x, beta):
    """Elastic heat kernel
    ``g(t,x) - (beta/2) exp(beta x + beta^2 t/2) erfc(x/sqrt(2t) + beta sqrt(t/2))``.

    Evaluated as ``g(t,x) * (1 - sqrt(pi) y erfcx(z))`` with
    ``y = beta sqrt(t/2)`` and ``z = x/sqrt(2t) + y``.
    """
    _check_time(t)
    _check_nonneg("x", x)
    _check_nonneg("beta", beta)
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    beta = np.asarray(beta, dtype=float)
    y = beta * np.sqrt(t / 2.0)
    z = x / np.sqrt(2.0 * t) + y
    g = np.exp(-x * x / (2.0 * t)) / np.sqrt(2.0 * np.pi * t)
    return _ret(g * _one_minus_sqrtpi_y_erfcx(y, z))


def g_0gamma(t, x, gamma):
    """Sticky heat kernel
    ``(1/gamma) exp(2x/gamma + 2t/gamma^2) erfc(x/sqrt(2t) + sqrt(2t)/gamma)``."""
    _check_time(t)
    _check_nonneg("x", x)
    if np.any(np.asarray(gamma) <= 0.0):
        raise DomainError("gamma > 0 violated")
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    z = x / np.sqrt(2.0 * t) + np.sqrt(2.0 * t) / gamma
    return _ret(special.erfcx(z) * np.exp(-x * x / (2.0 * t)) / gamma)


def _gbg_substituted(t, x, beta, gamma, cfg):
    # u = (s + gamma x) / (gamma sqrt(t - s)); q = sqrt(t - s) solves
    # q^2 + gamma u q - (t + gamma x) = 0 and s + gamma x = gamma u q.
    c = t + gamma * x
    u0 = x / math.sqrt(t)

    def f(u):
        q = 2.0 * c / (gamma * u + math.sqrt(gamma * gamma * u * u + 4.0 * c))
        return u / (q + 0.5 * gamma * u) * math.exp(-0.5 * u * u - beta * (u * q - x))

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        val, err = integrate.quad(f, u0, np.inf, epsabs=cfg.quad_abs_tol * SQRT2PI,
                                  epsrel=1e-12, limit=cfg.quad_max_subdiv)
    return val / SQRT2PI, err / SQRT2PI


def _gbg_direct(t, x, beta, gamma, cfg):
    def f(s):
        ts = t - s
        if ts <= 0.0:
            return 0.0
        a = s + gamma * x
        return (a / ts ** 1.5 * math.exp(-a * a / (2.0 * gamma * gamma * ts))
                * math.exp(-beta * s / gamma))

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        val, err = integrate.quad(f, 0.0, t, epsabs=cfg.quad_abs_tol * gamma ** 2 * SQRT2PI,
                                  epsrel=1e-12, limit=cfg.quad_max_subdiv)
    scale = 1.0 / (gamma * gamma * SQRT2PI)
    return val * scale, err * scale


def _g_betagamma_scalar(t, x, beta, gamma, cfg):
    try:
        val, err = _gbg_substituted(t, x, beta, gamma, cfg)
        if err <= cfg.quad_abs_tol:
            return val
    except integrate.IntegrationWarning:
        err = math.inf
    try:
        val2, err2 = _gbg_direct(t, x, beta, gamma, cfg)
    except integrate.IntegrationWarning as exc:
        raise NumericalError(f"g_betagamma quadrature failed at t={t}, x={x}: {exc}",
                             estimate=err) from exc
    if err2 > cfg.quad_abs_tol:
        raise NumericalError(
            f"g_betagamma quadrature error {min(err, err2):.3g} exceeds "
            f"{cfg.quad_abs_tol:.3g} at t={t}, x={x}", estimate=min(err, err2))
    return val2


def g_betagamma(t, x, beta, gamma, cfg: SpecialFnConfig = DEFAULT_CONFIG):
    """General heat kernel: the integral

    ``(1/gamma^2)(1/sqrt(2pi)) int_0^t (s+gamma x)/(t-s)^{3/2}
    exp(-(s+gamma x)^2 / (2 gamma^2 (t-s))) exp(-beta s/gamma) ds``

    computed by adaptive quadrature after the substitution
    ``u = (s + gamma x)/(gamma sqrt(t - s))``, which maps the singular
    endpoint ``s = t`` to ``u = inf`` and leaves a Gaussian-damped smooth
    integrand.  Its Laplace transform in ``t`` is
    ``exp(-sqrt(2 lam) x) / (beta + sqrt(2 lam) + gamma lam)``.
    """
    _check_time(t)
    _check_nonneg("x", x)
    if np.any(np.asarray(beta) <= 0.0) or np.any(np.asarray(gamma) <= 0.0):
        raise DomainError("beta > 0 and gamma > 0 violated")
    if np.ndim(t) == 0 and np.ndim(x) == 0:
        return _g_betagamma_scalar(float(t), float(x), float(beta), float(gamma), cfg)
    tb, xb = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float))
    out = np.empty(tb.shape)
    for idx in np.ndindex(tb.shape):
        out[idx] = _g_betagamma_scalar(float(tb[idx]), float(xb[idx]),
                                       float(beta), float(gamma), cfg)
    return out


def reflected_kernel(t, x, beta: float, gamma: float,
                     cfg: SpecialFnConfig = DEFAULT_CONFIG):
    """Dispatch to the ``g_{beta,gamma}`` family member for given parameters."""
    if beta > 0.0 and gamma > 0.0:
        return g_betagamma(t, x, beta, gamma, cfg)
    if beta > 0.0:
        return g_beta0(t, x, beta)
    if gamma > 0.0:
        return g_0gamma(t, x, gamma)
    return gauss(t, x)


def reflected_transform(lam, beta: float, gamma: float):
    """``1 / (beta + sqrt(2 lam) + gamma lam)``: transform of the family at x=0."""
    return 1.0 / (beta + np.sqrt(2.0 * lam) + gamma * lam)


def log_g_beta0(t: float, x: float, beta: float) -> float:
    """``log g_beta0(t, x, beta)``; stays finite where the value itself
    underflows (e.g. ``x^2 / 2t`` beyond ~745)."""
    _check_time(t)
    _check_nonneg("x", x)
    _check_nonneg("beta", beta)
    y = beta * math.sqrt(t / 2.0)
    z = x / math.sqrt(2.0 * t) + y
    factor = float(_one_minus_sqrtpi_y_erfcx(y, z))
    return -x * x / (2.0 * t) - 0.5 * math.log(2.0 * math.pi * t) + math.log(factor)


def log_g_0gamma(t: float, x: float, gamma: float) -> float:
    """``log g_0gamma(t, x, gamma)``, finite for any admissible input."""
    _check_time(t)
    _check_nonneg("x", x)
    if gamma <= 0.0:
        raise DomainError("gamma > 0 violated")
    z = x / math.sqrt(2.0 * t) + math.sqrt(2.0 * t) / gamma
    return math.log(special.erfcx(z)) - x * x / (2.0 * t) - math.log(gamma)
