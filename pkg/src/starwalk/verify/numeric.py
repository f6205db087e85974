"""Deterministic consistency checks: Laplace pairs, the semigroup property
and the vertex boundary condition of resolvent functions."""

from __future__ import annotations

import math
import warnings
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from ..core import VERTEX, GraphPoint, Interior, ProcessParams, StarGraph, to_boundary
from ..errors import NumericalError
from ..kernels.measure import dirichlet_density, point_atom, point_density, resolvent
from ..kernels.special import (DEFAULT_CONFIG, SpecialFnConfig, e_lambda, g_0gamma, g_beta0,
                               g_betagamma, hitting_density)
from .report import TestReport, combine

LAPLACE_RTOL = 1e-6
CK_TOL = 1e-6
GENERATOR_TOL = 1e-5

# nested quadrature runs at a looser inner tolerance
NESTED_CONFIG = SpecialFnConfig(quad_abs_tol=1e-8)


def _quad(f, a, b, points=None, epsabs=1e-13, epsrel=1e-11, limit=2000):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            return integrate.quad(f, a, b, points=points, epsabs=epsabs, epsrel=epsrel,
                                  limit=limit)
        except integrate.IntegrationWarning as exc:
            raise NumericalError(f"quadrature failed on [{a}, {b}]: {exc}") from exc


def laplace_pairs(beta: float = 1.0, gamma: float = 1.0, cfg: SpecialFnConfig = DEFAULT_CONFIG):
    """``(name, f(t, x), F(lam, x), sup bound of f on [T, inf))`` for each
    kernel of the family."""
    def s(lam):
        return math.sqrt(2.0 * lam)

    def gauss_cap(T, x):
        return 1.0 / math.sqrt(2.0 * math.pi * T)

    return [
        ("hitting_density", hitting_density,
         lambda lam, x: e_lambda(lam, x),
         lambda T, x: max(x, 1.0) / math.sqrt(2.0 * math.pi * T ** 3) * max(1.0, T)),
        (f"g_beta0(beta={beta})", lambda t, x: g_beta0(t, x, beta),
         lambda lam, x: math.exp(-s(lam) * x) / (beta + s(lam)), gauss_cap),
        (f"g_0gamma(gamma={gamma})", lambda t, x: g_0gamma(t, x, gamma),
         lambda lam, x: math.exp(-s(lam) * x) / (s(lam) + gamma * lam),
         lambda T, x: 1.0 / gamma),
        (f"g_betagamma(beta={beta}, gamma={gamma})",
         lambda t, x: g_betagamma(t, x, beta, gamma, cfg),
         lambda lam, x: math.exp(-s(lam) * x) / (beta + s(lam) + gamma * lam),
         lambda T, x: 1.0 / gamma),
    ]


def laplace_transform(f: Callable[[float], float], lam: float, target: float,
                      cap: Callable[[float], float], rtol: float = LAPLACE_RTOL,
                      peak: float | None = None) -> tuple[float, float, float]:
    """``int_0^inf exp(-lam t) f(t) dt`` with ``t = u^2``, truncated at the
    first ``T`` where the tail bound ``cap(T) exp(-lam T) / lam`` drops
    below ``rtol |target| / 10``.  Returns ``(value, T, tail_bound)``."""
    goal = rtol * abs(target) / 10.0
    T = 1.0
    while cap(T) * math.exp(-lam * T) / lam > goal:
        T *= 1.25
    tail = cap(T) * math.exp(-lam * T) / lam
    U = math.sqrt(T)
    pts = [p for p in (peak,) if p is not None and 0.0 < p < U] or None

    def g(u):
        if u == 0.0:
            return 0.0
        t = u * u
        return 2.0 * u * math.exp(-lam * t) * float(f(t))

    val, _ = _quad(g, 0.0, U, points=pts, epsabs=goal * 1e-2, epsrel=1e-10)
    return val, T, tail


def laplace_consistency(lams: Sequence[float] = (0.5, 1.0, 2.0),
                        xs: Sequence[float] = (0.25, 0.5, 1.0), beta: float = 1.0,
                        gamma: float = 1.0, rtol: float = LAPLACE_RTOL,
                        cfg: SpecialFnConfig = DEFAULT_CONFIG) -> TestReport:
    """Each time-domain kernel integrated against ``exp(-lam t)`` versus its
    closed-form transform on the ``(lam, x)`` grid."""
    parts = []
    for name, f, F, cap in laplace_pairs(beta, gamma, cfg):
        worst, where, info = 0.0, None, []
        for lam in lams:
            for x in xs:
                target = F(lam, x)
                try:
                    val, T, tail = laplace_transform(lambda t: f(t, x), lam, target,
                                                     lambda T: cap(T, x), rtol,
                                                     peak=x / math.sqrt(3.0))
                except NumericalError as exc:
                    info.append({"lam": lam, "x": x, "error": str(exc)})
                    worst, where = math.inf, (lam, x)
                    continue
                rel = abs(val - target) / abs(target)
                info.append({"lam": lam, "x": x, "numeric": val, "closed_form": target,
                             "rel_err": rel, "T": T, "tail_bound": tail})
                if rel > worst:
                    worst, where = rel, (lam, x)
        parts.append(TestReport(f"Laplace pair {name}", worst, rtol, len(info),
                                details={"worst_at": where, "grid": info}))
    return combine("laplace_consistency", parts, lams=list(lams), xs=list(xs))


def _coords(p: GraphPoint) -> tuple[int, float]:
    return (p.edge, p.x) if isinstance(p, Interior) else (0, 0.0)


def chapman_kolmogorov(params: ProcessParams | None, s: float, t: float, source: GraphPoint,
                       targets: Sequence[GraphPoint], g: StarGraph | None = None,
                       tol: float = CK_TOL, cfg: SpecialFnConfig = NESTED_CONFIG) -> TestReport:
    """``int p(s, xi, .) p(t, ., eta) + atom terms = p(s + t, xi, eta)``.

    ``params = None`` selects the Dirichlet kernel (Brownian motion killed
    at the vertex), which lives on the source edge only.  Vertex targets
    compare atoms.
    """
    k, x = _coords(source)
    if params is None:
        n_edges = g.n_edges if g is not None else max(k, 1)

        def dens(tau, j, z, m, y):
            if j != m or j == 0:
                return np.zeros(np.broadcast(np.asarray(z), np.asarray(y)).shape)
            return dirichlet_density(tau, np.asarray(z, float), y)

        def atom(tau, z):
            return np.zeros(np.shape(z))
        label = "dirichlet"
    else:
        n_edges = params.n_edges

        def dens(tau, j, z, m, y):
            if j == 0:
                return point_density(params, tau, 0, 0.0, m, y, cfg)
            return point_density(params, tau, j, z, m, y, cfg)

        def atom(tau, z):
            return point_atom(params, tau, z, cfg)
        label = params.regime.value
    reach = 14.0 * math.sqrt(max(s, t))
    errs, info = [], []
    for eta in targets:
        m, y = _coords(eta)
        total = 0.0
        for j in range(1, n_edges + 1):
            if params is None and j != k:
                continue
            upper = max(x, y) + reach
            brk = sorted({p for p in (x if j == k else None, y if j == m else None)
                          if p is not None and 0.0 < p < upper})
            pts = [0.0] + brk + [upper]
            for a, b in zip(pts[:-1], pts[1:]):
                if m == 0:
                    f = (lambda z, j=j: float(dens(s, k, x, j, z)) * float(atom(t, z)))
                else:
                    f = (lambda z, j=j: float(dens(s, k, x, j, z)) * float(dens(t, j, z, m, y)))
                val, _ = _quad(f, a, b, epsabs=1e-12, epsrel=1e-10)
                total += val
        a_s = float(atom(s, x))
        if a_s:
            total += a_s * (float(atom(t, 0.0)) if m == 0 else float(dens(t, 0, 0.0, m, y)))
        direct = float(atom(s + t, x)) if m == 0 else float(dens(s + t, k, x, m, y))
        errs.append(abs(total - direct))
        info.append({"target": [m, y], "composed": total, "direct": direct})
    return TestReport(f"Chapman-Kolmogorov ({label}, s={s}, t={t})", max(errs), tol,
                      len(targets), details={"source": [k, x], "targets": info})


def default_test_fn(n_edges: int) -> Callable[[int, float], float]:
    """``f_k(x) = exp(-x) (1 + c_k x)`` with distinct slopes per edge."""
    c = [k / (n_edges + 1.0) for k in range(1, n_edges + 1)]

    def f(k, x):
        return math.exp(-x) * (1.0 + c[k - 1] * x)
    return f


_D1 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_D2 = np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0]) / 12.0

GENERATOR_CONFIG = SpecialFnConfig(quad_abs_tol=1e-12, quad_rel_tol=1e-13)


def generator_domain_check(params: ProcessParams, lam: float = 1.0,
                           test_fn: Callable[[int, float], float] | None = None,
                           h: float = 0.01, tol: float = GENERATOR_TOL,
                           cfg: SpecialFnConfig = GENERATOR_CONFIG) -> TestReport:
    """``u = R_lam f`` must satisfy ``a u(v) + (c/2) u''(v) = sum_k b_k u'(v_k)``.

    Derivatives are one-sided fourth-order differences on each edge, at
    steps ``h`` and ``2h``, Richardson-combined; ``u''(v)`` is averaged over
    the edges.  The FD error bound is the change between the two steps.
    """
    g = StarGraph(params.n_edges)
    f = test_fn or default_test_fn(params.n_edges)
    n = params.n_edges

    def u(p):
        return resolvent(params, lam, p, g, cfg).integrate(f)

    u0 = u(VERTEX)
    samples = {kk: np.array([u0] + [u(Interior(kk, j * h)) for j in range(1, 11)])
               for kk in range(1, n + 1)}

    def derivs(vals, step):
        return float(_D1 @ vals[:5]) / step, float(_D2 @ vals[:6]) / step ** 2

    d1, d2, bound = [], [], 0.0
    for kk in range(1, n + 1):
        v = samples[kk]
        a1, a2 = derivs(v, h)
        b1, b2 = derivs(v[::2], 2.0 * h)
        d1.append(a1 + (a1 - b1) / 15.0)
        d2.append(a2 + (a2 - b2) / 15.0)
        bound = max(bound, abs(a1 - b1), abs(a2 - b2))
    upp = float(np.mean(d2))
    bc = to_boundary(params)
    lhs = bc.a * u0 + 0.5 * bc.c * upp
    rhs = math.fsum(b * d for b, d in zip(bc.b, d1))
    resid = abs(lhs - rhs)
    fd_bound = bound * max(1.0, bc.c, max(bc.b))
    return TestReport(f"generator domain ({params.regime.value}, lam={lam})", resid,
                      max(tol, fd_bound), 2 * n * 5 + 1,
                      details={"u_v": u0, "du": d1, "d2u_v": upp, "d2u_spread": float(np.ptp(d2)),
                               "a": bc.a, "b": list(bc.b), "c": bc.c, "h": h,
                               "fd_error_bound": fd_bound})
