"""Transition and resolvent kernels as measures on the star graph.

A :class:`KernelMeasure` is a density on each edge plus a point mass at the
vertex.  Densities are assembled from the Dirichlet (absorbed) part and a
reflected part that depends on the regime only through a scalar function of
the distance via the vertex.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from ..core import GraphPoint, Interior, ProcessParams, Regime, StarGraph
from ..errors import DomainError, NumericalError, ValidationError
from .special import (DEFAULT_CONFIG, SpecialFnConfig, e_lambda, gauss,
                      hitting_density, reflected_kernel)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


@dataclass(frozen=True)
class KernelMeasure:
    """Measure ``sum_m density(m, y) dy + atom * eps_v``.

    ``kind`` is ``"transition"`` or ``"resolvent"``; ``t_or_lambda`` holds
    the time or the resolvent parameter.
    """

    kind: str
    params: ProcessParams
    source: GraphPoint
    t_or_lambda: float
    atom: float
    _density: Callable[[int, np.ndarray], np.ndarray] = field(repr=False)
    cfg: SpecialFnConfig = field(default=DEFAULT_CONFIG, repr=False)

    @property
    def n_edges(self) -> int:
        return self.params.n_edges

    @property
    def source_x(self) -> float:
        return self.source.distance_to_vertex

    @property
    def length_scale(self) -> float:
        """Distance beyond which the density is negligible (Gaussian or
        exponential tail below ~1e-30 relative)."""
        if self.kind == "transition":
            return self.source_x + 12.0 * math.sqrt(self.t_or_lambda)
        return self.source_x + 70.0 / math.sqrt(2.0 * self.t_or_lambda)

    def density(self, m: int, y):
        if not 1 <= m <= self.n_edges:
            raise ValidationError(f"edge index {m} out of range 1..{self.n_edges}")
        y_arr = np.asarray(y, dtype=float)
        if np.any(y_arr < 0.0):
            raise DomainError("y >= 0 violated")
        out = self._density(m, np.atleast_1d(y_arr))
        return float(out[0]) if y_arr.ndim == 0 else out.reshape(y_arr.shape)

    def _breaks(self, m: int, upper: float) -> list[float]:
        pts = [0.0]
        if isinstance(self.source, Interior) and self.source.edge == m and self.source.x < upper:
            pts.append(self.source.x)
        pts.append(upper)
        return pts

    def _edge_integral(self, m: int, f, lo: float, hi: float) -> float:
        """``int_lo^hi f(y) density(m, y) dy`` by adaptive quadrature,
        split at the source point where the density has a kink."""
        pts = [lo] + [p for p in self._breaks(m, hi)[1:-1] if lo < p < hi] + [hi]
        total = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            with warnings.catch_warnings():
                warnings.simplefilter("error", integrate.IntegrationWarning)
                try:
                    val, _ = integrate.quad(
                        lambda y: f(y) * self._density(m, np.array([y]))[0], a, b,
                        epsabs=self.cfg.quad_abs_tol * 1e-2, epsrel=self.cfg.quad_rel_tol,
                        limit=self.cfg.quad_max_subdiv)
                except integrate.IntegrationWarning as exc:
                    raise NumericalError(f"edge quadrature failed on [{a}, {b}]: {exc}") from exc
            total += val
        return total

    def edge_mass(self, m: int) -> float:
        return self._edge_integral(m, lambda y: 1.0, 0.0, self.length_scale)

    def total_mass(self) -> float:
        return math.fsum(self.edge_mass(m) for m in range(1, self.n_edges + 1)) + self.atom

    def mass_near_vertex(self, eps: float) -> float:
        """Mass of the closed ball of radius ``eps`` around the vertex."""
        if eps < 0.0:
            raise DomainError("eps >= 0 violated")
        if eps == 0.0:
            return self.atom
        return self.atom + math.fsum(
            self._edge_integral(m, lambda y: 1.0, 0.0, min(eps, self.length_scale))
            for m in range(1, self.n_edges + 1))

    def integrate(self, f: Callable[[int, float], float]) -> float:
        """``int f d(measure)`` with ``f(m, y)`` a function on the graph;
        the vertex contributes ``atom * f(1, 0)``."""
        total = math.fsum(self._edge_integral(m, lambda y, m=m: f(m, y), 0.0, self.length_scale)
                          for m in range(1, self.n_edges + 1))
        if self.atom:
            total += self.atom * f(1, 0.0)
        return total

    def edge_cdf(self, m: int, n_panels: int = 400):
        """Tabulated cumulative mass ``y -> int_0^y density(m, .)`` on edge ``m``.

        Returns ``(grid, cum)``; the conditional CDF is ``cum / cum[-1]``.
        Panels are Gauss-Legendre with the source point as a breakpoint.
        """
        breaks = self._breaks(m, self.length_scale)
        counts = np.maximum(1, np.round(n_panels * np.diff(breaks) / self.length_scale)).astype(int)
        grid = np.unique(np.concatenate(
            [np.linspace(a, b, c + 1) for a, b, c in zip(breaks[:-1], breaks[1:], counts)]))
        lo, hi = grid[:-1], grid[1:]
        half = 0.5 * (hi - lo)
        nodes = (0.5 * (hi + lo))[:, None] + half[:, None] * _GL_NODES[None, :]
        vals = self._density(m, nodes.ravel()).reshape(nodes.shape)
        panel = half * (vals @ _GL_WEIGHTS)
        return grid, np.concatenate([[0.0], np.cumsum(panel)])


def _source_coords(g: StarGraph, xi: GraphPoint) -> tuple[int, float]:
    g.check(xi)
    if isinstance(xi, Interior):
        return xi.edge, xi.x
    return 0, 0.0


def _check_graph(params: ProcessParams, g: StarGraph):
    if params.n_edges != g.n_edges:
        raise ValidationError("params.n_edges = g.n_edges violated")


def dirichlet_density(t: float, x: float, y):
    """Heat kernel of Brownian motion killed at the vertex, same edge."""
    return gauss(t, x - np.asarray(y)) - gauss(t, x + np.asarray(y))


def dirichlet_resolvent_density(lam: float, x: float, y):
    s = math.sqrt(2.0 * lam)
    y = np.asarray(y, dtype=float)
    return (np.exp(-s * np.abs(x - y)) - np.exp(-s * (x + y))) / s


def absorbed_atom(t: float, x: float, beta: float, cfg: SpecialFnConfig = DEFAULT_CONFIG) -> float:
    """``int_0^t exp(-beta (t - s)) h(s, x) ds``: probability that a path
    started at distance ``x`` has been absorbed but not yet killed."""
    if x == 0.0:
        return math.exp(-beta * t)
    # h(s, x) concentrates near s ~ x^2/3; give quad that scale as a hint
    peak = min(t, x * x / 3.0)
    pts = [peak] if 0.0 < peak < t else None
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(
                lambda s: math.exp(-beta * (t - s)) * hitting_density(s, x) if s > 0.0 else 0.0,
                0.0, t, points=pts, epsabs=cfg.quad_abs_tol * 1e-2, epsrel=1e-12,
                limit=cfg.quad_max_subdiv)
        except integrate.IntegrationWarning as exc:
            raise NumericalError(f"absorbed atom quadrature failed: {exc}") from exc
    if err > cfg.quad_abs_tol:
        raise NumericalError("absorbed atom quadrature tolerance not met", estimate=err)
    return val


def transition(params: ProcessParams, t: float, xi: GraphPoint, g: StarGraph,
               cfg: SpecialFnConfig = DEFAULT_CONFIG) -> KernelMeasure:
    """Transition kernel ``P_t(xi, .)`` of the process described by ``params``."""
    if not t > 0.0:
        raise DomainError("t > 0 violated")
    _check_graph(params, g)
    k, x = _source_coords(g, xi)

    if params.regime is Regime.ABSORBED_KILLED:
        def dens(m, y):
            return dirichlet_density(t, x, y) if m == k else np.zeros_like(y)

        atom = absorbed_atom(t, x, params.beta, cfg)
        return KernelMeasure("transition", params, xi, t, atom, dens, cfg)

    w = params.weights
    beta, gamma = params.beta, params.gamma

    def dens(m, y):
        out = 2.0 * w[m - 1] * np.asarray(reflected_kernel(t, x + y, beta, gamma, cfg))
        if m == k:
            out = out + dirichlet_density(t, x, y)
        return np.maximum(out, 0.0)

    atom = gamma * float(reflected_kernel(t, x, beta, gamma, cfg)) if gamma > 0.0 else 0.0
    return KernelMeasure("transition", params, xi, t, atom, dens, cfg)


def point_density(params: ProcessParams, t: float, k: int, x, m: int, y,
                  cfg: SpecialFnConfig = DEFAULT_CONFIG):
    """Transition density from ``(k, x)`` to ``(m, y)``, vectorized over
    ``x`` and ``y``; ``k = 0`` (with ``x = 0``) is the vertex."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if params.regime is Regime.ABSORBED_KILLED:
        if k != m or k == 0:
            return np.zeros(np.broadcast(x, y).shape)
        return dirichlet_density(t, x, y)
    out = 2.0 * params.weights[m - 1] * np.asarray(
        reflected_kernel(t, x + y, params.beta, params.gamma, cfg))
    if k == m:
        out = out + dirichlet_density(t, x, y)
    return np.maximum(out, 0.0)


def point_atom(params: ProcessParams, t: float, x, cfg: SpecialFnConfig = DEFAULT_CONFIG):
    """Vertex atom of ``P_t(xi, .)`` as a function of ``x = d(xi, v)``."""
    x = np.asarray(x, dtype=float)
    if params.regime is Regime.ABSORBED_KILLED:
        return np.vectorize(lambda v: absorbed_atom(t, float(v), params.beta, cfg))(x)
    if params.gamma > 0.0:
        return params.gamma * np.asarray(
            reflected_kernel(t, x, params.beta, params.gamma, cfg))
    return np.zeros(x.shape)


def vertex_factor(params: ProcessParams, lam: float) -> float:
    """Resolvent at the vertex, ``R_lam(v, v)`` per unit ``2 w_m``: the
    regime's factor multiplying ``e_lam(xi) e_lam(eta)``."""
    s = math.sqrt(2.0 * lam)
    return 1.0 / (params.beta + s + params.gamma * lam)


def resolvent(params: ProcessParams, lam: float, xi: GraphPoint, g: StarGraph,
              cfg: SpecialFnConfig = DEFAULT_CONFIG) -> KernelMeasure:
    """Resolvent kernel ``R_lam(xi, .)``, the Laplace transform of
    :func:`transition` in ``t``."""
    if not lam > 0.0:
        raise DomainError("lambda > 0 violated")
    _check_graph(params, g)
    k, x = _source_coords(g, xi)
    ex = e_lambda(lam, x)
    s = math.sqrt(2.0 * lam)

    if params.regime is Regime.ABSORBED_KILLED:
        def dens(m, y):
            return dirichlet_resolvent_density(lam, x, y) if m == k else np.zeros_like(y)

        return KernelMeasure("resolvent", params, xi, lam, ex / (params.beta + lam), dens, cfg)

    w = params.weights
    fac = vertex_factor(params, lam)

    def dens(m, y):
        out = ex * 2.0 * w[m - 1] * fac * np.exp(-s * y)
        if m == k:
            out = out + dirichlet_resolvent_density(lam, x, y)
        return np.maximum(out, 0.0)

    atom = params.gamma * fac * ex
    return KernelMeasure("resolvent", params, xi, lam, atom, dens, cfg)
