"""Exact samplers for laws available in closed form.

All take a ``numpy.random.Generator`` and an optional ``size``; scalar
calls return floats.
"""

from __future__ import annotations

import math

import numpy as np

from ..core import VERTEX, GraphPoint, Interior
from ..errors import DomainError, ValidationError


def _out(v, size):
    return float(v[0]) if size is None else v


def sample_first_hitting(d: float, rng: np.random.Generator, size=None):
    """First time a Brownian motion started at distance ``d`` hits the
    vertex: ``d^2 / Z^2``."""
    if not d > 0.0:
        raise DomainError("d > 0 violated")
    z = rng.standard_normal(1 if size is None else size)
    return _out(d * d / (z * z), size)


def sample_reflected_localtime(t: float, rng: np.random.Generator, size=None):
    """Joint draw of ``(|B_t|, L_t)`` for reflected Brownian motion from 0.

    ``u = |B_t| + L_t`` is Maxwell distributed with scale ``sqrt(t)``; given
    ``u`` the split is uniform.
    """
    if not t > 0.0:
        raise DomainError("t > 0 violated")
    m = 1 if size is None else size
    z = rng.standard_normal((3,) + np.shape(np.empty(m)))
    u = math.sqrt(t) * np.sqrt(np.sum(z * z, axis=0))
    x = rng.random(np.shape(u)) * u
    ell = u - x
    if size is None:
        return float(x[0]), float(ell[0])
    return x, ell


def sample_inverse_localtime(r: float, gamma: float, rng: np.random.Generator, size=None):
    """Inverse local time at level ``r`` on the sticky clock:
    ``r^2 / Z^2 + gamma r``."""
    if r < 0.0:
        raise DomainError("r >= 0 violated")
    if gamma < 0.0:
        raise DomainError("gamma >= 0 violated")
    m = 1 if size is None else size
    if r == 0.0:
        return _out(np.zeros(m), size)
    z = rng.standard_normal(m)
    return _out(r * r / (z * z) + gamma * r, size)


def _categorical(w: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(w)
    cdf[-1] = 1.0
    return np.minimum(np.searchsorted(cdf[:-1], u, side="right") + 1, len(w))


def exact_marginal_walsh(w, start: GraphPoint, t: float, rng: np.random.Generator, size=None):
    """Grid-free draw of the Walsh process at time ``t``.

    From an interior point ``(k, x)`` the endpoint ``b = x + sqrt(t) Z`` of
    the driving motion is drawn; the path met the vertex if ``b <= 0`` or,
    for ``b > 0``, with the bridge probability ``exp(-2 x b / t)``.  After a
    visit the edge is a fresh ``Categorical(w)`` draw with magnitude ``|b|``.
    Returns ``(edges, xs)`` arrays, or a single point when ``size`` is None.
    """
    w = np.asarray(w, dtype=float)
    if abs(w.sum() - 1.0) > 1e-12 or np.any(w < 0.0):
        raise ValidationError("w must lie on the simplex")
    if not t > 0.0:
        raise DomainError("t > 0 violated")
    m = 1 if size is None else size
    x0 = start.distance_to_vertex
    b = x0 + math.sqrt(t) * rng.standard_normal(m)
    u_hit = rng.random(m)
    u_edge = rng.random(m)
    if isinstance(start, Interior):
        if start.edge > len(w):
            raise ValidationError("start edge out of range")
        with np.errstate(over="ignore"):
            hit = (b <= 0.0) | (u_hit < np.exp(-2.0 * x0 * np.maximum(b, 0.0) / t))
    else:
        hit = np.ones(m, dtype=bool)
    edges = np.where(hit, _categorical(w, u_edge), getattr(start, "edge", 0))
    xs = np.abs(b)
    if size is None:
        return Interior(int(edges[0]), float(xs[0])) if xs[0] > 0.0 else VERTEX
    return edges.astype(np.int64), xs
