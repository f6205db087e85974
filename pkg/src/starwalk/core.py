"""Star-graph geometry and the Feller boundary-condition parameter maps.

A star graph has one vertex ``v`` and ``n`` semi-infinite edges.  Points are
either :data:`VERTEX` or :class:`Interior` ``(edge, x)`` with ``edge`` in
``1..n`` and ``x > 0`` the distance to the vertex.

Boundary conditions are Feller triples ``(a, b_1..b_n, c)`` on the simplex
with ``a != 1``; :func:`classify_boundary` maps them to the process
parameters ``(w, beta, gamma)`` that drive the pathwise constructions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import ValidationError

SIMPLEX_TOL = 1e-12


@dataclass(frozen=True)
class StarGraph:
    n_edges: int

    def __post_init__(self):
        if int(self.n_edges) != self.n_edges or self.n_edges < 1:
            raise ValidationError(f"n_edges >= 1 violated (got {self.n_edges!r})")

    @property
    def edges(self) -> range:
        return range(1, self.n_edges + 1)

    def check(self, point: "GraphPoint") -> None:
        if isinstance(point, Interior) and point.edge > self.n_edges:
            raise ValidationError(
                f"edge index {point.edge} out of range 1..{self.n_edges}")


class _Vertex:
    """The unique vertex of the star graph."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "VERTEX"

    def __reduce__(self):
        return (_Vertex, ())

    @property
    def is_vertex(self) -> bool:
        return True

    @property
    def distance_to_vertex(self) -> float:
        return 0.0


VERTEX = _Vertex()


@dataclass(frozen=True)
class Interior:
    edge: int
    x: float

    def __post_init__(self):
        if int(self.edge) != self.edge or self.edge < 1:
            raise ValidationError(f"edge index must be >= 1 (got {self.edge!r})")
        if not (self.x > 0.0) or not math.isfinite(self.x):
            raise ValidationError(
                f"interior coordinate x > 0 violated (got {self.x!r}); "
                "use VERTEX for the vertex")

    @property
    def is_vertex(self) -> bool:
        return False

    @property
    def distance_to_vertex(self) -> float:
        return float(self.x)


GraphPoint = Union[_Vertex, Interior]


def point(edge: int | None = None, x: float = 0.0) -> GraphPoint:
    """Build a graph point; ``x == 0`` or ``edge is None`` gives the vertex."""
    if edge is None or x == 0.0:
        return VERTEX
    return Interior(int(edge), float(x))


def distances(g: StarGraph, xi: GraphPoint, eta: GraphPoint) -> tuple[float, float]:
    """Return ``(d, d_v)``: the graph metric and the distance via the vertex."""
    g.check(xi)
    g.check(eta)
    dx = xi.distance_to_vertex
    dy = eta.distance_to_vertex
    d_v = dx + dy
    if isinstance(xi, Interior) and isinstance(eta, Interior) and xi.edge == eta.edge:
        return abs(dx - dy), d_v
    return d_v, d_v


class Regime(str, enum.Enum):
    ABSORBED_KILLED = "absorbed_killed"
    WALSH = "walsh"
    ELASTIC = "elastic"
    STICKY = "sticky"
    GENERAL = "general"


@dataclass(frozen=True)
class BoundaryCondition:
    """Feller triple ``a f(v) + (c/2) f''(v) = sum_k b_k f'(v_k)``.

    Entries within :data:`SIMPLEX_TOL` of the simplex are renormalized;
    anything further away is rejected.
    """

    a: float
    b: tuple[float, ...]
    c: float

    def __post_init__(self):
        a = float(self.a)
        c = float(self.c)
        b = tuple(float(v) for v in np.atleast_1d(np.asarray(self.b, dtype=float)))
        if len(b) < 1:
            raise ValidationError("b must have at least one entry (n_edges >= 1)")
        vals = (a, c) + b
        if any(not math.isfinite(v) for v in vals):
            raise ValidationError("entries must be finite")
        if any(v < -SIMPLEX_TOL for v in vals):
            raise ValidationError("non-negativity a, b_k, c >= 0 violated")
        if any(v > 1.0 + SIMPLEX_TOL for v in vals):
            raise ValidationError("a, b_k, c <= 1 violated")
        total = math.fsum(vals)
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise ValidationError(
                f"a + c + sum(b) = 1 violated (sum = {total!r})")
        # clip then renormalize the sub-tolerance deviation
        a, c = max(a, 0.0) / total, max(c, 0.0) / total
        b = tuple(max(v, 0.0) / total for v in b)
        if abs(a - 1.0) <= SIMPLEX_TOL:
            raise ValidationError("a ≠ 1 violated")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "b", b)

    @property
    def n_edges(self) -> int:
        return len(self.b)


@dataclass(frozen=True)
class ProcessParams:
    """Parameters of the pathwise construction.

    ``w`` are the excursion weights (``None`` for the absorbed regime),
    ``beta`` the killing rate on the local-time scale and ``gamma`` the
    stickiness.  For the absorbed regime ``beta`` is the rate of the
    exponential holding time at the vertex.
    """

    regime: Regime
    n_edges: int
    w: tuple[float, ...] | None
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        regime = Regime(self.regime)
        object.__setattr__(self, "regime", regime)
        if self.n_edges < 1:
            raise ValidationError("n_edges >= 1 violated")
        if not (self.beta >= 0.0) or not (self.gamma >= 0.0):
            raise ValidationError("beta >= 0 and gamma >= 0 violated")
        if not math.isfinite(self.beta) or not math.isfinite(self.gamma):
            raise ValidationError("beta and gamma must be finite")
        if regime is Regime.ABSORBED_KILLED:
            if self.w is not None:
                raise ValidationError("absorbed regime carries no edge weights")
            if self.gamma != 0.0:
                raise ValidationError("absorbed regime has gamma = 0")
            return
        if self.w is None:
            raise ValidationError(f"{regime.value} regime needs edge weights w")
        w = tuple(float(v) for v in self.w)
        if len(w) != self.n_edges:
            raise ValidationError("len(w) = n_edges violated")
        if any(v < 0.0 or v > 1.0 for v in w):
            raise ValidationError("w_k in [0, 1] violated")
        if abs(math.fsum(w) - 1.0) > SIMPLEX_TOL:
            raise ValidationError("sum(w) = 1 violated")
        object.__setattr__(self, "w", w)
        expected = _regime_for(self.beta, self.gamma)
        if expected is not regime:
            raise ValidationError(
                f"regime {regime.value} inconsistent with beta={self.beta}, "
                f"gamma={self.gamma} (expected {expected.value})")

    # convenience constructors
    @classmethod
    def walsh(cls, w: Sequence[float]) -> "ProcessParams":
        return cls(Regime.WALSH, len(w), tuple(w))

    @classmethod
    def elastic(cls, w: Sequence[float], beta: float) -> "ProcessParams":
        return cls(Regime.ELASTIC, len(w), tuple(w), beta=beta)

    @classmethod
    def sticky(cls, w: Sequence[float], gamma: float) -> "ProcessParams":
        return cls(Regime.STICKY, len(w), tuple(w), gamma=gamma)

    @classmethod
    def general(cls, w: Sequence[float], beta: float, gamma: float) -> "ProcessParams":
        return cls(Regime.GENERAL, len(w), tuple(w), beta=beta, gamma=gamma)

    @classmethod
    def absorbed(cls, n_edges: int, beta: float) -> "ProcessParams":
        return cls(Regime.ABSORBED_KILLED, n_edges, None, beta=beta)

    @classmethod
    def from_process(cls, w: Sequence[float], beta: float = 0.0,
                     gamma: float = 0.0) -> "ProcessParams":
        """Build from ``(w, beta, gamma)`` with the regime inferred."""
        return cls(_regime_for(beta, gamma), len(w), tuple(w), beta, gamma)

    @property
    def weights(self) -> np.ndarray:
        if self.w is None:
            return np.zeros(self.n_edges)
        return np.asarray(self.w, dtype=float)

    @property
    def conservative(self) -> bool:
        return self.regime in (Regime.WALSH, Regime.STICKY)


def _regime_for(beta: float, gamma: float) -> Regime:
    if beta > 0.0:
        return Regime.GENERAL if gamma > 0.0 else Regime.ELASTIC
    return Regime.STICKY if gamma > 0.0 else Regime.WALSH


def classify_boundary(bc: BoundaryCondition) -> ProcessParams:
    """Map a Feller triple to the parameters of its pathwise construction.

    With ``b != 0``: ``r = a + c``, ``w = b/(1-r)``, ``beta = a/(1-r)``,
    ``gamma = c/(1-r)``.  With ``b = 0`` the process is stopped at the vertex
    and killed after an exponential holding time of rate ``beta = a/c``.
    """
    n = bc.n_edges
    bsum = math.fsum(bc.b)
    if bsum == 0.0:
        # a + c = 1 and a != 1 force c > 0
        return ProcessParams.absorbed(n, bc.a / bc.c)
    one_minus_r = bsum
    w = tuple(v / one_minus_r for v in bc.b)
    return ProcessParams.from_process(w, bc.a / one_minus_r, bc.c / one_minus_r)


def to_boundary(params: ProcessParams) -> BoundaryCondition:
    """Inverse of :func:`classify_boundary`."""
    if params.regime is Regime.ABSORBED_KILLED:
        beta = params.beta
        return BoundaryCondition(beta / (1.0 + beta), (0.0,) * params.n_edges,
                                 1.0 / (1.0 + beta))
    scale = 1.0 + params.beta + params.gamma
    return BoundaryCondition(params.beta / scale,
                             tuple(v / scale for v in params.w),
                             params.gamma / scale)
