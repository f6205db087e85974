import math
import pickle

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from starwalk.core import (VERTEX, BoundaryCondition, Interior, ProcessParams, Regime,
                           StarGraph, classify_boundary, distances, point, to_boundary)
from starwalk.errors import ValidationError


@pytest.mark.parametrize("a,b,c,regime,w,beta,gamma", [
    (0.0, (0.5, 0.5), 0.0, Regime.WALSH, (0.5, 0.5), 0.0, 0.0),
    (0.2, (0.3, 0.5), 0.0, Regime.ELASTIC, (0.375, 0.625), 0.25, 0.0),
    (0.0, (0.3, 0.3), 0.4, Regime.STICKY, (0.5, 0.5), 0.0, 2.0 / 3.0),
    (0.1, (0.2, 0.2, 0.1), 0.4, Regime.GENERAL, (0.4, 0.4, 0.2), 0.2, 0.8),
    (0.25, (0.0, 0.0), 0.75, Regime.ABSORBED_KILLED, None, 1.0 / 3.0, 0.0),
])
def test_classify_examples(a, b, c, regime, w, beta, gamma):
    p = classify_boundary(BoundaryCondition(a, b, c))
    assert p.regime is regime
    assert p.n_edges == len(b)
    if w is None:
        assert p.w is None
    else:
        assert p.w == pytest.approx(w, abs=1e-15)
    assert p.beta == pytest.approx(beta, abs=1e-15)
    assert p.gamma == pytest.approx(gamma, abs=1e-15)


@pytest.mark.parametrize("a,b,c", [
    (1.0, (0.0,), 0.0),          # a = 1
    (0.5, (0.4,), 0.0),          # sum != 1
    (-0.1, (1.1,), 0.0),         # negative entry
    (0.0, (), 1.0),              # no edges
    (math.nan, (1.0,), 0.0),
])
def test_boundary_rejects(a, b, c):
    with pytest.raises(ValidationError):
        BoundaryCondition(a, b, c)


def test_boundary_renormalizes_tiny_drift():
    bc = BoundaryCondition(0.0, (0.5, 0.5 + 5e-13), 0.0)
    assert math.fsum(bc.b) == pytest.approx(1.0, abs=1e-15)


@st.composite
def feller_triples(draw):
    n = draw(st.integers(1, 6))
    raw = draw(st.lists(st.floats(0.0, 1.0), min_size=n + 2, max_size=n + 2))
    # keep b away from zero so the process is not absorbed, and a < 1
    raw = [r + (0.05 if i >= 2 else 0.0) for i, r in enumerate(raw)]
    s = math.fsum(raw)
    vals = [r / s for r in raw]
    return vals[0], tuple(vals[2:]), vals[1]


@given(feller_triples())
@settings(max_examples=200, deadline=None)
def test_round_trip(triple):
    a, b, c = triple
    bc = BoundaryCondition(a, b, c)
    back = to_boundary(classify_boundary(bc))
    assert back.a == pytest.approx(bc.a, abs=1e-12)
    assert back.c == pytest.approx(bc.c, abs=1e-12)
    assert back.b == pytest.approx(bc.b, abs=1e-12)


@given(st.integers(1, 5), st.floats(0.01, 10.0))
@settings(max_examples=50, deadline=None)
def test_absorbed_round_trip(n, beta):
    p = ProcessParams.absorbed(n, beta)
    q = classify_boundary(to_boundary(p))
    assert q.regime is Regime.ABSORBED_KILLED
    assert q.beta == pytest.approx(beta, rel=1e-12)


def test_params_validation():
    with pytest.raises(ValidationError):
        ProcessParams(Regime.WALSH, 2, (0.5, 0.5), beta=1.0)
    with pytest.raises(ValidationError):
        ProcessParams.walsh((0.6, 0.6))
    with pytest.raises(ValidationError):
        ProcessParams(Regime.ABSORBED_KILLED, 2, (0.5, 0.5), beta=1.0)
    with pytest.raises(ValidationError):
        ProcessParams.elastic((1.0,), -1.0)
    assert ProcessParams.from_process((1.0,), 0.0, 0.5).regime is Regime.STICKY
    assert ProcessParams.walsh((0.5, 0.5)).conservative
    assert not ProcessParams.elastic((0.5, 0.5), 1.0).conservative


def test_points_and_distances():
    g = StarGraph(3)
    assert point() is VERTEX
    assert point(2, 0.0) is VERTEX
    assert pickle.loads(pickle.dumps(VERTEX)) is VERTEX
    p, q, r = Interior(1, 0.5), Interior(1, 2.0), Interior(3, 1.0)
    assert distances(g, p, q) == (1.5, 2.5)
    assert distances(g, p, r) == (1.5, 1.5)
    assert distances(g, VERTEX, r) == (1.0, 1.0)
    with pytest.raises(ValidationError):
        distances(g, Interior(4, 1.0), p)
    with pytest.raises(ValidationError):
        Interior(1, -1.0)
    with pytest.raises(ValidationError):
        StarGraph(0)


@given(st.tuples(st.integers(1, 3), st.floats(0.0, 5.0)),
       st.tuples(st.integers(1, 3), st.floats(0.0, 5.0)),
       st.tuples(st.integers(1, 3), st.floats(0.0, 5.0)))
@settings(max_examples=100, deadline=None)
def test_metric_triangle(a, b, c):
    g = StarGraph(3)
    pa, pb, pc = (point(*a), point(*b), point(*c))
    dab, dv = distances(g, pa, pb)
    assert dab <= dv + 1e-12
    assert dab == pytest.approx(distances(g, pb, pa)[0])
    assert dab <= distances(g, pa, pc)[0] + distances(g, pc, pb)[0] + 1e-12
