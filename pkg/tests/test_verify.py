import json
import math

import numpy as np
import pytest
from scipy import stats

from starwalk.core import VERTEX, Interior, ProcessParams, StarGraph, to_boundary
from starwalk.kernels import transition
from starwalk.simulate import RngConfig, SimConfig, sample_reflected_localtime, simulate_batch
from starwalk.verify import (TestReport, chapman_kolmogorov, combine, format_table,
                             generator_domain_check, ks_edge_test, laplace_consistency,
                             mc_check, reports_to_json)
from starwalk.verify.acceptance import reflected_localtime_chi2
from starwalk.verify.stats import bias_estimate, ks_critical, ks_statistic


def test_report_logic():
    r = TestReport("x", 0.5, 1.0, 10)
    assert r.passed and "[PASS]" in r.line()
    f = TestReport("y", 2.0, 1.0)
    assert not f.passed and "[FAIL]" in f.line()
    s = TestReport.skip("z", "empty")
    c = combine("all", [r, s])
    assert c.passed and c.statistic == pytest.approx(0.5)
    assert not combine("all", [r, f]).passed
    doc = json.loads(reports_to_json([r, f, s]))
    assert doc[2]["skipped"] and doc[2]["statistic"] == "nan"
    assert "status" in format_table([r, f])
    nan = TestReport("nan", math.nan, 1.0)
    assert not nan.passed


def test_ks_helpers():
    assert ks_critical(10_000, 0.01) == pytest.approx(stats.kstwobign.isf(0.01) / 100.0)
    x = np.linspace(0.0005, 0.9995, 1000)
    assert ks_statistic(x, lambda v: v) <= 1e-3
    assert ks_statistic(x, lambda v: v ** 2) > 0.2


def test_mc_check_and_bias():
    fine = np.full(100, 1.0) + np.linspace(-1e-3, 1e-3, 100)
    coarse = fine + 0.01
    assert bias_estimate(fine, coarse) == pytest.approx(0.01)
    assert mc_check("m", 1.005, fine, coarse).passed
    assert not mc_check("m", 1.05, fine, coarse).passed
    assert mc_check("m", 1.0, fine, extra=0.0).details["bias"] == 0.0


def test_laplace_consistency():
    rep = laplace_consistency(lams=(1.0,), xs=(0.5,))
    assert rep.passed
    assert rep.statistic < 1e-2


def test_chapman_kolmogorov_sticky_vertex_target():
    p = ProcessParams.sticky((0.4, 0.6), 0.8)
    rep = chapman_kolmogorov(p, 0.4, 0.7, Interior(1, 0.3),
                             [VERTEX, Interior(2, 0.5), Interior(1, 0.1)])
    assert rep.passed, rep.details


def test_chapman_kolmogorov_general_from_vertex():
    p = ProcessParams.general((0.5, 0.5), 0.6, 0.5)
    rep = chapman_kolmogorov(p, 0.5, 0.5, VERTEX, [VERTEX, Interior(1, 0.4)])
    assert rep.passed, rep.details


def test_chapman_kolmogorov_dirichlet():
    rep = chapman_kolmogorov(None, 0.3, 0.6, Interior(1, 0.5), [Interior(1, 0.2)],
                             g=StarGraph(1))
    assert rep.passed


@pytest.mark.parametrize("params", [
    ProcessParams.walsh((0.25, 0.75)),
    ProcessParams.elastic((0.25, 0.75), 1.2),
    ProcessParams.sticky((0.25, 0.75), 0.8),
    ProcessParams.general((0.2, 0.3, 0.5), 0.7, 0.4),
])
def test_generator_domain(params):
    rep = generator_domain_check(params)
    assert rep.passed, rep.details
    assert rep.bound == pytest.approx(1e-5)


def test_generator_residual_is_the_vertex_condition():
    p = ProcessParams.sticky((0.5, 0.5), 0.8)
    rep = generator_domain_check(p)
    bc = to_boundary(p)
    d = rep.details
    lhs = bc.a * d["u_v"] + 0.5 * bc.c * d["d2u_v"]
    rhs = sum(b * v for b, v in zip(bc.b, d["du"]))
    assert abs(lhs - rhs) == pytest.approx(rep.statistic, abs=1e-15)
    walsh_rhs = sum(0.5 * v for v in d["du"])
    assert abs(walsh_rhs) > 1e-3   # Walsh condition would fail


def test_ks_edge_test_accepts_and_rejects():
    p = ProcessParams.walsh((0.3, 0.7))
    n = 20_000
    b = simulate_batch(p, VERTEX, SimConfig(1e-3, 1.0, n_paths=n), RngConfig(21))
    good = ks_edge_test(b, transition(p, 1.0, VERTEX, StarGraph(2)))
    assert good.passed, good.details
    wrong = transition(ProcessParams.walsh((0.5, 0.5)), 1.0, VERTEX, StarGraph(2))
    assert not ks_edge_test(b, wrong).passed
    later = transition(p, 1.5, VERTEX, StarGraph(2))
    assert not ks_edge_test(b, later).passed


def test_reflected_chi2():
    gen = RngConfig(3).generator()
    x, ell = sample_reflected_localtime(1.0, gen, size=100_000)
    assert reflected_localtime_chi2(x, ell, 1.0, 0.01).passed
    # swapping in the wrong time scale must be detected
    assert not reflected_localtime_chi2(x * 1.1, ell * 1.1, 1.0, 0.01).passed
