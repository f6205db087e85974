"""The acceptance suite: eleven end-to-end criteria, each a function
returning a :class:`TestReport`.

``quick`` variants shrink the Monte Carlo sizes (the deterministic checks
are identical); the tolerances are computed the same way in both.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special, stats

from ..core import VERTEX, Interior, ProcessParams, StarGraph
from ..kernels.measure import transition
from ..kernels.special import g_0gamma
from ..scattering import process_smatrix, sticky_smatrix_k, sticky_spectral
from ..simulate.engine import SimConfig, simulate_batch
from ..simulate.rng import RngConfig
from ..simulate.samplers import (sample_first_hitting, sample_inverse_localtime,
                                 sample_reflected_localtime)
from .numeric import chapman_kolmogorov, generator_domain_check, laplace_consistency
from .report import TestReport, combine
from .stats import (alpha_potential_check, exit_localtime_ks, exit_mean_check, ks_edge_test,
                    lifetime_transform_check, mc_check, paired_runs, survival_check)

DEFAULT_SEED = 42


@dataclass(frozen=True)
class Criterion:
    number: int
    title: str
    runtime_limit: float  # seconds
    fn: Callable[..., TestReport]


def _stream(seed: int, number: int) -> RngConfig:
    # one stream per criterion so that running a subset changes nothing
    return RngConfig(seed, number)


# ---- 1, 2, 11: scattering ---------------------------------------------------

def smatrix_algebra(seed: int = DEFAULT_SEED, quick: bool = False) -> TestReport:
    rng = _stream(seed, 1).generator()
    inv, det = 0.0, 0.0
    count = 0
    for n in range(1, 7):
        for _ in range(100):
            w = rng.dirichlet(np.ones(n))
            w = w / w.sum()
            S = process_smatrix(ProcessParams.walsh(w), 1.0)
            inv = max(inv, S.involution_residual())
            det = max(det, abs(S.det() - (-1.0) ** (n + 1)))
            count += 1
    return combine("S-matrix involution and determinant", [
        TestReport("max |S S - I|", inv, 1e-12, count),
        TestReport("max |det S - (-1)^(n+1)|", det, 1e-10, count),
    ])


def limit_degeneracies(seed: int = DEFAULT_SEED, quick: bool = False) -> TestReport:
    rng = _stream(seed, 2).generator()
    tiny = 1e-12
    parts = []
    for n in (1, 2, 3, 5):
        w = tuple(rng.dirichlet(np.ones(n)))
        pairs = [
            ("elastic(beta->0) vs walsh", ProcessParams.elastic(w, tiny), ProcessParams.walsh(w)),
            ("sticky(gamma->0) vs walsh", ProcessParams.sticky(w, tiny), ProcessParams.walsh(w)),
            ("general(gamma->0) vs elastic", ProcessParams.general(w, 0.7, tiny),
             ProcessParams.elastic(w, 0.7)),
            ("general(beta->0) vs sticky", ProcessParams.general(w, tiny, 0.7),
             ProcessParams.sticky(w, 0.7)),
        ]
        for name, p, q in pairs:
            err = max(float(np.max(np.abs(process_smatrix(p, lam).entries
                                          - process_smatrix(q, lam).entries)))
                      for lam in (0.1, 1.0, 10.0))
            parts.append(TestReport(f"{name} (n={n})", err, 1e-10, 3))
    return combine("limit degeneracies of S(lambda)", parts, eps=tiny)


def spectral_remark(seed: int = DEFAULT_SEED, quick: bool = False) -> TestReport:
    parts = []
    for gamma, n, k in ((2.0, 3, 0.7), (0.5, 2, 1.3), (1.0, 5, 4.0)):
        sp = sticky_spectral(gamma, n, k)
        parts.append(TestReport(f"E_b = -4/gamma^2 (gamma={gamma})",
                                abs(sp.energy + 4.0 / gamma ** 2), 1e-14, 1))
        norm, _ = integrate.quad(lambda x: sp.psi(x) ** 2, 0.0, np.inf, epsabs=1e-14,
                                 epsrel=1e-13)
        parts.append(TestReport(f"||psi_b||^2 = 1 (gamma={gamma}, n={n})",
                                abs(n * norm - 1.0), 1e-10, 1))
        # time delay from a finite-difference derivative of S along k
        w = np.full(n, 1.0 / n)
        h = 1e-3 * k
        dS = (-sticky_smatrix_k(gamma, w, k + 2 * h) + 8 * sticky_smatrix_k(gamma, w, k + h)
              - 8 * sticky_smatrix_k(gamma, w, k - h) + sticky_smatrix_k(gamma, w, k - 2 * h)) / (12 * h)
        T = np.linalg.solve(sticky_smatrix_k(gamma, w, k), dS) / (2j * k)
        ev = np.linalg.eigvals(T)
        top = ev[np.argmax(np.abs(ev))]
        rest = np.sort(np.abs(ev))[:-1]
        err = max(abs(top - sp.time_delay_eigenvalue), float(rest.max(initial=0.0)))
        parts.append(TestReport(f"time-delay eigenvalue (gamma={gamma}, k={k})", err, 1e-6, n,
                                details={"fd": complex(top).real,
                                         "closed_form": sp.time_delay_eigenvalue}))
    return combine("sticky bound state and time delay", parts)


# ---- 3-6: deterministic kernels ---------------------------------------------

def laplace_correspondences(seed: int = DEFAULT_SEED, quick: bool = False) -> TestReport:
    return laplace_consistency((0.5, 1.0, 2.0), (0.25, 0.5, 1.0), beta=1.0, gamma=1.0)


def kernel_mass(seed: int = DEFAULT_SEED, quick: bool = False) -> TestReport:
    ts = (0.25, 1.0, 4.0)
    w = (0.3, 0.7)
    g = StarGraph(2)
    parts = []
    for p in (ProcessParams.walsh(w), ProcessParams.sticky(w, 0.5)):
        for src in (VERTEX, Interior(1, 0.5)):
            err = max(abs(transition(p, t, src, g).total_mass() - 1.0) for t in ts)
            parts.append(TestReport(f"{p.regime.value} mass = 1 from {src}", err, 1e-7, len(ts)))
    for p in (ProcessParams.elastic(w, 1.0), ProcessParams.general(w, 1.0, 0.5),
              ProcessParams.absorbed(2, 1.0)):
        for src in (VERTEX, Interior(1, 0.5)):
            m = [transition(p, t, src, g).total_mass() for t in ts]
            inside = all(0.0 < v < 1.0 for v in m)
            rises = max(0.0, max(b - a for a, b in zip(m[:-1], m[1:])))
            # statistic 0 when the masses sit in (0, 1) and never increase
            stat = (0.0 if inside else 1.0) + rises
            parts.append(TestReport(f"{p.regime.value} mass in (0,1), non-increasing from {src}",
                                    stat, 0.0, len(ts), details={"masses": m}))
    return combine("transition kernel mass", parts, ts=list(ts))


def chapman_kolmogorov_check(seed: int = DEFAULT_SEED, quick: bool = False) -> TestReport:
    g = StarGraph(2)
    ys = (0.1, 0.4, 0.8, 1.2, 2.0)
    walsh_targets = [Interior(m, y) for m in (1, 2) for y in ys]
    dir_targets = [Interior(1, float(y)) for y in np.linspace(0.1, 2.0, 10)]
    return combine("Chapman-Kolmogorov", [
        chapman_kolmogorov(ProcessParams.walsh((0.5, 0.5)), 0.5, 0.5, Interior(1, 0.7),
                           walsh_targets, g),
        chapman_kolmogorov(ProcessParams.walsh((0.3, 0.7)), 0.5, 0.5, VERTEX, walsh_targets, g),
        chapman_kolmogorov(None, 0.5, 0.5, Interior(1, 0.7), dir_targets, g),
    ])


def generator_conditions(seed: int = DEFAULT_SEED, quick: bool = False) -> TestReport:
    w = (0.3, 0.7)
    cases = [ProcessParams.walsh(w), ProcessParams.walsh((0.2, 0.3, 0.5)),
             ProcessParams.elastic(w, 2.0), ProcessParams.sticky(w, 0.5),
             ProcessParams.general(w, 1.0, 0.5), ProcessParams.absorbed(2, 1.5)]
    parts = []
    for p in cases:
        r = generator_domain_check(p, lam=1.0)
        # the criterion pins the residual itself below 1e-5
        parts.append(TestReport(r.name, r.statistic, 1e-5, r.n_samples, details=r.details))
    return combine("generator boundary conditions", parts)


# ---- 7: exact samplers -------------------------------------------------------

def _laplace_mean(name, draws, lam, target):
    v = np.exp(-lam * draws)
    return mc_check(name, target, v, lam=lam)


def reflected_localtime_chi2(x, ell, t: float, alpha: float, bins: int = 20,
                             min_expected: float = 5.0) -> TestReport:
    """20 x 20 chi-square of ``(|B_t|, L_t)`` against the joint density.

    The density depends on ``u = x + l`` only; with
    ``K(s) = 2 Q(s / sqrt(t))`` (``Q`` the normal tail) the rectangle mass is
    ``K(a2+b2) - K(a1+b2) - K(a2+b1) + K(a1+b1)``.  Cells with fewer than
    ``min_expected`` expected counts are pooled.
    """
    n = len(x)
    edges = np.concatenate([np.linspace(0.0, 2.0 * math.sqrt(t), bins), [np.inf]])

    def K(s):
        return 2.0 * special.ndtr(-s / math.sqrt(t))

    a1, a2 = edges[:-1, None], edges[1:, None]
    b1, b2 = edges[None, :-1], edges[None, 1:]
    mass = K(a2 + b2) - K(a1 + b2) - K(a2 + b1) + K(a1 + b1)
    ix = np.searchsorted(edges, x, side="right") - 1
    il = np.searchsorted(edges, ell, side="right") - 1
    counts = np.zeros((bins, bins))
    np.add.at(counts, (ix, il), 1.0)
    exp_ = n * mass
    small = exp_ < min_expected
    obs = np.append(counts[~small], counts[small].sum())
    ex = np.append(exp_[~small], exp_[small].sum())
    keep = ex > 0
    chi = float(np.sum((obs[keep] - ex[keep]) ** 2 / ex[keep]))
    dof = int(keep.sum()) - 1
    return TestReport("reflected (|B_t|, L_t) joint law (chi2 20x20)", chi,
                      float(stats.chi2.isf(alpha, dof)), n,
                      details={"dof": dof, "pooled_cells": int(small.sum()), "alpha": alpha})


def exact_samplers(seed: int = DEFAULT_SEED, quick: bool = False) -> TestReport:
    n = 10 ** 5 if quick else 10 ** 6
    rc = _stream(seed, 7)
    r2 = math.sqrt(2.0)
    parts = [
        _laplace_mean("first hitting d=1: E[exp(-H)]",
                      sample_first_hitting(1.0, rc.generator(0), n), 1.0, math.exp(-r2)),
        _laplace_mean("first hitting d=2: E[exp(-H/2)]",
                      sample_first_hitting(2.0, rc.generator(1), n), 0.5, math.exp(-2.0)),
        _laplace_mean("inverse local time r=1, gamma=0: E[exp(-K)]",
                      sample_inverse_localtime(1.0, 0.0, rc.generator(2), n), 1.0, math.exp(-r2)),
        _laplace_mean("inverse local time r=2, gamma=1: E[exp(-K)]",
                      sample_inverse_localtime(2.0, 1.0, rc.generator(3), n), 1.0,
                      math.exp(-(r2 + 1.0) * 2.0)),
    ]
    x, ell = sample_reflected_localtime(1.0, rc.generator(4), n)
    parts.append(reflected_localtime_chi2(x, ell, 1.0, 0.01))
    return combine("exact samplers", parts)


# ---- 8-10: Monte Carlo -------------------------------------------------------

def mc_vs_closed_form(seed: int = DEFAULT_SEED, quick: bool = False) -> TestReport:
    n = 10 ** 4 if quick else 10 ** 5
    dt = 1e-3 if quick else 1e-4
    cfg = SimConfig(dt=dt, horizon=1.0, n_paths=n)
    g = StarGraph(2)
    rc = _stream(seed, 8)
    w = (0.5, 0.5)
    parts = []

    walsh = ProcessParams.walsh(w)
    f = simulate_batch(walsh, VERTEX, cfg, rc, "terminal")
    parts.append(ks_edge_test(f, transition(walsh, 1.0, VERTEX, g), 0.01,
                              "walsh marginal vs closed form"))

    gamma = 0.6
    sticky = ProcessParams.sticky(w, gamma)
    # the atom is a pointwise-in-time functional of L; the occupation
    # estimator's bias there does not follow the sqrt(dt) model at dt = 1e-4
    bridge_cfg = SimConfig(dt=dt, horizon=1.0, n_paths=n, lt_method="bridge")
    f, c = paired_runs(sticky, VERTEX, bridge_cfg, rc, "terminal", path_offset=n)
    parts.append(mc_check("sticky vertex frequency = gamma g_0gamma(1, 0)",
                          gamma * g_0gamma(1.0, 0.0, gamma), f.at_vertex.astype(float),
                          c.at_vertex.astype(float), gamma=gamma, dt=dt,
                          lt_method="bridge"))

    elastic = ProcessParams.elastic(w, 1.0)
    f, c = paired_runs(elastic, VERTEX, cfg, rc, "terminal", path_offset=2 * n)
    target = 1.0 - transition(elastic, 1.0, VERTEX, g).total_mass()
    parts.append(mc_check("elastic killed fraction = 1 - kernel mass", target,
                          f.killed.astype(float), c.killed.astype(float), beta=1.0, dt=dt))
    return combine("Monte Carlo vs closed-form kernels", parts, n_paths=n, dt=dt)


def scalar_identities(seed: int = DEFAULT_SEED, quick: bool = False) -> TestReport:
    n = 10 ** 4 if quick else 10 ** 5
    fine = 1e-5 if quick else 1e-6
    coarse_life = 1e-3 if quick else 1e-4
    w = (0.5, 0.5)
    rc = _stream(seed, 9)
    exit_cfg = SimConfig(dt=fine, horizon=1.0, n_paths=n)
    life_cfg = SimConfig(dt=coarse_life, horizon=4.0, n_paths=n)
    parts = [
        exit_mean_check(ProcessParams.walsh(w), exit_cfg, rc, eps=0.1),
        exit_mean_check(ProcessParams.sticky(w, 0.5), exit_cfg, _stream(seed, 91), eps=0.1),
        survival_check(ProcessParams.elastic(w, 2.0), exit_cfg, _stream(seed, 92), eps=0.1),
        lifetime_transform_check(ProcessParams.general(w, 1.0, 0.5), life_cfg,
                                 _stream(seed, 93), lam=2.0),
    ]
    return combine("scalar identities", parts, n_paths=n)


def localtime_calibration(seed: int = DEFAULT_SEED, quick: bool = False) -> TestReport:
    n_pot = 4000 if quick else 20000
    dt = 1e-3 if quick else 1e-4
    exit_dt = 1e-5 if quick else 1e-6
    w = (0.5, 0.5)
    cfg = SimConfig(dt=dt, horizon=4.0, n_paths=n_pot)
    parts = [
        alpha_potential_check(ProcessParams.walsh(w), cfg, _stream(seed, 10), alpha=2.0),
        alpha_potential_check(ProcessParams.sticky(w, 0.5), cfg, _stream(seed, 101), alpha=2.0),
        exit_localtime_ks(ProcessParams.walsh(w), SimConfig(dt=exit_dt, horizon=1.0,
                                                            n_paths=10 ** 4),
                          _stream(seed, 102), eps=0.1, alpha=0.01),
    ]
    return combine("local-time calibration", parts)


CRITERIA = [
    Criterion(1, "S-matrix algebra", 1.0, smatrix_algebra),
    Criterion(2, "limit degeneracies", 1.0, limit_degeneracies),
    Criterion(3, "Laplace correspondences", 30.0, laplace_correspondences),
    Criterion(4, "kernel mass", 30.0, kernel_mass),
    Criterion(5, "Chapman-Kolmogorov", 60.0, chapman_kolmogorov_check),
    Criterion(6, "generator boundary conditions", 60.0, generator_conditions),
    Criterion(7, "exact samplers", 60.0, exact_samplers),
    Criterion(8, "Monte Carlo vs closed form", 300.0, mc_vs_closed_form),
    Criterion(9, "scalar identities", 300.0, scalar_identities),
    Criterion(10, "local-time calibration", 300.0, localtime_calibration),
    Criterion(11, "spectral remark", 1.0, spectral_remark),
]


def run_criterion(number: int, seed: int = DEFAULT_SEED, quick: bool = False) -> TestReport:
    c = CRITERIA[number - 1]
    t0 = time.perf_counter()
    rep = c.fn(seed=seed, quick=quick)
    elapsed = time.perf_counter() - t0
    rep.name = f"[{c.number}] {c.title}: {rep.name}"
    rep.details["runtime_s"] = elapsed
    rep.details["runtime_limit_s"] = c.runtime_limit
    return rep


def run_suite(suite: str = "primary", seed: int = DEFAULT_SEED,
              only: list[int] | None = None, progress: Callable[[TestReport], None] | None = None
              ) -> list[TestReport]:
    """Run the acceptance criteria; ``suite`` is ``primary`` or ``quick``."""
    if suite not in ("primary", "quick"):
        raise ValueError("suite must be 'primary' or 'quick'")
    out = []
    for c in CRITERIA:
        if only and c.number not in only:
            continue
        rep = run_criterion(c.number, seed, quick=(suite == "quick"))
        if progress is not None:
            progress(rep)
        out.append(rep)
    return out
