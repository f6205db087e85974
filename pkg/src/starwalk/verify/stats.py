"""Monte Carlo checks against closed forms.

Closeness checks use the tolerance ``3 SE + bias``.  The bias term comes
from a common-random-numbers companion run on the step ``4 dt`` (four fine
normals per coarse step): with an ``O(sqrt(dt))`` leading error the fine
bias is estimated by ``|mean_coarse - mean_fine| / (sqrt(4) - 1)``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import stats

from ..core import VERTEX, GraphPoint, ProcessParams, Regime
from ..kernels.measure import KernelMeasure
from ..simulate.engine import BatchResult, SimConfig, simulate_batch
from ..simulate.rng import RngConfig
from .report import TestReport, combine

COARSEN = 4
KS_MIN_SAMPLES = 10_000


def ks_critical(n: int, alpha: float) -> float:
    """Asymptotic Kolmogorov critical value ``K_{1-alpha} / sqrt(n)``."""
    return float(stats.kstwobign.isf(alpha)) / math.sqrt(n)


def ks_statistic(samples: np.ndarray, cdf) -> float:
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    F = cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def bias_estimate(fine: np.ndarray, coarse: np.ndarray, order: float = 0.5) -> float:
    """Leading-order bias of the fine estimate from a coarse companion run."""
    return abs(float(np.mean(coarse) - np.mean(fine))) / (COARSEN ** order - 1.0)


def mc_check(name: str, target: float, fine: np.ndarray, coarse: np.ndarray | None = None,
             extra: float = 0.0, **details) -> TestReport:
    """``|mean - target| <= 3 SE + bias + extra``."""
    fine = np.asarray(fine, dtype=float)
    n = len(fine)
    est = float(np.mean(fine))
    se = float(np.std(fine, ddof=1)) / math.sqrt(n)
    bias = bias_estimate(fine, coarse) if coarse is not None else 0.0
    tol = 3.0 * se + bias + extra
    return TestReport(name, abs(est - target), tol, n,
                      details={"estimate": est, "target": target, "se": se, "bias": bias,
                               "extra": extra, **details})


def paired_runs(params, start, cfg, rng, mode, **kw) -> tuple[BatchResult, BatchResult]:
    fine = simulate_batch(params, start, cfg, rng, mode, **kw)
    coarse = simulate_batch(params, start, cfg, rng, mode, coarsen=COARSEN, **kw)
    return fine, coarse


def ks_edge_test(samples: BatchResult, analytic: KernelMeasure, alpha: float = 0.01,
                 name: str = "ks_edge_test", n_panels: int = 4000) -> TestReport:
    """Per-edge KS of the conditional magnitude law plus a chi-square test
    of edge / vertex / killed frequencies against the analytic masses.
    Sub-tests share ``alpha`` by Bonferroni."""
    n_edges = analytic.n_edges
    killed = np.asarray(samples.killed, dtype=bool)
    at_v = (np.asarray(samples.edge) == 0) & ~killed
    masses = np.array([analytic.edge_mass(m) for m in range(1, n_edges + 1)])
    probs = list(masses)
    counts = [int(np.sum((samples.edge == m) & ~killed & ~at_v)) for m in range(1, n_edges + 1)]
    labels = [f"edge{m}" for m in range(1, n_edges + 1)]
    if analytic.atom > 0.0:
        probs.append(analytic.atom)
        counts.append(int(at_v.sum()))
        labels.append("vertex")
    elif at_v.any():
        # a vertex state of zero probability: fold into the nearest class
        counts[0] += int(at_v.sum())
    lost = 1.0 - sum(probs)
    if lost > 1e-9:
        probs.append(lost)
        counts.append(int(killed.sum()))
        labels.append("killed")
    probs = np.asarray(probs)
    probs = probs / probs.sum()
    counts = np.asarray(counts)
    n = int(counts.sum())

    n_ks = sum(1 for m in range(1, n_edges + 1) if counts[m - 1] > 0)
    a_each = alpha / (n_ks + 1)
    parts = []
    keep = probs > 0.0
    chi = float(np.sum((counts[keep] - n * probs[keep]) ** 2 / (n * probs[keep])))
    dof = int(keep.sum()) - 1
    if dof > 0:
        parts.append(TestReport("frequencies (chi2)", chi, float(stats.chi2.isf(a_each, dof)), n,
                                details={"labels": labels, "counts": counts.tolist(),
                                         "expected": (n * probs).tolist(), "alpha": a_each}))
    for m in range(1, n_edges + 1):
        sel = (samples.edge == m) & ~killed & ~at_v
        k = int(sel.sum())
        if k == 0:
            parts.append(TestReport.skip(f"edge {m} magnitude (KS)", "empty sample class"))
            continue
        grid, cum = analytic.edge_cdf(m, n_panels)
        total = cum[-1]

        def cdf(x, grid=grid, cum=cum, total=total):
            return np.interp(x, grid, cum / total, right=1.0)

        D = ks_statistic(samples.x[sel], cdf)
        parts.append(TestReport(f"edge {m} magnitude (KS)", D, ks_critical(k, a_each), k,
                                details={"alpha": a_each}))
    return combine(name, parts, alpha=alpha)


def exit_mean_check(params: ProcessParams, cfg: SimConfig, rng: RngConfig,
                    eps: float = 0.1) -> TestReport:
    """``E_v[exit time of the eps-ball] = eps^2 + gamma eps`` (conservative
    regimes; ``cfg.horizon`` caps the intrinsic time)."""
    f, c = paired_runs(params, VERTEX, cfg, rng, "exit", ball_eps=eps)
    return mc_check(f"{params.regime.value}: E_v[H_eps] = eps^2 + gamma eps",
                    eps * eps + params.gamma * eps, f.time, c.time, eps=eps,
                    gamma=params.gamma, dt=cfg.dt, truncated=int(f.truncated.sum()))


def survival_check(params: ProcessParams, cfg: SimConfig, rng: RngConfig,
                   eps: float = 0.1) -> TestReport:
    """``P_v(exit of the eps-ball before the kill) = 1 / (1 + eps beta)``."""
    f, c = paired_runs(params, VERTEX, cfg, rng, "exit", ball_eps=eps)
    return mc_check(f"{params.regime.value}: P_v(H_eps < zeta) = 1/(1+eps beta)",
                    1.0 / (1.0 + eps * params.beta), (~f.killed).astype(float),
                    (~c.killed).astype(float), eps=eps, beta=params.beta, dt=cfg.dt)


def lifetime_transform_check(params: ProcessParams, cfg: SimConfig, rng: RngConfig,
                             lam: float = 2.0) -> TestReport:
    """``E_v[exp(-lam zeta)] = beta / (beta + sqrt(2 lam) + gamma lam)``;
    the horizon truncates ``zeta`` with tail bound ``exp(-lam horizon)``."""
    beta, gamma = params.beta, params.gamma
    f, c = paired_runs(params, VERTEX, cfg, rng, "lifetime")
    target = beta / (beta + math.sqrt(2.0 * lam) + gamma * lam)
    tail = math.exp(-lam * cfg.horizon)
    return mc_check(f"{params.regime.value}: E_v[exp(-lam zeta)]", target,
                    np.exp(-lam * f.time), np.exp(-lam * c.time), extra=tail,
                    lam=lam, beta=beta, gamma=gamma, dt=cfg.dt,
                    truncated=int(f.truncated.sum()))


def mean_checks(params: ProcessParams, cfg: SimConfig, rng: RngConfig, eps: float = 0.1,
                lam: float = 2.0, lifetime_cfg: SimConfig | None = None) -> list[TestReport]:
    """Scalar identities from the vertex, each as ``3 SE + bias``:

    * conservative regimes: ``E[exit time of the eps-ball] = eps^2 + gamma eps``;
    * killed regimes: ``P(exit before kill) = 1 / (1 + eps beta)`` and
      ``E[exp(-lam zeta)] = beta / (beta + sqrt(2 lam) + gamma lam)``.

    ``cfg`` drives the exit runs, ``lifetime_cfg`` (default ``cfg``) the
    lifetime run.
    """
    if params.regime is Regime.ABSORBED_KILLED:
        return [TestReport.skip("mean_checks", "no excursion structure in the absorbed regime")]
    if params.beta == 0.0:
        return [exit_mean_check(params, cfg, rng, eps)]
    return [survival_check(params, cfg, rng, eps),
            lifetime_transform_check(params, lifetime_cfg or cfg, rng, lam)]


def alpha_potential_check(params: ProcessParams, cfg: SimConfig, rng: RngConfig,
                          alpha: float, start: GraphPoint = VERTEX) -> TestReport:
    """``E_v[int_0^inf exp(-alpha t) dL_t] = 1 / (sqrt(2 alpha) + gamma alpha)``,
    truncated at ``cfg.horizon`` with tail bound
    ``exp(-alpha T) / (alpha sqrt(2 pi T))``."""
    f, c = paired_runs(params, start, cfg, rng, "potential", alpha=alpha)
    T = cfg.horizon
    target = 1.0 / (math.sqrt(2.0 * alpha) + params.gamma * alpha)
    tail = math.exp(-alpha * T) / (alpha * math.sqrt(2.0 * math.pi * T))
    return mc_check(f"{params.regime.value}: alpha-potential of L", target, f.potential,
                    c.potential, extra=tail, alpha=alpha, gamma=params.gamma, dt=cfg.dt,
                    lt_method=cfg.lt_method)


def exit_localtime_ks(params: ProcessParams, cfg: SimConfig, rng: RngConfig, eps: float,
                      alpha: float = 0.01) -> TestReport:
    """Local time at the first exit of the ``eps``-ball is ``Exp(mean eps)``."""
    r = simulate_batch(params, VERTEX, cfg, rng, "exit", ball_eps=eps)
    n = r.n
    if n < KS_MIN_SAMPLES:
        raise ValueError(f"KS needs n >= {KS_MIN_SAMPLES} for the asymptotic critical value")
    D = ks_statistic(r.local_time, lambda x: 1.0 - np.exp(-x / eps))
    return TestReport("local time at eps-exit ~ Exp(mean eps) (KS)", D, ks_critical(n, alpha), n,
                      details={"eps": eps, "alpha": alpha, "mean": float(r.local_time.mean()),
                               "dt": cfg.dt, "lt_method": cfg.lt_method})
