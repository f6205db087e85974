"""Path simulation front end: configuration, batches, trajectories, I/O.

The Walsh-family regimes share one construction.  A signed driver ``y``
performs Brownian steps; ``|y|`` is the distance to the vertex and a fresh
edge label is drawn from ``Categorical(w)`` whenever ``y`` changes sign.
Local time ``L`` accumulates by one of three estimators, killing happens
when ``L`` passes an independent ``Exp(beta)`` level ``S``, and the
reported clock is ``t = s + gamma L_s``.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy import special

from ..core import VERTEX, GraphPoint, Interior, ProcessParams, Regime
from ..errors import ValidationError
from . import layout as L_
from .backend import kernels, max_workers
from .rng import AUX, DRIVER, RngConfig, VecStreams, path_keys_np

LT_METHODS = {"occupation": L_.LT_OCCUPATION, "downcrossing": L_.LT_DOWNCROSSING,
              "bridge": L_.LT_BRIDGE}
MODES = {"terminal": L_.MODE_TERMINAL, "exit": L_.MODE_EXIT,
         "potential": L_.MODE_POTENTIAL, "lifetime": L_.MODE_LIFETIME}


@dataclass(frozen=True)
class SimConfig:
    """Discretization settings.

    ``local_time_eps_factor`` sets the occupation window ``eps0 sqrt(dt)``.
    ``lt_method`` picks the local-time estimator: ``occupation`` (default),
    ``bridge`` (exact given the step endpoints) or ``downcrossing``, a
    cross-check that lags ``L`` by about ``2 eps`` and needs ``eps0 >> 1``.
    ``bridge_relabel`` also
    draws a new label when the Brownian bridge over a step touches the
    vertex (only meaningful with the ``bridge`` estimator).
    """

    dt: float = 1e-3
    horizon: float = 1.0
    local_time_eps_factor: float = 1.0
    n_paths: int = 1
    lt_method: str = "occupation"
    bridge_relabel: bool = False

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValidationError("dt > 0 violated")
        if not self.horizon > 0.0:
            raise ValidationError("horizon > 0 violated")
        if not self.dt < self.horizon:
            raise ValidationError("dt < horizon violated")
        if not self.local_time_eps_factor > 0.0:
            raise ValidationError("local_time_eps_factor > 0 violated")
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise ValidationError("n_paths >= 1 violated")
        if self.lt_method not in LT_METHODS:
            raise ValidationError(f"lt_method must be one of {sorted(LT_METHODS)}")

    @property
    def lt_eps(self) -> float:
        return self.local_time_eps_factor * math.sqrt(self.dt)


@dataclass
class Trajectory:
    """Discretized path on the (possibly time-changed) clock.

    ``edges`` uses 0 for the vertex.  ``intrinsic_times`` is the clock of the
    underlying Walsh motion, so ``times - intrinsic_times = gamma * local_time``.
    The last record can pass the horizon by less than one step.
    """

    times: np.ndarray
    intrinsic_times: np.ndarray
    edges: np.ndarray
    xs: np.ndarray
    local_time: np.ndarray
    alive: np.ndarray
    lifetime: float
    killed: bool

    @property
    def states(self) -> list[GraphPoint]:
        return [VERTEX if e == 0 or x == 0.0 else Interior(int(e), float(x))
                for e, x in zip(self.edges, self.xs)]

    def __len__(self):
        return len(self.times)


@dataclass
class BatchResult:
    """Per-path summary of a batch run (arrays of length ``n_paths``).

    ``time`` is the event time on the reported clock: the horizon for
    ``terminal`` and ``potential``, the exit time for ``exit``, the lifetime
    (``inf`` if still alive at the cap) for ``lifetime``.
    """

    mode: str
    time: np.ndarray
    edge: np.ndarray
    x: np.ndarray
    local_time: np.ndarray
    intrinsic_time: np.ndarray
    potential: np.ndarray
    kill_level: np.ndarray
    truncated: np.ndarray
    killed: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.time)

    @property
    def at_vertex(self) -> np.ndarray:
        return (self.edge == 0) & ~self.killed

    def save_npz(self, path) -> None:
        np.savez_compressed(path, mode=self.mode, time=self.time, edge=self.edge, x=self.x,
                            local_time=self.local_time, intrinsic_time=self.intrinsic_time,
                            potential=self.potential, kill_level=self.kill_level,
                            truncated=self.truncated, killed=self.killed)

    @classmethod
    def load_npz(cls, path) -> "BatchResult":
        with np.load(path) as z:
            return cls(str(z["mode"]), z["time"], z["edge"], z["x"], z["local_time"],
                       z["intrinsic_time"], z["potential"], z["kill_level"],
                       z["truncated"], z["killed"])


def _start_coords(params: ProcessParams, start: GraphPoint) -> tuple[int, float]:
    if isinstance(start, Interior):
        if start.edge > params.n_edges:
            raise ValidationError("start edge out of range")
        return start.edge, start.x
    return 0, 0.0


def _weights_cdf(params: ProcessParams) -> np.ndarray:
    cdf = np.cumsum(params.weights)
    cdf[-1] = 1.0
    return cdf


def _pack(params, start, cfg, mode, coarsen, ball, alpha, max_steps):
    e0, x0 = _start_coords(params, start)
    h = cfg.dt * coarsen
    fp = np.zeros(L_.N_FP)
    fp[L_.F_BETA] = params.beta
    fp[L_.F_GAMMA] = params.gamma
    fp[L_.F_DT] = cfg.dt
    fp[L_.F_T] = cfg.horizon
    fp[L_.F_BALL] = ball
    fp[L_.F_ALPHA] = alpha
    # the occupation window follows the step actually taken
    fp[L_.F_EPS] = cfg.local_time_eps_factor * math.sqrt(h)
    fp[L_.F_X0] = x0
    fp[L_.F_SMAX] = cfg.horizon
    ip = np.zeros(L_.N_IP, dtype=np.int64)
    ip[L_.I_MODE] = MODES[mode]
    ip[L_.I_NSUB] = coarsen
    ip[L_.I_LT] = LT_METHODS[cfg.lt_method]
    ip[L_.I_RELABEL] = int(cfg.bridge_relabel)
    ip[L_.I_EDGE0] = e0
    if max_steps is None:
        max_steps = int(math.ceil(cfg.horizon / h * (1.0 + 1e-9))) + 1
    ip[L_.I_MAXSTEPS] = max_steps
    return fp, ip


def _shards(n: int, n_shards: int) -> list[tuple[int, int]]:
    n_shards = max(1, min(n_shards, n))
    edges = np.linspace(0, n, n_shards + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def simulate_batch(params: ProcessParams, start: GraphPoint, cfg: SimConfig, rng: RngConfig,
                   mode: str = "terminal", *, ball_eps: float = 0.0, alpha: float = 0.0,
                   coarsen: int = 1, backend: str | None = None, n_shards: int | None = None,
                   path_offset: int = 0, max_steps: int | None = None) -> BatchResult:
    """Run ``cfg.n_paths`` independent paths and summarize each.

    Modes:
      ``terminal``  state at clock time ``cfg.horizon``;
      ``exit``      first exit from the open ball of radius ``ball_eps``
                    (intrinsic time capped at ``cfg.horizon``);
      ``potential`` ``sum exp(-alpha t) dL`` up to clock time ``cfg.horizon``;
      ``lifetime``  killing time, intrinsic time capped at ``cfg.horizon``.

    ``coarsen = m`` reruns on the step ``m dt`` with the same driver normals
    (``m`` fine normals summed per step): a common-random-numbers coarse
    companion used for bias budgets.
    """
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {sorted(MODES)}")
    if int(coarsen) != coarsen or coarsen < 1:
        raise ValidationError("coarsen >= 1 violated")
    if mode == "exit" and not ball_eps > 0.0:
        raise ValidationError("exit mode needs ball_eps > 0")
    if mode == "potential" and not alpha > 0.0:
        raise ValidationError("potential mode needs alpha > 0")
    if params.regime is Regime.ABSORBED_KILLED:
        return _absorbed_batch(params, start, cfg, rng, mode)

    n = int(cfg.n_paths)
    fp, ip = _pack(params, start, cfg, mode, int(coarsen), ball_eps, alpha, max_steps)
    cdf = _weights_cdf(params)
    base = rng.base_key
    out_f = np.empty((n, L_.N_OF))
    out_i = np.empty((n, 2), dtype=np.int64)
    mod = kernels(backend)
    workers = max_workers()
    shards = _shards(n, n_shards if n_shards is not None else workers)

    def run(sh):
        a, b = sh
        of = np.empty((b - a, L_.N_OF))
        oi = np.empty((b - a, 2), dtype=np.int64)
        mod.run_batch(base, path_offset + a, b - a, fp, ip, cdf, of, oi)
        out_f[a:b] = of
        out_i[a:b] = oi

    if len(shards) > 1 and workers > 1:
        with ThreadPoolExecutor(max_workers=min(workers, len(shards))) as ex:
            list(ex.map(run, shards))
    else:
        for sh in shards:
            run(sh)

    return BatchResult(
        mode=mode, time=out_f[:, L_.O_T], edge=out_i[:, 0], x=out_f[:, L_.O_X],
        local_time=out_f[:, L_.O_L], intrinsic_time=out_f[:, L_.O_S],
        potential=out_f[:, L_.O_POT], kill_level=out_f[:, L_.O_KILL_LEVEL],
        truncated=out_f[:, L_.O_TRUNC] != 0.0, killed=out_i[:, 1] != 0,
        meta={"dt": cfg.dt * coarsen, "backend": mod.__name__.rsplit(".", 1)[-1],
              "lt_method": cfg.lt_method, "n_shards": len(shards)})


def simulate_path(params: ProcessParams, start: GraphPoint, cfg: SimConfig, rng: RngConfig,
                  path_id: int = 0, backend: str | None = None) -> Trajectory:
    """One discretized trajectory up to clock time ``cfg.horizon`` or the kill."""
    if params.regime is Regime.ABSORBED_KILLED:
        return _absorbed_path(params, start, cfg, rng, path_id)
    fp, ip = _pack(params, start, cfg, "terminal", 1, 0.0, 0.0, None)
    n_steps = int(math.ceil(cfg.horizon / cfg.dt)) + 2
    cap = 2 * n_steps + 4
    rec_f = np.zeros((cap, 4))
    rec_i = np.zeros((cap, 2), dtype=np.int64)
    r = kernels(backend).record_path(rng.base_key, path_id, fp, ip, _weights_cdf(params),
                                     rec_f, rec_i)
    if r < 0:  # pragma: no cover - capacity is sized for the worst case
        raise RuntimeError("trajectory buffer overflow")
    rec_f, rec_i = rec_f[:r], rec_i[:r]
    killed = bool(rec_i[-1, 1] == 0)
    return Trajectory(times=rec_f[:, 0].copy(), intrinsic_times=rec_f[:, 1].copy(),
                      edges=rec_i[:, 0].copy(), xs=rec_f[:, 2].copy(),
                      local_time=rec_f[:, 3].copy(), alive=rec_i[:, 1] != 0,
                      lifetime=float(rec_f[-1, 0]) if killed else math.inf, killed=killed)


def simulate_paths(params, start, cfg, rng, backend=None) -> Iterable[Trajectory]:
    for p in range(cfg.n_paths):
        yield simulate_path(params, start, cfg, rng, path_id=p, backend=backend)


# ---- absorbed regime: exact event simulation ------------------------------

def _absorbed_batch(params, start, cfg, rng, mode) -> BatchResult:
    """Stopped at the vertex, killed after an ``Exp(beta)`` holding time.

    Exact: the hitting time is ``x^2/Z^2`` and, given no hit by ``T``, the
    position is drawn from the Dirichlet kernel by rejection.
    """
    if mode not in ("terminal", "lifetime"):
        raise ValidationError("absorbed regime supports 'terminal' and 'lifetime' modes")
    gen = rng.generator(label=1)
    n = int(cfg.n_paths)
    e0, x0 = _start_coords(params, start)
    if x0 > 0.0:
        z = gen.standard_normal(n)
        with np.errstate(divide="ignore"):
            H = x0 * x0 / (z * z)
    else:
        H = np.zeros(n)
    hold = gen.exponential(1.0 / params.beta, n) if params.beta > 0.0 else np.full(n, np.inf)
    zeta = H + hold
    T = cfg.horizon
    edge = np.zeros(n, dtype=np.int64)
    x = np.zeros(n)
    killed = np.zeros(n, dtype=bool)
    time = np.full(n, T)
    if mode == "lifetime":
        time = zeta.copy()
        killed[:] = np.isfinite(zeta)
    else:
        killed = zeta <= T
        free = np.flatnonzero(H > T)
        while free.size:
            b = x0 + math.sqrt(T) * gen.standard_normal(free.size)
            u = gen.random(free.size)
            with np.errstate(over="ignore"):
                ok = (b > 0.0) & (u >= np.exp(-2.0 * x0 * np.maximum(b, 0.0) / T))
            x[free[ok]] = b[ok]
            edge[free[ok]] = e0
            free = free[~ok]
    zeros = np.zeros(n)
    return BatchResult(mode=mode, time=time, edge=edge, x=x, local_time=zeros,
                       intrinsic_time=np.minimum(H, T), potential=zeros.copy(),
                       kill_level=hold, truncated=np.zeros(n, dtype=bool), killed=killed,
                       meta={"backend": "numpy-exact"})


def _absorbed_path(params, start, cfg, rng, path_id) -> Trajectory:
    """Grid path that stops at the first vertex visit (bridge test per step;
    the hitting time inside the step is drawn from the first-passage law
    conditioned on hitting within the step), holds, then is killed."""
    base = rng.base_key
    drv = VecStreams(path_keys_np(base, np.array([path_id]), DRIVER))
    aux = VecStreams(path_keys_np(base, np.array([path_id]), AUX))
    i0 = np.array([0])
    hold = (-math.log(1.0 - float(aux.uniform(i0)[0])) / params.beta
            if params.beta > 0.0 else math.inf)
    e0, y = _start_coords(params, start)
    dt, T = cfg.dt, cfg.horizon
    times, edges, xs = [0.0], [e0], [y]
    hit_at = 0.0 if y == 0.0 else None
    i = 0
    while hit_at is None and (i + 1) * dt <= T + 1e-12 * T:
        y1 = y + math.sqrt(dt) * float(drv.normal(i0)[0])
        u = float(aux.uniform(i0)[0])
        if y1 <= 0.0 or u < math.exp(-2.0 * y * y1 / dt):
            v = 1.0 - float(aux.uniform(i0)[0])
            q = v * special.erfc(y / math.sqrt(2.0 * dt))
            tau = y * y / (2.0 * special.erfcinv(q) ** 2)
            hit_at = i * dt + min(tau, dt)
            break
        y = y1
        i += 1
        times.append(i * dt)
        edges.append(e0)
        xs.append(y)
    killed = False
    lifetime = math.inf
    if hit_at is not None and hit_at <= T:
        times.append(hit_at)
        edges.append(0)
        xs.append(0.0)
        zeta = hit_at + hold
        if zeta <= T:
            killed, lifetime = True, zeta
            times.append(zeta)
            edges.append(0)
            xs.append(0.0)
        else:
            times.append(T)
            edges.append(0)
            xs.append(0.0)
    if hit_at == 0.0:
        times, edges, xs = times[1:], edges[1:], xs[1:]
    t = np.asarray(times)
    alive = np.ones(len(t), dtype=bool)
    if killed:
        alive[-1] = False
    z = np.zeros(len(t))
    return Trajectory(times=t, intrinsic_times=t.copy(), edges=np.asarray(edges, dtype=np.int64),
                      xs=np.asarray(xs), local_time=z, alive=alive, lifetime=lifetime,
                      killed=killed)


# ---- serialization --------------------------------------------------------

CSV_COLUMNS = ("path_id", "time", "edge", "x", "local_time", "alive")


def write_trajectories_csv(trajs: Iterable[Trajectory], fh, start_id: int = 0) -> int:
    """Stream trajectories as CSV rows; floats use shortest round-trip repr."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    rows = 0
    for pid, tr in enumerate(trajs, start=start_id):
        for t, e, x, lt, a in zip(tr.times, tr.edges, tr.xs, tr.local_time, tr.alive):
            w.writerow((pid, repr(float(t)), int(e), repr(float(x)), repr(float(lt)), int(a)))
            rows += 1
    return rows


def trajectories_to_csv(trajs: Iterable[Trajectory]) -> str:
    buf = io.StringIO()
    write_trajectories_csv(trajs, buf)
    return buf.getvalue()
