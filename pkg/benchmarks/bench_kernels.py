"""Numba vs numpy path kernels on one batch.

    python benchmarks/bench_kernels.py [--paths 2000] [--dt 1e-4] [--horizon 1]

Reports ns per path-step for each backend and local-time estimator, and the
largest difference between the two backends' outputs.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from starwalk.core import VERTEX, ProcessParams
from starwalk.simulate import RngConfig, SimConfig, simulate_batch


def _timed(fn, repeat: int):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=2000)
    ap.add_argument("--dt", type=float, default=1e-4)
    ap.add_argument("--horizon", type=float, default=1.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    params = ProcessParams.general((0.3, 0.7), beta=0.5, gamma=0.4)
    rng = RngConfig(seed=2024)
    steps = args.paths * args.horizon / args.dt
    print(f"{args.paths} paths x {args.horizon / args.dt:.0f} steps, regime {params.regime.value}")
    print(f"{'estimator':<14}{'numba ns/step':>15}{'numpy ns/step':>15}{'speedup':>10}{'max |diff|':>13}")
    for lt in ("occupation", "bridge", "downcrossing"):
        cfg = SimConfig(dt=args.dt, horizon=args.horizon, n_paths=args.paths, lt_method=lt)

        def run(backend):
            return simulate_batch(params, VERTEX, cfg, rng, "terminal", backend=backend)

        run("numba")  # compile outside the timing
        t_nb, a = _timed(lambda: run("numba"), args.repeat)
        t_np, b = _timed(lambda: run("numpy"), 1)
        diff = max(float(np.max(np.abs(a.x - b.x))),
                   float(np.max(np.abs(a.local_time - b.local_time))),
                   float(np.max(a.edge != b.edge)))
        print(f"{lt:<14}{1e9 * t_nb / steps:>15.1f}{1e9 * t_np / steps:>15.1f}"
              f"{t_np / t_nb:>10.1f}{diff:>13.2e}")


if __name__ == "__main__":
    main()
