"""Command-line front end.

Usage::

    starwalk <mode> [--config FILE] [flags]

Modes are ``kernel``, ``resolvent``, ``scatter``, ``simulate`` and
``verify``.  Every field of the JSON experiment config has a dotted flag
(``--boundary.a 0.2``, ``--run.n_paths 1000``); the short forms ``--a``,
``--b``, ``--c``, ``--n``, ``--t``, ``--lambda``, ``--start``, ``--seed``,
``--suite`` and ``--output`` are aliases.  Flags override the file.

Exit codes: 0 success, 1 invalid input or I/O failure, 2 failed verification.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import sys
from typing import Any

import numpy as np

from .core import (VERTEX, BoundaryCondition, Interior, ProcessParams, Regime, StarGraph,
                   classify_boundary)
from .errors import StarwalkError

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2

MODES = ("kernel", "resolvent", "scatter", "simulate", "verify")

DEFAULTS: dict[str, Any] = {
    "graph": {"n_edges": None},
    "boundary": {"a": 0.0, "b": [0.5, 0.5], "c": 0.0},
    "run": {
        "mode": None,
        "t": [1.0],
        "lambda": 1.0,
        "k": 1.0,
        "start": "vertex",
        "y_max": 4.0,
        "n_y": 40,
        "n_paths": 10,
        "dt": 1e-3,
        "horizon": 1.0,
        "seed": 42,
        "lt_method": "occupation",
        "suite": "primary",
        "only": [],
        "output": None,
        "format": "csv",
    },
}

ALIASES = {
    "n": "graph.n_edges", "a": "boundary.a", "b": "boundary.b", "c": "boundary.c",
    "t": "run.t", "lambda": "run.lambda", "start": "run.start", "seed": "run.seed",
    "suite": "run.suite", "output": "run.output", "format": "run.format",
    "n-paths": "run.n_paths", "dt": "run.dt", "horizon": "run.horizon",
}


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _floats(s: str) -> list[float]:
    return [float(v) for v in s.split(",") if v.strip()]


def _ints(s: str) -> list[int]:
    return [int(v) for v in s.split(",") if v.strip()]


def _start(s: str):
    s = s.strip()
    if s.lower() in ("vertex", "v"):
        return "vertex"
    edge, x = s.split(":") if ":" in s else s.split(",")
    return {"edge": int(edge), "x": float(x)}


# how each dotted field parses from the command line
FIELD_TYPES = {
    "graph.n_edges": int,
    "boundary.a": float, "boundary.b": _floats, "boundary.c": float,
    "run.t": _floats, "run.lambda": float, "run.k": float, "run.start": _start,
    "run.y_max": float, "run.n_y": int, "run.n_paths": int, "run.dt": float,
    "run.horizon": float, "run.seed": int, "run.lt_method": str, "run.suite": str,
    "run.only": _ints, "run.output": str, "run.format": str,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="starwalk", description="Brownian motions on a star graph.")
    p.add_argument("mode", choices=MODES)
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--emit-config", metavar="PATH",
                   help="write the effective config as JSON ('-' for stdout) and exit")
    for dotted, typ in FIELD_TYPES.items():
        names = ["--" + dotted] + ["--" + a for a, d in ALIASES.items() if d == dotted]
        p.add_argument(*names, dest=dotted, type=typ, default=None)
    return p


def _set(cfg: dict, dotted: str, value) -> None:
    sec, key = dotted.split(".")
    cfg[sec][key] = value


def _merge(base: dict, over: dict, where: str = "") -> None:
    for k, v in over.items():
        if k not in base:
            raise ConfigError(f"unknown config key '{where}{k}'")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"config key '{where}{k}' must be an object")
            _merge(base[k], v, f"{where}{k}.")
        else:
            base[k] = v


def load_config(argv: list[str]) -> dict:
    """Effective config: defaults, then the JSON file, then flags."""
    args = build_parser().parse_args(argv)
    cfg = copy.deepcopy(DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config {args.config}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("malformed config: top level must be an object")
        _merge(cfg, doc)
    for dotted in FIELD_TYPES:
        v = getattr(args, dotted)
        if v is not None:
            _set(cfg, dotted, v)
    cfg["run"]["mode"] = args.mode
    if isinstance(cfg["run"]["t"], (int, float)):
        cfg["run"]["t"] = [float(cfg["run"]["t"])]
    validate(cfg)
    cfg["_emit"] = args.emit_config
    return cfg


def validate(cfg: dict) -> None:
    run = cfg["run"]
    b = cfg["boundary"]["b"]
    if not isinstance(b, list) or not b:
        raise ConfigError("boundary.b must be a non-empty list")
    n = cfg["graph"]["n_edges"]
    if n is None:
        cfg["graph"]["n_edges"] = len(b)
    elif n != len(b):
        raise ConfigError(f"graph.n_edges = {n} does not match len(boundary.b) = {len(b)}")
    if run["mode"] not in MODES:
        raise ConfigError(f"run.mode must be one of {MODES}")
    if run["format"] not in ("csv", "json"):
        raise ConfigError("run.format must be csv or json")
    if run["suite"] not in ("primary", "quick"):
        raise ConfigError("run.suite must be primary or quick")
    st = run["start"]
    if st != "vertex":
        if not isinstance(st, dict) or set(st) != {"edge", "x"}:
            raise ConfigError("run.start must be 'vertex' or {edge, x}")
        if not 1 <= int(st["edge"]) <= cfg["graph"]["n_edges"]:
            raise ConfigError(f"run.start.edge {st['edge']} out of range "
                              f"1..{cfg['graph']['n_edges']}")
    if run["n_y"] < 1 or run["n_paths"] < 1:
        raise ConfigError("run.n_y and run.n_paths must be >= 1")
    if any(not 1 <= i <= 11 for i in run["only"]):
        raise ConfigError("run.only entries must be criterion numbers 1..11")


def effective_config(cfg: dict) -> dict:
    return {k: v for k, v in cfg.items() if not k.startswith("_")}


def _params(cfg: dict) -> ProcessParams:
    bd = cfg["boundary"]
    return classify_boundary(BoundaryCondition(bd["a"], tuple(bd["b"]), bd["c"]))


def _start_point(cfg: dict):
    st = cfg["run"]["start"]
    if st == "vertex":
        return VERTEX
    return Interior(int(st["edge"]), float(st["x"]))


class _Out:
    """Output sink: the configured path, or stdout."""

    def __init__(self, path):
        self.path = path
        self.fh = None

    def __enter__(self):
        if self.path in (None, "-"):
            self.fh = sys.stdout
        else:
            try:
                self.fh = open(self.path, "w", newline="")
            except OSError as exc:
                raise ConfigError(f"cannot write output {self.path}: {exc.strerror}") from exc
        return self.fh

    def __exit__(self, *exc):
        if self.fh is not sys.stdout:
            self.fh.close()
        else:
            self.fh.flush()
        return False


def _emit_rows(rows: list[dict], cfg: dict) -> None:
    with _Out(cfg["run"]["output"]) as fh:
        if cfg["run"]["format"] == "json":
            json.dump(rows, fh, indent=1)
            fh.write("\n")
            return
        wr = csv.writer(fh, lineterminator="\n")
        cols = list(rows[0]) if rows else []
        wr.writerow(cols)
        for r in rows:
            wr.writerow([repr(float(r[c])) if isinstance(r[c], float) else r[c] for c in cols])


def _kernel_rows(cfg: dict, kind: str) -> list[dict]:
    from .kernels import resolvent, transition

    params = _params(cfg)
    g = StarGraph(params.n_edges)
    start = _start_point(cfg)
    run = cfg["run"]
    ys = np.linspace(run["y_max"] / run["n_y"], run["y_max"], run["n_y"])
    rows = []
    values = run["t"] if kind == "transition" else [run["lambda"]]
    key = "t" if kind == "transition" else "lambda"
    for v in values:
        K = (transition if kind == "transition" else resolvent)(params, float(v), start, g)
        for m in range(1, params.n_edges + 1):
            dens = K.density(m, ys)
            for y, d in zip(ys, dens):
                rows.append({key: float(v), "edge": m, "y": float(y), "density": float(d),
                             "atom": float(K.atom)})
    return rows


def cmd_kernel(cfg: dict) -> int:
    _emit_rows(_kernel_rows(cfg, "transition"), cfg)
    return EXIT_OK


def cmd_resolvent(cfg: dict) -> int:
    _emit_rows(_kernel_rows(cfg, "resolvent"), cfg)
    return EXIT_OK


def _fmt(x: float) -> str:
    r = round(x)
    return str(int(r)) if abs(x - r) < 1e-12 else repr(float(x))


def cmd_scatter(cfg: dict) -> int:
    from .scattering import process_smatrix, sticky_spectral

    params = _params(cfg)
    lam = cfg["run"]["lambda"]
    S = process_smatrix(params, lam)
    doc = {"regime": params.regime.value, "lambda": lam,
           "S": S.entries.tolist(), "det": float(S.det()),
           "involution_residual": S.involution_residual()}
    if params.regime is Regime.STICKY:
        k = cfg["run"]["k"]
        sp = sticky_spectral(params.gamma, params.n_edges, k)
        doc.update(bound_state_energy=sp.energy, k=k,
                   time_delay_eigenvalue=sp.time_delay_eigenvalue)
    with _Out(cfg["run"]["output"]) as fh:
        if cfg["run"]["format"] == "json":
            json.dump(doc, fh, indent=1)
            fh.write("\n")
        else:
            rows = ",".join("[" + ",".join(_fmt(x) for x in row) + "]" for row in S.entries)
            fh.write(f"regime = {doc['regime']}\nlambda = {lam!r}\nS = [{rows}]\n"
                     f"det = {_fmt(doc['det'])}\n"
                     f"involution_residual = {doc['involution_residual']:.3g}\n")
            if "bound_state_energy" in doc:
                fh.write(f"bound_state_energy = {doc['bound_state_energy']!r}\n"
                         f"time_delay_eigenvalue(k={doc['k']!r}) = "
                         f"{doc['time_delay_eigenvalue']!r}\n")
    return EXIT_OK


def cmd_simulate(cfg: dict) -> int:
    from .simulate import RngConfig, SimConfig, simulate_batch, simulate_paths
    from .simulate.engine import write_trajectories_csv

    run = cfg["run"]
    params = _params(cfg)
    sim = SimConfig(dt=run["dt"], horizon=run["horizon"], n_paths=run["n_paths"],
                    lt_method=run["lt_method"])
    rng = RngConfig(run["seed"])
    start = _start_point(cfg)
    with _Out(run["output"]) as fh:
        if run["format"] == "csv":
            write_trajectories_csv(simulate_paths(params, start, sim, rng), fh)
        else:
            r = simulate_batch(params, start, sim, rng, "terminal")
            doc = [{"path_id": i, "time": float(r.time[i]), "edge": int(r.edge[i]),
                    "x": float(r.x[i]), "local_time": float(r.local_time[i]),
                    "killed": bool(r.killed[i])} for i in range(r.n)]
            json.dump(doc, fh, indent=1)
            fh.write("\n")
    return EXIT_OK


def cmd_verify(cfg: dict) -> int:
    from .verify import format_table, reports_to_json, run_suite

    run = cfg["run"]

    def progress(rep):
        status = "PASS" if rep.passed else "FAIL"
        print(f"[{status}] {rep.name} ({rep.details['runtime_s']:.1f} s)", file=sys.stderr,
              flush=True)

    reports = run_suite(run["suite"], run["seed"], only=run["only"] or None, progress=progress)
    print(format_table(reports))
    text = reports_to_json(reports)
    if run["output"] in (None, "-"):
        print(text)
    else:
        with _Out(run["output"]) as fh:
            fh.write(text + "\n")
    return EXIT_OK if all(r.passed or r.skipped for r in reports) else EXIT_FAILED


COMMANDS = {"kernel": cmd_kernel, "resolvent": cmd_resolvent, "scatter": cmd_scatter,
            "simulate": cmd_simulate, "verify": cmd_verify}


def run(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = load_config(argv)
        if cfg["_emit"]:
            text = json.dumps(effective_config(cfg), indent=1, sort_keys=True)
            with _Out(cfg["_emit"]) as fh:
                fh.write(text + "\n")
            return EXIT_OK
        return COMMANDS[cfg["run"]["mode"]](cfg)
    except ConfigError as exc:
        print(f"starwalk: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except StarwalkError as exc:
        print(f"starwalk: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
