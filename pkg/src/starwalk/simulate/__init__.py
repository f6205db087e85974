"""Pathwise constructions, exact samplers and batch Monte Carlo."""

from .backend import default_backend, numba_disabled
from .engine import (CSV_COLUMNS, BatchResult, SimConfig, Trajectory, simulate_batch,
                     simulate_path, simulate_paths, trajectories_to_csv,
                     write_trajectories_csv)
from .rng import RngConfig
from .samplers import (exact_marginal_walsh, sample_first_hitting,
                       sample_inverse_localtime, sample_reflected_localtime)

__all__ = [
    "BatchResult", "CSV_COLUMNS", "RngConfig", "SimConfig", "Trajectory",
    "default_backend", "numba_disabled", "exact_marginal_walsh",
    "sample_first_hitting", "sample_inverse_localtime", "sample_reflected_localtime",
    "simulate_batch", "simulate_path", "simulate_paths", "trajectories_to_csv",
    "write_trajectories_csv",
]
