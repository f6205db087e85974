"""Statistical and numerical consistency harness."""

from .acceptance import CRITERIA, run_criterion, run_suite
from .numeric import (chapman_kolmogorov, generator_domain_check, laplace_consistency,
                      laplace_transform)
from .report import TestReport, combine, format_table, reports_to_json
from .stats import (alpha_potential_check, exit_localtime_ks, exit_mean_check, ks_edge_test,
                    lifetime_transform_check, mc_check, mean_checks, survival_check)

__all__ = [
    "CRITERIA", "TestReport", "alpha_potential_check", "chapman_kolmogorov", "combine",
    "exit_localtime_ks", "exit_mean_check", "format_table", "generator_domain_check",
    "ks_edge_test", "laplace_consistency", "laplace_transform", "lifetime_transform_check",
    "mc_check", "mean_checks", "reports_to_json", "run_criterion", "run_suite",
    "survival_check",
]
