"""Closed-form heat kernels, resolvents and their building blocks."""

from .measure import (KernelMeasure, absorbed_atom, dirichlet_density,
                      dirichlet_resolvent_density, point_atom,
                      point_density, resolvent, transition,
                      vertex_factor)
from .special import (DEFAULT_CONFIG, SpecialFnConfig, e_lambda, g_0gamma,
                      g_beta0, g_betagamma, gauss, hitting_density,
                      hitting_is_degenerate, log_g_0gamma, log_g_beta0,
                      reflected_kernel, reflected_transform)

__all__ = [
    "KernelMeasure", "SpecialFnConfig", "DEFAULT_CONFIG",
    "absorbed_atom", "dirichlet_density", "dirichlet_resolvent_density",
    "point_atom", "point_density", "resolvent", "transition", "vertex_factor",
    "e_lambda", "g_0gamma", "g_beta0", "g_betagamma", "gauss", "hitting_density",
    "hitting_is_degenerate", "log_g_0gamma", "log_g_beta0",
    "reflected_kernel", "reflected_transform",
]
