"""Exact workload analysis and simulation of open processing networks."""

from .fluid import communicates, critical_profile, fluid_trajectory, is_reachable, mtte
from .netfile import bundled_network, load_network, parse_network, render_network
from .ratmath import Matrix, format_rational, parse_rational
from .simplex import LinearProgram, Status, solve_lp
from .workload import NetworkData, analyze

__all__ = [
    "Matrix", "parse_rational", "format_rational",
    "LinearProgram", "Status", "solve_lp",
    "NetworkData", "analyze",
    "mtte", "is_reachable", "communicates", "critical_profile", "fluid_trajectory",
    "parse_network", "render_network", "load_network", "bundled_network",
]
