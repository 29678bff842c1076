"""Synthetic benchmarks: a graph-filter observation model and power-grid state estimation."""

from .benchmark import McResult, derive_rng, run_mc_benchmark, run_robustness
from .chebyshev_bench import ChebyshevRow, chebyshev_convergence
from .example1 import Example1Config, make_example1, sample_example1
from .psse import PowerSystemModel, bundled_grid, load_case_csv, perturb_topology, sample_psse

__all__ = [
    "McResult",
    "derive_rng",
    "run_mc_benchmark",
    "run_robustness",
    "ChebyshevRow",
    "chebyshev_convergence",
    "Example1Config",
    "make_example1",
    "sample_example1",
    "PowerSystemModel",
    "bundled_grid",
    "load_case_csv",
    "perturb_topology",
    "sample_psse",
]
