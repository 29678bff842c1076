"""Widely-linear MMSE estimation of improper complex graph signals.

The package provides the four estimators (linear and widely-linear, with full
matrices or restricted to graph filters), their closed-form MSEs, sample-mean
versions with a scikit-learn interface, Chebyshev polynomial filtering, and
two synthetic benchmarks.
"""

__version__ = "0.1.0"

from .exceptions import ConfigError, GSPError, NumericalError
from .graph import GraphSpectrum, WeightedGraph, build_laplacian, gft, inverse_gft, load_edge_list
from .models import GraphLinearMMSE, GraphWidelyLinearMMSE, LinearMMSE, WidelyLinearMMSE, make_estimator
from .stats import AugmentedCovariance, SpectralDiagonalStats, TrainingDataset

__all__ = [
    "__version__",
    "GSPError",
    "ConfigError",
    "NumericalError",
    "WeightedGraph",
    "GraphSpectrum",
    "build_laplacian",
    "gft",
    "inverse_gft",
    "load_edge_list",
    "AugmentedCovariance",
    "SpectralDiagonalStats",
    "TrainingDataset",
    "LinearMMSE",
    "WidelyLinearMMSE",
    "GraphLinearMMSE",
    "GraphWidelyLinearMMSE",
    "make_estimator",
]
