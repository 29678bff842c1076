"""Improper signal observed through a graph filter plus proper noise.

The signal is ``x = sqrt(1 - eta^2) e_r + 1j * eta * e_i`` with independent
standard normal real vectors ``e_r``, ``e_i``, so ``Gamma_xx = I`` and
``C_xx = (1 - 2 eta^2) I``; ``eta = 1/sqrt(2)`` makes ``x`` proper. The
observation is ``y = V diag(psi(lambda)) V^T x + n`` with proper white noise of
variance ``sigma^2`` and a rational (ARMA) graph frequency response ``psi``.

Because every statistic is diagonal in the graph frequency domain, all four
estimators and their MSEs have closed forms in terms of ``psi(lambda_n)`` and
the per-frequency noise-to-signal ratio ``snr_inv[n] = sigma^2 / |psi(lambda_n)|^2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import ConfigError
from ..graph import GraphSpectrum, build_laplacian, random_connected_graph
from ..graph_filters import ArmaFilterParams, arma_response
from ..stats import AugmentedCovariance, SpectralDiagonalStats, TrainingDataset

__all__ = [
    "Example1Config",
    "make_example1",
    "draw_psi",
    "sample_example1",
    "example1_theoretical_stats",
    "example1_closed_form_filters",
    "example1_gap_closed_form",
    "example1_gsp_lmmse_mse",
    "example1_response_functions",
]

DEFAULT_SIGMA = 0.5
DEFAULT_N = 100
DEFAULT_AVG_DEGREE = 7.0  # about 350 edges on 100 vertices


@dataclass(frozen=True)
class Example1Config:
    """Parameters of the graph-filter observation model.

    ``psi`` is the ARMA response; use :func:`make_example1` to draw one at
    random together with the graph.
    """

    eta: float
    sigma: float
    psi: ArmaFilterParams
    n_vertices: int = DEFAULT_N
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= float(self.eta) <= 1.0:
            raise ConfigError(f"eta must lie in [0, 1], got {self.eta}")
        if not float(self.sigma) > 0.0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if not isinstance(self.psi, ArmaFilterParams):
            raise ConfigError("psi must be ArmaFilterParams")

    @property
    def c0(self) -> float:
        """Complementary variance ``1 - 2 eta^2`` of each entry of ``x``."""
        return 1.0 - 2.0 * float(self.eta) ** 2

    def with_eta(self, eta) -> "Example1Config":
        return Example1Config(eta, self.sigma, self.psi, self.n_vertices, self.seed)


def _bernstein_radius(root, lo, hi):
    # parameter of the Bernstein ellipse of [lo, hi] passing through ``root``
    t = (2.0 * root - (hi + lo)) / (hi - lo)
    return abs(t + np.sqrt(t - 1.0 + 0j) * np.sqrt(t + 1.0 + 0j))


def draw_psi(spectrum: GraphSpectrum, rng, *, P=3, Q=3, min_radius=1.25, max_tries=1000):
    """Random ARMA response with well-separated poles, normalized to peak 1.

    Coefficients are standard normal scaled by ``lambda_max^-p`` so every
    power of ``lambda`` contributes on a comparable scale. A draw is rejected
    if a denominator root lies inside the Bernstein ellipse of parameter
    ``min_radius`` around ``[0, 1.01 lambda_max]`` (so both the response and
    its Chebyshev approximation are well behaved), or if ``|psi|`` falls below
    5% of its peak somewhere on the spectrum. The numerator is then scaled so
    that ``max_n |psi(lambda_n)| = 1``.
    """
    rng = np.random.default_rng(rng)
    lam = spectrum.eigenvalues
    hi = 1.01 * spectrum.lambda_max
    scale_c = hi ** -np.arange(P)
    scale_a = hi ** -np.arange(1, Q + 1)
    for _ in range(max_tries):
        c = rng.standard_normal(P) * scale_c
        a = rng.standard_normal(Q) * scale_a
        roots = np.roots(np.r_[a[::-1], 1.0]) if Q else np.array([])
        if roots.size and min(_bernstein_radius(r, 0.0, hi) for r in roots) < min_radius:
            continue
        psi = ArmaFilterParams(c, a)
        values = arma_response(psi, lam)
        peak = np.abs(values).max()
        if peak == 0 or np.abs(values).min() < 0.05 * peak:
            continue
        return ArmaFilterParams(c / peak, a)
    raise ConfigError(f"no acceptable ARMA response in {max_tries} draws")


def make_example1(eta, *, sigma=DEFAULT_SIGMA, n_vertices=DEFAULT_N, seed=0,
                  avg_degree=DEFAULT_AVG_DEGREE, spectrum: GraphSpectrum | None = None
                  ) -> tuple[Example1Config, GraphSpectrum]:
    """Random connected graph and random ``psi``, both fixed by ``seed``.

    The same seed gives the same graph and response for every ``eta`` and
    ``sigma``. Passing ``spectrum`` uses that graph instead of a random one
    (``n_vertices`` and ``avg_degree`` are then ignored).
    """
    ss = np.random.SeedSequence([int(seed), 0])
    g_rng, psi_rng = (np.random.default_rng(s) for s in ss.spawn(2))
    if spectrum is None:
        graph = random_connected_graph(n_vertices, avg_degree, weights="unit", rng=g_rng)
        spectrum = build_laplacian(graph)
    psi = draw_psi(spectrum, psi_rng)
    return Example1Config(eta, sigma, psi, spectrum.n_vertices, seed), spectrum


def _psi_values(config, spectrum):
    if spectrum.n_vertices != config.n_vertices:
        raise ConfigError(f"config is for N={config.n_vertices}, graph has N={spectrum.n_vertices}")
    return arma_response(config.psi, spectrum.eigenvalues)


def sample_example1(config: Example1Config, spectrum: GraphSpectrum, count: int, rng=None) -> TrainingDataset:
    """Draw ``count`` independent ``(x, y)`` pairs."""
    rng = np.random.default_rng(rng)
    n = config.n_vertices
    psi = _psi_values(config, spectrum)
    eta = float(config.eta)
    e_r = rng.standard_normal((count, n))
    e_i = rng.standard_normal((count, n))
    x = np.sqrt(1.0 - eta**2) * e_r + 1j * eta * e_i
    noise = config.sigma * (rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))) / np.sqrt(2.0)
    V = spectrum.eigenvectors
    y = ((x @ V) * psi) @ V.T + noise
    return TrainingDataset(X=x, Y=y)


def example1_theoretical_stats(config: Example1Config, spectrum: GraphSpectrum):
    """Exact statistics as ``(SpectralDiagonalStats, AugmentedCovariance)``.

    The diagonal statistics are ``gamma_xy = conj(psi)``,
    ``gamma_yy = |psi|^2 + sigma^2``, ``c_xy = c0 psi`` and ``c_yy = c0 psi^2``
    with ``c0 = 1 - 2 eta^2``. The full matrices are their vertex-domain
    images ``V diag(.) V^T``.
    """
    psi = _psi_values(config, spectrum).astype(complex)
    c0 = config.c0
    n = config.n_vertices
    diag = SpectralDiagonalStats(
        d_gamma_xy=psi.conj(),
        d_gamma_yy=np.abs(psi) ** 2 + config.sigma**2,
        d_c_xy=c0 * psi,
        d_c_yy=c0 * psi**2,
        d_gamma_xx=np.ones(n),
    )
    V = spectrum.eigenvectors

    def embed(d):
        return (V * d) @ V.T

    full = AugmentedCovariance(
        gamma_xx=np.eye(n),
        c_xx=c0 * np.eye(n),
        gamma_xy=embed(diag.d_gamma_xy),
        c_xy=embed(diag.d_c_xy),
        gamma_yy=embed(diag.d_gamma_yy),
        c_yy=embed(diag.d_c_yy),
    )
    return diag, full


def _snr_inv(config, spectrum):
    psi = _psi_values(config, spectrum)
    return psi, config.sigma**2 / np.abs(psi) ** 2


def example1_closed_form_filters(config: Example1Config, spectrum: GraphSpectrum):
    """Optimal filters written in terms of ``psi`` and ``snr_inv``.

    Returns ``(f, f1, f2)``: the single-filter response and the two
    widely-linear responses.
    """
    psi, r = _snr_inv(config, spectrum)
    psi = psi.astype(complex)
    c0 = config.c0
    q = 1.0 / (1.0 + r)
    denom = 1.0 - (c0 * q) ** 2
    f = q / psi
    f1 = q / psi * (1.0 - c0**2 * q) / denom
    f2 = c0 * q / psi.conj() * (1.0 - q) / denom
    return f, f1, f2


def example1_gap_closed_form(config: Example1Config, spectrum: GraphSpectrum) -> float:
    """MSE reduction of the two-filter estimator over the single filter."""
    _, r = _snr_inv(config, spectrum)
    c0 = config.c0
    q = 1.0 / (1.0 + r)
    return float(np.sum(c0**2 * q * (1.0 - q) ** 2 / (1.0 - (c0 * q) ** 2)))


def example1_gsp_lmmse_mse(config: Example1Config, spectrum: GraphSpectrum) -> float:
    """``sum_n snr_inv[n] / (1 + snr_inv[n])``."""
    _, r = _snr_inv(config, spectrum)
    return float(np.sum(r / (1.0 + r)))


def example1_response_functions(config: Example1Config):
    """Optimal responses as functions of a continuous graph frequency.

    Returns ``(f, f1, f2)`` callables valid anywhere the ARMA denominator is
    nonzero, for Chebyshev fitting without an eigendecomposition. They are
    written without dividing by ``psi`` so they stay finite where it vanishes.
    """
    c0, s2 = config.c0, config.sigma**2

    def parts(lam):
        psi = arma_response(config.psi, lam).astype(complex)
        g = np.abs(psi) ** 2 + s2
        return psi, g

    def f(lam):
        psi, g = parts(lam)
        return psi.conj() / g

    def f1(lam):
        psi, g = parts(lam)
        schur = g - c0**2 * np.abs(psi) ** 4 / g
        return psi.conj() * (1.0 - c0**2 * np.abs(psi) ** 2 / g) / schur

    def f2(lam):
        psi, g = parts(lam)
        schur = g - c0**2 * np.abs(psi) ** 4 / g
        return c0 * psi * (1.0 - np.abs(psi) ** 2 / g) / schur

    return f, f1, f2
