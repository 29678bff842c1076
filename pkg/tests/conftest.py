import numpy as np
import pytest

from gspwl.graph import build_laplacian, random_connected_graph


def make_spectrum(n, seed=0, avg_degree=None, weights="uniform"):
    """Connected random graph with ``n`` vertices."""
    deg = min(n - 1, 4.0) if avg_degree is None else avg_degree
    return build_laplacian(random_connected_graph(n, deg, weights=weights, rng=seed))


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def spectrum8():
    return make_spectrum(8, seed=3)


def random_valid_pair(rng, n, scale=1.0):
    """Per-frequency variances and complementary variances with |c| < gamma."""
    gamma = scale * rng.uniform(0.5, 2.0, n)
    c = gamma * rng.uniform(0.0, 0.95, n) * np.exp(1j * rng.uniform(-np.pi, np.pi, n))
    return gamma, c


def two_filter_model(spectrum, rng, noise=0.3):
    """Exact statistics of ``y = V h1 V^T x + V h2 V^T x* + n`` with spectrally
    diagonal signal and noise statistics."""
    from gspwl.stats import widely_linear_model_stats

    n = spectrum.n_vertices
    V = spectrum.eigenvectors

    def embed(d):
        return (V * d) @ V.T

    gx, cx = random_valid_pair(rng, n)
    gn, cn = random_valid_pair(rng, n, scale=noise)
    h1, h2 = crandn(rng, n), crandn(rng, n)
    return widely_linear_model_stats(embed(h1), embed(h2), embed(gx), embed(cx), embed(gn), embed(cn))


# criterion number -> (passed, description, detail); filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, desc, detail = ACCEPTANCE[number]
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {desc}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
