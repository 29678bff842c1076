import numpy as np
import pytest
import scipy.optimize
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import crandn, make_spectrum, two_filter_model
from gspwl import estimators as est
from gspwl.exceptions import ConfigError, DimensionMismatch, SingularCovariance, SingularSchur
from gspwl.stats import (
    AugmentedCovariance,
    SpectralDiagonalStats,
    random_augmented_stats,
    sample_improper_gaussian,
    spectral_diagonals_from_full,
    widely_linear_model_stats,
)


def _augmented_solve(stats):
    # normal equations [H1 H2] Gamma_aug = [Gamma_xy C_xy], solved as one 2N system
    H = np.linalg.solve(stats.augmented_yy().T, stats.augmented_xy().T).T
    n = stats.n_vertices
    return H[:, :n], H[:, n:]


def _per_frequency_solve(d):
    f1, f2 = [], []
    for n in range(d.n_vertices):
        M = np.array([[d.d_gamma_yy[n], d.d_c_yy[n]], [np.conj(d.d_c_yy[n]), d.d_gamma_yy[n]]])
        a, b = np.linalg.solve(M.T, [d.d_gamma_xy[n], d.d_c_xy[n]])
        f1.append(a)
        f2.append(b)
    return np.array(f1), np.array(f2)


def _proper(stats):
    z = np.zeros_like(stats.c_yy)
    return AugmentedCovariance(stats.gamma_xx, z, stats.gamma_xy, z, stats.gamma_yy, z)


def test_lmmse_trivial_cases():
    eye = np.eye(3)
    s = AugmentedCovariance(eye, 0 * eye, eye, 0 * eye, eye, 0 * eye)
    y = np.array([1 + 2j, -1, 3j])
    np.testing.assert_allclose(est.lmmse(s, y), y)
    s1 = AugmentedCovariance([[1]], [[0]], [[0.5]], [[0]], [[2]], [[0]])
    np.testing.assert_allclose(est.lmmse(s1, [4.0]), [1.0])


def test_lmmse_matches_inverse(rng):
    s = random_augmented_stats(4, rng)
    y = crandn(rng, 4)
    np.testing.assert_allclose(est.lmmse(s, y), s.gamma_xy @ np.linalg.inv(s.gamma_yy) @ y, atol=1e-12)


def test_singular_covariance():
    eye = np.eye(2)
    s = AugmentedCovariance(eye, 0 * eye, eye, 0 * eye, np.ones((2, 2)), 0 * eye)
    with pytest.raises(SingularCovariance):
        est.lmmse_operator(s)


def test_singular_schur_for_maximally_improper_observation():
    eye = np.eye(2)
    s = AugmentedCovariance(eye, eye, eye, eye, eye, eye)  # y real: C_yy = Gamma_yy
    with pytest.raises(SingularSchur):
        est.wlmmse_operators(s)


@pytest.mark.parametrize("n", [2, 5])
def test_wlmmse_matches_augmented_solve(rng, n):
    s = random_augmented_stats(n, rng)
    ops = est.wlmmse_operators(s)
    h1, h2 = _augmented_solve(s)
    np.testing.assert_allclose(ops.h1, h1, atol=1e-11)
    np.testing.assert_allclose(ops.h2, h2, atol=1e-11)


def test_wlmmse_proper_reduces_to_lmmse(rng):
    s = _proper(random_augmented_stats(4, rng, proper=True))
    y = crandn(rng, 6, 4)
    np.testing.assert_allclose(est.wlmmse(s, y), est.lmmse(s, y), atol=1e-12)


def test_wlmmse_real_model_gives_real_estimate(rng):
    n = 4
    A = rng.standard_normal((n, n))
    R = np.cov(rng.standard_normal((n, 3 * n)))
    s = widely_linear_model_stats(A, np.zeros((n, n)), R, R, 0.2 * np.eye(n), 0.2 * np.eye(n))
    ops = est.wlmmse_operators(_jitter(s))
    y = rng.standard_normal((5, n))
    assert np.abs(ops.apply(y).imag).max() <= 1e-12 * np.abs(ops.apply(y)).max()


def _jitter(s):
    # a real observation is maximally improper; add a little proper noise so P is invertible
    n = s.n_vertices
    return AugmentedCovariance(s.gamma_xx, s.c_xx, s.gamma_xy, s.c_xy, s.gamma_yy + 0.1 * np.eye(n), s.c_yy)


def test_gsp_lmmse_identity_filter():
    d = SpectralDiagonalStats(np.array([2.0, 3.0]), np.array([2.0, 3.0]), np.zeros(2), np.zeros(2))
    np.testing.assert_allclose(est.gsp_lmmse_filter(d), 1)


def test_gsp_lmmse_filter_minimizes_full_matrix_mse(rng):
    n = 3
    sp = make_spectrum(n, seed=1)
    s = random_augmented_stats(n, rng)
    V = sp.eigenvectors

    def mse(p):
        f = p[:n] + 1j * p[n:]
        return est.widely_linear_mse(s, (V * f) @ V.T)

    res = scipy.optimize.minimize(mse, np.zeros(2 * n), method="BFGS", options={"gtol": 1e-10})
    f_opt = res.x[:n] + 1j * res.x[n:]
    f = est.gsp_lmmse_filter(spectral_diagonals_from_full(sp, s))
    np.testing.assert_allclose(f, f_opt, atol=1e-6)


def test_gsp_wlmmse_filters_minimize_full_matrix_mse(rng):
    n = 3
    sp = make_spectrum(n, seed=2)
    s = random_augmented_stats(n, rng)
    V = sp.eigenvectors

    def mse(p):
        f1 = p[:n] + 1j * p[n:2 * n]
        f2 = p[2 * n:3 * n] + 1j * p[3 * n:]
        return est.widely_linear_mse(s, (V * f1) @ V.T, (V * f2) @ V.T)

    res = scipy.optimize.minimize(mse, np.zeros(4 * n), method="BFGS", options={"gtol": 1e-10})
    filt = est.gsp_wlmmse_filters(spectral_diagonals_from_full(sp, s))
    np.testing.assert_allclose(filt.f1, res.x[:n] + 1j * res.x[n:2 * n], atol=1e-6)
    np.testing.assert_allclose(filt.f2, res.x[2 * n:3 * n] + 1j * res.x[3 * n:], atol=1e-6)


def test_gsp_wlmmse_filters_solve_per_frequency_systems(rng):
    sp = make_spectrum(6, seed=4)
    d = spectral_diagonals_from_full(sp, random_augmented_stats(6, rng))
    filt = est.gsp_wlmmse_filters(d)
    f1, f2 = _per_frequency_solve(d)
    np.testing.assert_allclose(filt.f1, f1, rtol=1e-12, atol=1e-13)
    np.testing.assert_allclose(filt.f2, f2, rtol=1e-12, atol=1e-13)
    rho_form = est.gsp_wlmmse_filters(d, form="rho")
    np.testing.assert_allclose(rho_form.f1, filt.f1, rtol=1e-10)
    np.testing.assert_allclose(rho_form.f2, filt.f2, rtol=1e-10)


def test_rho_form_needs_nonzero_complementary_variance():
    d = SpectralDiagonalStats(np.ones(2), np.ones(2), np.zeros(2), np.zeros(2))
    with pytest.raises(ConfigError):
        est.gsp_wlmmse_filters(d, form="rho")
    with pytest.raises(ConfigError):
        est.gsp_wlmmse_filters(d, form="nope")


def test_proper_statistics_give_zero_second_filter(rng):
    d = SpectralDiagonalStats(crandn(rng, 5), rng.uniform(1, 2, 5), np.zeros(5), np.zeros(5))
    filt = est.gsp_wlmmse_filters(d)
    np.testing.assert_allclose(filt.f2, 0, atol=1e-14)
    np.testing.assert_allclose(filt.f1, est.gsp_lmmse_filter(d), rtol=1e-14)


def test_degenerate_frequency_falls_back_to_linear():
    d = SpectralDiagonalStats(
        d_gamma_xy=np.array([1.0, 0.5]), d_gamma_yy=np.array([2.0, 2.0]),
        d_c_xy=np.array([0.3, 0.2]), d_c_yy=np.array([2.0 * np.exp(0.4j), 0.5]),
    )
    filt = est.gsp_wlmmse_filters(d)
    assert filt.degenerate.tolist() == [True, False]
    assert filt.f2[0] == 0
    assert filt.f1[0] == pytest.approx(0.5)
    assert np.isfinite(est.mse_gsp_wlmmse(SpectralDiagonalStats(
        d.d_gamma_xy, d.d_gamma_yy, d.d_c_xy, d.d_c_yy, d_gamma_xx=np.ones(2))))


def test_gsp_wlmmse_trivial_filters(spectrum8, rng):
    y = crandn(rng, 8)
    one, zero = np.ones(8), np.zeros(8)
    np.testing.assert_allclose(est.gsp_wlmmse(spectrum8, est.WidelyLinearGraphFilterPair(one, zero), y), y,
                               atol=1e-12)
    np.testing.assert_allclose(est.gsp_wlmmse(spectrum8, est.WidelyLinearGraphFilterPair(zero, one), y),
                               y.conj(), atol=1e-12)
    with pytest.raises(DimensionMismatch):
        est.gsp_wlmmse(spectrum8, est.WidelyLinearGraphFilterPair(one[:3], zero[:3]), y)


def test_noiseless_conjugate_model_zero_error(spectrum8, rng):
    n = 8
    V = spectrum8.eigenvectors
    h2 = crandn(rng, n) + 0.5
    s_x = random_augmented_stats(n, rng)
    B = (V * h2) @ V.T
    s = widely_linear_model_stats(np.zeros((n, n)), B, s_x.gamma_xx, s_x.c_xx)
    filt = est.gsp_wlmmse_filters(spectral_diagonals_from_full(spectrum8, s))
    np.testing.assert_allclose(filt.f2, 1 / h2.conj(), rtol=1e-9)
    x = sample_improper_gaussian(s_x.gamma_xx, s_x.c_xx, 20, rng)
    y = x.conj() @ B.T
    x_hat = est.gsp_wlmmse(spectrum8, filt, y)
    assert np.linalg.norm(x_hat - x) <= 1e-10 * np.linalg.norm(x)


def test_theoretical_mses_proper(rng):
    sp = make_spectrum(5, seed=0)
    s = _proper(random_augmented_stats(5, rng, proper=True))
    rep = est.theoretical_mses(s, spectral_diagonals_from_full(sp, s))
    assert rep["WLMMSE"].mse == pytest.approx(rep["LMMSE"].mse, abs=1e-12)
    assert rep["GSP-WLMMSE"].mse == pytest.approx(rep["GSP-LMMSE"].mse, abs=1e-12)
    assert est.mse_gap_wl_vs_l(s) == pytest.approx(0, abs=1e-12)


def test_theoretical_mses_match_monte_carlo(rng):
    n = 10
    sp = make_spectrum(n, seed=7)
    # joint (x, y) statistics as the augmented covariance of a 2N vector
    s = random_augmented_stats(n, rng)
    d = spectral_diagonals_from_full(sp, s)
    gamma = np.block([[s.gamma_xx, s.gamma_xy], [s.gamma_xy.conj().T, s.gamma_yy]])
    comp = np.block([[s.c_xx, s.c_xy], [s.c_xy.T, s.c_yy]])
    z = sample_improper_gaussian(gamma, comp, 100_000, rng)
    x, y = z[:, :n], z[:, n:]
    rep = est.theoretical_mses(s, d)
    ops = est.wlmmse_operators(s)
    filt = est.gsp_wlmmse_filters(d)
    f = est.gsp_lmmse_filter(d)
    estimates = {
        "LMMSE": est.lmmse(s, y),
        "WLMMSE": ops.apply(y),
        "GSP-LMMSE": est.gsp_lmmse(sp, f, y),
        "GSP-WLMMSE": est.gsp_wlmmse(sp, filt, y),
    }
    for tag, x_hat in estimates.items():
        emp = np.mean(np.sum(np.abs(x_hat - x) ** 2, axis=1))
        assert emp == pytest.approx(rep[tag].mse, rel=0.02), tag


def test_graph_filter_mse_agrees_with_full_matrix_mse(rng):
    sp = make_spectrum(6, seed=5)
    s = random_augmented_stats(6, rng)
    d = spectral_diagonals_from_full(sp, s)
    f1, f2 = crandn(rng, 6), crandn(rng, 6)
    V = sp.eigenvectors
    full = est.widely_linear_mse(s, (V * f1) @ V.T, (V * f2) @ V.T)
    assert est.graph_filter_mse(d, f1, f2) == pytest.approx(full, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(1, 10))
def test_gap_identities_and_ordering(seed, n):
    rng = np.random.default_rng(seed)
    sp = make_spectrum(max(n, 2), seed=seed % 20) if n > 1 else None
    if sp is None:
        return
    s = random_augmented_stats(n, rng)
    d = spectral_diagonals_from_full(sp, s)
    rep = est.theoretical_mses(s, d)
    e_l, e_wl = rep["LMMSE"].mse, rep["WLMMSE"].mse
    e_gl, e_gwl = rep["GSP-LMMSE"].mse, rep["GSP-WLMMSE"].mse
    assert est.mse_gap_wl_vs_l(s) == pytest.approx(e_l - e_wl, abs=1e-10 * max(1, e_l))
    filt = est.gsp_wlmmse_filters(d)
    assert est.mse_gap_gsp(d, filt) == pytest.approx(e_gl - e_gwl, abs=1e-10 * max(1, e_gl))
    slack = 1e-10 * max(1.0, e_gl)
    assert e_wl <= e_l + slack and e_l <= e_gl + slack
    assert e_wl <= e_gwl + slack and e_gwl <= e_gl + slack
    # the closed forms agree with the generic quadratic MSE of the optimal filters
    assert est.graph_filter_mse(d, filt.f1, filt.f2) == pytest.approx(e_gwl, abs=1e-9 * max(1, e_gl))


def test_proper_measurement_decomposition(rng):
    sp = make_spectrum(6, seed=8)
    s = random_augmented_stats(6, rng)
    s = AugmentedCovariance(s.gamma_xx, s.c_xx, s.gamma_xy, s.c_xy, s.gamma_yy, np.zeros((6, 6)))
    d = spectral_diagonals_from_full(sp, s)
    filt = est.gsp_wlmmse_filters(d)
    y = crandn(rng, 4, 6)
    V = sp.eigenvectors
    expected = est.gsp_lmmse(sp, est.gsp_lmmse_filter(d), y) + ((y.conj() @ V) * (d.d_c_xy / d.d_gamma_yy)) @ V.T
    np.testing.assert_allclose(est.gsp_wlmmse(sp, filt, y), expected, atol=1e-12)
    gap = est.mse_gsp_lmmse(d) - est.mse_gsp_wlmmse(d)
    assert gap == pytest.approx(np.sum(np.abs(d.d_c_xy) ** 2 / d.d_gamma_yy), rel=1e-10)


def test_real_signal_gives_real_graph_estimate(rng):
    n = 6
    sp = make_spectrum(n, seed=11)
    R = np.cov(rng.standard_normal((n, 4 * n)))
    A = crandn(rng, n, n)
    s = widely_linear_model_stats(A, np.zeros((n, n)), R, R, 0.5 * np.eye(n), None)
    filt = est.gsp_wlmmse_filters(spectral_diagonals_from_full(sp, s))
    x_hat = est.gsp_wlmmse(sp, filt, crandn(rng, 5, n))
    assert np.linalg.norm(x_hat.imag) <= 1e-10 * np.linalg.norm(x_hat)


def test_orthogonality(rng):
    sp = make_spectrum(5, seed=3)
    s = two_filter_model(sp, rng)
    filt = est.gsp_wlmmse_filters(spectral_diagonals_from_full(sp, s))
    r1, r2 = est.orthogonality_residuals(s, sp, filt)
    scale = np.trace(s.gamma_yy).real
    assert r1 <= 1e-10 * scale and r2 <= 1e-10 * scale
    bumped = est.WidelyLinearGraphFilterPair(filt.f1, filt.f2 + 0.1)
    assert max(est.orthogonality_residuals(s, sp, bumped)) > 1e-3


def test_orthogonality_proper(rng):
    sp = make_spectrum(5, seed=3)
    V = sp.eigenvectors
    g = rng.uniform(1, 2, 5)
    eye = (V * g) @ V.T
    z = np.zeros((5, 5))
    s = AugmentedCovariance(np.eye(5), z, 0.5 * eye, z, eye, z)
    filt = est.gsp_wlmmse_filters(spectral_diagonals_from_full(sp, s))
    assert max(est.orthogonality_residuals(s, sp, filt)) <= 1e-12


def test_real_four_filter_form_examples():
    f1 = np.array([1.0, 2.0, -0.5])
    g = est.real_four_filter_form(est.WidelyLinearGraphFilterPair(f1, np.zeros(3)))
    np.testing.assert_array_equal(g.g11, f1)
    np.testing.assert_array_equal(g.g22, f1)
    np.testing.assert_array_equal(g.g12, 0)
    np.testing.assert_array_equal(g.g21, 0)
    g = est.real_four_filter_form(est.WidelyLinearGraphFilterPair(np.zeros(3), 1j * np.ones(3)))
    np.testing.assert_array_equal(g.g11, 0)
    np.testing.assert_array_equal(g.g22, 0)
    np.testing.assert_array_equal(g.g12, 1)
    np.testing.assert_array_equal(g.g21, 1)


def test_real_four_filter_form_general_indices(rng):
    f1, f2 = crandn(rng, 4), crandn(rng, 4)
    g = est.real_four_filter_form(est.WidelyLinearGraphFilterPair(f1, f2))
    table = {(1, 1): g.g11, (1, 2): g.g12, (2, 1): g.g21, (2, 2): g.g22}
    for (k, m), gk in table.items():
        if k == m:
            np.testing.assert_allclose(gk, f1.real + (3 - 2 * k) * f2.real)
        else:
            np.testing.assert_allclose(gk, (k - m) * f1.imag + f2.imag)


def test_real_four_filter_equivalence(rng):
    sp = make_spectrum(6, seed=6)
    filt = est.WidelyLinearGraphFilterPair(crandn(rng, 6), crandn(rng, 6))
    y = crandn(rng, 3, 6)
    re, im = est.real_four_filter_form(filt).apply(sp, y.real, y.imag)
    x_hat = est.gsp_wlmmse(sp, filt, y)
    np.testing.assert_allclose(re + 1j * im, x_hat, atol=1e-12)


def test_coincidence_two_filter_model(rng):
    sp = make_spectrum(7, seed=1)
    assert est.coincidence_check(two_filter_model(sp, rng), sp)


def test_no_coincidence_for_dense_statistics(rng):
    sp = make_spectrum(5, seed=1)
    res = est.coincidence_check(random_augmented_stats(5, rng), sp)
    assert not res
    assert max(res.residual_h1, res.residual_h2) > 1e-3


def test_coincidence_proper_diagonal(rng):
    sp = make_spectrum(5, seed=1)
    V = sp.eigenvectors
    z = np.zeros((5, 5))
    s = AugmentedCovariance(np.eye(5), z, (V * rng.uniform(0.1, 1, 5)) @ V.T, z, (V * rng.uniform(1, 2, 5)) @ V.T, z)
    assert est.coincidence_check(s, sp)
