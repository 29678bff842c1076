"""Scikit-learn style wrappers around the MMSE estimators.

Each class learns its statistics from paired training samples and then maps
observations to signal estimates::

    est = GraphWidelyLinearMMSE(spectrum).fit(Y_train, X_train)
    X_hat = est.predict(Y_test)

Observations play the role of features and signals the role of targets, so
``fit`` takes ``(Y, X)`` in that order. Arrays are complex with one sample
per row. ``score`` returns the negative mean squared error per sample, so
that larger is better as scikit-learn expects.

``from_stats`` builds an already fitted estimator from exact statistics, the
"theoretical" counterpart of a sample-mean estimator.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import estimators as est
from ._validation import as_complex_matrix, check_pair, restore_shape
from .exceptions import ConfigError, DimensionMismatch, SingularCovariance, SingularSchur
from .graph import GraphSpectrum
from .graph_filters import LAMBDA_MAX_SAFETY, chebyshev_apply, chebyshev_fit_samples
from .stats import (
    RHO_TOL,
    AugmentedCovariance,
    SpectralDiagonalStats,
    sample_full_stats,
    sample_spectral_diagonals,
    spectral_diagonals_from_full,
)

__all__ = [
    "LinearMMSE",
    "WidelyLinearMMSE",
    "GraphLinearMMSE",
    "GraphWidelyLinearMMSE",
    "make_estimator",
]


class _MMSEBase(BaseEstimator):
    estimator_tag = ""

    def _center(self, Y, X):
        if self.center:
            self.y_mean_ = Y.mean(axis=0)
            self.x_mean_ = X.mean(axis=0)
        else:
            self.y_mean_ = np.zeros(Y.shape[1], complex)
            self.x_mean_ = np.zeros(X.shape[1], complex)
        return Y - self.y_mean_, X - self.x_mean_

    def fit(self, Y, X):
        """Learn sample-mean statistics from ``K`` training pairs.

        Parameters
        ----------
        Y : array of shape (K, N)
            Observations.
        X : array of shape (K, N)
            Signals to be estimated.
        """
        Y, X = check_pair(Y, X)
        self.n_features_in_ = Y.shape[1]
        self.n_samples_fit_ = Y.shape[0]
        Yc, Xc = self._center(Y, X)
        self._fit_centered(Yc, Xc)
        return self

    def predict(self, Y):
        """Estimate the signal for each observation row."""
        check_is_fitted(self, "n_features_in_")
        Y_arr = as_complex_matrix(Y, "Y", self.n_features_in_)
        out = self._predict_centered(Y_arr - self.y_mean_) + self.x_mean_
        return restore_shape(out, Y)

    def score(self, Y, X):
        """Negative mean squared error ``-(1/K) sum_k ||x_hat_k - x_k||^2``."""
        Y, X = check_pair(Y, X)
        err = self.predict(Y) - X
        return -float(np.mean(np.sum(np.abs(err) ** 2, axis=1)))

    def _init_from_stats(self, n):
        self.n_features_in_ = n
        self.n_samples_fit_ = 0
        self.y_mean_ = np.zeros(n, complex)
        self.x_mean_ = np.zeros(n, complex)


class _FullMatrixMixin:
    def _fit_centered(self, Y, X):
        self.stats_ = sample_full_stats(X, Y)
        self._build()

    def _build(self):
        self.singular_ = False
        try:
            ops = self._operators(self.stats_)
        except (SingularCovariance, SingularSchur):
            if self.singular == "raise":
                raise
            if self.singular != "pinv":
                raise ConfigError(f"singular must be 'raise' or 'pinv', got {self.singular!r}") from None
            self.singular_ = True
            ops = self._pinv_operators(self.stats_)
        self.h1_, self.h2_ = ops.h1, ops.h2

    def _predict_centered(self, Y):
        return Y @ self.h1_.T + Y.conj() @ self.h2_.T

    @classmethod
    def from_stats(cls, stats: AugmentedCovariance, **params):
        obj = cls(**params)
        obj._init_from_stats(stats.n_vertices)
        obj.stats_ = stats
        obj._build()
        return obj


class LinearMMSE(_FullMatrixMixin, _MMSEBase):
    """Linear MMSE estimator ``x_hat = Gamma_xy Gamma_yy^{-1} y``.

    Parameters
    ----------
    center : bool, default=False
        Subtract the training means before estimating the statistics and add
        the signal mean back to the predictions.
    singular : {"raise", "pinv"}, default="raise"
        What to do when the (sample) covariance is singular. ``"pinv"`` uses
        the pseudo-inverse and sets ``singular_ = True``.

    Attributes
    ----------
    stats_ : AugmentedCovariance
    h1_ : ndarray of shape (N, N)
    h2_ : ndarray of shape (N, N)
        Always zero.
    """

    estimator_tag = est.LMMSE

    def __init__(self, center=False, singular="raise"):
        self.center = center
        self.singular = singular

    @staticmethod
    def _operators(stats):
        H = est.lmmse_operator(stats)
        return est.WidelyLinearOperatorPair(H, np.zeros_like(H))

    @staticmethod
    def _pinv_operators(stats):
        H = stats.gamma_xy @ np.linalg.pinv(stats.gamma_yy, hermitian=True)
        return est.WidelyLinearOperatorPair(H, np.zeros_like(H))


class WidelyLinearMMSE(_FullMatrixMixin, _MMSEBase):
    """Widely-linear MMSE estimator ``x_hat = H1 y + H2 y*``.

    Parameters are as for :class:`LinearMMSE`.
    """

    estimator_tag = est.WLMMSE

    def __init__(self, center=False, singular="raise"):
        self.center = center
        self.singular = singular

    @staticmethod
    def _operators(stats):
        return est.wlmmse_operators(stats)

    @staticmethod
    def _pinv_operators(stats):
        n = stats.n_vertices
        aug = stats.augmented_yy()
        H = stats.augmented_xy() @ np.linalg.pinv(0.5 * (aug + aug.conj().T), hermitian=True)
        return est.WidelyLinearOperatorPair(H[:, :n], H[:, n:])


class _GraphFilterBase(_MMSEBase):
    def _check_spectrum(self):
        if not isinstance(self.spectrum, GraphSpectrum):
            raise ConfigError("spectrum must be a GraphSpectrum")
        if self.method not in ("evd", "chebyshev"):
            raise ConfigError(f"method must be 'evd' or 'chebyshev', got {self.method!r}")

    def fit(self, Y, X):
        self._check_spectrum()
        Y_arr, X_arr = check_pair(Y, X)
        if Y_arr.shape[1] != self.spectrum.n_vertices:
            raise DimensionMismatch(
                f"data has N={Y_arr.shape[1]}, graph has N={self.spectrum.n_vertices}"
            )
        return super().fit(Y_arr, X_arr)

    def _fit_centered(self, Y, X):
        self.diag_stats_ = sample_spectral_diagonals(self.spectrum, X, Y, rho_tol=self.rho_tol)
        self._build()

    def _build(self):
        self.filters_ = self._filters(self.diag_stats_)
        self._build_application()

    def _build_application(self):
        if self.method == "chebyshev":
            order = self.chebyshev_order
            if order is None:
                order = 2 * self.spectrum.n_vertices
            interval = (0.0, LAMBDA_MAX_SAFETY * self.spectrum.lambda_max)
            lam = self.spectrum.eigenvalues
            self.chebyshev_ = (
                chebyshev_fit_samples(lam, self.filters_.f1, order, interval),
                chebyshev_fit_samples(lam, self.filters_.f2, order, interval),
            )

    @property
    def f1_(self):
        check_is_fitted(self, "filters_")
        return self.filters_.f1

    @property
    def f2_(self):
        check_is_fitted(self, "filters_")
        return self.filters_.f2

    def _predict_centered(self, Y):
        if self.method == "chebyshev":
            g1, g2 = self.chebyshev_
            return chebyshev_apply(self.spectrum.laplacian, g1, g2, Y, check_interval=False)
        return est.gsp_wlmmse(self.spectrum, self.filters_, Y)

    @classmethod
    def from_stats(cls, stats, spectrum: GraphSpectrum, **params):
        """Fitted estimator from full or diagonal exact statistics."""
        obj = cls(spectrum, **params)
        obj._check_spectrum()
        if isinstance(stats, AugmentedCovariance):
            stats = spectral_diagonals_from_full(spectrum, stats, rho_tol=obj.rho_tol)
        if not isinstance(stats, SpectralDiagonalStats):
            raise ConfigError("stats must be AugmentedCovariance or SpectralDiagonalStats")
        obj._init_from_stats(stats.n_vertices)
        obj.diag_stats_ = stats
        obj._build()
        return obj


class GraphLinearMMSE(_GraphFilterBase):
    """Best single graph filter ``x_hat = V diag(f) V^T y``.

    Parameters
    ----------
    spectrum : GraphSpectrum
    center : bool, default=False
    rho_tol : float, default=1e-9
        Unused by this estimator; kept so both graph estimators share their
        statistics settings.
    method : {"evd", "chebyshev"}, default="evd"
        Apply the filter through the eigenvectors or through a Chebyshev
        polynomial in the Laplacian.
    chebyshev_order : int, optional
        Polynomial order for ``method="chebyshev"``; defaults to ``2N``.

    Attributes
    ----------
    diag_stats_ : SpectralDiagonalStats
    filters_ : WidelyLinearGraphFilterPair
        ``f2`` is zero.
    """

    estimator_tag = est.GSP_LMMSE

    def __init__(self, spectrum=None, center=False, rho_tol=RHO_TOL, method="evd", chebyshev_order=None):
        self.spectrum = spectrum
        self.center = center
        self.rho_tol = rho_tol
        self.method = method
        self.chebyshev_order = chebyshev_order

    @staticmethod
    def _filters(diag):
        f = est.gsp_lmmse_filter(diag)
        return est.WidelyLinearGraphFilterPair(f, np.zeros_like(f))


class GraphWidelyLinearMMSE(_GraphFilterBase):
    """Best pair of graph filters ``x_hat = V diag(f1) V^T y + V diag(f2) V^T y*``.

    Parameters are as for :class:`GraphLinearMMSE`. Frequencies whose
    impropriety coefficient exceeds ``1 - rho_tol`` use the single-filter
    solution; they are listed in ``filters_.degenerate``.
    """

    estimator_tag = est.GSP_WLMMSE

    def __init__(self, spectrum=None, center=False, rho_tol=RHO_TOL, method="evd", chebyshev_order=None):
        self.spectrum = spectrum
        self.center = center
        self.rho_tol = rho_tol
        self.method = method
        self.chebyshev_order = chebyshev_order

    @staticmethod
    def _filters(diag):
        return est.gsp_wlmmse_filters(diag)


_CLASSES = {
    est.LMMSE: LinearMMSE,
    est.WLMMSE: WidelyLinearMMSE,
    est.GSP_LMMSE: GraphLinearMMSE,
    est.GSP_WLMMSE: GraphWidelyLinearMMSE,
}


def make_estimator(tag: str, spectrum: GraphSpectrum | None = None, **params):
    """Unfitted estimator for one of ``LMMSE``, ``WLMMSE``, ``GSP-LMMSE``, ``GSP-WLMMSE``."""
    try:
        cls = _CLASSES[tag]
    except KeyError:
        raise ConfigError(f"unknown estimator {tag!r}; choose from {sorted(_CLASSES)}") from None
    if cls in (GraphLinearMMSE, GraphWidelyLinearMMSE):
        return cls(spectrum, **params)
    return cls(**params)
