"""Linear and widely-linear MMSE estimators and their graph-filter versions.

Four estimators of a signal ``x`` from an observation ``y`` are provided:

* LMMSE: ``x_hat = H y`` with an unrestricted matrix ``H``.
* WLMMSE: ``x_hat = H1 y + H2 y*`` with unrestricted ``H1``, ``H2``.
* GSP-LMMSE: ``x_hat = V diag(f) V^T y``, a single graph filter.
* GSP-WLMMSE: ``x_hat = V diag(f1) V^T y + V diag(f2) V^T y*``, two graph
  filters applied to ``y`` and its conjugate.

The first two need the full statistics in :class:`~gspwl.stats.AugmentedCovariance`;
the graph-filter ones only need :class:`~gspwl.stats.SpectralDiagonalStats`.
Inputs ``y`` may be a single vector ``(N,)`` or a batch ``(K, N)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._validation import check_square, check_vector
from .exceptions import (
    ConfigError,
    DimensionMismatch,
    SingularCovariance,
    SingularSchur,
)
from .graph import GraphSpectrum
from .stats import AugmentedCovariance, SpectralDiagonalStats

__all__ = [
    "LMMSE",
    "WLMMSE",
    "GSP_LMMSE",
    "GSP_WLMMSE",
    "ESTIMATOR_TAGS",
    "WidelyLinearOperatorPair",
    "WidelyLinearGraphFilterPair",
    "RealFourFilterForm",
    "MseReport",
    "CoincidenceResult",
    "lmmse_operator",
    "lmmse",
    "wlmmse_operators",
    "wlmmse",
    "gsp_lmmse_filter",
    "gsp_lmmse",
    "gsp_wlmmse_filters",
    "gsp_wlmmse",
    "widely_linear_mse",
    "graph_filter_mse",
    "mse_lmmse",
    "mse_wlmmse",
    "mse_gsp_lmmse",
    "mse_gsp_wlmmse",
    "theoretical_mses",
    "mse_gap_wl_vs_l",
    "mse_gap_gsp",
    "orthogonality_residuals",
    "real_four_filter_form",
    "coincidence_check",
]

LMMSE = "LMMSE"
WLMMSE = "WLMMSE"
GSP_LMMSE = "GSP-LMMSE"
GSP_WLMMSE = "GSP-WLMMSE"
ESTIMATOR_TAGS = (LMMSE, WLMMSE, GSP_LMMSE, GSP_WLMMSE)

# reciprocal condition number below which a covariance is treated as singular
RCOND_MIN = 1e-13


@dataclass(frozen=True, eq=False)
class WidelyLinearOperatorPair:
    """``x_hat = h1 y + h2 y*``; ``h2 = 0`` gives a strictly linear estimator."""

    h1: np.ndarray
    h2: np.ndarray

    def __post_init__(self):
        h1 = check_square(self.h1, "h1")
        h2 = check_square(self.h2, "h2", h1.shape[0])
        object.__setattr__(self, "h1", h1)
        object.__setattr__(self, "h2", h2)

    @property
    def n_vertices(self) -> int:
        return self.h1.shape[0]

    def apply(self, y):
        y = np.asarray(y, dtype=complex)
        if y.shape[-1] != self.n_vertices:
            raise DimensionMismatch(f"y has length {y.shape[-1]}, operators are {self.n_vertices}x{self.n_vertices}")
        # rows-as-samples: (H y)^T = y^T H^T
        return y @ self.h1.T + y.conj() @ self.h2.T


@dataclass(frozen=True, eq=False)
class WidelyLinearGraphFilterPair:
    """Frequency responses ``f1`` (applied to ``y``) and ``f2`` (applied to ``y*``).

    ``degenerate`` marks frequencies where the widely-linear solution was
    replaced by the strictly linear one because the observation is
    maximally improper there.
    """

    f1: np.ndarray
    f2: np.ndarray
    degenerate: np.ndarray | None = None

    def __post_init__(self):
        f1 = check_vector(self.f1, "f1")
        f2 = check_vector(self.f2, "f2", f1.shape[0])
        object.__setattr__(self, "f1", f1)
        object.__setattr__(self, "f2", f2)
        deg = np.zeros(f1.shape[0], bool) if self.degenerate is None else np.asarray(self.degenerate, bool)
        object.__setattr__(self, "degenerate", deg)

    @property
    def n_vertices(self) -> int:
        return self.f1.shape[0]

    def apply(self, spectrum: GraphSpectrum, y):
        return gsp_wlmmse(spectrum, self, y)

    def operators(self, spectrum: GraphSpectrum) -> WidelyLinearOperatorPair:
        """The equivalent dense ``(H1, H2)`` in the vertex domain."""
        V = spectrum.eigenvectors
        return WidelyLinearOperatorPair((V * self.f1) @ V.T, (V * self.f2) @ V.T)


@dataclass(frozen=True, eq=False)
class RealFourFilterForm:
    """Four real graph filters acting on ``(Re y, Im y)``.

    ``Re x_hat = G11 Re y + G12 Im y`` and ``Im x_hat = G21 Re y + G22 Im y``
    where ``Gij = V diag(gij) V^T``.
    """

    g11: np.ndarray
    g12: np.ndarray
    g21: np.ndarray
    g22: np.ndarray

    def apply(self, spectrum: GraphSpectrum, y_re, y_im):
        """Return ``(Re x_hat, Im x_hat)`` using only real arithmetic."""
        V = spectrum.eigenvectors
        a = np.asarray(y_re, dtype=float) @ V
        b = np.asarray(y_im, dtype=float) @ V
        return (a * self.g11 + b * self.g12) @ V.T, (a * self.g21 + b * self.g22) @ V.T


@dataclass(frozen=True)
class MseReport:
    estimator_tag: str
    mse: float
    gap_vs_linear: float = 0.0


@dataclass(frozen=True)
class CoincidenceResult:
    """Outcome of comparing the graph-filter and unrestricted widely-linear solutions."""

    coincides: bool
    residual_h1: float
    residual_h2: float

    def __bool__(self):
        return self.coincides


def _check_conditioning(M, error, what):
    if not np.all(np.isfinite(M)):
        raise error(f"{what} has non-finite entries")
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0 or s[-1] / s[0] < RCOND_MIN:
        rc = 0.0 if s[0] == 0 else s[-1] / s[0]
        raise error(f"{what} is singular (reciprocal condition number {rc:.2e})")


def _right_solve(B, M):
    """Return ``B M^{-1}`` through a linear solve."""
    return scipy.linalg.solve(M.T, B.T, check_finite=False).T


# ---------------------------------------------------------------- full-matrix estimators


def lmmse_operator(stats: AugmentedCovariance) -> np.ndarray:
    """``Gamma_xy Gamma_yy^{-1}``.

    Raises
    ------
    SingularCovariance
    """
    _check_conditioning(stats.gamma_yy, SingularCovariance, "Gamma_yy")
    return _right_solve(stats.gamma_xy, stats.gamma_yy)


def lmmse(stats: AugmentedCovariance, y):
    H = lmmse_operator(stats)
    return np.asarray(y, dtype=complex) @ H.T


def _schur_yy(stats):
    _check_conditioning(stats.gamma_yy, SingularCovariance, "Gamma_yy")
    A = scipy.linalg.solve(stats.gamma_yy, stats.c_yy, check_finite=False)
    P = stats.gamma_yy - stats.c_yy @ A.conj()
    P = 0.5 * (P + P.conj().T)
    return A, P


def wlmmse_operators(stats: AugmentedCovariance) -> WidelyLinearOperatorPair:
    """Optimal widely-linear pair.

    ``H1 = (Gamma_xy - C_xy conj(Gamma_yy^{-1} C_yy)) P^{-1}`` and
    ``H2 = (C_xy - Gamma_xy Gamma_yy^{-1} C_yy) conj(P)^{-1}`` with the Schur
    complement ``P = Gamma_yy - C_yy conj(Gamma_yy^{-1} C_yy)``.

    Raises
    ------
    SingularCovariance
        If ``Gamma_yy`` is singular.
    SingularSchur
        If ``P`` is singular (a maximally improper observation).
    """
    A, P = _schur_yy(stats)
    _check_conditioning(P, SingularSchur, "Schur complement P_yy")
    h1 = _right_solve(stats.gamma_xy - stats.c_xy @ A.conj(), P)
    h2 = _right_solve(stats.c_xy - stats.gamma_xy @ A, P.conj())
    return WidelyLinearOperatorPair(h1, h2)


def wlmmse(stats: AugmentedCovariance, y):
    return wlmmse_operators(stats).apply(y)


# ---------------------------------------------------------------- graph-filter estimators


def gsp_lmmse_filter(diag: SpectralDiagonalStats) -> np.ndarray:
    """Optimal single graph filter ``f[n] = gamma_xy[n] / gamma_yy[n]``."""
    return diag.d_gamma_xy / diag.d_gamma_yy


def gsp_lmmse(spectrum: GraphSpectrum, response, y):
    response = check_vector(response, "response", spectrum.n_vertices)
    return gsp_wlmmse(spectrum, WidelyLinearGraphFilterPair(response, np.zeros_like(response)), y)


def gsp_wlmmse_filters(diag: SpectralDiagonalStats, form: str = "schur") -> WidelyLinearGraphFilterPair:
    """Optimal pair of graph filters from diagonal statistics.

    Parameters
    ----------
    diag : SpectralDiagonalStats
    form : {"schur", "rho"}
        ``"schur"`` divides by the spectral Schur complement
        ``P[n] = gamma_yy[n] (1 - rho[n])`` and works for proper observations
        too. ``"rho"`` is written in terms of the impropriety coefficient and
        requires ``c_yy[n] != 0`` everywhere; both give the same filters.

    Notes
    -----
    At frequencies flagged in ``diag.degenerate`` the 2x2 system is singular;
    there ``f2 = 0`` and ``f1`` is the strictly linear filter.
    """
    g, gxy, c, cxy = diag.d_gamma_yy, diag.d_gamma_xy, diag.d_c_yy, diag.d_c_xy
    deg = diag.degenerate
    ok = ~deg
    f1 = gxy / g
    f2 = np.zeros_like(f1)
    if form == "schur":
        P = diag.schur_diag[ok]
        f1[ok] = (gxy[ok] - c[ok].conj() * cxy[ok] / g[ok]) / P
        f2[ok] = (cxy[ok] - c[ok] * gxy[ok] / g[ok]) / P
    elif form == "rho":
        if np.any(c[ok] == 0):
            raise ConfigError("the rho form needs a nonzero complementary variance at every frequency")
        rho = diag.rho[ok]
        w = rho / (1.0 - rho)
        f1[ok] = gxy[ok] / (g[ok] * (1.0 - rho)) - w * cxy[ok] / c[ok]
        f2[ok] = cxy[ok] / (g[ok] * (1.0 - rho)) - w * gxy[ok] / c[ok].conj()
    else:
        raise ConfigError(f"unknown form {form!r}")
    return WidelyLinearGraphFilterPair(f1, f2, deg.copy())


def gsp_wlmmse(spectrum: GraphSpectrum, filters: WidelyLinearGraphFilterPair, y):
    """``V diag(f1) V^T y + V diag(f2) V^T y*``."""
    n = spectrum.n_vertices
    if filters.n_vertices != n:
        raise DimensionMismatch(f"filters have length {filters.n_vertices}, graph has N={n}")
    y = np.asarray(y, dtype=complex)
    if y.shape[-1] != n:
        raise DimensionMismatch(f"y has length {y.shape[-1]}, graph has N={n}")
    V = spectrum.eigenvectors
    yb = y @ V
    return (filters.f1 * yb + filters.f2 * yb.conj()) @ V.T


# ---------------------------------------------------------------- MSE formulas


def widely_linear_mse(stats: AugmentedCovariance, h1, h2=None) -> float:
    """MSE of an arbitrary ``x_hat = h1 y + h2 y*`` under ``stats``."""
    h1 = np.asarray(h1, dtype=complex)
    h2 = np.zeros_like(h1) if h2 is None else np.asarray(h2, dtype=complex)
    H = np.hstack([h1, h2])
    cross = np.trace(H @ stats.augmented_xy().conj().T).real
    quad = np.trace(H @ stats.augmented_yy() @ H.conj().T).real
    return float(np.trace(stats.gamma_xx).real - 2.0 * cross + quad)


def graph_filter_mse(diag: SpectralDiagonalStats, f1, f2=None) -> float:
    """MSE of ``V diag(f1) V^T y + V diag(f2) V^T y*`` from diagonal statistics."""
    if diag.d_gamma_xx is None:
        raise ConfigError("diagonal statistics lack d_gamma_xx; the MSE is undefined")
    f1 = np.asarray(f1, dtype=complex)
    f2 = np.zeros_like(f1) if f2 is None else np.asarray(f2, dtype=complex)
    g, gxy, c, cxy = diag.d_gamma_yy, diag.d_gamma_xy, diag.d_c_yy, diag.d_c_xy
    per = (
        diag.d_gamma_xx
        - 2.0 * np.real(f1 * gxy.conj() + f2 * cxy.conj())
        + (np.abs(f1) ** 2 + np.abs(f2) ** 2) * g
        + 2.0 * np.real(f1 * f2.conj() * c)
    )
    return float(per.sum())


def mse_lmmse(stats: AugmentedCovariance) -> float:
    """``tr(Gamma_xx - Gamma_xy Gamma_yy^{-1} Gamma_xy^H)``."""
    H = lmmse_operator(stats)
    return float(np.trace(stats.gamma_xx - H @ stats.gamma_xy.conj().T).real)


def mse_wlmmse(stats: AugmentedCovariance) -> float:
    """``tr(Gamma_xx) - tr([H1 H2] Gamma_aug [H1 H2]^H)`` at the optimum."""
    ops = wlmmse_operators(stats)
    H = np.hstack([ops.h1, ops.h2])
    return float(np.trace(stats.gamma_xx).real - np.trace(H @ stats.augmented_yy() @ H.conj().T).real)


def _trace_xx(diag):
    if diag.d_gamma_xx is None:
        raise ConfigError("diagonal statistics lack d_gamma_xx; the MSE is undefined")
    return float(diag.d_gamma_xx.sum())


def mse_gsp_lmmse(diag: SpectralDiagonalStats) -> float:
    """``tr(Gamma_xx) - sum_n |gamma_xy[n]|^2 / gamma_yy[n]``."""
    return _trace_xx(diag) - float(np.sum(np.abs(diag.d_gamma_xy) ** 2 / diag.d_gamma_yy))


def mse_gsp_wlmmse(diag: SpectralDiagonalStats) -> float:
    """Closed-form MSE of the optimal graph-filter pair.

    Uses the per-frequency inverse of ``[[gamma_yy, conj(c_yy)], [c_yy, gamma_yy]]``
    written with the Schur complement; degenerate frequencies contribute the
    strictly linear term.
    """
    g, gxy, c, cxy = diag.d_gamma_yy, diag.d_gamma_xy, diag.d_c_yy, diag.d_c_xy
    ok = ~diag.degenerate
    explained = np.abs(gxy) ** 2 / g
    P = diag.schur_diag[ok]
    cross = gxy[ok].conj() * c[ok].conj() * cxy[ok] / (P * g[ok])
    explained[ok] = (
        (np.abs(gxy[ok]) ** 2 + np.abs(cxy[ok]) ** 2) / P - 2.0 * cross.real
    )
    return _trace_xx(diag) - float(explained.sum())


def theoretical_mses(stats: AugmentedCovariance | None, diag: SpectralDiagonalStats) -> dict:
    """MSE reports for all estimators keyed by tag.

    ``stats`` may be ``None``, in which case only the graph-filter estimators
    are reported.
    """
    out = {}
    if stats is not None:
        e_l = mse_lmmse(stats)
        e_wl = mse_wlmmse(stats)
        out[LMMSE] = MseReport(LMMSE, e_l)
        out[WLMMSE] = MseReport(WLMMSE, e_wl, e_l - e_wl)
    e_gl = mse_gsp_lmmse(diag)
    e_gwl = mse_gsp_wlmmse(diag)
    out[GSP_LMMSE] = MseReport(GSP_LMMSE, e_gl)
    out[GSP_WLMMSE] = MseReport(GSP_WLMMSE, e_gwl, e_gl - e_gwl)
    return out


def mse_gap_wl_vs_l(stats: AugmentedCovariance) -> float:
    """``tr(H2 conj(P) H2^H)``, the MSE improvement of WLMMSE over LMMSE."""
    ops = wlmmse_operators(stats)
    _, P = _schur_yy(stats)
    return float(np.trace(ops.h2 @ P.conj() @ ops.h2.conj().T).real)


def mse_gap_gsp(diag: SpectralDiagonalStats, filters: WidelyLinearGraphFilterPair) -> float:
    """``sum_n P[n] |f2[n]|^2``, the MSE improvement of GSP-WLMMSE over GSP-LMMSE."""
    return float(np.sum(diag.schur_diag * np.abs(filters.f2) ** 2))


# ---------------------------------------------------------------- diagnostics


def orthogonality_residuals(stats: AugmentedCovariance, spectrum: GraphSpectrum,
                            filters: WidelyLinearGraphFilterPair) -> tuple[float, float]:
    """``|E[(x_hat - x)^H y]|`` and ``|E[(x_hat - x)^H y*]|`` evaluated analytically.

    Both vanish for the optimal filter pair.
    """
    ops = filters.operators(spectrum)
    H1h, H2h = ops.h1.conj().T, ops.h2.conj().T
    r1 = np.trace(stats.gamma_yy @ H1h + stats.c_yy @ H2h - stats.gamma_xy.conj().T)
    r2 = np.trace(stats.c_yy.conj() @ H1h + stats.gamma_yy.conj() @ H2h - stats.c_xy.conj().T)
    return float(abs(r1)), float(abs(r2))


def real_four_filter_form(filters: WidelyLinearGraphFilterPair) -> RealFourFilterForm:
    """Equivalent real filters on the real and imaginary parts of ``y``."""
    a1, b1 = filters.f1.real, filters.f1.imag
    a2, b2 = filters.f2.real, filters.f2.imag
    return RealFourFilterForm(g11=a1 + a2, g12=b2 - b1, g21=b1 + b2, g22=a1 - a2)


def coincidence_check(stats: AugmentedCovariance, spectrum: GraphSpectrum, *,
                      tol: float = 1e-8) -> CoincidenceResult:
    """Test whether the optimal graph-filter pair equals the WLMMSE solution.

    The WLMMSE operators are moved to the frequency domain and compared with
    ``diag(f1)``, ``diag(f2)`` built from the diagonal statistics alone. The
    residuals are relative Frobenius distances.
    """
    from .stats import spectral_diagonals_from_full

    ops = wlmmse_operators(stats)
    V = spectrum.eigenvectors
    filters = gsp_wlmmse_filters(spectral_diagonals_from_full(spectrum, stats))

    def rel(H, f):
        Hf = V.T @ H @ V
        diff = np.linalg.norm(Hf - np.diag(f))
        scale = np.linalg.norm(Hf)
        return float(diff / scale) if scale > 0 else float(diff)

    r1 = rel(ops.h1, filters.f1)
    r2 = rel(ops.h2, filters.f2)
    return CoincidenceResult(bool(max(r1, r2) <= tol), r1, r2)
