"""Augmented second-order statistics of complex graph signals.

For a pair of zero-mean complex vectors ``a`` and ``b`` the covariance is
``Gamma_ab = E[a b^H]`` and the complementary covariance is
``C_ab = E[a b^T]``. A signal is *proper* when its complementary covariance
vanishes. Graph filters act diagonally in the eigenbasis of the Laplacian, so
the filter-restricted estimators only need the diagonals of the
frequency-domain statistics; :class:`SpectralDiagonalStats` holds those.

Sample data use the samples-by-features layout: ``X`` and ``Y`` have shape
``(K, N)`` with one signal per row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import as_complex_matrix, check_pair, check_square
from .exceptions import (
    ConfigError,
    DimensionMismatch,
    NotUnitary,
    NumericalError,
    SingularSpectrum,
)
from .graph import GraphSpectrum

__all__ = [
    "AugmentedCovariance",
    "SpectralDiagonalStats",
    "TrainingDataset",
    "spectral_diagonals_from_full",
    "sample_full_stats",
    "sample_spectral_diagonals",
    "widely_linear_model_stats",
    "random_augmented_stats",
    "sample_improper_gaussian",
    "MaximallyImproperObservation",
    "maximally_improper_observation",
]

RHO_TOL = 1e-9
SINGULAR_TOL = 1e-14


def _frozen(a, dtype=complex):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class AugmentedCovariance:
    """Covariances and complementary covariances of a signal ``x`` and an
    observation ``y``.

    Attributes
    ----------
    gamma_xx, c_xx : ndarray of shape (N, N)
        ``E[x x^H]`` and ``E[x x^T]``.
    gamma_xy, c_xy : ndarray of shape (N, N)
        ``E[x y^H]`` and ``E[x y^T]``.
    gamma_yy, c_yy : ndarray of shape (N, N)
        ``E[y y^H]`` and ``E[y y^T]``.
    """

    gamma_xx: np.ndarray
    c_xx: np.ndarray
    gamma_xy: np.ndarray
    c_xy: np.ndarray
    gamma_yy: np.ndarray
    c_yy: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.gamma_yy).shape[0]
        for name in ("gamma_xx", "c_xx", "gamma_xy", "c_xy", "gamma_yy", "c_yy"):
            arr = check_square(getattr(self, name), name, n)
            object.__setattr__(self, name, _frozen(arr))

    @property
    def n_vertices(self) -> int:
        return self.gamma_yy.shape[0]

    def augmented_yy(self) -> np.ndarray:
        """The ``2N x 2N`` covariance of ``[y; y*]``."""
        return np.block([[self.gamma_yy, self.c_yy], [self.c_yy.conj(), self.gamma_yy.conj()]])

    def augmented_xy(self) -> np.ndarray:
        """The ``N x 2N`` cross-covariance ``E[x [y; y*]^H]``."""
        return np.hstack([self.gamma_xy, self.c_xy])

    def to_frequency(self, spectrum: GraphSpectrum) -> "AugmentedCovariance":
        """Statistics of ``V^T x`` and ``V^T y``."""
        V = spectrum.eigenvectors
        if V.shape[0] != self.n_vertices:
            raise DimensionMismatch(
                f"statistics are for N={self.n_vertices}, graph has N={V.shape[0]}"
            )
        return AugmentedCovariance(
            *(V.T @ getattr(self, name) @ V for name in _FIELDS)
        )

    def is_proper(self, atol=0.0) -> bool:
        return bool(np.all(np.abs(self.c_yy) <= atol) and np.all(np.abs(self.c_xy) <= atol))

    def validity_errors(self) -> dict:
        """Deviations from the structural invariants (zero for exact stats)."""
        scale = max(1.0, float(np.abs(self.gamma_yy).max()))
        aug = self.augmented_yy()
        return {
            "gamma_yy_hermitian": float(np.abs(self.gamma_yy - self.gamma_yy.conj().T).max()) / scale,
            "c_yy_symmetric": float(np.abs(self.c_yy - self.c_yy.T).max()) / scale,
            "augmented_min_eig": float(np.linalg.eigvalsh(0.5 * (aug + aug.conj().T)).min()) / scale,
        }


_FIELDS = ("gamma_xx", "c_xx", "gamma_xy", "c_xy", "gamma_yy", "c_yy")


@dataclass(frozen=True, eq=False)
class SpectralDiagonalStats:
    """Diagonals of the frequency-domain statistics.

    Only ``d_gamma_xy``, ``d_gamma_yy``, ``d_c_xy`` and ``d_c_yy`` are needed
    to build the graph-filter estimators. ``d_gamma_xx`` is kept so the
    estimators' MSEs can be evaluated; it may be ``None``.

    Attributes
    ----------
    rho : ndarray
        Impropriety coefficient ``|c_yy|^2 / gamma_yy^2`` per frequency.
    schur_diag : ndarray
        ``gamma_yy * (1 - rho)``, the error variance of predicting ``y_bar[n]``
        from its own conjugate.
    degenerate : ndarray of bool
        Frequencies with ``rho > 1 - rho_tol``. The widely-linear estimator
        falls back to the strictly linear one there.
    """

    d_gamma_xy: np.ndarray
    d_gamma_yy: np.ndarray
    d_c_xy: np.ndarray
    d_c_yy: np.ndarray
    d_gamma_xx: np.ndarray | None = None
    rho_tol: float = RHO_TOL
    singular_tol: float = SINGULAR_TOL

    def __post_init__(self):
        n = np.shape(self.d_gamma_yy)[0]
        d_gamma_yy = np.asarray(self.d_gamma_yy)
        if np.iscomplexobj(d_gamma_yy):
            d_gamma_yy = d_gamma_yy.real
        for name in ("d_gamma_xy", "d_c_xy", "d_c_yy"):
            arr = _frozen(getattr(self, name))
            if arr.shape != (n,):
                raise DimensionMismatch(f"{name} has shape {arr.shape}, expected ({n},)")
            object.__setattr__(self, name, arr)
        if np.any(~np.isfinite(d_gamma_yy)) or np.any(d_gamma_yy <= self.singular_tol):
            bad = np.flatnonzero(~(d_gamma_yy > self.singular_tol))
            raise SingularSpectrum(
                f"observation variance vanishes at graph frequencies {bad.tolist()}"
            )
        object.__setattr__(self, "d_gamma_yy", _frozen(d_gamma_yy, float))
        if self.d_gamma_xx is not None:
            d_xx = np.asarray(self.d_gamma_xx)
            object.__setattr__(self, "d_gamma_xx", _frozen(d_xx.real if np.iscomplexobj(d_xx) else d_xx, float))

    @property
    def n_vertices(self) -> int:
        return self.d_gamma_yy.shape[0]

    @property
    def rho(self) -> np.ndarray:
        return np.abs(self.d_c_yy) ** 2 / self.d_gamma_yy**2

    @property
    def schur_diag(self) -> np.ndarray:
        return self.d_gamma_yy * (1.0 - self.rho)

    @property
    def degenerate(self) -> np.ndarray:
        return self.rho > 1.0 - self.rho_tol


@dataclass(frozen=True, eq=False)
class TrainingDataset:
    """``K`` paired samples of a signal ``x`` and its observation ``y``.

    ``X`` and ``Y`` have shape ``(K, N)``.
    """

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        Y, X = check_pair(self.Y, self.X)
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "Y", _frozen(Y))

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def n_vertices(self) -> int:
        return self.X.shape[1]


def spectral_diagonals_from_full(spectrum: GraphSpectrum, stats: AugmentedCovariance, *,
                                 rho_tol=RHO_TOL, singular_tol=SINGULAR_TOL) -> SpectralDiagonalStats:
    """Diagonals of ``V^T Gamma V`` and ``V^T C V`` for each statistic."""
    V = spectrum.eigenvectors
    if V.shape[0] != stats.n_vertices:
        raise DimensionMismatch(
            f"statistics are for N={stats.n_vertices}, graph has N={V.shape[0]}"
        )

    def ddiag(M):
        # diag(V^T M V) without forming the product
        return np.einsum("in,ij,jn->n", V, M, V)

    d_gamma_yy = ddiag(stats.gamma_yy)
    if np.abs(d_gamma_yy.imag).max() > 1e-10 * max(1.0, np.abs(d_gamma_yy).max()):
        raise ConfigError("gamma_yy is not Hermitian: its spectral diagonal is complex")
    return SpectralDiagonalStats(
        d_gamma_xy=ddiag(stats.gamma_xy),
        d_gamma_yy=d_gamma_yy.real,
        d_c_xy=ddiag(stats.c_xy),
        d_c_yy=ddiag(stats.c_yy),
        d_gamma_xx=ddiag(stats.gamma_xx).real,
        rho_tol=rho_tol,
        singular_tol=singular_tol,
    )


def _unpack(data, Y):
    if isinstance(data, TrainingDataset):
        return data.X, data.Y
    Y, X = check_pair(Y, data)
    return X, Y


def sample_full_stats(data, Y=None) -> AugmentedCovariance:
    """Sample-mean statistics ``(1/K) sum_k a_k b_k^H`` and ``(1/K) sum_k a_k b_k^T``.

    Parameters
    ----------
    data : TrainingDataset or array of shape (K, N)
        Either a dataset, or the signal samples ``X`` with ``Y`` given separately.
    Y : array of shape (K, N), optional

    Notes
    -----
    No mean is subtracted; the signals are taken to be zero mean.
    """
    X, Y = _unpack(data, Y)
    K = X.shape[0]

    def herm(M):
        return 0.5 * (M + M.conj().T)

    def sym(M):
        return 0.5 * (M + M.T)

    return AugmentedCovariance(
        gamma_xx=herm(X.T @ X.conj() / K),
        c_xx=sym(X.T @ X / K),
        gamma_xy=X.T @ Y.conj() / K,
        c_xy=X.T @ Y / K,
        gamma_yy=herm(Y.T @ Y.conj() / K),
        c_yy=sym(Y.T @ Y / K),
    )


def sample_spectral_diagonals(spectrum: GraphSpectrum, data, Y=None, *,
                              rho_tol=RHO_TOL, singular_tol=SINGULAR_TOL) -> SpectralDiagonalStats:
    """Diagonal frequency-domain sample statistics in ``O(KN)`` after the GFT.

    Equal to the diagonals of the transformed :func:`sample_full_stats`, but
    without forming any ``N x N`` matrix.
    """
    X, Y = _unpack(data, Y)
    V = spectrum.eigenvectors
    if V.shape[0] != X.shape[1]:
        raise DimensionMismatch(f"data has N={X.shape[1]}, graph has N={V.shape[0]}")
    Xb = X @ V
    Yb = Y @ V
    return SpectralDiagonalStats(
        d_gamma_xy=np.mean(Xb * Yb.conj(), axis=0),
        d_gamma_yy=np.mean(np.abs(Yb) ** 2, axis=0),
        d_c_xy=np.mean(Xb * Yb, axis=0),
        d_c_yy=np.mean(Yb * Yb, axis=0),
        d_gamma_xx=np.mean(np.abs(Xb) ** 2, axis=0),
        rho_tol=rho_tol,
        singular_tol=singular_tol,
    )


def widely_linear_model_stats(A, B, gamma_xx, c_xx, gamma_nn=None, c_nn=None) -> AugmentedCovariance:
    """Exact statistics of ``y = A x + B x* + n`` with ``n`` independent of ``x``.

    ``gamma_nn`` and ``c_nn`` default to zero (noiseless observation).
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    G = np.asarray(gamma_xx, dtype=complex)
    C = np.asarray(c_xx, dtype=complex)
    n = G.shape[0]
    Gn = np.zeros((n, n), complex) if gamma_nn is None else np.asarray(gamma_nn, dtype=complex)
    Cn = np.zeros((n, n), complex) if c_nn is None else np.asarray(c_nn, dtype=complex)
    AH, BH = A.conj().T, B.conj().T
    gamma_yy = A @ G @ AH + A @ C @ BH + B @ C.conj() @ AH + B @ G.conj() @ BH + Gn
    c_yy = A @ C @ A.T + A @ G @ B.T + B @ G.conj() @ A.T + B @ C.conj() @ B.T + Cn
    return AugmentedCovariance(
        gamma_xx=G,
        c_xx=C,
        gamma_xy=G @ AH + C @ BH,
        c_xy=C @ A.T + G @ B.T,
        gamma_yy=0.5 * (gamma_yy + gamma_yy.conj().T),
        c_yy=0.5 * (c_yy + c_yy.T),
    )


def random_augmented_stats(n_vertices, rng=None, *, proper=False, rank=None) -> AugmentedCovariance:
    """Random valid joint statistics of ``(x, y)``.

    ``z = [x; y]`` is generated as ``z = A w + B w*`` with ``w`` proper white
    noise of dimension ``rank`` (default ``2N``), which guarantees a positive
    semidefinite augmented covariance. ``proper=True`` sets ``B = 0``.
    """
    rng = np.random.default_rng(rng)
    n = int(n_vertices)
    m = 2 * n if rank is None else int(rank)

    def cn(*shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)

    A = cn(2 * n, m)
    B = np.zeros((2 * n, m), complex) if proper else cn(2 * n, m) * rng.uniform(0.2, 1.0)
    gamma = A @ A.conj().T + B @ B.conj().T
    comp = A @ B.T + B @ A.T
    x, y = slice(0, n), slice(n, 2 * n)
    return AugmentedCovariance(
        gamma_xx=gamma[x, x],
        c_xx=comp[x, x],
        gamma_xy=gamma[x, y],
        c_xy=comp[x, y],
        gamma_yy=gamma[y, y],
        c_yy=comp[y, y],
    )


def composite_real_covariance(gamma, c) -> np.ndarray:
    """Covariance of ``[Re z; Im z]`` given ``E[z z^H]`` and ``E[z z^T]``."""
    gamma = np.asarray(gamma, dtype=complex)
    c = np.asarray(c, dtype=complex)
    r_uu = 0.5 * (gamma + c).real
    r_vv = 0.5 * (gamma - c).real
    r_vu = 0.5 * (gamma + c).imag
    r_uv = 0.5 * (c - gamma).imag
    R = np.block([[r_uu, r_uv], [r_vu, r_vv]])
    return 0.5 * (R + R.T)


def sample_improper_gaussian(gamma, c, size, rng=None, *, psd_tol=1e-10) -> np.ndarray:
    """Draw zero-mean complex Gaussian vectors with given ``Gamma`` and ``C``.

    Returns an array of shape ``(size, N)``.

    Raises
    ------
    ConfigError
        If the pair does not form a valid (positive semidefinite) augmented
        covariance.
    """
    rng = np.random.default_rng(rng)
    R = composite_real_covariance(gamma, c)
    w, Q = np.linalg.eigh(R)
    scale = max(1.0, float(np.abs(w).max()))
    if w.min() < -psd_tol * scale:
        raise ConfigError(
            f"(Gamma, C) is not a valid covariance pair: composite eigenvalue {w.min():.3e}"
        )
    root = Q * np.sqrt(np.clip(w, 0.0, None))
    n = R.shape[0] // 2
    z = rng.standard_normal((int(size), 2 * n)) @ root.T
    return z[:, :n] + 1j * z[:, n:]


@dataclass(frozen=True, eq=False)
class MaximallyImproperObservation:
    """Observation ``y = S r`` with ``S`` a symmetric unitary root of ``F``.

    ``y = F y*`` holds for every real ``r``. ``f_bar`` is ``V^T F V``; when it
    is diagonal every graph frequency of ``y`` is maximally improper.
    """

    values: np.ndarray
    root: np.ndarray
    f_bar: np.ndarray

    def stats(self, r_cov=None):
        """``(Gamma_yy, C_yy)`` for real ``r`` with covariance ``r_cov`` (default I)."""
        S = self.root
        R = np.eye(S.shape[0]) if r_cov is None else np.asarray(r_cov, dtype=float)
        return S @ R @ S.conj().T, S @ R @ S.T


def _symmetric_unitary_root(F, tol):
    # Re F and Im F are commuting real symmetric matrices, so one real
    # orthogonal basis diagonalizes F; a generic combination finds it.
    mix = F.real + np.pi / 3.0 * F.imag
    _, Q = np.linalg.eigh(0.5 * (mix + mix.T))
    D = Q.T @ F @ Q
    off = np.abs(D - np.diag(np.diag(D))).max()
    if off > tol:
        raise NumericalError(
            f"could not diagonalize F in a real basis (off-diagonal {off:.2e}); "
            "F has a repeated eigenvalue of the mixing matrix"
        )
    return (Q * np.sqrt(np.diag(D))) @ Q.T


def maximally_improper_observation(spectrum: GraphSpectrum, base, unitary_f, *,
                                   tol=1e-10) -> MaximallyImproperObservation:
    """Build ``y`` with ``y = F y*`` from real ``base`` samples.

    Parameters
    ----------
    spectrum : GraphSpectrum
    base : array_like, shape (N,) or (K, N)
        Real vector(s) ``r``; an imaginary part is rejected.
    unitary_f : array_like, shape (N, N)
        Complex symmetric unitary matrix ``F``.

    Raises
    ------
    NotUnitary
        If ``F F^H`` differs from the identity by more than ``tol``.
    """
    n = spectrum.n_vertices
    F = check_square(unitary_f, "unitary_f", n)
    if np.abs(F @ F.conj().T - np.eye(n)).max() > tol:
        raise NotUnitary("F is not unitary")
    if np.abs(F - F.T).max() > tol:
        raise ConfigError("F must be symmetric for the square-root construction")
    r = np.asarray(base)
    if np.iscomplexobj(r):
        if np.abs(r.imag).max() > 0:
            raise ConfigError("base signal must be real")
        r = r.real
    r = as_complex_matrix(r, "base", n).real
    S = _symmetric_unitary_root(F, max(tol, 1e-8))
    y = r @ S.T
    if np.ndim(base) == 1:
        y = y[0]
    V = spectrum.eigenvectors
    return MaximallyImproperObservation(values=y, root=S, f_bar=V.T @ F @ V)
