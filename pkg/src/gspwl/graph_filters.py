"""Parametric graph frequency responses and Chebyshev polynomial filters.

A Chebyshev filter ``g(L) = sum_k a_k T_k(L_s)`` with the shifted Laplacian
``L_s = 2 (L - lo I) / (hi - lo) - I`` can be applied with nothing but
products with ``L``, so it needs no eigendecomposition and runs in
``O(order * nnz(L))``.

Coefficients are stored in the normalized convention ``f = sum_k a_k T_k``:
the classical projection coefficient ``c_0`` is already halved, so a constant
response ``1`` is stored as ``(1, 0, ..., 0)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .exceptions import ConfigError, DimensionMismatch, IntervalTooSmall, InvalidInterval, PoleOnSpectrum

__all__ = [
    "ArmaFilterParams",
    "arma_response",
    "ChebyshevFilter",
    "chebyshev_fit",
    "chebyshev_fit_samples",
    "chebyshev_apply",
    "estimate_lambda_max",
    "LAMBDA_MAX_SAFETY",
]

LAMBDA_MAX_SAFETY = 1.01


@dataclass(frozen=True)
class ArmaFilterParams:
    """Rational response ``sum_p c_p lam^p / (1 + sum_q a_q lam^q)``.

    ``numerator`` holds ``c_0 .. c_{P-1}`` and ``denominator`` holds
    ``a_1 .. a_Q`` (no leading one). An empty denominator gives a polynomial.
    """

    numerator: tuple
    denominator: tuple = ()

    def __post_init__(self):
        num = tuple(float(v) for v in np.ravel(self.numerator))
        den = tuple(float(v) for v in np.ravel(self.denominator))
        if not num:
            raise ConfigError("numerator needs at least one coefficient")
        if not all(np.isfinite(num + den)):
            raise ConfigError("ARMA coefficients must be finite")
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)

    @property
    def P(self) -> int:
        return len(self.numerator)

    @property
    def Q(self) -> int:
        return len(self.denominator)

    def denominator_at(self, lam):
        lam = np.asarray(lam, dtype=float)
        # np.polyval wants the highest power first
        return np.polyval(list(self.denominator[::-1]) + [1.0], lam)

    def __call__(self, lam):
        return arma_response(self, lam)

    def to_json(self) -> str:
        return json.dumps({"c": list(self.numerator), "a": list(self.denominator)})

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text) if isinstance(text, str) else text
        try:
            return cls(doc["c"], doc.get("a", ()))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed ARMA document: {exc}") from None


def arma_response(params: ArmaFilterParams, lambdas, *, pole_tol: float = 1e-10):
    """Evaluate the rational response at each ``lambda``.

    Raises
    ------
    PoleOnSpectrum
        If ``|1 + sum a_q lam^q| <= pole_tol`` at any requested point.
    """
    lam = np.asarray(lambdas, dtype=float)
    den = params.denominator_at(lam)
    bad = np.abs(den) <= pole_tol
    if np.any(bad):
        raise PoleOnSpectrum(
            f"denominator vanishes at lambda = {np.atleast_1d(lam)[np.atleast_1d(bad)][:5].tolist()}"
        )
    num = np.polyval(params.numerator[::-1], lam)
    return num / den


def _check_interval(interval):
    try:
        lo, hi = (float(v) for v in interval)
    except (TypeError, ValueError):
        raise InvalidInterval(f"interval must be a pair of numbers, got {interval!r}") from None
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
        raise InvalidInterval(f"interval [{lo}, {hi}] is empty or not finite")
    return lo, hi


@dataclass(frozen=True, eq=False)
class ChebyshevFilter:
    """Truncated Chebyshev series on ``interval``; ``coefficients`` are complex."""

    coefficients: np.ndarray
    interval: tuple[float, float]

    def __post_init__(self):
        coeffs = np.array(self.coefficients, dtype=complex, copy=True).ravel()
        if coeffs.size == 0:
            raise ConfigError("a Chebyshev filter needs at least one coefficient")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "interval", _check_interval(self.interval))

    @property
    def order(self) -> int:
        return self.coefficients.size - 1

    def _to_unit(self, lam):
        lo, hi = self.interval
        return (2.0 * np.asarray(lam, dtype=float) - (hi + lo)) / (hi - lo)

    def __call__(self, lam):
        """Evaluate the polynomial at scalar or array ``lam``."""
        t = self._to_unit(lam)
        return np.polynomial.chebyshev.chebval(t, self.coefficients.real) + 1j * np.polynomial.chebyshev.chebval(
            t, self.coefficients.imag
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "order": self.order,
                "interval": list(self.interval),
                "coeffs_re": self.coefficients.real.tolist(),
                "coeffs_im": self.coefficients.imag.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text) if isinstance(text, str) else text
        try:
            coeffs = np.asarray(doc["coeffs_re"], float) + 1j * np.asarray(doc["coeffs_im"], float)
            order, interval = int(doc["order"]), doc["interval"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed Chebyshev document: {exc}") from None
        if coeffs.size != order + 1:
            raise ConfigError(f"order {order} does not match {coeffs.size} coefficients")
        return cls(coeffs, interval)


def chebyshev_fit(response_fn, order: int, interval, n_nodes: int | None = None) -> ChebyshevFilter:
    """Project ``response_fn`` onto Chebyshev polynomials up to ``order``.

    Uses the discrete cosine projection at ``n_nodes`` Chebyshev points of the
    first kind, ``max(64, 4 (order + 1))`` by default. The real and imaginary
    parts are fitted independently.
    """
    order = int(order)
    if order < 0:
        raise ConfigError("order must be nonnegative")
    lo, hi = _check_interval(interval)
    m = max(64, 4 * (order + 1)) if n_nodes is None else int(n_nodes)
    if m < order + 1:
        raise ConfigError(f"need at least order + 1 = {order + 1} nodes, got {m}")
    theta = np.pi * (np.arange(m) + 0.5) / m
    lam = 0.5 * (hi - lo) * np.cos(theta) + 0.5 * (hi + lo)
    values = np.asarray(response_fn(lam), dtype=complex)
    if values.shape != lam.shape or not np.all(np.isfinite(values)):
        raise ConfigError("response function must return finite values, one per node")
    k = np.arange(order + 1)
    coeffs = (2.0 / m) * (np.cos(np.outer(k, theta)) @ values)
    coeffs[0] *= 0.5
    return ChebyshevFilter(coeffs, (lo, hi))


def chebyshev_fit_samples(lambdas, values, order: int, interval) -> ChebyshevFilter:
    """Least-squares Chebyshev fit to responses known only at ``lambdas``.

    When ``order + 1`` exceeds the number of distinct points the minimum-norm
    interpolant is returned.
    """
    lo, hi = _check_interval(interval)
    lam = np.asarray(lambdas, dtype=float)
    values = np.asarray(values, dtype=complex)
    if lam.shape != values.shape or lam.ndim != 1:
        raise DimensionMismatch("lambdas and values must be 1-D arrays of the same length")
    if lam.min() < lo - 1e-12 * max(1.0, hi) or lam.max() > hi + 1e-12 * max(1.0, hi):
        raise IntervalTooSmall(f"sample points span [{lam.min()}, {lam.max()}], outside [{lo}, {hi}]")
    t = (2.0 * lam - (hi + lo)) / (hi - lo)
    T = np.polynomial.chebyshev.chebvander(t, int(order))
    coeffs, *_ = np.linalg.lstsq(T, values, rcond=None)
    return ChebyshevFilter(coeffs, (lo, hi))


def estimate_lambda_max(laplacian, *, tol: float = 1e-10) -> float:
    """Largest eigenvalue of a symmetric Laplacian by Lanczos iteration."""
    L = laplacian
    n = L.shape[0]
    if n < 3:
        dense = L.toarray() if scipy.sparse.issparse(L) else np.asarray(L, dtype=float)
        return float(np.linalg.eigvalsh(dense)[-1])
    v0 = np.cos(np.arange(n) + 1.0)  # deterministic start, not orthogonal to typical eigenvectors
    val = scipy.sparse.linalg.eigsh(L, k=1, which="LA", tol=tol, v0=v0, return_eigenvectors=False)
    return float(val[0])


class _CountingLaplacian:
    def __init__(self, L):
        self.L = L
        self.matvecs = 0

    def __call__(self, Z):
        self.matvecs += 1
        # rows are samples and L is symmetric, so (L z)^T = z^T L
        return (self.L @ Z.T).T if scipy.sparse.issparse(self.L) else Z @ self.L


def chebyshev_apply(laplacian, g1: ChebyshevFilter, g2: ChebyshevFilter | None, y, *,
                    check_interval: bool = True, return_matvecs: bool = False):
    """Evaluate ``g1(L) y + g2(L) y*`` by the three-term recurrence.

    Parameters
    ----------
    laplacian : ndarray or sparse matrix of shape (N, N)
    g1, g2 : ChebyshevFilter
        Must share one interval. ``g2=None`` means a strictly linear filter.
    y : array of shape (N,) or (K, N)
    check_interval : bool
        Estimate the largest eigenvalue of ``L`` and refuse intervals that do
        not cover it.
    return_matvecs : bool
        Also return the number of products with ``L`` in the recurrence.

    Notes
    -----
    ``L`` is real, so ``T_k(L) y* = conj(T_k(L) y)`` and both filters share a
    single recurrence; the cost is ``max(order)`` products with ``L``.
    """
    if g2 is None:
        g2 = ChebyshevFilter(np.zeros(1), g1.interval)
    if g1.interval != g2.interval:
        raise InvalidInterval("g1 and g2 must be fitted on the same interval")
    lo, hi = g1.interval
    n = laplacian.shape[0]
    y = np.asarray(y, dtype=complex)
    if y.shape[-1] != n:
        raise DimensionMismatch(f"y has length {y.shape[-1]}, Laplacian is {n}x{n}")
    if check_interval:
        lam_max = estimate_lambda_max(laplacian)
        if lam_max > hi * (1.0 + 1e-9) + 1e-12:
            raise IntervalTooSmall(
                f"interval upper bound {hi} is below the largest eigenvalue estimate {lam_max}"
            )
    Y = np.atleast_2d(y)
    matvec = _CountingLaplacian(laplacian)
    alpha, beta = 2.0 / (hi - lo), (hi + lo) / (hi - lo)

    def shifted(Z):
        return alpha * matvec(Z) - beta * Z

    order = max(g1.order, g2.order)
    a1 = np.zeros(order + 1, complex)
    a2 = np.zeros(order + 1, complex)
    a1[: g1.order + 1] = g1.coefficients
    a2[: g2.order + 1] = g2.coefficients

    t_prev = Y
    out = a1[0] * t_prev + a2[0] * t_prev.conj()
    if order >= 1:
        t_cur = shifted(Y)
        out = out + a1[1] * t_cur + a2[1] * t_cur.conj()
        for k in range(2, order + 1):
            t_prev, t_cur = t_cur, 2.0 * shifted(t_cur) - t_prev
            out = out + a1[k] * t_cur + a2[k] * t_cur.conj()
    if y.ndim == 1:
        out = out[0]
    return (out, matvec.matvecs) if return_matvecs else out
