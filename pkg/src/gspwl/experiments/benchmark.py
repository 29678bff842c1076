"""Monte-Carlo comparison of the estimators on the synthetic scenarios.

Randomness is split deterministically from one integer seed. Every stream is
``np.random.default_rng(np.random.SeedSequence([seed, stage, param_key, K]))``
where ``stage`` is 1 for training data, 2 for test data and 3 for topology
perturbations, and ``param_key = round(param * 1e6)`` for the swept
parameter (``eta`` or ``theta``). A result therefore depends only on its own
coordinates, not on which other ``K`` or parameter values are in the sweep
or in which order they run.

Trials are evaluated as one vectorized batch per ``(param, K)`` cell.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .. import estimators as est
from ..exceptions import ConfigError, GSPError
from ..models import make_estimator
from .example1 import (
    Example1Config,
    example1_theoretical_stats,
    sample_example1,
)
from .psse import PowerSystemModel, perturb_topology, sample_psse

__all__ = [
    "McResult",
    "derive_rng",
    "run_mc_benchmark",
    "run_robustness",
    "SAMPLE_TAGS",
    "THEORETICAL_TAGS",
    "ALL_TAGS",
]

THEORETICAL_TAGS = est.ESTIMATOR_TAGS
SAMPLE_TAGS = tuple("s" + t for t in est.ESTIMATOR_TAGS)
ALL_TAGS = THEORETICAL_TAGS + SAMPLE_TAGS

STAGE_TRAIN, STAGE_TEST, STAGE_TOPOLOGY = 1, 2, 3

_GRAPH_SAMPLE_TAGS = ("s" + est.GSP_LMMSE, "s" + est.GSP_WLMMSE)


@dataclass(frozen=True)
class McResult:
    """One cell of a Monte-Carlo sweep.

    ``mse`` is the average of ``||x_hat - x||^2`` over ``n_trials`` test pairs
    and ``mse_stderr`` its standard error. ``diverged`` is set when the
    sample covariance was singular (the estimate then uses a pseudo-inverse)
    or the error was not finite; ``error`` holds the message of a failure
    that prevented any estimate. ``theoretical_mse`` is the closed-form MSE
    of the corresponding exact-statistics estimator when one exists.
    """

    scenario: str
    estimator: str
    K: int
    param: float
    mse: float
    mse_stderr: float
    n_trials: int
    seed: int
    diverged: bool = False
    error: str = ""
    theoretical_mse: float | None = None

    def as_dict(self):
        return asdict(self)


def derive_rng(seed: int, stage: int, param: float = 0.0, K: int = 0) -> np.random.Generator:
    """Independent generator for one ``(stage, param, K)`` coordinate."""
    key = int(round(float(param) * 1e6))
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(stage), key & 0xFFFFFFFF, int(K)]))


class _Scenario:
    """Uniform view of the two experiment types."""

    def __init__(self, obj, spectrum=None):
        if isinstance(obj, Example1Config):
            if spectrum is None:
                raise ConfigError("the graph-filter scenario needs its GraphSpectrum")
            self.name, self.param, self.center = "example1", float(obj.eta), False
            self.spectrum = spectrum
            self._sample = lambda count, rng: sample_example1(obj, spectrum, count, rng)
            self.diag_stats, self.full_stats = example1_theoretical_stats(obj, spectrum)
        elif isinstance(obj, PowerSystemModel):
            self.name, self.param, self.center = "psse", obj.theta, True
            self.spectrum = obj.spectrum
            self._sample = lambda count, rng: sample_psse(obj, count, rng)
            self.diag_stats = self.full_stats = None
        else:
            raise ConfigError(f"unsupported scenario type {type(obj).__name__}")

    def sample(self, count, rng):
        return self._sample(count, rng)

    def theoretical_mses(self):
        if self.full_stats is None:
            return {}
        return {tag: rep.mse for tag, rep in est.theoretical_mses(self.full_stats, self.diag_stats).items()}


def _parse_tags(estimators):
    tags = ALL_TAGS if estimators is None else tuple(estimators)
    unknown = [t for t in tags if t not in ALL_TAGS]
    if unknown:
        raise ConfigError(f"unknown estimators {unknown}; choose from {list(ALL_TAGS)}")
    return tags


def _fit_sample(tag, spectrum, center, train):
    base = tag[1:]
    params = {"center": center}
    if base in (est.LMMSE, est.WLMMSE):
        params["singular"] = "pinv"
    return make_estimator(base, spectrum, **params).fit(train.Y, train.X)


def _from_stats(tag, scenario):
    cls = type(make_estimator(tag, scenario.spectrum))
    if tag in (est.LMMSE, est.WLMMSE):
        return cls.from_stats(scenario.full_stats)
    return cls.from_stats(scenario.diag_stats, scenario.spectrum)


def _evaluate(model, test):
    err = np.sum(np.abs(model.predict(test.Y) - test.X) ** 2, axis=1)
    m = err.size
    mse = float(err.mean())
    se = float(err.std(ddof=1) / np.sqrt(m)) if m > 1 else 0.0
    return mse, se


def _cell(scenario_name, tag, K, param, seed, n_trials, fit, test, theoretical):
    try:
        model = fit()
        mse, se = _evaluate(model, test)
    except GSPError as exc:
        return McResult(scenario_name, tag, K, param, float("nan"), float("nan"), n_trials, seed,
                        diverged=True, error=str(exc), theoretical_mse=theoretical)
    diverged = bool(getattr(model, "singular_", False)) or not np.isfinite(mse)
    return McResult(scenario_name, tag, K, param, mse, se, n_trials, seed,
                    diverged=diverged, theoretical_mse=theoretical)


def run_mc_benchmark(scenario, estimators=None, K_values=(100,), n_trials=10_000, seed=0, *,
                     spectrum=None) -> list[McResult]:
    """Empirical MSE of each estimator for each training size.

    Parameters
    ----------
    scenario : Example1Config or PowerSystemModel
    estimators : sequence of str, optional
        Tags among ``LMMSE``, ``WLMMSE``, ``GSP-LMMSE``, ``GSP-WLMMSE``
        (exact statistics, only for the graph-filter scenario) and their
        sample-mean versions prefixed with ``s``. Defaults to all that apply.
    K_values : sequence of int
        Training-set sizes; each gets a fresh training and test set.
    n_trials : int
        Number of test pairs ``M``.
    seed : int
    spectrum : GraphSpectrum
        Required for :class:`Example1Config`.

    Returns
    -------
    list of McResult
        Ordered by ``K`` then by estimator tag order.
    """
    sc = _Scenario(scenario, spectrum)
    tags = _parse_tags(estimators)
    if sc.full_stats is None:
        tags = tuple(t for t in tags if t in SAMPLE_TAGS)
    n_trials = int(n_trials)
    if n_trials < 1:
        raise ConfigError("n_trials must be at least 1")
    theory = sc.theoretical_mses()
    exact_models = {t: _from_stats(t, sc) for t in tags if t in THEORETICAL_TAGS}
    results = []
    for K in K_values:
        K = int(K)
        if K < 1:
            raise ConfigError("training sizes must be at least 1")
        test = sc.sample(n_trials, derive_rng(seed, STAGE_TEST, sc.param, K))
        train = sc.sample(K, derive_rng(seed, STAGE_TRAIN, sc.param, K))
        for tag in tags:
            if tag in exact_models:
                fit = lambda tag=tag: exact_models[tag]
                th = theory.get(tag)
            else:
                fit = lambda tag=tag: _fit_sample(tag, sc.spectrum, sc.center, train)
                th = theory.get(tag[1:])
            results.append(_cell(sc.name, tag, K, sc.param, seed, n_trials, fit, test, th))
    return results


def run_robustness(model: PowerSystemModel, n_changes=(0, 5, 10), mode="remove", K=1000, n_trials=2000,
                   seed=0, *, estimators=None, retrain=False, adapt_graph=False) -> list[McResult]:
    """Empirical MSE when the test grid differs from the training grid.

    By default the estimators are fitted once on data from ``model`` and then
    applied to data from each perturbed grid (model mismatch). With
    ``retrain=True`` they are refitted on data from the perturbed grid.
    ``adapt_graph=True`` keeps the original training data but lets the graph
    estimators recompute their spectral statistics on the perturbed graph,
    which needs no new data; the full-matrix estimators cannot use the graph
    and are unaffected.
    Zero changes reproduces :func:`run_mc_benchmark` at the same seed.

    Each row's ``scenario`` is ``"robustness-<mode>-<n_changes>"``.
    """
    tags = tuple(t for t in _parse_tags(estimators) if t in SAMPLE_TAGS)
    param = model.theta
    train = sample_psse(model, K, derive_rng(seed, STAGE_TRAIN, param, K))
    fitted = {}
    for tag in tags:
        try:
            fitted[tag] = _fit_sample(tag, model.spectrum, True, train)
        except GSPError as exc:
            fitted[tag] = exc
    results = []
    for nc in n_changes:
        nc = int(nc)
        name = f"robustness-{mode}-{nc}"
        perturbed = perturb_topology(model, nc, mode, derive_rng(seed, STAGE_TOPOLOGY, param, nc))
        test = sample_psse(perturbed, n_trials, derive_rng(seed, STAGE_TEST, param, K))
        if retrain and nc:
            p_train = sample_psse(perturbed, K, derive_rng(seed, STAGE_TRAIN, param, K))
        for tag in tags:
            if retrain and nc:
                fit = lambda tag=tag: _fit_sample(tag, perturbed.spectrum, True, p_train)
            elif adapt_graph and nc and tag in _GRAPH_SAMPLE_TAGS:
                fit = lambda tag=tag: _fit_sample(tag, perturbed.spectrum, True, train)
            else:
                def fit(tag=tag):
                    if isinstance(fitted[tag], Exception):
                        raise fitted[tag]
                    return fitted[tag]
            results.append(_cell(name, tag, K, param, seed, n_trials, fit, test, None))
    return results
