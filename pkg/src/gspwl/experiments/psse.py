"""Power-grid state estimation: bus voltages from noisy power injections.

Bus voltages ``x = (1 + 0.1 mu) * exp(1j * phi)`` with ``mu`` standard normal
and ``phi`` uniform on ``[0, theta]`` are observed through the AC power-flow
equations ``y = x * conj(Y x) + n``, where ``Y = G + jB`` is the nodal
admittance matrix and ``n`` is proper white noise. Small ``theta`` gives a
strongly improper ``x``.

Line admittances follow the nodal-matrix convention: off-diagonal entries of
``Y`` are the line values ``y_mk`` and each diagonal entry is minus the sum of
its row's line values, so ``Y 1 = 0``. With ``y_mk = g_mk + j b_mk``,
``g_mk <= 0`` and ``b_mk > 0``, both ``G`` and ``-B`` are graph Laplacians;
``-B`` (edge weights ``b_mk``) defines the graph used by the estimators.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ..exceptions import ConfigError, DisconnectionRisk, InvalidModel
from ..graph import GraphSpectrum
from ..stats import TrainingDataset

__all__ = [
    "PowerSystemModel",
    "load_case_csv",
    "save_case_csv",
    "synthetic_grid",
    "bundled_grid",
    "power_injections",
    "sample_psse",
    "perturb_topology",
    "BUNDLED_CASE",
]

BUNDLED_CASE = "grid30.csv"
BUNDLED_SEED = 30


@dataclass(frozen=True, eq=False)
class PowerSystemModel:
    """Transmission grid plus the signal and noise parameters.

    Parameters
    ----------
    n_buses : int
    lines : tuple of (m, k, y_mk)
        One entry per undirected line, 0-based buses, complex ``y_mk``.
    theta : float
        Upper limit of the bus phase angles, in radians.
    noise_sigma : float
        Standard deviation of the complex measurement noise.
    """

    n_buses: int
    lines: tuple
    theta: float = 0.2
    noise_sigma: float = 0.01

    def __post_init__(self):
        n = int(self.n_buses)
        lines = tuple((int(m), int(k), complex(y)) for m, k, y in self.lines)
        seen = set()
        for m, k, y in lines:
            if not (0 <= m < n and 0 <= k < n) or m == k:
                raise InvalidModel(f"line ({m}, {k}) is not between two distinct buses in [0, {n})")
            key = (min(m, k), max(m, k))
            if key in seen:
                raise InvalidModel(f"line {key} listed twice")
            seen.add(key)
            if not (y.real <= 0 and y.imag > 0):
                raise InvalidModel(
                    f"line ({m}, {k}) has y = {y}; expected g <= 0 and b > 0 so that G and -B are Laplacians"
                )
        if not float(self.theta) > 0:
            raise InvalidModel(f"theta must be positive, got {self.theta}")
        if not float(self.noise_sigma) >= 0:
            raise InvalidModel(f"noise_sigma must be nonnegative, got {self.noise_sigma}")
        object.__setattr__(self, "n_buses", n)
        object.__setattr__(self, "lines", lines)
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "noise_sigma", float(self.noise_sigma))

    def replace(self, **changes) -> "PowerSystemModel":
        params = dict(n_buses=self.n_buses, lines=self.lines, theta=self.theta, noise_sigma=self.noise_sigma)
        params.update(changes)
        return PowerSystemModel(**params)

    @cached_property
    def admittance_matrix(self) -> np.ndarray:
        Y = np.zeros((self.n_buses, self.n_buses), complex)
        for m, k, y in self.lines:
            Y[m, k] = Y[k, m] = y
        Y[np.diag_indices(self.n_buses)] = -Y.sum(axis=1)
        Y.setflags(write=False)
        return Y

    @property
    def conductance(self) -> np.ndarray:
        return self.admittance_matrix.real

    @property
    def susceptance(self) -> np.ndarray:
        return self.admittance_matrix.imag

    @property
    def laplacian(self) -> np.ndarray:
        """``-B``, the susceptance Laplacian."""
        return -self.susceptance

    @cached_property
    def spectrum(self) -> GraphSpectrum:
        return GraphSpectrum.from_laplacian(self.laplacian)

    def edge_set(self) -> set:
        return {(min(m, k), max(m, k)) for m, k, _ in self.lines}


def load_case_csv(path, **model_params) -> PowerSystemModel:
    """Read an admittance case file.

    The first non-comment line holds the bus count ``N``; every further line
    is ``m,k,g_mk,b_mk`` (0-based buses, line admittance ``g + jb``). Lines
    starting with ``#`` and blank lines are skipped. Errors name the
    offending line.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read case file {path}: {exc}") from None
    n_buses = None
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        row = raw.strip()
        if not row or row.startswith("#"):
            continue
        fields = [f.strip() for f in row.split(",")]
        try:
            if n_buses is None:
                if len(fields) != 1:
                    raise ValueError("expected the bus count N")
                n_buses = int(fields[0])
                continue
            if len(fields) != 4:
                raise ValueError(f"expected 'm,k,g_mk,b_mk', got {len(fields)} fields")
            m, k = int(fields[0]), int(fields[1])
            g, b = float(fields[2]), float(fields[3])
        except ValueError as exc:
            raise ConfigError(f"{path}, line {lineno}: {exc}: {raw!r}") from None
        lines.append((m, k, complex(g, b), lineno))
    if n_buses is None:
        raise ConfigError(f"{path}: empty case file")
    try:
        model = PowerSystemModel(n_buses, tuple(ln[:3] for ln in lines), **model_params)
    except InvalidModel as exc:
        # locate the line the model rejected
        for m, k, y, lineno in lines:
            try:
                PowerSystemModel(n_buses, ((m, k, y),))
            except InvalidModel:
                raise InvalidModel(f"{path}, line {lineno}: {exc}") from None
        raise
    return model


def save_case_csv(model: PowerSystemModel, path, header: str | None = None) -> None:
    rows = []
    if header:
        rows += [f"# {line}" for line in header.splitlines()]
    rows.append(str(model.n_buses))
    rows += [f"{m},{k},{y.real!r},{y.imag!r}" for m, k, y in model.lines]
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def _connected(n, edges) -> bool:
    if not edges:
        return n == 1
    i, j = np.array(list(edges)).T
    n_comp, _ = connected_components(coo_matrix((np.ones(len(i)), (i, j)), shape=(n, n)), directed=False)
    return n_comp == 1


def synthetic_grid(n_buses=30, n_lines=52, seed=BUNDLED_SEED, **model_params) -> PowerSystemModel:
    """Random connected grid with transmission-line-like impedances.

    A random spanning tree links each bus to one of the few buses before it,
    which gives the long, thin shape of real grids; extra lines then join
    buses at most five indices apart. Each line gets resistance
    ``r ~ U(0.01, 0.08)`` and reactance ``x ~ U(0.05, 0.35)`` (per unit) and
    admittance ``y_mk = -1 / (r + jx)``.
    """
    rng = np.random.default_rng(seed)
    n = int(n_buses)
    if n_lines < n - 1:
        raise ConfigError("a connected grid needs at least N - 1 lines")
    edges = []
    for k in range(1, n):
        m = int(rng.integers(max(0, k - 4), k))
        edges.append((m, k))
    present = set(edges)
    candidates = [(m, k) for m in range(n) for k in range(m + 1, min(n, m + 6)) if (m, k) not in present]
    extra = rng.choice(len(candidates), size=n_lines - len(edges), replace=False)
    edges += [candidates[i] for i in sorted(extra)]
    r = rng.uniform(0.01, 0.08, size=len(edges))
    x = rng.uniform(0.05, 0.35, size=len(edges))
    y = -1.0 / (r + 1j * x)
    return PowerSystemModel(n, tuple((m, k, yy) for (m, k), yy in zip(edges, y)), **model_params)


def bundled_grid(**model_params) -> PowerSystemModel:
    """The 30-bus synthetic grid shipped with the package."""
    ref = resources.files("gspwl.data").joinpath(BUNDLED_CASE)
    with resources.as_file(ref) as path:
        return load_case_csv(path, **model_params)


def power_injections(model: PowerSystemModel, x) -> np.ndarray:
    """Noiseless complex power ``x * conj(Y x)`` for each row of ``x``."""
    x = np.asarray(x, dtype=complex)
    return x * (x @ model.admittance_matrix.T).conj()


def sample_psse(model: PowerSystemModel, count: int, rng=None) -> TrainingDataset:
    """Draw ``count`` voltage/power pairs."""
    rng = np.random.default_rng(rng)
    n = model.n_buses
    mu = rng.standard_normal((count, n))
    phi = rng.uniform(0.0, model.theta, size=(count, n))
    x = (1.0 + 0.1 * mu) * np.exp(1j * phi)
    noise = model.noise_sigma * (rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))) / np.sqrt(2.0)
    return TrainingDataset(X=x, Y=power_injections(model, x) + noise)


def perturb_topology(model: PowerSystemModel, n_changes: int, mode: str = "remove", rng=None,
                     *, max_tries: int = 100) -> PowerSystemModel:
    """Remove or add one line at each of ``n_changes`` randomly chosen buses.

    Removals never disconnect the grid; added lines join a bus to a random
    bus it is not yet connected to and copy the admittance of a randomly
    chosen existing line. The input model is left untouched.

    Raises
    ------
    DisconnectionRisk
        If no sequence of valid removals is found within ``max_tries`` attempts.
    """
    if mode not in ("remove", "add"):
        raise ConfigError(f"mode must be 'remove' or 'add', got {mode!r}")
    n_changes = int(n_changes)
    if n_changes < 0:
        raise ConfigError("n_changes must be nonnegative")
    if n_changes == 0:
        return model
    rng = np.random.default_rng(rng)
    n = model.n_buses
    for _ in range(max_tries):
        lines = {(min(m, k), max(m, k)): y for m, k, y in model.lines}
        nodes = list(rng.permutation(n))
        done = 0
        while done < n_changes and nodes:
            v = int(nodes.pop())
            if mode == "remove":
                incident = [e for e in lines if v in e]
                for idx in rng.permutation(len(incident)):
                    e = incident[idx]
                    if _connected(n, [f for f in lines if f != e]):
                        del lines[e]
                        done += 1
                        break
            else:
                nbrs = {u for e in lines if v in e for u in e}
                free = [u for u in range(n) if u != v and u not in nbrs]
                if free:
                    u = int(free[rng.integers(len(free))])
                    donor = list(lines.values())[rng.integers(len(lines))]
                    lines[(min(u, v), max(u, v))] = donor
                    done += 1
        if done == n_changes:
            return model.replace(lines=tuple((m, k, y) for (m, k), y in lines.items()))
    raise DisconnectionRisk(
        f"could not apply {n_changes} {mode} operations in {max_tries} attempts without disconnecting the grid"
    )
