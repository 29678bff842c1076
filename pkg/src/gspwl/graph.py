"""Weighted graphs, Laplacian spectra and graph Fourier transforms.

Signals are complex NumPy arrays. A single signal has shape ``(N,)``; a batch
of signals is stored one per row, shape ``(K, N)``, matching the
samples-by-features layout used by the estimator classes.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

from .exceptions import ConfigError, DimensionMismatch, DisconnectedGraph, NonSymmetric

__all__ = [
    "WeightedGraph",
    "GraphSpectrum",
    "ComplexGraphSignal",
    "build_laplacian",
    "gft",
    "inverse_gft",
    "apply_graph_filter",
    "load_edge_list",
    "save_edge_list",
    "random_connected_graph",
    "fix_eigenvector_signs",
]

VERTEX = "vertex"
FREQUENCY = "frequency"


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected weighted graph given by an edge list.

    Each undirected edge is listed once as ``(i, j, w)``.
    """

    n_vertices: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        if int(self.n_vertices) < 1:
            raise ConfigError("n_vertices must be positive")
        edges = tuple((int(i), int(j), float(w)) for i, j, w in self.edges)
        seen = {}
        for i, j, w in edges:
            if not (0 <= i < self.n_vertices and 0 <= j < self.n_vertices):
                raise ConfigError(f"edge ({i}, {j}) has a vertex outside [0, {self.n_vertices})")
            if i == j:
                raise ConfigError(f"self-loop at vertex {i}")
            if not np.isfinite(w) or w < 0:
                raise ConfigError(f"edge ({i}, {j}) has invalid weight {w}")
            key = (min(i, j), max(i, j))
            if key in seen and seen[key] != w:
                raise NonSymmetric(
                    f"edge {key} listed with weights {seen[key]} and {w}"
                )
            seen[key] = w
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "n_vertices", int(self.n_vertices))

    @classmethod
    def from_adjacency(cls, W, atol=0.0):
        W = np.asarray(W, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise DimensionMismatch("adjacency matrix must be square")
        if not np.allclose(W, W.T, rtol=0.0, atol=atol):
            raise NonSymmetric("adjacency matrix is not symmetric")
        if np.any(np.diag(W) != 0):
            raise ConfigError("adjacency matrix has self-loops")
        i, j = np.nonzero(np.triu(W, 1))
        return cls(W.shape[0], tuple(zip(i.tolist(), j.tolist(), W[i, j].tolist())))

    def adjacency(self) -> np.ndarray:
        W = np.zeros((self.n_vertices, self.n_vertices))
        for i, j, w in self.edges:
            W[i, j] = W[j, i] = w
        return W

    def edge_set(self) -> set[tuple[int, int]]:
        return {(min(i, j), max(i, j)) for i, j, _ in self.edges}


def fix_eigenvector_signs(V: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    """Flip columns so the largest-magnitude entry of each is positive.

    Ties within ``atol`` are broken by the lowest row index.
    """
    V = np.array(V, dtype=float, copy=True)
    mags = np.abs(V)
    for n in range(V.shape[1]):
        col = mags[:, n]
        pivot = int(np.flatnonzero(col >= col.max() - atol)[0])
        if V[pivot, n] < 0:
            V[:, n] = -V[:, n]
    return V


@dataclass(frozen=True, eq=False)
class GraphSpectrum:
    """Laplacian ``L = V diag(lambda) V^T`` with ascending eigenvalues."""

    laplacian: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        for name in ("laplacian", "eigenvalues", "eigenvectors"):
            arr = np.array(getattr(self, name), dtype=float, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_vertices(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def V(self) -> np.ndarray:
        return self.eigenvectors

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    @classmethod
    def from_laplacian(cls, L, *, connectivity_tol=1e-9):
        """Eigendecompose a given symmetric Laplacian matrix."""
        L = np.asarray(L, dtype=float)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise DimensionMismatch("Laplacian must be square")
        if not np.allclose(L, L.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(L).max())):
            raise NonSymmetric("Laplacian is not symmetric")
        lam, V = np.linalg.eigh(L)
        V = fix_eigenvector_signs(V)
        if lam.shape[0] > 1 and lam[1] <= connectivity_tol:
            n_zero = int(np.sum(lam <= connectivity_tol))
            raise DisconnectedGraph(
                f"graph has {n_zero} zero Laplacian eigenvalues (second smallest {lam[1]:.3e})"
            )
        # the smallest eigenvalue of a connected Laplacian is exactly zero
        if abs(lam[0]) <= connectivity_tol:
            lam[0] = 0.0
        return cls(L, lam, V)

    def orthogonality_error(self) -> float:
        V = self.eigenvectors
        return float(np.abs(V.T @ V - np.eye(self.n_vertices)).max())


@dataclass(frozen=True, eq=False)
class ComplexGraphSignal:
    """A complex signal tagged with the domain it lives in."""

    values: np.ndarray
    domain: Literal["vertex", "frequency"] = VERTEX

    def __post_init__(self):
        if self.domain not in (VERTEX, FREQUENCY):
            raise ConfigError(f"unknown domain tag {self.domain!r}")
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))


def build_laplacian(graph: WeightedGraph, *, connectivity_tol: float = 1e-9) -> GraphSpectrum:
    """Combinatorial Laplacian ``diag(W 1) - W`` and its eigendecomposition.

    Raises
    ------
    DisconnectedGraph
        If the second-smallest eigenvalue does not exceed ``connectivity_tol``.
    """
    W = graph.adjacency()
    L = np.diag(W.sum(axis=1)) - W
    return GraphSpectrum.from_laplacian(L, connectivity_tol=connectivity_tol)


def _unwrap(signal, expected_domain, n):
    if isinstance(signal, ComplexGraphSignal):
        if signal.domain != expected_domain:
            raise ConfigError(
                f"expected a {expected_domain}-domain signal, got {signal.domain}"
            )
        values, tagged = signal.values, True
    else:
        values, tagged = np.asarray(signal), False
    if values.ndim not in (1, 2) or values.shape[-1] != n:
        raise DimensionMismatch(f"signal has shape {values.shape}, graph has N={n}")
    return values, tagged


def gft(spectrum: GraphSpectrum, signal):
    """Graph Fourier transform ``V^T y`` (row-wise for a batch)."""
    values, tagged = _unwrap(signal, VERTEX, spectrum.n_vertices)
    out = values @ spectrum.eigenvectors
    return ComplexGraphSignal(out, FREQUENCY) if tagged else out


def inverse_gft(spectrum: GraphSpectrum, signal):
    """Inverse graph Fourier transform ``V y_bar``."""
    values, tagged = _unwrap(signal, FREQUENCY, spectrum.n_vertices)
    out = values @ spectrum.eigenvectors.T
    return ComplexGraphSignal(out, VERTEX) if tagged else out


def apply_graph_filter(spectrum: GraphSpectrum, response, signal):
    """Apply ``V diag(f(lambda)) V^T`` to a vertex-domain signal."""
    response = np.asarray(response)
    if response.shape != (spectrum.n_vertices,):
        raise DimensionMismatch(
            f"frequency response has shape {response.shape}, expected ({spectrum.n_vertices},)"
        )
    values, tagged = _unwrap(signal, VERTEX, spectrum.n_vertices)
    V = spectrum.eigenvectors
    out = ((values @ V) * response) @ V.T
    return ComplexGraphSignal(out, VERTEX) if tagged else out


def load_edge_list(path, n_vertices=None) -> WeightedGraph:
    """Read ``i j w`` lines (0-based, ``#`` comments) into a graph.

    ``n_vertices`` defaults to one more than the largest index seen.
    """
    edges = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ConfigError(f"{path}:{lineno}: expected 'i j w', got {raw!r}")
        try:
            edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from None
    if not edges:
        raise ConfigError(f"{path}: no edges")
    if n_vertices is None:
        n_vertices = 1 + max(max(i, j) for i, j, _ in edges)
    return WeightedGraph(n_vertices, tuple(edges))


def save_edge_list(graph: WeightedGraph, path) -> None:
    lines = [f"# N={graph.n_vertices}"]
    lines += [f"{i} {j} {w!r}" for i, j, w in graph.edges]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def random_connected_graph(n_vertices, avg_degree=7.0, *, weights="uniform", rng=None,
                           max_tries=100) -> WeightedGraph:
    """Erdos-Renyi graph conditioned on connectivity.

    Edges appear independently with probability ``avg_degree / (N - 1)``;
    draws are repeated until the graph is connected. Weights are either all
    one (``"unit"``) or uniform on ``[0.5, 1.5]`` (``"uniform"``).
    """
    rng = np.random.default_rng(rng)
    n = int(n_vertices)
    if n < 2:
        raise ConfigError("need at least two vertices")
    p = min(1.0, avg_degree / (n - 1))
    iu, ju = np.triu_indices(n, 1)
    for _ in range(max_tries):
        mask = rng.random(iu.size) < p
        i, j = iu[mask], ju[mask]
        if weights == "unit":
            w = np.ones(i.size)
        elif weights == "uniform":
            w = rng.uniform(0.5, 1.5, size=i.size)
        else:
            raise ConfigError(f"unknown weight scheme {weights!r}")
        if _is_connected(n, i, j):
            return WeightedGraph(n, tuple(zip(i.tolist(), j.tolist(), w.tolist())))
    raise DisconnectedGraph(f"no connected draw in {max_tries} tries; raise avg_degree")


def _is_connected(n, i, j) -> bool:
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    A = coo_matrix((np.ones(len(i)), (i, j)), shape=(n, n))
    n_comp, _ = connected_components(A, directed=False)
    return n_comp == 1
