"""Reading and writing estimators, datasets and benchmark results.

File formats
------------
Estimator (JSON)
    ``{"format": "gspwl-estimator", "version": 1, "N": N, "estimator_tag": tag,
    ...}`` followed either by ``"f1"`` and ``"f2"`` (graph estimators, lists of
    ``[re, im]`` pairs, one per graph frequency) or by ``"H1"`` and ``"H2"``
    (full-matrix estimators, ``N*N`` ``[re, im]`` pairs in row-major order).
    Optional ``"x_mean"`` and ``"y_mean"`` hold the centering offsets.

Dataset (CSV)
    Comment lines ``# gspwl-dataset v1``, ``# N=<N>``, ``# K=<K>`` and a column
    description, then ``K`` rows of ``4N`` comma-separated reals:
    ``Re x, Im x, Re y, Im y``. Values are written with 17 significant
    digits, so a save/load round trip is exact.

Observations and estimates (CSV)
    Same layout with ``2N`` columns ``Re, Im`` and the header
    ``# gspwl-observations v1`` or ``# gspwl-estimates v1``.

Results (CSV)
    ``# gspwl-results v1`` then the columns
    ``scenario,estimator,K,eta_or_theta,mse,mse_stderr,n_trials,seed,diverged,theoretical_mse``.
"""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path

import numpy as np

from . import estimators as est
from .exceptions import ConfigError, DimensionMismatch
from .graph import GraphSpectrum
from .models import GraphLinearMMSE, GraphWidelyLinearMMSE, LinearMMSE, WidelyLinearMMSE, make_estimator
from .stats import TrainingDataset

__all__ = [
    "estimator_to_dict",
    "estimator_from_dict",
    "save_estimator",
    "load_estimator",
    "save_dataset_csv",
    "load_dataset_csv",
    "save_dataset_npz",
    "load_dataset_npz",
    "save_signals_csv",
    "load_signals_csv",
    "results_to_csv",
    "write_results",
    "RESULT_COLUMNS",
]

ESTIMATOR_FORMAT = "gspwl-estimator"
DATASET_HEADER = "gspwl-dataset v1"
OBSERVATION_HEADER = "gspwl-observations v1"
ESTIMATE_HEADER = "gspwl-estimates v1"
RESULTS_HEADER = "gspwl-results v1"
RESULT_COLUMNS = (
    "scenario", "estimator", "K", "eta_or_theta", "mse", "mse_stderr", "n_trials", "seed",
    "diverged", "theoretical_mse",
)


def _pairs(a):
    a = np.asarray(a, dtype=complex).ravel()
    return [[float(v.real), float(v.imag)] for v in a]


def _unpairs(pairs, name, size):
    try:
        arr = np.asarray(pairs, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a list of [re, im] pairs") from None
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ConfigError(f"{name} must be a list of [re, im] pairs")
    if arr.shape[0] != size:
        raise DimensionMismatch(f"{name} has {arr.shape[0]} entries, expected {size}")
    return arr[:, 0] + 1j * arr[:, 1]


def estimator_to_dict(model) -> dict:
    """JSON-ready description of a fitted estimator."""
    tag = getattr(model, "estimator_tag", None)
    if tag not in est.ESTIMATOR_TAGS or not hasattr(model, "n_features_in_"):
        raise ConfigError("only fitted gspwl estimators can be serialized")
    n = int(model.n_features_in_)
    doc = {"format": ESTIMATOR_FORMAT, "version": 1, "N": n, "estimator_tag": tag}
    if tag in (est.GSP_LMMSE, est.GSP_WLMMSE):
        doc["f1"] = _pairs(model.f1_)
        doc["f2"] = _pairs(model.f2_)
    else:
        doc["H1"] = _pairs(model.h1_)
        doc["H2"] = _pairs(model.h2_)
    if np.any(model.x_mean_) or np.any(model.y_mean_):
        doc["x_mean"] = _pairs(model.x_mean_)
        doc["y_mean"] = _pairs(model.y_mean_)
    return doc


def estimator_from_dict(doc: dict, spectrum: GraphSpectrum | None = None, *, n_vertices: int | None = None,
                        **params):
    """Rebuild a fitted estimator.

    Graph estimators need the ``spectrum`` of the graph they were fitted on.
    ``params`` go to the estimator constructor (e.g. ``method="chebyshev"``).

    Raises
    ------
    DimensionMismatch
        If the document's ``N`` differs from ``n_vertices`` or from the
        spectrum's size.
    """
    if not isinstance(doc, dict) or doc.get("format", ESTIMATOR_FORMAT) != ESTIMATOR_FORMAT:
        raise ConfigError("not a gspwl estimator document")
    try:
        n = int(doc["N"])
        tag = doc["estimator_tag"]
    except (KeyError, TypeError, ValueError):
        raise ConfigError("estimator document needs integer 'N' and 'estimator_tag'") from None
    if n_vertices is not None and n != int(n_vertices):
        raise DimensionMismatch(f"estimator is for N={n}, expected N={n_vertices}")
    model = make_estimator(tag, spectrum, **params)
    if isinstance(model, (GraphLinearMMSE, GraphWidelyLinearMMSE)):
        model._check_spectrum()
        if spectrum.n_vertices != n:
            raise DimensionMismatch(f"estimator is for N={n}, graph has N={spectrum.n_vertices}")
        if "f1" not in doc or "f2" not in doc:
            raise ConfigError(f"{tag} document needs 'f1' and 'f2'")
        f1 = _unpairs(doc["f1"], "f1", n)
        f2 = _unpairs(doc["f2"], "f2", n)
        model._init_from_stats(n)
        model.filters_ = est.WidelyLinearGraphFilterPair(f1, f2, np.zeros(n, bool))
        model._build_application()
    else:
        if "H1" not in doc or "H2" not in doc:
            raise ConfigError(f"{tag} document needs 'H1' and 'H2'")
        model._init_from_stats(n)
        model.h1_ = _unpairs(doc["H1"], "H1", n * n).reshape(n, n)
        model.h2_ = _unpairs(doc["H2"], "H2", n * n).reshape(n, n)
        model.singular_ = False
    if "x_mean" in doc or "y_mean" in doc:
        model.x_mean_ = _unpairs(doc.get("x_mean", [[0.0, 0.0]] * n), "x_mean", n)
        model.y_mean_ = _unpairs(doc.get("y_mean", [[0.0, 0.0]] * n), "y_mean", n)
    return model


def save_estimator(model, path) -> None:
    Path(path).write_text(json.dumps(estimator_to_dict(model), indent=1) + "\n", encoding="utf-8")


def load_estimator(path, spectrum: GraphSpectrum | None = None, **kwargs):
    """Read an estimator written by :func:`save_estimator`."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read estimator file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return estimator_from_dict(doc, spectrum, **kwargs)


def _write_table(path, header_lines, table):
    buf = _io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    for row in table:
        buf.write(",".join("%.17g" % v for v in row))
        buf.write("\n")
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def _read_table(path, expected_header):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    meta, rows, first = {}, [], None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if first is None:
                first = body
            if "=" in body and " " not in body:
                key, value = body.split("=", 1)
                meta[key] = value
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError:
            raise ConfigError(f"{path}, line {lineno}: non-numeric value: {raw!r}") from None
    if first not in expected_header:
        raise ConfigError(f"{path}: expected a '{expected_header[0]}' header, got {first!r}")
    widths = {len(r) for r in rows}
    if len(widths) > 1:
        raise ConfigError(f"{path}: rows have different lengths {sorted(widths)}")
    return first, meta, np.array(rows, dtype=float).reshape(len(rows), -1)


def _check_meta(path, meta, n_cols, per_vertex, n_rows):
    try:
        n = int(meta["N"]) if "N" in meta else n_cols // per_vertex
        k = int(meta["K"]) if "K" in meta else n_rows
    except ValueError:
        raise ConfigError(f"{path}: N and K must be integers") from None
    if n_rows and n_cols != per_vertex * n:
        raise DimensionMismatch(f"{path}: header says N={n} but rows have {n_cols} columns")
    if k != n_rows:
        raise ConfigError(f"{path}: header says K={k} but the file has {n_rows} rows")
    return n


def save_dataset_csv(data: TrainingDataset, path) -> None:
    n, k = data.n_vertices, data.n_samples
    table = np.hstack([data.X.real, data.X.imag, data.Y.real, data.Y.imag])
    _write_table(path, [DATASET_HEADER, f"N={n}", f"K={k}", "columns: Re x (N), Im x (N), Re y (N), Im y (N)"],
                 table)


def load_dataset_csv(path) -> TrainingDataset:
    _, meta, table = _read_table(path, (DATASET_HEADER,))
    n = _check_meta(path, meta, table.shape[1], 4, table.shape[0])
    X = table[:, :n] + 1j * table[:, n:2 * n]
    Y = table[:, 2 * n:3 * n] + 1j * table[:, 3 * n:]
    return TrainingDataset(X=X, Y=Y)


def save_dataset_npz(data: TrainingDataset, path) -> None:
    np.savez(path, X=data.X, Y=data.Y, format=np.array(DATASET_HEADER))


def load_dataset_npz(path) -> TrainingDataset:
    try:
        with np.load(path, allow_pickle=False) as f:
            return TrainingDataset(X=f["X"], Y=f["Y"])
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot read dataset {path}: {exc}") from None


def save_signals_csv(values, path, kind="estimates") -> None:
    """Write complex rows as ``Re, Im`` columns."""
    headers = {"estimates": ESTIMATE_HEADER, "observations": OBSERVATION_HEADER}
    if kind not in headers:
        raise ConfigError(f"kind must be one of {sorted(headers)}")
    Z = np.atleast_2d(np.asarray(values, dtype=complex))
    n, k = Z.shape[1], Z.shape[0]
    _write_table(path, [headers[kind], f"N={n}", f"K={k}", "columns: Re (N), Im (N)"],
                 np.hstack([Z.real, Z.imag]))


def load_signals_csv(path) -> np.ndarray:
    """Observation rows from a signal file or the ``y`` part of a dataset file."""
    first, meta, table = _read_table(path, (OBSERVATION_HEADER, ESTIMATE_HEADER, DATASET_HEADER))
    if first == DATASET_HEADER:
        n = _check_meta(path, meta, table.shape[1], 4, table.shape[0])
        return table[:, 2 * n:3 * n] + 1j * table[:, 3 * n:]
    n = _check_meta(path, meta, table.shape[1], 2, table.shape[0])
    return table[:, :n] + 1j * table[:, n:]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def results_to_csv(results) -> str:
    """CSV text for a list of :class:`~gspwl.experiments.McResult`."""
    buf = _io.StringIO()
    buf.write(f"# {RESULTS_HEADER}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for r in results:
        writer.writerow([_fmt(v) for v in (r.scenario, r.estimator, r.K, r.param, r.mse, r.mse_stderr,
                                           r.n_trials, r.seed, r.diverged, r.theoretical_mse)])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, float) and not np.isfinite(v):
        return None
    return v


def results_to_json(results) -> str:
    rows = []
    for r in results:
        d = r.as_dict()
        d["eta_or_theta"] = d.pop("param")
        rows.append({k: _json_value(v) for k, v in d.items()})
    return json.dumps({"format": RESULTS_HEADER, "results": rows}, indent=1, sort_keys=True) + "\n"


def write_results(results, path, fmt="csv") -> Path:
    """Write results as CSV or JSON; returns the path written."""
    if fmt == "csv":
        text = results_to_csv(results)
    elif fmt == "json":
        text = results_to_json(results)
    else:
        raise ConfigError(f"format must be 'csv' or 'json', got {fmt!r}")
    path = Path(path)
    path.write_text(text, encoding="utf-8")
    return path
