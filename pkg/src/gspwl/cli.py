"""Command-line front end.

Every command is a pure function of its options and seed, so re-running it
rewrites the same bytes. Options come from three layers, later ones winning:
built-in defaults, an optional ``--config`` file (YAML or JSON mapping option
names to values) and command-line flags.

Exit codes are 0 on success, 2 for configuration errors and 3 for numerical
failures. Errors are reported on stderr as one JSON object
``{"error": ..., "message": ..., "exit_code": ...}``, which is also written to
``error.json`` in the output directory when one was given.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from . import estimators as est
from . import io
from .exceptions import ConfigError, DimensionMismatch, GSPError, NumericalError
from .experiments import (
    bundled_grid,
    chebyshev_convergence,
    load_case_csv,
    make_example1,
    run_mc_benchmark,
    run_robustness,
)
from .experiments.benchmark import ALL_TAGS, SAMPLE_TAGS
from .experiments.example1 import DEFAULT_N, DEFAULT_SIGMA
from .graph import build_laplacian, load_edge_list
from .models import make_estimator

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

DEFAULTS = {
    "example1": {
        "eta": [0.1, 0.3, 0.7, 0.9],
        "K": [50, 100, 1000, 10000],
        "eta_sweep": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
        "eta_sweep_K": None,
        "sigma": DEFAULT_SIGMA,
        "n_vertices": DEFAULT_N,
        "trials": 10000,
        "seed": 0,
        "graph": None,
        "estimators": None,
        "out": ".",
        "format": "csv",
    },
    "psse": {
        "theta": [0.1, 0.2, 0.3, 0.4],
        "K": [100, 300, 1000, 3000, 10000],
        "sigma": 0.01,
        "trials": 10000,
        "seed": 0,
        "case": None,
        "estimators": None,
        "out": ".",
        "format": "csv",
    },
    "robustness": {
        "theta": [0.2],
        "K": [1000],
        "sigma": 0.01,
        "trials": 2000,
        "seed": 0,
        "case": None,
        "changes": [0, 5, 10, 20],
        "mode": "remove",
        "retrain": False,
        "adapt_graph": False,
        "estimators": None,
        "out": ".",
        "format": "csv",
    },
    "chebyshev-bench": {
        "eta": [0.1],
        "sigma": DEFAULT_SIGMA,
        "n_vertices": 50,
        "orders": [5, 10, 20, 40, 80, 100],
        "trials": 100,
        "seed": 0,
        "graph": None,
        "out": ".",
        "format": "csv",
    },
    "fit": {
        "dataset": None,
        "estimator": None,
        "graph": None,
        "case": None,
        "center": False,
        "out": ".",
    },
    "estimate": {
        "estimator_file": None,
        "observations": None,
        "graph": None,
        "case": None,
        "method": "evd",
        "chebyshev_order": None,
        "out": ".",
        "format": "csv",
    },
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _floats(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None


def _tags(text):
    return [t.strip() for t in str(text).split(",") if t.strip()]


def _add(p, *flags, **kw):
    p.add_argument(*flags, default=argparse.SUPPRESS, **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gspwl", description="Widely-linear MMSE estimation of improper graph signals.")
    parser.add_argument("--version", action="version", version=f"gspwl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, out_format=True):
        _add(p, "--config", help="YAML or JSON file with option values; flags override it")
        _add(p, "--out", help="output directory (created if missing)")
        if out_format:
            _add(p, "--format", choices=("csv", "json"), help="output table format")

    def mc(p):
        _add(p, "--K", action="extend", type=_ints, help="training size; repeatable or comma-separated")
        _add(p, "--trials", type=int, help="number of Monte-Carlo test pairs M")
        _add(p, "--seed", type=int)
        _add(p, "--estimators", type=_tags, help=f"comma list from {','.join(ALL_TAGS)}")

    p = sub.add_parser("example1", help="graph-filter observation model: MSE versus K and versus eta")
    common(p)
    mc(p)
    _add(p, "--eta", action="extend", type=_floats, help="non-circularity values for the MSE-vs-K table")
    _add(p, "--eta-sweep", dest="eta_sweep", action="extend", type=_floats, help="eta grid of the MSE-vs-eta table")
    _add(p, "--eta-sweep-K", dest="eta_sweep_K", type=int, help="training size of the MSE-vs-eta table")
    _add(p, "--sigma", type=float, help="noise standard deviation")
    _add(p, "--N", dest="n_vertices", type=int, help="number of vertices of the random graph")
    _add(p, "--graph", help="edge-list file to use instead of a random graph")

    p = sub.add_parser("psse", help="power-grid state estimation: MSE versus K for each theta")
    common(p)
    mc(p)
    _add(p, "--theta", action="extend", type=_floats, help="maximum phase angle; repeatable")
    _add(p, "--sigma", type=float, help="measurement noise standard deviation")
    _add(p, "--case", help="admittance CSV file; defaults to the bundled 30-bus grid")

    p = sub.add_parser("robustness", help="power-grid estimators applied after topology changes")
    common(p)
    mc(p)
    _add(p, "--theta", action="extend", type=_floats)
    _add(p, "--sigma", type=float)
    _add(p, "--case")
    _add(p, "--changes", action="extend", type=_ints, help="numbers of edge changes; repeatable")
    _add(p, "--mode", choices=("remove", "add"))
    _add(p, "--retrain", action="store_true", help="refit on data from the perturbed grid")
    _add(p, "--adapt-graph", dest="adapt_graph", action="store_true",
         help="recompute the graph estimators on the perturbed graph from the original data")

    p = sub.add_parser("chebyshev-bench", help="Chebyshev filter error versus polynomial order")
    common(p)
    _add(p, "--eta", action="extend", type=_floats)
    _add(p, "--sigma", type=float)
    _add(p, "--N", dest="n_vertices", type=int)
    _add(p, "--chebyshev-order", dest="orders", action="extend", type=_ints, help="orders; repeatable")
    _add(p, "--trials", type=int, help="number of test observations")
    _add(p, "--seed", type=int)
    _add(p, "--graph")

    p = sub.add_parser("fit", help="fit one estimator to a dataset file and save it as JSON")
    common(p, out_format=False)
    _add(p, "--dataset", help="dataset file (.csv or .npz)")
    _add(p, "--estimator", help=f"one of {','.join(est.ESTIMATOR_TAGS)}")
    _add(p, "--graph")
    _add(p, "--case")
    _add(p, "--center", action="store_true", help="subtract training means")

    p = sub.add_parser("estimate", help="apply a saved estimator to an observation file")
    common(p)
    _add(p, "--estimator-file", dest="estimator_file", help="JSON written by 'gspwl fit'")
    _add(p, "--observations", help="observation or dataset CSV")
    _add(p, "--graph")
    _add(p, "--case")
    _add(p, "--method", choices=("evd", "chebyshev"))
    _add(p, "--chebyshev-order", dest="chebyshev_order", type=int)
    return parser


def _load_config_file(path):
    try:
        doc = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML/JSON: {exc}") from None
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a mapping of option names to values")
    return {str(k).replace("-", "_"): v for k, v in doc.items()}


_LIST_KEYS = {"eta", "K", "eta_sweep", "theta", "changes", "orders", "estimators"}


def resolve_config(argv) -> dict:
    """Merge defaults, the config file and flags into one option mapping."""
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config = dict(DEFAULTS[command])
    if "config" in args:
        from_file = _load_config_file(args.pop("config"))
        from_file.pop("command", None)
        unknown = sorted(set(from_file) - set(config))
        if unknown:
            raise ConfigError(f"unknown options for '{command}' in config file: {unknown}")
        config.update(from_file)
    config.update(args)
    for key in _LIST_KEYS & set(config):
        value = config[key]
        if value is not None and not isinstance(value, (list, tuple)):
            config[key] = [value]
        if config[key] is not None and len(config[key]) == 0:
            raise ConfigError(f"option '{key}' needs at least one value")
    config["command"] = command
    return config


def _spectrum_from(config, required):
    if config.get("graph") and config.get("case"):
        raise ConfigError("give either --graph or --case, not both")
    if config.get("graph"):
        return build_laplacian(load_edge_list(config["graph"]))
    if config.get("case"):
        return load_case_csv(config["case"]).spectrum
    if required:
        raise ConfigError("this estimator needs a graph: pass --graph or --case")
    return None


def _grid(config):
    params = {"noise_sigma": float(config["sigma"])}
    if config.get("case"):
        return load_case_csv(config["case"], **params)
    return bundled_grid(**params)


def _table_name(stem, fmt):
    return f"{stem}.{fmt}"


class _Outputs:
    def __init__(self, out_dir):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files = []

    def results(self, stem, results, fmt):
        path = io.write_results(results, self.dir / _table_name(stem, fmt), fmt)
        self.files.append(path)

    def text(self, name, text):
        path = self.dir / name
        path.write_text(text, encoding="utf-8")
        self.files.append(path)

    def manifest(self, config):
        entries = [{"file": p.name, "sha256": hashlib.sha256(p.read_bytes()).hexdigest()} for p in self.files]
        doc = {
            "format": "gspwl-manifest v1",
            "gspwl_version": __version__,
            "config": {k: v for k, v in sorted(config.items()) if k != "out"},
            "outputs": entries,
        }
        (self.dir / "manifest.json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def _positive(config, key):
    if int(config[key]) < 1:
        raise ConfigError(f"{key} must be at least 1")


def cmd_example1(config) -> int:
    _positive(config, "trials")
    spectrum = _spectrum_from(config, required=False)
    out = _Outputs(config["out"])
    by_k = []
    for eta in config["eta"]:
        cfg, spectrum = make_example1(eta, sigma=config["sigma"], n_vertices=config["n_vertices"],
                                      seed=config["seed"], spectrum=spectrum)
        by_k += run_mc_benchmark(cfg, config["estimators"], config["K"], config["trials"], config["seed"],
                                 spectrum=spectrum)
    out.results("mse_vs_K", by_k, config["format"])
    k_eta = config["eta_sweep_K"] or max(config["K"])
    by_eta = []
    for eta in config["eta_sweep"]:
        cfg = make_example1(eta, sigma=config["sigma"], seed=config["seed"], spectrum=spectrum)[0]
        by_eta += run_mc_benchmark(cfg, config["estimators"], [k_eta], config["trials"], config["seed"],
                                   spectrum=spectrum)
    out.results("mse_vs_eta", by_eta, config["format"])
    out.manifest(config)
    return EXIT_OK


def _sample_tags(config):
    tags = config["estimators"]
    if tags is None:
        return list(SAMPLE_TAGS)
    bad = [t for t in tags if t not in SAMPLE_TAGS]
    if bad:
        raise ConfigError(f"power-grid runs support only sample estimators {list(SAMPLE_TAGS)}, got {bad}")
    return tags


def cmd_psse(config) -> int:
    _positive(config, "trials")
    tags = _sample_tags(config)
    grid = _grid(config)
    out = _Outputs(config["out"])
    results = []
    for theta in config["theta"]:
        results += run_mc_benchmark(grid.replace(theta=theta), tags, config["K"], config["trials"], config["seed"])
    out.results("mse_vs_K", results, config["format"])
    out.manifest(config)
    return EXIT_OK


def cmd_robustness(config) -> int:
    _positive(config, "trials")
    tags = _sample_tags(config)
    grid = _grid(config)
    out = _Outputs(config["out"])
    results = []
    for theta in config["theta"]:
        for K in config["K"]:
            results += run_robustness(grid.replace(theta=theta), config["changes"], config["mode"], K,
                                      config["trials"], config["seed"], estimators=tags,
                                      retrain=bool(config["retrain"]), adapt_graph=bool(config["adapt_graph"]))
    out.results("robustness", results, config["format"])
    out.manifest(config)
    return EXIT_OK


def cmd_chebyshev_bench(config) -> int:
    _positive(config, "trials")
    spectrum = _spectrum_from(config, required=False)
    out = _Outputs(config["out"])
    rows = []
    for eta in config["eta"]:
        cfg, spectrum = make_example1(eta, sigma=config["sigma"], n_vertices=config["n_vertices"],
                                      seed=config["seed"], spectrum=spectrum)
        for r in chebyshev_convergence(cfg, spectrum, config["orders"], config["trials"], config["seed"]):
            rows.append({"eta": float(eta), **r.as_dict()})
    if config["format"] == "json":
        text = json.dumps({"format": "gspwl-chebyshev v1", "rows": rows}, indent=1, sort_keys=True) + "\n"
    else:
        lines = ["# gspwl-chebyshev v1", "eta,order,relative_error,matvecs,nnz"]
        lines += [f"{r['eta']!r},{r['order']},{r['relative_error']!r},{r['matvecs']},{r['nnz']}" for r in rows]
        text = "\n".join(lines) + "\n"
    out.text(_table_name("chebyshev", config["format"]), text)
    out.manifest(config)
    return EXIT_OK


def _load_dataset(path):
    if path is None:
        raise ConfigError("--dataset is required")
    return io.load_dataset_npz(path) if str(path).endswith(".npz") else io.load_dataset_csv(path)


def cmd_fit(config) -> int:
    tag = config["estimator"]
    if tag not in est.ESTIMATOR_TAGS:
        raise ConfigError(f"--estimator must be one of {list(est.ESTIMATOR_TAGS)}, got {tag!r}")
    data = _load_dataset(config["dataset"])
    spectrum = _spectrum_from(config, required=tag in (est.GSP_LMMSE, est.GSP_WLMMSE))
    model = make_estimator(tag, spectrum, center=bool(config["center"])).fit(data.Y, data.X)
    out = _Outputs(config["out"])
    io.save_estimator(model, out.dir / "estimator.json")
    out.files.append(out.dir / "estimator.json")
    out.manifest(config)
    return EXIT_OK


def cmd_estimate(config) -> int:
    if config["estimator_file"] is None or config["observations"] is None:
        raise ConfigError("--estimator-file and --observations are required")
    try:
        doc = json.loads(Path(config["estimator_file"]).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read estimator {config['estimator_file']}: {exc}") from None
    graph_based = isinstance(doc, dict) and doc.get("estimator_tag") in (est.GSP_LMMSE, est.GSP_WLMMSE)
    spectrum = _spectrum_from(config, required=graph_based)
    params = {}
    if graph_based:
        params = {"method": config["method"], "chebyshev_order": config["chebyshev_order"]}
    elif config["method"] != "evd":
        raise ConfigError("the Chebyshev path applies only to graph estimators")
    model = io.estimator_from_dict(doc, spectrum, **params)
    Y = io.load_signals_csv(config["observations"])
    if Y.shape[1] != model.n_features_in_:
        raise DimensionMismatch(f"observations have N={Y.shape[1]}, estimator is for N={model.n_features_in_}")
    X_hat = model.predict(Y)
    out = _Outputs(config["out"])
    if config["format"] == "json":
        doc = {"format": io.ESTIMATE_HEADER, "N": int(X_hat.shape[1]), "K": int(X_hat.shape[0]),
               "estimates": [[[float(v.real), float(v.imag)] for v in row] for row in X_hat]}
        out.text("estimates.json", json.dumps(doc) + "\n")
    else:
        io.save_signals_csv(X_hat, out.dir / "estimates.csv", "estimates")
        out.files.append(out.dir / "estimates.csv")
    out.manifest(config)
    return EXIT_OK


COMMANDS = {
    "example1": cmd_example1,
    "psse": cmd_psse,
    "robustness": cmd_robustness,
    "chebyshev-bench": cmd_chebyshev_bench,
    "fit": cmd_fit,
    "estimate": cmd_estimate,
}


def _report(exc, code, out_dir):
    record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    text = json.dumps(record, sort_keys=True)
    print(text, file=sys.stderr)
    if out_dir:
        try:
            Path(out_dir).mkdir(parents=True, exist_ok=True)
            (Path(out_dir) / "error.json").write_text(text + "\n", encoding="utf-8")
        except OSError:
            pass
    return code


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    config = {}
    try:
        config = resolve_config(argv)
        with np.errstate(all="ignore"):
            return COMMANDS[config["command"]](config)
    except NumericalError as exc:
        return _report(exc, EXIT_NUMERICAL, config.get("out"))
    except (ConfigError, GSPError) as exc:
        return _report(exc, EXIT_CONFIG, config.get("out"))


if __name__ == "__main__":
    sys.exit(main())
