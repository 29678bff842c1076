import csv
import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import crandn, two_filter_model
from gspwl import io
from gspwl.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main, resolve_config
from gspwl.experiments.psse import bundled_grid, save_case_csv
from gspwl.graph import build_laplacian, random_connected_graph, save_edge_list
from gspwl.models import GraphWidelyLinearMMSE, WidelyLinearMMSE
from gspwl.stats import TrainingDataset, spectral_diagonals_from_full


def _rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


@pytest.fixture(scope="module")
def graph_file(tmp_path_factory):
    g = random_connected_graph(8, 3.0, rng=11)
    path = tmp_path_factory.mktemp("g") / "graph.csv"
    save_edge_list(g, path)
    return path, build_laplacian(g)


def test_example1_outputs_and_manifest(tmp_path):
    out = tmp_path / "run"
    code = main(["example1", "--eta", "0.1", "--K", "30", "--trials", "40", "--N", "10",
                 "--eta-sweep", "0.0,0.5", "--out", str(out)])
    assert code == EXIT_OK
    by_k, by_eta = _rows(out / "mse_vs_K.csv"), _rows(out / "mse_vs_eta.csv")
    assert len(by_k) == 8 and len(by_eta) == 16
    assert {r["eta_or_theta"] for r in by_eta} == {"0", "0.5"}
    manifest = json.loads((out / "manifest.json").read_text())
    for entry in manifest["outputs"]:
        assert hashlib.sha256((out / entry["file"]).read_bytes()).hexdigest() == entry["sha256"]
    assert manifest["config"]["n_vertices"] == 10


def test_reruns_are_byte_identical(tmp_path):
    args = ["example1", "--eta", "0.3", "--K", "20", "--trials", "30", "--N", "8", "--eta-sweep", "0.2"]
    assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "b")]) == EXIT_OK
    for name in ("mse_vs_K.csv", "mse_vs_eta.csv", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_proper_signal_linear_and_widely_linear_agree(tmp_path):
    eta = repr(float(1 / np.sqrt(2)))
    assert main(["example1", "--eta", eta, "--eta-sweep", eta, "--K", "10", "--trials", "200", "--N", "10",
                 "--estimators", "LMMSE,WLMMSE", "--out", str(tmp_path)]) == EXIT_OK
    rows = {r["estimator"]: r for r in _rows(tmp_path / "mse_vs_K.csv")}
    assert abs(float(rows["LMMSE"]["theoretical_mse"]) - float(rows["WLMMSE"]["theoretical_mse"])) <= 1e-9
    assert abs(float(rows["LMMSE"]["mse"]) - float(rows["WLMMSE"]["mse"])) <= 1e-9


def test_json_format(tmp_path):
    assert main(["psse", "--theta", "0.2", "--K", "100", "--trials", "20", "--format", "json",
                 "--out", str(tmp_path)]) == EXIT_OK
    doc = json.loads((tmp_path / "mse_vs_K.json").read_text())
    assert len(doc["results"]) == 4


def test_robustness_zero_equals_psse(tmp_path):
    common = ["--theta", "0.2", "--K", "200", "--trials", "50", "--seed", "1"]
    assert main(["psse", *common, "--out", str(tmp_path / "p")]) == EXIT_OK
    assert main(["robustness", *common, "--changes", "0,4", "--out", str(tmp_path / "r")]) == EXIT_OK
    psse = _rows(tmp_path / "p" / "mse_vs_K.csv")
    rob = [r for r in _rows(tmp_path / "r" / "robustness.csv") if r["scenario"] == "robustness-remove-0"]
    assert [(r["estimator"], r["mse"]) for r in rob] == [(r["estimator"], r["mse"]) for r in psse]


def test_chebyshev_bench(tmp_path):
    assert main(["chebyshev-bench", "--N", "12", "--chebyshev-order", "4,24", "--trials", "10",
                 "--out", str(tmp_path)]) == EXIT_OK
    rows = _rows(tmp_path / "chebyshev.csv")
    assert [int(r["order"]) for r in rows] == [4, 24]
    assert [int(r["matvecs"]) for r in rows] == [4, 24]
    assert float(rows[1]["relative_error"]) < float(rows[0]["relative_error"])


def _dataset(tmp_path, sp, rng, k=400):
    X = crandn(rng, k, sp.n_vertices)
    Y = (X + 0.5 * X.conj()) @ sp.eigenvectors @ sp.eigenvectors.T + 0.1 * crandn(rng, k, sp.n_vertices)
    path = tmp_path / "train.csv"
    io.save_dataset_csv(TrainingDataset(X=X, Y=Y), path)
    return path, X, Y


def test_fit_then_estimate(tmp_path, graph_file, rng):
    gpath, sp = graph_file
    data, X, Y = _dataset(tmp_path, sp, rng)
    assert main(["fit", "--dataset", str(data), "--estimator", "GSP-WLMMSE", "--graph", str(gpath),
                 "--out", str(tmp_path / "fit")]) == EXIT_OK
    model = io.load_estimator(tmp_path / "fit" / "estimator.json", sp)
    obs = tmp_path / "obs.csv"
    io.save_signals_csv(Y[:5], obs, "observations")
    for method, extra in (("evd", []), ("chebyshev", ["--chebyshev-order", "16"])):
        out = tmp_path / method
        assert main(["estimate", "--estimator-file", str(tmp_path / "fit" / "estimator.json"),
                     "--observations", str(obs), "--graph", str(gpath), "--method", method, *extra,
                     "--out", str(out)]) == EXIT_OK
        got = io.load_signals_csv(out / "estimates.csv")
        np.testing.assert_allclose(got, model.predict(Y[:5]), atol=1e-5)


def test_identity_estimator(tmp_path, graph_file, rng):
    gpath, sp = graph_file
    n = sp.n_vertices
    doc = {"format": io.ESTIMATOR_FORMAT, "version": 1, "N": n, "estimator_tag": "GSP-WLMMSE",
           "f1": [[1.0, 0.0]] * n, "f2": [[0.0, 0.0]] * n}
    (tmp_path / "id.json").write_text(json.dumps(doc))
    Y = crandn(rng, 3, n)
    io.save_signals_csv(Y, tmp_path / "obs.csv", "observations")
    assert main(["estimate", "--estimator-file", str(tmp_path / "id.json"), "--observations",
                 str(tmp_path / "obs.csv"), "--graph", str(gpath), "--format", "json",
                 "--out", str(tmp_path)]) == EXIT_OK
    est = json.loads((tmp_path / "estimates.json").read_text())["estimates"]
    got = np.array(est)[..., 0] + 1j * np.array(est)[..., 1]
    np.testing.assert_allclose(got, Y, atol=1e-14)


def test_full_and_graph_estimators_agree_on_diagonal_model(tmp_path, graph_file, rng):
    gpath, sp = graph_file
    stats = two_filter_model(sp, rng)
    diag = spectral_diagonals_from_full(sp, stats)
    io.save_estimator(WidelyLinearMMSE.from_stats(stats), tmp_path / "wl.json")
    io.save_estimator(GraphWidelyLinearMMSE.from_stats(diag, sp), tmp_path / "gwl.json")
    io.save_signals_csv(crandn(rng, 6, sp.n_vertices), tmp_path / "obs.csv", "observations")
    outs = []
    for name in ("wl", "gwl"):
        assert main(["estimate", "--estimator-file", str(tmp_path / f"{name}.json"), "--observations",
                     str(tmp_path / "obs.csv"), "--graph", str(gpath), "--out", str(tmp_path / name)]) == EXIT_OK
        outs.append(io.load_signals_csv(tmp_path / name / "estimates.csv"))
    np.testing.assert_allclose(outs[0], outs[1], atol=1e-8)


def test_estimate_rejects_wrong_size(tmp_path, graph_file, rng, capsys):
    gpath, sp = graph_file
    data, X, Y = _dataset(tmp_path, sp, rng)
    assert main(["fit", "--dataset", str(data), "--estimator", "WLMMSE", "--out", str(tmp_path)]) == EXIT_OK
    io.save_signals_csv(crandn(rng, 2, 5), tmp_path / "obs.csv", "observations")
    code = main(["estimate", "--estimator-file", str(tmp_path / "estimator.json"), "--observations",
                 str(tmp_path / "obs.csv"), "--out", str(tmp_path / "e")])
    assert code == EXIT_CONFIG
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["error"] == "DimensionMismatch" and record["exit_code"] == EXIT_CONFIG
    assert json.loads((tmp_path / "e" / "error.json").read_text()) == record


def test_singular_fit_exits_numerical(tmp_path, rng):
    X = crandn(rng, 2, 6)
    io.save_dataset_csv(TrainingDataset(X=X, Y=X), tmp_path / "tiny.csv")
    code = main(["fit", "--dataset", str(tmp_path / "tiny.csv"), "--estimator", "WLMMSE", "--out", str(tmp_path)])
    assert code == EXIT_NUMERICAL


def test_configuration_errors(tmp_path, capsys):
    assert main(["example1", "--bogus"]) == EXIT_CONFIG
    assert main(["example1", "--trials", "0", "--out", str(tmp_path)]) == EXIT_CONFIG
    out = ["--out", str(tmp_path / "err")]
    assert main(["fit", "--dataset", str(tmp_path / "x.csv"), "--estimator", "LS", *out]) == EXIT_CONFIG
    assert main(["fit", "--estimator", "GSP-LMMSE", "--dataset", str(tmp_path / "x.csv"), *out]) == EXIT_CONFIG
    bad = tmp_path / "bad.csv"
    bad.write_text("3\n0,1,-1,4\n0,2,oops,1\n")
    capsys.readouterr()
    assert main(["psse", "--case", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "line 3" in capsys.readouterr().err


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("trials: 7\nK: [11, 12]\neta-sweep: 0.4\nseed: 3\n")
    config = resolve_config(["example1", "--config", str(cfg), "--seed", "9"])
    assert config["trials"] == 7 and config["K"] == [11, 12]
    assert config["eta_sweep"] == [0.4] and config["seed"] == 9
    (tmp_path / "u.yaml").write_text("nonsense: 1\n")
    (tmp_path / "l.yaml").write_text("K: []\n")
    for name in ("u.yaml", "l.yaml"):
        assert main(["example1", "--config", str(tmp_path / name), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_custom_case_file(tmp_path):
    save_case_csv(bundled_grid(), tmp_path / "case.csv")
    args = ["psse", "--theta", "0.3", "--K", "80", "--trials", "20"]
    assert main(args + ["--case", str(tmp_path / "case.csv"), "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "b")]) == EXIT_OK
    assert (tmp_path / "a" / "mse_vs_K.csv").read_bytes() == (tmp_path / "b" / "mse_vs_K.csv").read_bytes()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gspwl", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "gspwl" in proc.stdout
