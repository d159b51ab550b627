"""CLI orchestrator: subcommands, config validation, reproducible outputs."""
import json
import os

import numpy as np
import pytest

from sbmlab.cli import main
from sbmlab.errors import SchemaMismatch
from sbmlab.plots import emit_plot_data
from sbmlab.results import ResultTable, read_csv_body


def run(args):
    return main(args)


def test_profile_subcommand(tmp_path):
    out = tmp_path / "p"
    rc = run(["--out", str(out), "profile", "--h", "2e-3", "--tol", "1e-10"])
    assert rc == 0
    assert (out / "profile.csv").exists()
    assert (out / "profile.png").exists()
    summary = json.loads((out / "profile_summary.json").read_text())
    assert 1.0 < summary["f0"] < 2.0
    assert "config_hash" in summary


def test_spectrum_half_f(tmp_path):
    out = tmp_path / "s"
    rc = run(["--out", str(out), "spectrum", "--phi", "half-f",
              "--h", "0.005", "--nmax", "6"])
    assert rc == 0
    summary = json.loads((out / "spectrum_summary.json").read_text())
    assert abs(summary["lambda0"] - 0.5) < 1e-4
    assert (out / "spectrum.csv").exists()
    assert (out / "psi0.csv").exists()


def test_malformed_config_exits_2_no_partial_files(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[profile]\nh = 1e-3\nwhat = 7\n")
    out = tmp_path / "o"
    rc = run(["--config", str(cfg), "--out", str(out), "profile"])
    assert rc == 2
    assert not out.exists() or not os.listdir(out)
    cfg.write_text("[profile]\nh = -1\n")
    assert run(["--config", str(cfg), "--out", str(out), "profile"]) == 2
    cfg.write_text("[nonsense]\nh = 1\n")
    assert run(["--config", str(cfg), "--out", str(out), "profile"]) == 2


def test_module_error_exits_3(tmp_path):
    # ymax too small: both bracket endpoints classify the same way
    rc = run(["--out", str(tmp_path), "profile", "--h", "2e-3",
              "--ymax", "0.5"])
    assert rc == 3


def test_pde_rate_subcommand(tmp_path):
    out = tmp_path / "r"
    rc = run(["--out", str(out), "pde-rate",
              "--lambdas", "16,32,64,128", "--dx", "0.01", "--dt", "2e-3"])
    assert rc == 0
    fit = json.loads((out / "fit.json").read_text())
    assert fit["slope"] < 0
    assert (out / "rate.csv").exists()
    assert (out / "rate_plot.csv").exists()
    assert (out / "rate_plot_fit.csv").exists()
    assert (out / "rate.png").exists()


def test_simulate_subcommand(tmp_path):
    out = tmp_path / "sim"
    rc = run(["--seed", "5", "--out", str(out), "simulate",
              "--x0", "delta:0", "--N", "500", "--reps", "80"])
    assert rc == 0
    for name in ("density.csv", "tail.csv", "bz_points.csv", "density.png"):
        assert (out / name).exists()


def test_tail_subcommand_and_reproducibility(tmp_path):
    args = ["--seed", "9", "tail", "--N", "1000", "--reps", "4000",
            "--a-min", "0.1", "--n-a", "5"]
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run(["--out", str(out1)] + args) == 0
    assert run(["--out", str(out2)] + args) == 0
    assert read_csv_body(out1 / "tail.csv") == read_csv_body(out2 / "tail.csv")
    f1 = json.loads((out1 / "tail_fit.json").read_text())
    f2 = json.loads((out2 / "tail_fit.json").read_text())
    assert f1 == f2
    assert 0.0 < f1["slope"] < 1.0


def test_dimension_subcommand(tmp_path):
    out = tmp_path / "d"
    rc = run(["--out", str(out), "dimension", "--cantor", "10"])
    assert rc == 0
    rep = json.loads((out / "dim.json").read_text())
    assert abs(rep["slope"] - np.log(2) / np.log(3)) < 0.06
    assert rep["capacity"] > 0


def test_tauberian_subcommand(tmp_path, capsys):
    rc = run(["--out", str(tmp_path), "tauberian", "--c1", "1", "--c2", "1",
              "--p", "1"])
    assert rc == 0
    captured = capsys.readouterr()
    assert "d1" in captured.out
    rep = json.loads((tmp_path / "tauberian.json").read_text())
    assert rep["d1"] == pytest.approx(0.5 / (2 * np.log(8)), rel=1e-12)


def test_csv_metadata_and_body_split(tmp_path):
    t = ResultTable({"a": np.array([1.0, 2.0])}, meta={"config_hash": "xyz"})
    path = tmp_path / "t.csv"
    t.write_csv(path)
    text = path.read_text()
    assert "# config_hash=xyz" in text
    body = read_csv_body(path)
    assert body[0].strip() == "a"
    assert all(not ln.startswith("#") for ln in body)


def test_emit_plot_data_contract(tmp_path):
    table = ResultTable({"lambda": np.array([2.0, 4.0, 8.0]),
                         "D": np.array([0.4, 0.25, 0.15])})
    emit_plot_data(table, "rate", str(tmp_path / "r"))
    assert (tmp_path / "r.csv").exists()
    assert (tmp_path / "r_fit.csv").exists()
    with pytest.raises(SchemaMismatch):
        emit_plot_data(table, "tail", str(tmp_path / "t"))
    with pytest.raises(SchemaMismatch):
        emit_plot_data(table, "orbitals", str(tmp_path / "o"))
    with pytest.raises(SchemaMismatch):
        emit_plot_data(ResultTable({"lambda": np.array([]),
                                    "D": np.array([])}), "rate",
                       str(tmp_path / "e"))
