import csv
import json

import numpy as np
import pytest
import scipy.io

from qlbm.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_OK, ConfigError, RunConfig, main


def _cfg(tmp_path, **kw):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(kw))
    return str(p)


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_defaults():
    c = RunConfig()
    assert (c.h, c.W, c.re, c.ma, c.ny, c.mode) == (0.5, 1, 1.0, 0.01, 8, "physical")


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"nx": 8, "colour": 1})
    with pytest.raises(ConfigError):
        RunConfig(mode="dense")
    with pytest.raises(ConfigError):
        RunConfig(degree=10)
    assert main(["reference", "--config", _cfg(tmp_path, nx=8, bogus=1)]) == EXIT_CONFIG
    assert main(["reference", "--config", _cfg(tmp_path, nx=6)]) == EXIT_CONFIG
    assert main(["solve", "--config", _cfg(tmp_path, nx=4, obstacle="none")]) == EXIT_CONFIG
    assert main(["reference", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG


def test_reference_outputs(tmp_path):
    out = tmp_path / "o"
    assert main(["reference", "--config", _cfg(tmp_path, nx=8, out_dir=str(out))]) == EXIT_OK
    rows = _rows(out / "fields_nonlinear.csv")
    assert len(rows) == 33 * 64
    assert {int(r["step"]) for r in rows} == set(range(33))
    err = [float(r["rel_err_linear_vs_nonlinear"]) for r in _rows(out / "error_linear_vs_nonlinear.csv")]
    assert err[0] == 0 and all(b > a for a, b in zip(err[1:], err[2:]))


def test_rest_without_inflow_stays_at_rest(tmp_path):
    out = tmp_path / "o"
    cfg = _cfg(tmp_path, nx=8, ma=0.0, tau=0.6385640646055102, nt=8, out_dir=str(out))
    assert main(["reference", "--config", cfg]) == EXIT_OK
    for name in ("fields_nonlinear.csv", "fields_linear.csv"):
        u = np.array([[float(r["ux"]), float(r["uy"])] for r in _rows(out / name)])
        assert np.abs(u).max() <= 1e-14


def test_build_matrix(tmp_path):
    out = tmp_path / "o"
    assert main(["build-matrix", "--config", _cfg(tmp_path, nx=4, obstacle="none", nt=4), "--out", str(out)]) == 0
    L = scipy.io.mmread(str(out / "L_physical.mtx"))
    assert L.shape == (2 * 4 * 144, 2 * 4 * 144)
    assert (out / "A_tilde_physical.mtx").read_text().startswith("%%MatrixMarket matrix coordinate real general")
    assert len((out / "b_L_physical.csv").read_text().splitlines()) == L.shape[0] + 1


def test_spectral_and_check(tmp_path):
    cfg = _cfg(tmp_path, nx=4, obstacle="none", out_dir=str(tmp_path / "o"))
    assert main(["spectral", "--config", cfg, "--nt", "2", "4"]) == EXIT_OK
    rows = _rows(tmp_path / "o" / "spectral.csv")
    assert [int(r["nt"]) for r in rows] == [2, 4]
    assert main(["spectral", "--config", cfg, "--nt", "4", "--check", "--inv-sigma-min-range", "1", "2"]) == EXIT_CHECK


def test_solve_outputs_and_check(tmp_path):
    out = tmp_path / "o"
    cfg = _cfg(tmp_path, nx=4, obstacle="none", nt=4, kappa=200, degree=2001, out_dir=str(out))
    assert main(["solve", "--config", cfg, "--check", "--max-error", "1e-3"]) == EXIT_OK
    rows = _rows(out / "error_vs_time.csv")
    assert list(rows[0]) == ["t", "rel_err_vs_linear", "rel_err_vs_nonlinear"] and len(rows) == 5
    summary = json.loads((out / "solve_summary.json").read_text())
    assert summary["rel_err_vs_forward_solve"] <= 1e-3
    assert (out / "velocity_step2.csv").exists() and (out / "velocity_step4.csv").exists()
    assert main(["solve", "--config", cfg, "--check", "--max-error", "1e-9"]) == EXIT_CHECK


def test_circuit_commands(tmp_path):
    out = tmp_path / "o"
    cfg = _cfg(tmp_path, nx=4, obstacle="none", nt=4, circuit="UL", out_dir=str(out))
    assert main(["circuit", "verify", "--config", cfg, "--check", "--export"]) == EXIT_OK
    assert json.loads((out / "verify_UL.json").read_text())["passed"]
    assert (out / "UL.txt").read_text().startswith("# qubits 20")
    assert main(["circuit", "count", "--config", cfg, "--nx", "4", "8"]) == EXIT_OK
    rows = _rows(out / "counts_UL.csv")
    assert list(rows[0]) == ["nx", "ny", "nt", "toffoli", "cnot", "ry", "h", "x", "swap",
                             "qubits_total", "qubits_ancilla"]
    assert [int(r["nx"]) for r in rows] == [4, 8]


def test_resources(tmp_path):
    out = tmp_path / "o"
    cfg = _cfg(tmp_path, nx=16, nt=64, out_dir=str(out))
    assert main(["resources", "--config", cfg, "--T", "128", "1024", "--check"]) == EXIT_OK
    rows = _rows(out / "resources.csv")
    assert list(rows[0]) == ["nx", "T", "kappa_fit", "degree", "t_count"]
    assert all(1e10 <= float(r["t_count"]) <= 1e12 for r in rows)
    assert main(["resources", "--config", cfg, "--T", "1", "--check"]) == EXIT_CHECK


def test_byte_identical_reruns(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"o{k}"
        cfg = _cfg(tmp_path, nx=4, obstacle="none", nt=4, out_dir=str(out))
        main(["reference", "--config", cfg])
        main(["spectral", "--config", cfg, "--nt", "4"])
        outs.append(out)
    for name in ("fields_nonlinear.csv", "error_linear_vs_nonlinear.csv", "spectral.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
