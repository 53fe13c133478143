import json

import numpy as np
import pytest

from dropmor.cli import RunConfig, main, read_csv
from dropmor.io import load_system, read_matrix, save_system, write_matrix
from dropmor.system import StructuredSystem, StructuredTerm

DEMO = ["--bench", "demo", "--nfreq", "10", "--nparam", "10"]


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def demo_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("demo")
    assert run("reduce", *DEMO, "--tol", "1e-8", "--out", out) == 0
    return out


def test_reduce_demo_order_two(demo_run):
    doc = json.loads((demo_run / "run.json").read_text())
    assert doc["chosen_r"] == 2 and doc["truncation_mode"] == "relative-tol"
    assert doc["config"]["bench"] == "demo"
    svd = read_csv(demo_run / "svd.csv")
    assert list(svd) == ["index", "sv_left", "sv_right"]
    assert load_system(demo_run / "reduced").n == 2


def test_sweep_demo(demo_run, tmp_path):
    assert run("sweep", *DEMO, "--reduced", demo_run / "reduced", "--out", tmp_path) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["max_abs"] <= 1e-10
    rows = read_csv(tmp_path / "sweep.csv")
    assert len(rows["omega"]) == 100 * 20
    assert rows["abs_err"].max() == summary["max_abs"]


def test_sweep_against_itself(tmp_path):
    save_system(__import__("dropmor").demo_system(), tmp_path / "self")
    assert run("sweep", *DEMO, "--reduced", tmp_path / "self", "--out", tmp_path) == 0
    assert json.loads((tmp_path / "summary.json").read_text())["max_abs"] == 0


def test_verify_untruncated_passes(demo_run, tmp_path):
    assert run("verify", *DEMO, "--reduced", demo_run / "reduced", "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "verify.json").read_text())
    assert doc["passed"] and not doc["interp_failures"]


def test_verify_truncated_fails(tmp_path, capsys):
    assert run("reduce", *DEMO, "--order", "1", "--out", tmp_path) == 0
    code = run("verify", *DEMO, "--reduced", tmp_path / "reduced", "--out", tmp_path)
    assert code == 1
    assert "interpolation FAIL point" in capsys.readouterr().err
    assert json.loads((tmp_path / "verify.json").read_text())["interp_failures"]


def test_error_exit_codes(tmp_path, capsys, demo_run):
    missing = tmp_path / "nowhere" / "manifest.json"
    assert run("reduce", "--manifest", missing, "--out", tmp_path) == 2
    assert str(missing) in capsys.readouterr().err
    assert run("sweep", *DEMO, "--reduced", missing, "--out", tmp_path) == 2
    assert run("sweep", *DEMO, "--out", tmp_path) == 2
    assert run("reduce", "--bench", "nope") == 2
    assert run("reduce", "--bench", "demo", "--order", "2", "--tol", "1e-3") == 2
    assert run("bogus") == 2
    bad = tmp_path / "cfg.json"
    bad.write_text('{"bench": "demo", "colour": 1}')
    assert run("reduce", "--config", bad) == 2


def test_mismatched_pair_exit_two(tmp_path, demo_run):
    two_in = StructuredSystem([StructuredTerm.of("s", np.eye(3), 1),
                               StructuredTerm.of("-p1", -np.eye(3), 1)],
                              [StructuredTerm.of("1", np.ones((3, 2)))],
                              [StructuredTerm.of("1", np.ones((1, 3)))], d=1,
                              param_box=[(1, 2)], freq_range=(1e-4, 10.0))
    save_system(two_in, tmp_path / "m2")
    code = run("verify", "--manifest", tmp_path / "m2", "--nfreq", "3", "--nparam", "3",
               "--reduced", demo_run / "reduced", "--out", tmp_path)
    assert code == 2


def test_config_file_and_run_json_echo(tmp_path, demo_run):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(dict(bench="demo", nfreq=10, nparam=10, tol=1e-8)))
    assert run("reduce", "--config", cfg, "--out", tmp_path / "a") == 0
    # run.json doubles as a config file
    assert run("reduce", "--config", demo_run / "run.json", "--out", tmp_path / "b") == 0
    for d in ("a", "b"):
        assert json.loads((tmp_path / d / "run.json").read_text())["chosen_r"] == 2
    echoed = RunConfig.from_dict(json.loads((demo_run / "run.json").read_text()))
    assert echoed.bench == "demo" and echoed.tol == 1e-8


def test_delay_fixed_order(tmp_path):
    assert run("reduce", "--bench", "delay", "--order", "12", "--out", tmp_path) == 0
    red = load_system(tmp_path / "reduced")
    assert red.n == 12 and len(red.k_terms) == 3


def test_deterministic_csvs(tmp_path):
    for d in ("x", "y"):
        out = tmp_path / d
        assert run("reduce", "--bench", "delay", "--size", "40", "--nfreq", "30", "--order", "8",
                   "--tangential", "--out", out) == 0
        assert run("sweep", "--bench", "delay", "--size", "40", "--nsweep", "50",
                   "--reduced", out / "reduced", "--out", out) == 0
    for name in ("svd.csv", "sweep.csv", "summary.json"):
        assert (tmp_path / "x" / name).read_bytes() == (tmp_path / "y" / name).read_bytes()
    for name in ("K0.mtx", "K2.mtx", "B0.mtx", "C0.mtx"):
        assert (tmp_path / "x" / "reduced" / name).read_bytes() == \
            (tmp_path / "y" / "reduced" / name).read_bytes()


def test_emitted_files_reload(demo_run, tmp_path):
    assert run("sweep", *DEMO, "--reduced", demo_run / "reduced", "--out", tmp_path) == 0
    assert run("verify", *DEMO, "--reduced", demo_run / "reduced", "--out", tmp_path) == 0
    for f in ("svd.csv",):
        assert read_csv(demo_run / f)
    for f in ("sweep.csv", "verify.csv"):
        assert read_csv(tmp_path / f)
    for f in ("summary.json", "verify.json"):
        json.loads((tmp_path / f).read_text())
    red = load_system(demo_run / "reduced" / "manifest.json")
    for t in red.k_terms:
        write_matrix(tmp_path / "k.mtx", t.matrix)
        assert np.array_equal(read_matrix(tmp_path / "k.mtx"), t.matrix)
