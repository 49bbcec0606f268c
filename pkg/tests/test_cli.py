import json
import os

import pytest

from badapprox.cli import main

SMALL = "window = 5/16 11/32 17/64 19/64\nmax_level = 1\ndepth = 1\n"


def cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_params_default(capsys):
    assert main(["params"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["levels"][0] == {"n": 1, "ell": [4, 4], "delta": ["1/32768", "1/32768"]}
    assert rep["s"] == "3/2" and rep["rho"] == ["3/2", "3/2"] and rep["N"] == 4 and rep["t"] == 4


def test_params_second_case(tmp_path, capsys):
    assert main(["params", "--config", cfg(tmp_path, "tau1 = 2\ntau2 = 2/5\n")]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["rho"] == ["13/8", "11/8"] and rep["s_rho"] == "23/15"


@pytest.mark.parametrize("text, needle", [
    ("tau1 = 1/2\ntau2 = 1/4\n", "tau1 + tau2 > 1"),
    ("tau1 = 1\ntau2 = 2\n", "tau1 >= tau2"),
    ("tau1 = one\n", "rational"),
    ("colour = red\n", "unknown config keys"),
    ("window = 0 2 0 1\n", "window"),
    ("rho1 = 3/2\n", "together"),
])
def test_config_errors(tmp_path, capsys, text, needle):
    assert main(["params", "--config", cfg(tmp_path, text)]) == 2
    assert needle in capsys.readouterr().err


def test_missing_config_file(capsys):
    assert main(["params", "--config", "/nonexistent/x.cfg"]) == 2


def test_tiny_window_exit_code(tmp_path):
    text = "window = 1/3 3333334/10000000 1/3 3333334/10000000\nmax_level = 3\n"
    assert main(["build", "--quiet", "--config", cfg(tmp_path, text), "--out", str(tmp_path / "o")]) == 3


def test_build_and_export_plot(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["build", "--quiet", "--config", cfg(tmp_path, SMALL), "--out", str(out)]) == 0
    for name in ("levels.json", "tree.json", "ledger.csv", "holder.csv"):
        assert (out / name).exists()
    tree = json.loads((out / "tree.json").read_text())
    assert [l["mass"] for l in tree["layers"]] == ["1/1", "1/1"]
    assert main(["export-plot", "--config", cfg(tmp_path, SMALL), "--out", str(out)]) == 0
    rects = (out / "rects.csv").read_text().splitlines()
    assert rects[0] == "layer,node,kind,x0,x1,y0,y1"
    assert len(rects) > len(tree["nodes"])


def test_export_plot_needs_artifacts(tmp_path, capsys):
    assert main(["export-plot", "--out", str(tmp_path / "empty")]) == 2
    assert "run build first" in capsys.readouterr().err


def test_build_is_deterministic_across_workers(tmp_path, monkeypatch):
    c = cfg(tmp_path, SMALL)
    assert main(["build", "--quiet", "--config", c, "--out", str(tmp_path / "a")]) == 0
    monkeypatch.setenv("BADAPPROX_THREADS", "4")
    assert main(["build", "--quiet", "--config", c, "--out", str(tmp_path / "b")]) == 0
    for name in sorted(os.listdir(tmp_path / "a")):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name


def test_verify_flags_injected_fault(tmp_path, capsys):
    text = "window = 0 1/64 0 1/64\nmax_level = 2\ndepth = 1\n"
    code = main(["verify", "--quiet", "--config", cfg(tmp_path, text), "--fault", "half-delta",
                 "--out", str(tmp_path / "v")])
    out = capsys.readouterr().out
    assert code == 6
    assert "FAIL avoidance" in out


def test_verify_clean_small_build(tmp_path, capsys):
    assert main(["verify", "--quiet", "--config", cfg(tmp_path, SMALL)]) == 0
    out = capsys.readouterr().out
    assert "SKIP holder" in out and "FAIL" not in out
