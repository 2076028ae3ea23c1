import json
import subprocess

import pytest

from nfnls.cli import dispatch, load_config_file
from nfnls.modes import ModeVector


@pytest.fixture
def u0_path(tmp_path):
    path = tmp_path / "u0.json"
    path.write_text(ModeVector.from_dict(2, {-1: 0.3, 1: 0.4 - 0.1j}).to_json())
    return str(path)


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# small desk-scale run\n"
        "n_max = 2\n"
        "J_max = 1\n"
        "T = 0.1\n"
        "time_grid_size = 21\n"
        'cutoff_override = {"1": 6.0}\n'
    )
    return str(path)


def _manifest(path):
    with open(path + ".manifest.json") as fh:
        return json.load(fh)


def test_trees_csv_and_manifest(tmp_path):
    out = str(tmp_path / "trees.csv")
    assert dispatch(["trees", "--J", "4", "--out", out]) == 0
    data = open(out, "rb").read()
    assert data == b"J,count\r\n1,1\r\n2,3\r\n3,15\r\n4,105\r\n"
    m = _manifest(out)
    assert m["subcommand"] == "trees"
    assert m["outputs"] == [out]
    assert set(m) >= {"version", "config", "args", "inputs", "seed", "duration_s"}


def test_solve_nfe_deterministic(tmp_path, u0_path, config_path):
    out = str(tmp_path / "sol.jsonl")
    argv = ["solve-nfe", "--config", config_path, "--u0", u0_path, "--out", out]
    assert dispatch(argv) == 0
    first = open(out, "rb").read()
    assert dispatch(argv) == 0
    assert open(out, "rb").read() == first
    m = _manifest(out)
    assert m["solve"]["converged"] is True
    assert m["inputs"] == [u0_path, config_path]
    assert m["config"]["n_max"] == 2


def test_simulate_and_compare(tmp_path, u0_path, config_path):
    sim = str(tmp_path / "sim.jsonl")
    assert dispatch(
        ["simulate", "--config", config_path, "--u0", u0_path, "--dt", "1e-3", "--out", sim]
    ) == 0
    lines = open(sim).read().splitlines()
    assert len(lines) == 101
    assert json.loads(lines[0])["t"] == 0.0

    cmp_out = str(tmp_path / "cmp.csv")
    assert dispatch(
        ["compare", "--config", config_path, "--u0", u0_path, "--dt-ref", "1e-3", "--out", cmp_out]
    ) == 0
    header = open(cmp_out, "rb").read().split(b"\r\n")[0]
    assert header == b"t,distance"
    assert _manifest(cmp_out)["max_distance"] < 1e-4


def test_bounds_error_decay_stability(tmp_path, u0_path, config_path):
    out = str(tmp_path / "bounds.csv")
    assert dispatch(
        [
            "bounds", "--config", config_path, "--kind", "R", "--j", "1",
            "--p-list", "1,2", "--trials", "5", "--seed", "7", "--out", out,
        ]
    ) == 0
    rows = open(out).read().splitlines()
    assert rows[0] == "kind,j,p,n_max,trials,seed,max_ratio"
    assert len(rows) == 3
    assert _manifest(out)["seed"] == 7

    decay = str(tmp_path / "decay.csv")
    assert dispatch(
        ["error-decay", "--config", config_path, "--u0", u0_path, "--J-list", "1,2", "--out", decay]
    ) == 0
    assert open(decay).read().splitlines()[0] == "J,sup_norm,envelope"

    stab = str(tmp_path / "stab.csv")
    assert dispatch(
        ["stability", "--config", config_path, "--u0", u0_path, "--m-list", "1,2", "--out", stab]
    ) == 0
    assert open(stab).read().splitlines()[0] == "m_lo,m_hi,data_distance,solution_distance,ratio"


def test_plot_deterministic_and_logy_guard(tmp_path):
    csv_path = str(tmp_path / "data.csv")
    with open(csv_path, "w", newline="") as fh:
        fh.write("x,y\r\n1,10.0\r\n2,1.0\r\n3,0.1\r\n")
    out = str(tmp_path / "plot.svg")
    argv = ["plot", "--csv", csv_path, "--x", "x", "--y", "y", "--logy", "--out", out]
    assert dispatch(argv) == 0
    first = open(out, "rb").read()
    assert first.startswith(b"<svg ") and b"polyline" in first
    assert dispatch(argv) == 0
    assert open(out, "rb").read() == first

    bad_csv = str(tmp_path / "bad.csv")
    with open(bad_csv, "w", newline="") as fh:
        fh.write("x,y\r\n1,-1.0\r\n2,1.0\r\n")
    assert dispatch(
        ["plot", "--csv", bad_csv, "--x", "x", "--y", "y", "--logy", "--out", out]
    ) == 1


def test_config_file_parsing(tmp_path, config_path):
    cfg = load_config_file(config_path)
    assert cfg["n_max"] == 2
    assert cfg["cutoff_override"] == {"1": 6.0}
    bad = tmp_path / "bad.cfg"
    bad.write_text("flux_capacitor = 1\n")
    with pytest.raises(ValueError, match="unknown configuration key"):
        load_config_file(str(bad))
    nokv = tmp_path / "nokv.cfg"
    nokv.write_text("just words\n")
    with pytest.raises(ValueError, match="key = value"):
        load_config_file(str(nokv))


def test_exit_codes(tmp_path, u0_path, capsys):
    # usage errors
    assert dispatch(["no-such-command"]) == 2
    assert dispatch(["trees", "--out", str(tmp_path / "x.csv")]) == 2
    capsys.readouterr()
    # domain errors surface as JSON on stderr with exit code 1
    out = str(tmp_path / "b.csv")
    assert dispatch(
        ["bounds", "--kind", "R", "--j", "1", "--p-list", "0.5",
         "--trials", "2", "--out", out]
    ) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"].startswith("ValueError")
    assert dispatch(
        ["solve-nfe", "--u0", str(tmp_path / "missing.json"), "--out", out]
    ) == 1


def test_console_entry_point(tmp_path):
    out = str(tmp_path / "trees.csv")
    proc = subprocess.run(
        ["nfnls", "trees", "--J", "2", "--out", out], capture_output=True
    )
    assert proc.returncode == 0
    assert open(out).read().splitlines()[1:] == ["1,1", "2,3"]
