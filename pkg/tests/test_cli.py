"""End-to-end command-line runs through temp files, exit codes included."""
import json

import numpy as np
import pytest

from qgsynth.cli import run_command


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def files(tmp_path):
    rng = np.random.default_rng(71)
    theta = rng.uniform(0, 2 * np.pi, size=8).tolist()
    v = rng.normal(size=8) + 1j * rng.normal(size=8)
    v /= np.linalg.norm(v)
    return {
        "path3": write(tmp_path / "path3.json", {"kind": "path", "n": 3}),
        "path10": write(tmp_path / "path10.json", {"kind": "path", "n": 10}),
        "angles": write(tmp_path / "angles.json", {"n": 3, "theta": theta}),
        "state": write(
            tmp_path / "state.json",
            {"n": 3, "re": v.real.tolist(), "im": v.imag.tolist()},
        ),
        "tmp": tmp_path,
    }


def test_synth_diag_roundtrip_and_verify(files, capsys):
    out = str(files["tmp"] / "c.json")
    rc = run_command(
        ["synth", "diag", "--graph", files["path3"], "--angles",
         files["angles"], "--out", out, "--verify"]
    )
    assert rc == 0
    rc = run_command(
        ["verify", "--graph", files["path3"], "--circuit", out,
         "--angles", files["angles"]]
    )
    assert rc == 0


def test_synth_qsp_and_lightcone(files, capsys):
    out = str(files["tmp"] / "q.json")
    rc = run_command(
        ["synth", "qsp", "--graph", files["path3"], "--state",
         files["state"], "--out", out, "--verify"]
    )
    assert rc == 0
    rc = run_command(
        ["lightcone", "--circuit", out, "--task", "qsp", "-n", "3"]
    )
    assert rc == 0


def test_bound_prints_terms(files, capsys):
    rc = run_command(
        ["bound", "--graph", files["path10"], "--task", "qsp", "-n", "10",
         "-m", "0"]
    )
    assert rc == 0
    text = capsys.readouterr().out
    assert "102.4" in text


def test_verify_detects_wrong_target(files, tmp_path, capsys):
    out = str(tmp_path / "c.json")
    rc = run_command(
        ["synth", "diag", "--graph", files["path3"], "--angles",
         files["angles"], "--out", out]
    )
    assert rc == 0
    bad = write(tmp_path / "bad.json",
                {"n": 3, "theta": list(np.linspace(0.0, 3.0, 8))})
    rc = run_command(
        ["verify", "--graph", files["path3"], "--circuit", out,
         "--angles", bad]
    )
    assert rc == 1


def test_bad_arguments_exit_2(files, capsys):
    with pytest.raises(SystemExit) as e:
        run_command(["synth", "diag", "--graph", files["path3"],
                     "--no-such-flag"])
    assert e.value.code == 2
    # missing file handled as an error, not a traceback
    rc = run_command(
        ["synth", "diag", "--graph", str(files["tmp"] / "missing.json"),
         "--angles", files["angles"]]
    )
    assert rc == 2


def test_bench_is_deterministic(files, capsys):
    out1 = files["tmp"] / "b1.csv"
    out2 = files["tmp"] / "b2.csv"
    args = ["bench", "--task", "diag", "--graph-kind", "path",
            "--n-start", "2", "--n-stop", "4", "--m-rule", "zero",
            "--seed", "5"]
    assert run_command(args + ["--out", str(out1)]) == 0
    assert run_command(args + ["--out", str(out2)]) == 0
    b1, b2 = out1.read_bytes(), out2.read_bytes()
    assert b1 == b2
    lines = b1.decode().strip().splitlines()
    assert len(lines) == 4  # header + n in {2,3,4}


def test_graph_info(files, capsys):
    assert run_command(["graph", "info", "--graph", files["path10"]]) == 0
    text = capsys.readouterr().out
    assert "path" in text
