import json
import subprocess
import sys

import pytest

from qdurrmeyer.cli import main

EXAMPLES = [
    (["eval", "--q", "0.5", "--f", "monomial:1", "--x", "0.3"], 0),
    (["verify", "--suite", "identities", "--q", "0.5"], 0),
    (["eval", "--q", "1.5", "--f", "monomial:1", "--x", "0.3"], 2),
]


def run_cli(args):
    return subprocess.run([sys.executable, "-m", "qdurrmeyer", *args],
                          capture_output=True, text=True, timeout=120)


def test_eval_example(capsys):
    assert main(EXAMPLES[0][0]) == 0
    assert capsys.readouterr().out == "0.65\n"


def test_verify_example(capsys):
    assert main(EXAMPLES[1][0]) == 0
    out = capsys.readouterr().out.splitlines()
    assert all(line.startswith("PASS") for line in out[:-1])
    assert out[-1] == f"{len(out) - 1}/{len(out) - 1} checks passed"


def test_bad_q_example(capsys):
    assert main(EXAMPLES[2][0]) == 2
    assert "q must lie in (0,1)" in capsys.readouterr().err


@pytest.mark.parametrize("args,code", EXAMPLES)
def test_examples_deterministic_subprocess(args, code):
    a, b = run_cli(args), run_cli(args)
    assert a.returncode == b.returncode == code
    assert a.stdout == b.stdout and a.stderr == b.stderr


def test_eval_representations(capsys):
    for rep in ("interval", "entire", "taylor"):
        assert main(["eval", "--q", "0.5", "--f", "monomial:1", "--x", "0.3", "--rep", rep]) == 0
        assert float(capsys.readouterr().out) == pytest.approx(0.65, rel=1e-12)
    assert main(["eval", "--q", "0.5", "--f", "monomial:0", "--z", "-3,2"]) == 0
    re, im = map(float, capsys.readouterr().out.split(","))
    assert re == pytest.approx(1.0) and abs(im) < 1e-12


def test_coeffs_csv_and_json(tmp_path, capsys):
    assert main(["coeffs", "--q", "0.5", "--f", "monomial:1", "--k-max", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "k,A_k"
    assert [float(l.split(",")[1]) for l in lines[1:]] == pytest.approx([0.5, 0.75, 0.875, 0.9375])
    out = tmp_path / "c.json"
    assert main(["coeffs", "--q", "0.5", "--f", "monomial:1", "--k-max", "3",
                 "--format", "json", "--out", str(out)]) == 0
    rows = json.loads(out.read_text())
    assert rows[1]["k"] == 1 and rows[1]["A_k"] == pytest.approx(0.75, rel=1e-15)
    assert [p.name for p in tmp_path.iterdir()] == ["c.json"]  # no temp files left


def test_taylor_table(capsys):
    assert main(["taylor", "--q", "0.5", "--f", "monomial:1", "--k-max", "6"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "k,c_k,err_k" and len(lines) == 8
    assert float(lines[2].split(",")[1]) == pytest.approx(0.5)


def test_growth_and_sharpness_files(tmp_path, capsys):
    g = tmp_path / "g.csv"
    args = ["--q", "0.5", "--r-min", "10", "--r-max", "1e6", "--r-points", "13", "--angles", "256"]
    assert main(["growth", "--f", "exp", "--out", str(g), *args]) == 0
    lines = g.read_text().splitlines()
    assert lines[0] == "r,log_M,log_env,y,theta_max" and len(lines) == 14
    s = tmp_path / "s.csv"
    assert main(["sharpness", "--lambda", "2", "--out", str(s), *args]) == 0
    assert s.read_text().startswith("r,y,lower_bound,slack,y_plus_lambda_log_r\n")
    assert "lambda_hat" in capsys.readouterr().err


def test_growth_byte_identical(tmp_path):
    args = ["growth", "--q", "0.5", "--f", "absshift:0.5", "--r-min", "10", "--r-max", "1e5",
            "--r-points", "9", "--angles", "128"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main([*args, "--out", str(a)]) == 0
    assert main([*args, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"q": 0.3, "f": "monomial:1", "x": 0.5}))
    assert main(["eval", "--config", str(cfg)]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.7 + 0.3 * 0.5)
    assert main(["eval", "--config", str(cfg), "--q", "0.5"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.75)
    cfg.write_text(json.dumps({"q": 0.5, "colour": 1}))
    assert main(["eval", "--config", str(cfg)]) == 2


@pytest.mark.parametrize("args", [
    ["frobnicate", "--q", "0.5"],
    ["eval", "--q", "0.5", "--f", "frobnicate:1", "--x", "0.3"],
    ["eval", "--q", "0.5", "--f", "exp"],
    ["eval", "--q", "0.5", "--f", "exp", "--x", "2"],
    ["eval", "--f", "exp", "--x", "0.2"],
    ["coeffs", "--q", "0.5", "--f", "exp", "--k-max", "-1"],
    ["verify", "--q", "0.5", "--suite", "nope"],
])
def test_usage_errors(args, capsys):
    assert main(args) == 2


def test_io_error(tmp_path, capsys):
    target = tmp_path / "missing" / "out.csv"
    assert main(["coeffs", "--q", "0.5", "--f", "exp", "--out", str(target)]) == 3
    assert "error" in capsys.readouterr().err
    assert main(["eval", "--config", str(tmp_path / "none.json")]) == 3
