import csv
import json

import pytest

from lpregularity.cli import main


def _run(tmp_path, *args):
    out = tmp_path / "report.json"
    code = main([*args, "--out", str(out)])
    return code, out


@pytest.mark.parametrize(
    "cmd",
    [
        ["partition-check", "--size", "32"],
        ["bernstein", "--size", "64", "--trials", "30"],
        ["paraproduct", "--size", "64", "--trials", "2"],
        ["iterate-lemma", "--epsilon", "1", "--delta", "0.2"],
        ["counterexample", "--n", "5", "--p", "3"],
        ["bootstrap", "--size", "64"],
    ],
)
def test_subcommands_pass(tmp_path, cmd):
    code, out = _run(tmp_path, *cmd)
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["verdicts"] and all(v["pass"] for v in rep["verdicts"].values())


def test_counterexample_report_names_matching_formula(tmp_path):
    code, out = _run(tmp_path, "counterexample", "--n", "5", "--p", "3")
    amp = json.loads(out.read_text())["constants"]["amplitude"]
    assert amp["matches"] == ["a(n-a-2)"]
    assert amp["candidates"]["a(n+a-2)"] == pytest.approx(2.0)


def test_stress_exit_code_and_side_files(tmp_path):
    code, out = _run(tmp_path, "bootstrap", "--size", "64", "--v-scale", "100")
    assert code == 1
    with open(tmp_path / "report.a_k.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["k", "value"]
    assert [int(r[0]) for r in rows[1:]] == list(range(len(rows) - 1))


def test_parameter_error_exit_code(tmp_path, capsys):
    code, _ = _run(tmp_path, "bootstrap", "--s", "1.0")
    assert code == 2
    assert "2*s < n" in capsys.readouterr().err
    assert main(["bootstrap", "--size", "100"]) == 2
    assert main(["no-such-command"]) == 2


def test_numerical_error_exit_code(capsys):
    # three oracle iterations cannot converge near the admissibility edge
    assert main(["iterate-lemma", "--epsilon", "0.1", "--delta", "0.017", "--iters", "3"]) == 3
    assert "IterationLimitError" in capsys.readouterr().err


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("s = 0.8\nalpha = 0.7\nN = 64\n")
    code, out = _run(tmp_path, "bootstrap", "--config", str(cfg), "--alpha", "0.75")
    params = json.loads(out.read_text())["parameters"]
    assert params["s"] == 0.8 and params["alpha"] == 0.75 and params["N"] == 64
    assert code in (0, 1)


def test_bad_config_file(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("what\n")
    assert main(["bootstrap", "--config", str(cfg)]) == 2
    assert main(["bootstrap", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_csv_format(tmp_path, capsys):
    assert main(["iterate-lemma", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "verdict,pass,criterion,tolerance"
    assert lines[1].startswith("conclusion,True")
