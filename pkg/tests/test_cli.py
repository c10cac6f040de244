import csv
import io
import json
import os
import subprocess
import sys

import pytest

from udint.cli import OUTPUT_DIR_ENV, lemma_bound_replicas, main
from udint.integrands import get_integrand

COMMAND_ARGS = {
    "generate": ["--seq", "kronecker:sqrt2", "--n", "50"],
    "discrepancy": ["--seq", "vdc:2", "--n", "1000"],
    "integrate": ["--seq", "kronecker:phi", "--f", "inv_sqrt", "--n", "10000"],
    "truncated": ["--seq", "prng:1", "--f", "log_recip", "--n", "5000", "--eps", "0.1"],
    "conditions": ["--seq", "hybrid_pi", "--f", "square", "--n", "10000"],
    "slln": ["--seq", "prng:4", "--dist", "mixed_atom_uniform:0:0.5", "--n", "5000"],
    "lemma-bound": ["--f", "log_recip", "--n", "500", "--eps", "0.1", "--replicas", "20", "--seed", "3"],
}


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.reader(io.StringIO(text)))


def test_generate_vdc_to_stdout(capsys):
    code, out, _ = run_cli(capsys, "generate", "--seq", "vdc:2", "--n", "3")
    assert code == 0
    assert rows_of(out) == [["n", "x"], ["1", "0.5"], ["2", "0.25"], ["3", "0.75"]]


def test_integrate_square_final_row(capsys):
    code, out, _ = run_cli(capsys, "integrate", "--seq", "kronecker:sqrt2", "--f", "square", "--n", "100000")
    assert code == 0
    table = rows_of(out)
    assert table[0] == ["N", "mean", "tail_term"]
    assert int(table[-1][0]) == 100000
    assert abs(float(table[-1][1]) - 1 / 3) < 1e-3


def test_integrate_reports_error_slope(capsys):
    code, _, err = run_cli(capsys, "integrate", "--seq", "prng:3", "--f", "square", "--n", "100000")
    assert code == 0
    summary = json.loads(err.strip().splitlines()[-1])
    assert summary["exact_integral"] == pytest.approx(1 / 3) and summary["error_slope"] < 0


def test_conditions_summary(tmp_path, capsys):
    out = tmp_path / "cond.csv"
    code, _, err = run_cli(capsys, "conditions", "--seq", "kronecker:phi", "--f", "inv_sqrt", "--n", "1000000",
                           "--out", str(out))
    assert code == 0
    summary = json.loads((tmp_path / "cond.csv.config.json").read_text())["summary"]
    assert summary["verdicts"] == [True, True, True]
    assert json.loads(err.strip().splitlines()[-1])["verdicts"] == [True, True, True]


@pytest.mark.parametrize("command", sorted(COMMAND_ARGS))
def test_rerun_is_byte_identical_and_sidecar_reproduces(command, tmp_path, capsys):
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    assert run_cli(capsys, command, *COMMAND_ARGS[command], "--out", str(a))[0] == 0
    assert run_cli(capsys, command, *COMMAND_ARGS[command], "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()

    sidecar = json.loads((tmp_path / "a.csv.config.json").read_text())
    cfg = dict(sidecar["config"], output=str(c))
    cfg_path = tmp_path / "replay.json"
    cfg_path.write_text(json.dumps(cfg))
    assert run_cli(capsys, command, "--config", str(cfg_path))[0] == 0
    assert c.read_bytes() == a.read_bytes()


def test_sidecar_accepted_directly(tmp_path, capsys):
    a = tmp_path / "a.csv"
    run_cli(capsys, *["integrate", *COMMAND_ARGS["integrate"], "--out", str(a)])
    code, out, _ = run_cli(capsys, "integrate", "--config", str(tmp_path / "a.csv.config.json"))
    assert code == 0
    # the sidecar names its own output file, so the rerun overwrites it with the same bytes
    assert out == ""
    assert a.read_text().startswith("N,mean,tail_term")


@pytest.mark.parametrize("argv, needle", [
    (["integrate", "--seq", "prng:1", "--f", "square", "--n", "10", "--eps", "0.1"], "does not accept eps"),
    (["generate", "--seq", "prng:1", "--n", "10", "--f", "square"], "does not accept integrand"),
    (["slln", "--seq", "prng:1", "--dist", "bernoulli:0.3", "--n", "10", "--tol", "0.1"], "does not accept"),
    (["integrate", "--seq", "prng:1", "--f", "cube", "--n", "10"], "cube"),
    (["integrate", "--seq", "sobol:1", "--f", "square", "--n", "10"], "sobol"),
    (["slln", "--seq", "prng:1", "--dist", "cauchy", "--n", "10"], "cauchy"),
    (["truncated", "--seq", "prng:1", "--f", "square", "--n", "10"], "needs eps"),
    (["integrate", "--seq", "vdc:2", "--f", "inv_sqrt_shift", "--p", "1/2", "--n", "10"], "n=1"),
    (["integrate", "--seq", "prng:1", "--f", "square", "--n", "0"], "n must be"),
    (["integrate", "--seq", "kronecker:0.5", "--f", "square", "--n", "10"], "rational"),
])
def test_invalid_inputs_exit_nonzero(argv, needle, capsys):
    code, out, err = run_cli(capsys, *argv)
    assert code == 1
    assert out == ""
    assert err.startswith("udint: error:") and needle in err


def test_unwritable_output(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = run_cli(capsys, "generate", "--seq", "vdc:2", "--n", "3", "--out", str(blocker / "sub" / "o.csv"))
    assert code == 1 and "udint: error:" in err


def test_output_dir_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "runs"))
    code, out, _ = run_cli(capsys, "generate", "--seq", "vdc:2", "--n", "3")
    assert code == 0 and out == ""
    assert (tmp_path / "runs" / "generate.csv").read_text().splitlines()[1] == "1,0.5"
    assert (tmp_path / "runs" / "generate.csv.config.json").exists()


def test_json_format(capsys):
    code, out, _ = run_cli(capsys, "slln", "--seq", "prng:11", "--dist", "bernoulli:0.3", "--n", "1000",
                           "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["columns"] == ["N", "mean", "tail_term"]
    assert doc["rows"][-1][0] == 1000


def test_explicit_checkpoints_and_all_schedule(capsys):
    _, out, _ = run_cli(capsys, "integrate", "--seq", "prng:1", "--f", "identity", "--n", "100",
                        "--checkpoints", "1,10,100")
    assert [r[0] for r in rows_of(out)[1:]] == ["1", "10", "100"]
    _, out, _ = run_cli(capsys, "integrate", "--seq", "prng:1", "--f", "identity", "--n", "20",
                        "--schedule", "all")
    assert len(rows_of(out)) == 21


def test_counterexample_uses_own_points(capsys):
    code, out, _ = run_cli(capsys, "integrate", "--seq", "kronecker:sqrt2", "--f", "counterexample", "--n", "1000")
    assert code == 0
    assert all(float(r[1]) == 0.0 for r in rows_of(out)[1:])


def test_lemma_bound_jobs_do_not_change_numbers(tmp_path, capsys):
    f = get_integrand("square")
    seeds = range(3, 23)
    assert lemma_bound_replicas(f, 300, 0.5, seeds, jobs=1) == lemma_bound_replicas(f, 300, 0.5, seeds, jobs=4)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_cli(capsys, "lemma-bound", *COMMAND_ARGS["lemma-bound"], "--jobs", "1", "--out", str(a))
    run_cli(capsys, "lemma-bound", *COMMAND_ARGS["lemma-bound"], "--jobs", "3", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()
    summary = json.loads((tmp_path / "a.csv.config.json").read_text())["summary"]
    assert summary["holds"] is True
    assert summary["bound"] == pytest.approx(0.2)


def test_module_entry_point(tmp_path):
    env = dict(os.environ)
    env.pop(OUTPUT_DIR_ENV, None)
    proc = subprocess.run([sys.executable, "-m", "udint", "generate", "--seq", "vdc:2", "--n", "2"],
                          capture_output=True, text=True, env=env, check=True)
    assert proc.stdout.splitlines() == ["n,x", "1,0.5", "2,0.25"]
