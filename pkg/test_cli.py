import io

import pytest

from app.cli import AT_LEAST_OPTIMUM, BELOW_OPTIMUM, cli_dispatch
from app.dmdp.graph import parse_edge_list


@pytest.fixture
def t3_file(tmp_path, t3_text):
    path = tmp_path / "t3.dmdp"
    path.write_text(t3_text)
    return str(path)


def _run(argv):
    out = io.StringIO()
    status = cli_dispatch(argv, out)
    return status, out.getvalue()


def test_solve_history(t3_file):
    status, output = _run(["solve", "--algo", "history", "--input", t3_file])
    assert status == 0
    lines = output.splitlines()
    assert lines[0] == "mu* = 13/2"
    assert lines[1] == "mu* (decimal) = 6.5"
    assert "witness: 1 -> 2 -> 1" in lines
    assert "iterations: 6" in lines


@pytest.mark.parametrize("algo", ["vi", "augmented", "pi-classic", "pi-zero", "karp", "oracle",
                                  "find-in-policy", "find-in-history"])
def test_solve_every_algorithm(t3_file, algo):
    status, output = _run(["solve", "--algo", algo, "--input", t3_file])
    assert status == 0
    assert output.startswith("mu* = 13/2\n")


def test_solve_float_mode(t3_file):
    status, output = _run(["solve", "--algo", "karp", "--input", t3_file, "--float"])
    assert status == 0
    assert output.startswith("mu* = 6.5\n")


def test_solve_cross_check(t3_file):
    status, output = _run(["solve", "--algo", "history", "--input", t3_file, "--cross-check"])
    assert status == 0
    assert "cross-check: 9 solvers agree" in output


def test_solve_writes_trace(t3_file, tmp_path):
    trace = tmp_path / "trace.csv"
    status, _ = _run(["solve", "--algo", "pi-classic", "--input", t3_file, "--trace", str(trace)])
    assert status == 0
    assert trace.read_text().splitlines()[0] == "phase,cycle_mean,cycle_length,vi_iterations"


def test_solve_reports_bad_input(tmp_path, capsys):
    path = tmp_path / "bad.dmdp"
    path.write_text("p dmdp 2 1\ne 0 1 1\n")
    status, _ = _run(["solve", "--algo", "history", "--input", str(path)])
    assert status == 1
    assert "vertex 1 has no out-edge" in capsys.readouterr().err


def test_solve_missing_file(tmp_path):
    status, _ = _run(["solve", "--algo", "history", "--input", str(tmp_path / "missing.dmdp")])
    assert status == 1


def test_verify(t3_file):
    status, output = _run(["verify", "--input", t3_file, "--mu", "6"])
    assert status == 0
    assert output.strip() == BELOW_OPTIMUM
    _, output = _run(["verify", "--input", t3_file, "--mu", "13/2"])
    assert output.strip() == AT_LEAST_OPTIMUM


def test_gen_two_out():
    status, output = _run(["gen", "--model", "two-out", "--n", "5", "--seed", "1"])
    assert status == 0
    assert sum(1 for line in output.splitlines() if line.startswith("e ")) == 10
    graph, _ = parse_edge_list(output)
    assert graph.n == 5


def test_gen_worst_case_to_file(tmp_path):
    out_file = tmp_path / "wc.dmdp"
    status, output = _run(["gen", "--model", "worst-case", "--k", "4", "--out", str(out_file)])
    assert status == 0
    assert output == ""
    graph, values = parse_edge_list(out_file.read_text())
    assert graph.n == 10
    assert values.count(-64) == 9


def test_gen_uniform():
    status, output = _run(["gen", "--model", "uniform", "--n", "4", "--m", "9", "--seed", "2"])
    assert status == 0
    assert parse_edge_list(output)[0].m == 9


def test_gen_needs_model_parameters():
    assert _run(["gen", "--model", "worst-case"])[0] == 1
    assert _run(["gen", "--model", "uniform", "--n", "4"])[0] == 1


def test_bench(tmp_path):
    csv_file = tmp_path / "study.csv"
    status, output = _run(["bench", "--sizes", "6,12", "--samples", "3", "--seed", "1", "--out", str(csv_file)])
    assert status == 0
    assert csv_file.read_text().startswith("# dmdp-experiment schema v1\n")
    assert "first-formation power-law exponent" in output


def test_usage_errors():
    assert _run(["frobnicate"])[0] == 2
    assert _run(["solve", "--algo", "history"])[0] == 2
    assert _run(["solve", "--algo", "nope", "--input", "x"])[0] == 2
    assert _run(["verify", "--input", "x", "--mu", "1", "--exact", "--float"])[0] == 2


def test_bench_help_names_default_solver(capsys):
    assert _run(["bench", "--help"])[0] == 0
    text = "".join(capsys.readouterr().out.split())
    assert "defaultfind-in-policy" in text
    assert "confirmedbyBellman-Ford" in text
