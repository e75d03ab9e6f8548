import csv
import json

import pytest
from click.testing import CliRunner

from qxot.core.config import settings
from qxot.main import cli


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def invoke(runner, tmp_path):
    def run(*args: str):
        return runner.invoke(cli, [*args, "--output-dir", str(tmp_path)])

    return run


def test_xot_single_run(invoke, tmp_path):
    result = invoke("xot", "--variant", "p1", "--x", "10", "--y", "11", "--seed", "7")
    assert result.exit_code == 0, result.output
    assert "output 1" in result.output
    assert "expected 1 (ok)" in result.output
    path = tmp_path / "xot_p1_seed7.json"
    first = path.read_bytes()
    transcript = json.loads(first)
    assert transcript["output"] == 1
    assert transcript["variant"] == "p1"
    assert transcript["seed"] == 7
    assert transcript["alice"]["x"] == [1, 0]
    assert set(transcript["alice"]["keys"]) >= {"s1", "s2", "s3"}
    assert transcript["bob"]["y"] == [1, 1]
    assert set(transcript["bob"]["keys"]) >= {"k0", "k1"}
    assert [m["dir"] for m in transcript["messages"]][0] == "A->B"
    assert {"dir", "kind", "payload"} == set(transcript["messages"][0])
    assert "x" not in transcript and "alice_keys" not in transcript

    invoke("xot", "--variant", "p1", "--x", "10", "--y", "11", "--seed", "7")
    assert path.read_bytes() == first


def test_xot_zero_input_on_returned_variant(invoke):
    result = invoke("xot", "--variant", "p2b", "--x", "00", "--y", "11", "--seed", "1")
    assert result.exit_code == 0, result.output
    assert "output 0" in result.output


def test_xot_many_runs(invoke, tmp_path):
    result = invoke("xot", "--x", "11", "--y", "01", "--seed", "3", "--runs", "3", "--jobs", "1")
    assert result.exit_code == 0, result.output
    assert "runs 3 failures 0" in result.output
    summary = json.loads((tmp_path / "xot_p1_seed3_runs3.json").read_text())
    assert summary["outputs"] == [1, 1, 1]


@pytest.mark.parametrize(
    "args",
    [
        ("xot", "--x", "1a", "--y", "11", "--seed", "1"),
        ("xot", "--x", "101", "--y", "11", "--seed", "1"),
        ("xot", "--x", "10", "--y", "11", "--seed", "-1"),
        ("xot", "--x", "10", "--y", "11", "--seed", "1", "--runs", "0"),
        ("xot", "--x", "10", "--y", "11", "--seed", "1", "--tolerance", "BOGUS=1"),
        ("linear", "--x", "1101", "--y", "10", "--seed", "1"),
        ("linear", "--variant", "p2b", "--he", "--x", "11", "--y", "11", "--seed", "1"),
    ],
)
def test_usage_errors_exit_with_two(invoke, args):
    assert invoke(*args).exit_code == 2


def test_missing_seed(invoke, no_env_seed):
    result = invoke("xot", "--x", "10", "--y", "11")
    assert result.exit_code == 2
    assert "seed" in result.output


def test_config_file_under_flags(invoke, tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"variant": "p2", "seed": 4}))
    assert invoke("xot", "--config", str(config), "--x", "11", "--y", "01").exit_code == 0
    assert (tmp_path / "xot_p2_seed4.json").is_file()
    assert invoke("xot", "--config", str(config), "--variant", "p1", "--x", "11", "--y", "01").exit_code == 0
    assert (tmp_path / "xot_p1_seed4.json").is_file()


def test_linear_plain_and_homomorphic(invoke, tmp_path):
    result = invoke("linear", "--x", "1101", "--y", "1011", "--seed", "3")
    assert result.exit_code == 0, result.output
    assert "output 0" in result.output

    result = invoke("linear", "--x", "1101", "--y", "1011", "--seed", "3", "--he")
    assert result.exit_code == 0, result.output
    assert "output 0" in result.output
    assert "plaintext shadow ok" in result.output
    record = json.loads((tmp_path / "linear_p1_he_seed3.json").read_text())
    assert record["correct"] is True


def test_linear_with_shares(invoke):
    result = invoke("linear", "--x", "111001", "--y", "101101", "--seed", "9", "--y-shares", "3")
    assert result.exit_code == 0, result.output
    assert "output 0" in result.output


def test_attack_reports_certain_success(invoke, tmp_path):
    result = invoke("attack", "--cheat-alice", "--target", "xor", "--variant", "p1")
    assert result.exit_code == 0, result.output
    assert "avg success 1.000000000" in result.output
    assert "undetectability distance 0.000000000" in result.output

    result = invoke("attack", "--honest", "--target", "y1")
    assert "avg success 0.500000000" in result.output


def test_attack_partial_needs_the_cheat(invoke):
    assert invoke("attack", "--honest", "--partial").exit_code == 2


def test_leakage_rows_stay_under_one_bit(invoke, tmp_path):
    result = invoke("leakage", "--n", "2", "--prior", "uniform", "--scenario-id", "u2")
    assert result.exit_code == 0, result.output
    with (tmp_path / "leakage_u2.csv").open() as handle:
        rows = list(csv.DictReader(handle))
    assert [row["strategy"] for row in rows] == ["Z_basis", "Bell_guess", "optimal_holevo"]
    assert all(float(row["bits"]) <= 1.0 + 1e-9 for row in rows)
    bundle = json.loads((tmp_path / "leakage_u2.json").read_text())
    assert bundle["reports"][0]["n"] == 2


def test_leakage_over_the_cap(invoke):
    assert invoke("leakage", "--n", "4").exit_code == 3


def test_qc_demo_circuit(invoke, demo_circuit, tmp_path):
    result = invoke("qc", "--circuit", str(demo_circuit), "--seed", "5")
    assert result.exit_code == 0, result.output
    assert "fidelity 1.000000000" in result.output
    log = json.loads((tmp_path / "qc_demo_seed5.json").read_text())
    assert len(log["stages"]) == 2

    result = invoke("qc", "--circuit", str(demo_circuit), "--seed", "5", "--input", "random", "--batch")
    assert result.exit_code == 0, result.output


def test_qc_bad_input(invoke, demo_circuit):
    assert invoke("qc", "--circuit", str(demo_circuit), "--seed", "5", "--input", "012").exit_code == 2


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert "qxot" in result.output


def test_tolerance_override_lasts_one_invocation(runner, tmp_path):
    before = settings.FIDELITY_ATOL, settings.EIGEN_FLOOR
    args = ["--x", "10", "--y", "11", "--seed", "2", "--output-dir", str(tmp_path)]
    tolerances = ["--tolerance", "FIDELITY_ATOL=1e-6", "--tolerance", "EIGEN_FLOOR=1e-8"]
    assert runner.invoke(cli, ["xot", *args, *tolerances]).exit_code == 0
    assert (settings.FIDELITY_ATOL, settings.EIGEN_FLOOR) == before
    assert runner.invoke(cli, ["xot", "--x", "101", *args[2:], *tolerances]).exit_code == 2
    assert (settings.FIDELITY_ATOL, settings.EIGEN_FLOOR) == before
