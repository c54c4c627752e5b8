import json
from pathlib import Path
from click.testing import CliRunner
from dqm.app.cli.cli import EXIT_DOMAIN, EXIT_INADMISSIBLE, EXIT_VERIFICATION, cli
from dqm.infrastructure.settings import RunConfig


DQQK = ["--family", "dual_quantum_q_krawtchouk", "--param", "p=10", "--param", "N=3"]


def invoke(*args: str):
    return CliRunner().invoke(cli, list(args))


def test_spectrum_json(output_dir: Path) -> None:
    result = invoke("spectrum", *DQQK)
    assert result.exit_code == 0, result.output
    doc = json.loads((output_dir / "spectrum-dual_quantum_q_krawtchouk.json").read_text())
    assert doc["kind"] == "spectrum"
    assert doc["passed"]
    assert doc["config"][:3] == ["spectrum", "--family", "dual_quantum_q_krawtchouk"]
    assert [round(e, 9) for e in doc["eigenvalues"]] == [0.0, 1.0, 3.0, 7.0]


def test_spectrum_csv_with_trailing_parameters(output_dir: Path) -> None:
    result = invoke("spectrum", "--family", "dual_quantum_q_krawtchouk", "--format", "csv", "--p", "10", "--N", "3")
    assert result.exit_code == 0, result.output
    lines = (output_dir / "spectrum-dual_quantum_q_krawtchouk.csv").read_text().splitlines()
    assert lines[0] == "n,energy,closed_form,residual"
    assert len(lines) == 5


def test_out_of_domain_parameter(output_dir: Path) -> None:
    result = invoke("spectrum", "--family", "dual_quantum_q_krawtchouk", "--param", "p=4")
    assert result.exit_code == EXIT_DOMAIN
    assert "Failed:" in result.output


def test_unknown_parameter(output_dir: Path) -> None:
    result = invoke("spectrum", "--family", "krawtchouk", "--param", "alpha=1")
    assert result.exit_code == EXIT_DOMAIN
    assert "no parameter alpha" in result.output


def test_malformed_parameter(output_dir: Path) -> None:
    assert invoke("spectrum", "--family", "krawtchouk", "--param", "p").exit_code == 2


def test_policy_rejected(output_dir: Path) -> None:
    result = invoke("--precision", "double", "--identity-tol", "1e-16", "families")
    assert result.exit_code == EXIT_DOMAIN


def test_delete_pair(output_dir: Path) -> None:
    result = invoke("delete", *DQQK, "--levels", "1,2", "--special")
    assert result.exit_code == 0, result.output
    assert "admissible=True mu=0" in result.output
    assert "deforming polynomial path vs generic path" in result.output
    doc = json.loads((output_dir / "delete-dual_quantum_q_krawtchouk-D1_2.json").read_text())
    assert doc["kind"] == "deletion"
    assert "--special" in doc["config"]


def test_delete_inadmissible(output_dir: Path) -> None:
    result = invoke("delete", "--family", "krawtchouk", "--levels", "2")
    assert result.exit_code == EXIT_INADMISSIBLE
    assert "not admissible" in result.output


def test_delete_bad_levels(output_dir: Path) -> None:
    assert invoke("delete", "--family", "krawtchouk", "--levels", "1;2").exit_code == EXIT_DOMAIN


def test_kernel_csv(output_dir: Path) -> None:
    result = invoke("kernel", "--family", "krawtchouk", "--t", "0.5", "--format", "csv")
    assert result.exit_code == 0, result.output
    lines = (output_dir / "kernel-krawtchouk.csv").read_text().splitlines()
    assert lines[0] == "x,y,p"
    assert len(lines) == 82


def test_kernel_json_records_config(output_dir: Path) -> None:
    result = invoke("kernel", "--family", "krawtchouk", "--t", "0.5")
    assert result.exit_code == 0, result.output
    doc = json.loads((output_dir / "kernel-krawtchouk.json").read_text())
    assert doc["kind"] == "transition-kernel"
    assert doc["config"] == ["kernel", "--family", "krawtchouk", "--t", "0.5", "--x", "0"]
    assert RunConfig.from_args(doc["config"]) == RunConfig.create("kernel", "krawtchouk", options={"t": 0.5, "x": 0})


def test_dual_table_csv(output_dir: Path) -> None:
    result = invoke("dual", *DQQK)
    assert result.exit_code == 0, result.output
    lines = (output_dir / "dual-dual_quantum_q_krawtchouk.csv").read_text().splitlines()
    assert lines[0] == "x,0,1,3,7"
    assert len(lines) == 5
    assert [line.split(",")[:2] for line in lines[1:]] == [["0", "1"], ["1", "1"], ["2", "1"], ["3", "1"]]


def test_dual_table_json(output_dir: Path) -> None:
    result = invoke("dual", *DQQK, "--format", "json")
    assert result.exit_code == 0, result.output
    doc = json.loads((output_dir / "dual-dual_quantum_q_krawtchouk.json").read_text())
    assert doc["kind"] == "dual-table"
    assert doc["passed"]
    assert doc["energies"] == [0.0, 1.0, 3.0, 7.0]
    assert doc["config"][-2:] == ["--param", "p=10.0"]


def test_verify_all_tight_tolerance(output_dir: Path) -> None:
    result = invoke("verify-all", "--family", "dual_quantum_q_krawtchouk", "--tolerance", "1e-16")
    assert result.exit_code == EXIT_VERIFICATION
    doc = json.loads((output_dir / "verify-all.json").read_text())
    assert not doc["passed"]
    assert doc["config"] == ["verify-all", "--tolerance", "1e-16", "--seed", "0"]


def test_verify_all_seed_reproducible(output_dir: Path) -> None:
    runs = []
    for _ in range(2):
        result = invoke("verify-all", "--family", "dual_quantum_q_krawtchouk", "--seed", "42")
        assert result.exit_code == 0, result.output
        runs.append(json.loads((output_dir / "verify-all.json").read_text()))
    assert runs[0]["seed"] == 42
    assert runs[0]["checks"] == runs[1]["checks"]


def test_families_table() -> None:
    result = invoke("families")
    assert result.exit_code == 0
    assert "q_racah" in result.output
    assert "xi formula only" in result.output


def test_families_json() -> None:
    result = invoke("families", "--json")
    assert result.exit_code == 0
    assert json.loads(result.output)["kind"] == "catalog"
