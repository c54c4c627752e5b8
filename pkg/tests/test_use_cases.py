import json
import numpy as np
from dqm.core.numeric import NumericPolicy
from dqm.infrastructure.computation_context import ComputationContext
from dqm.domain.errors import InadmissibleDeletion, OutOfDomain, UnknownFamily, UnknownParameter
from dqm.use_cases.deletion import Deletion, ValidateDeletion
from dqm.use_cases.families import ExportCatalog, ListFamilies
from dqm.use_cases.kernel import TransitionKernelReport
from dqm.use_cases.spectrum import Spectrum
from dqm.use_cases.verify import VerifyAll, xi_suite


DQQK = "dual_quantum_q_krawtchouk"
DQQK_PARAMS = {"N": 3, "p": 10}


def test_spectrum() -> None:
    result = Spectrum().execute(DQQK, DQQK_PARAMS)
    assert result.is_ok
    report = result.unwrap()
    assert report["passed"]
    assert np.allclose(report["eigenvalues"], [0.0, 1.0, 3.0, 7.0], atol=1e-10)
    assert report["checks"]


def test_spectrum_unknown_family() -> None:
    result = Spectrum().execute("legendre")
    assert result.is_err
    assert isinstance(result.unwrap_err(), UnknownFamily)


def test_spectrum_unknown_parameter() -> None:
    assert isinstance(Spectrum().execute("krawtchouk", {"alpha": 1.0}).unwrap_err(), UnknownParameter)


def test_spectrum_out_of_domain() -> None:
    err = Spectrum().execute(DQQK, {"N": 3, "p": 4}).unwrap_err()
    assert isinstance(err, OutOfDomain)
    assert err.parameter == "p"


def test_validate_deletion() -> None:
    assert ValidateDeletion().execute([0, 1, 2]).unwrap().mu == 3
    assert not ValidateDeletion().execute([2]).unwrap().admissible


def test_deletion_pair() -> None:
    report = Deletion().execute(DQQK, DQQK_PARAMS, (1, 2)).unwrap()
    assert report["passed"]
    assert np.allclose(report["spectrum_after"], [0.0, 7.0], atol=1e-9)
    assert report["christoffel"]["duality"]["duality_deviation"] < 1e-8
    assert report["paths"]["deformed_degrees"]["P"] == 2


def test_deletion_inadmissible() -> None:
    result = Deletion().execute("krawtchouk", None, (2,))
    assert isinstance(result.unwrap_err(), InadmissibleDeletion)


def test_deletion_special_path() -> None:
    report = Deletion().execute(DQQK, DQQK_PARAMS, (1, 2), special=True).unwrap()
    assert report["passed"]
    assert report["special"]["generic_agreement"] < 1e-8


def test_special_path_needs_lowest_block() -> None:
    assert isinstance(Deletion().execute("krawtchouk", None, (2, 3), special=True).unwrap_err(), OutOfDomain)


def test_deletion_of_lowest_levels_skips_christoffel() -> None:
    report = Deletion().execute("krawtchouk", None, (0, 1)).unwrap()
    assert report["hermiticity"]["passed"]
    assert np.allclose(report["spectrum_after"], np.arange(2.0, 9.0), atol=1e-9)
    assert report["mu"] == 2
    assert "christoffel" not in report


def test_transition_kernel() -> None:
    report = TransitionKernelReport().execute("krawtchouk", None, 0.5).unwrap()
    assert report["passed"]
    assert report["kernel"].shape == (9, 9)
    assert np.allclose(report["stationary"].sum(), 1.0)


def test_transition_kernel_of_deleted_system() -> None:
    report = TransitionKernelReport().execute(DQQK, DQQK_PARAMS, 0.2, (1, 2)).unwrap()
    assert report["passed"]
    assert report["D"] == [1, 2]
    assert np.isclose(report["decay"]["leading_rate"], 7.0)


def test_transition_kernel_inadmissible() -> None:
    assert isinstance(TransitionKernelReport().execute("krawtchouk", None, 1.0, (2,)).unwrap_err(), InadmissibleDeletion)


def test_list_families() -> None:
    rows = ListFamilies().execute().unwrap()
    assert len(rows) == 25
    assert sum(r["status"] == "implemented" for r in rows) == 9


def test_export_catalog() -> None:
    doc = json.loads(ExportCatalog().execute().unwrap())
    assert {f["id"] for f in doc["families"]} >= {"racah", "q_racah"}


def test_verify_all_single_family() -> None:
    report = VerifyAll().execute(seed=42, families=["krawtchouk"]).unwrap()
    assert report["errors"] == []
    assert report["passed"], report["failed"]
    assert report["cases"]["deletion"] == 3
    assert report["cases"]["bdp"] == 1


def test_verify_all_is_reproducible() -> None:
    first = VerifyAll().execute(seed=42, families=["dual_quantum_q_krawtchouk"]).unwrap()
    second = VerifyAll().execute(seed=42, families=["dual_quantum_q_krawtchouk"]).unwrap()
    assert first["checks"] == second["checks"]


def test_verify_all_tight_tolerance_fails() -> None:
    report = VerifyAll(NumericPolicy()).execute(tolerance=1e-16, families=["dual_quantum_q_krawtchouk"]).unwrap()
    assert not report["passed"]
    assert report["tolerance"] == 1e-16


def test_verify_all_unknown_family() -> None:
    assert isinstance(VerifyAll().execute(families=["legendre"]).unwrap_err(), UnknownFamily)


def test_xi_suite_stops_below_grid_size(ctx: ComputationContext, dqqk) -> None:
    report = xi_suite(ctx, *dqqk).unwrap()
    assert report["special"] == [2]
    assert not any("xi_3" in c.name or "xi_4" in c.name for c in ctx.checks)
    assert not ctx.failed_checks()
