import json
import math
import numpy as np
import pytest
from dqm.core.numeric import NumericPolicy, eigen_residual, relative_deviation
from dqm.core.option import Option
from dqm.core.params import GridSpec, ParameterSet, QPower, shift_parameters
from dqm.core.result import Result
from dqm.core.resultify import q, resultify, returns_result
from dqm.domain.errors import InvalidPolicy, OutOfDomain, ZeroDenominator
from dqm.domain.models import CheckReport
from dqm.infrastructure.computation_context import ComputationContext
from dqm.infrastructure.report_writer import SCHEMA, dumps, spectrum_frame, to_jsonable, write_csv, write_json
from dqm.infrastructure.settings import RunConfig, output_dir, policy_from_env


def test_result_ok_and_err() -> None:
    ok = Result.ok(3)
    assert ok.is_ok and ok.unwrap() == 3
    assert ok.map(lambda v: v + 1).unwrap() == 4
    err = Result.err(OutOfDomain("p", "p > 0"))
    assert err.is_err
    assert err.unwrap_or(7) == 7
    with pytest.raises(OutOfDomain):
        err.unwrap()


def test_result_err_may_carry_none() -> None:
    assert Result.err(None).is_err
    assert Result.ok(None).is_ok


def test_result_collect_and_chain() -> None:
    assert Result.collect([Result.ok(1), Result.ok(2)]).unwrap() == [1, 2]
    first = Result.collect([Result.ok(1), Result.err(ZeroDenominator(2)), Result.err(ZeroDenominator(3))])
    assert first.unwrap_err().x == 2
    assert first.describe_err().startswith("ZeroDenominator: ")
    assert Result.ok(2).and_then(lambda v: Result.ok(v * 5)).unwrap() == 10
    assert Result.err("stop").and_then(lambda v: Result.ok(v)).unwrap_err() == "stop"


def test_option_ok_or() -> None:
    assert Option.some(2).ok_or("missing").unwrap() == 2
    assert Option.from_nullable(None).is_none
    assert Option.none().ok_or("missing").unwrap_err() == "missing"


def test_option_closed_forms() -> None:
    assert Option.all([Option.some(1.0), Option.some(2.0)]).unwrap() == [1.0, 2.0]
    assert Option.all([Option.some(1.0), Option.none()]).is_none
    assert Option.some(0.5).unwrap_or_else(lambda: 1.0) == 0.5
    assert Option.none().unwrap_or_else(lambda: 1.0) == 1.0


def test_resultify_propagates_q() -> None:
    @resultify
    def chained(value: Result) -> int:
        return q(value) * 2

    assert chained(Result.ok(4)).unwrap() == 8
    assert isinstance(chained(Result.err(ZeroDenominator(1))).unwrap_err(), ZeroDenominator)


def test_returns_result_catches_raised_errors() -> None:
    @returns_result
    def divide(x: int) -> float:
        if x == 0:
            raise ZeroDenominator(0)
        return 1 / x

    assert divide(2).unwrap() == 0.5
    assert isinstance(divide(0).unwrap_err(), ZeroDenominator)


def test_policy_defaults() -> None:
    policy = NumericPolicy()
    assert policy.precision == "extended"
    assert policy.dtype is np.longdouble
    assert policy.identity_tol == 1e-10


def test_policy_rejects_tolerance_below_roundoff() -> None:
    with pytest.raises(InvalidPolicy):
        NumericPolicy(precision="double", identity_tol=1e-16)
    with pytest.raises(InvalidPolicy):
        NumericPolicy(precision="quad")
    with pytest.raises(InvalidPolicy):
        NumericPolicy(tail_tol=0.0)


def test_policy_overrides_skip_none() -> None:
    policy = NumericPolicy().with_overrides(precision=None, identity_tol=1e-9)
    assert policy.precision == "extended"
    assert policy.identity_tol == 1e-9


def test_check_report_non_finite_fails() -> None:
    assert not CheckReport("c", float("nan"), 1.0).passed
    assert CheckReport("c", 0.0, 0.0).passed


def test_context_run_maps_errors() -> None:
    ctx = ComputationContext()

    def op(policy: NumericPolicy) -> float:
        raise ZeroDenominator(3)

    assert isinstance(ctx.run(op).unwrap_err(), ZeroDenominator)
    ctx.check("identity", 1e-3)
    assert [c.name for c in ctx.failed_checks()] == ["identity"]


def test_shifts_compose_exactly() -> None:
    lam = ParameterSet({"a": QPower(1.0), "b": 2.0}, {"a": 1.0, "b": -1.0}, q=0.5)
    assert lam.shifted(2).shifted(1) == lam.shifted(3)
    assert shift_parameters(lam, 3) == lam.shifted(3)
    assert lam.shifted(3).exponent("a") == 4.0
    assert lam.shifted(3).value("b") == -1.0
    assert math.isclose(lam.shifted(1).value("a"), 0.25)
    with pytest.raises(ValueError):
        shift_parameters(lam, -1)


def test_parameter_set_rejects_bad_q() -> None:
    with pytest.raises(ValueError):
        ParameterSet({}, {}, q=1.5)


def test_truncated_grid_needs_cutoff() -> None:
    with pytest.raises(ValueError):
        GridSpec.truncated(5)
    grid = GridSpec.truncated(40, monitored=6)
    assert not grid.finite and grid.declared_infinite
    assert grid.size == 41


def test_relative_deviation_zero_for_equal() -> None:
    values = np.array([1.0, 2.0])
    assert relative_deviation(values, values) == 0.0
    assert math.isclose(relative_deviation(np.array([1.0, 2.2]), values), 0.2 / 2.2)


def test_eigen_residual_at_zero_energy() -> None:
    ground = np.array([4.33, 3.54])
    applied = np.array([0.0, 8.67e-19])
    assert relative_deviation(applied, 0.0 * ground) == 1.0
    assert eigen_residual(applied, 0.0, ground, 8.0) < 1e-16
    assert math.isclose(eigen_residual(np.array([2.0, 1.0]), 1.0, np.array([1.0, 1.0]), 0.5), 1.0)


# settings

def test_policy_from_env_then_overrides() -> None:
    env = {"DQM_PRECISION": "double", "DQM_IDENTITY_TOL": "1e-9"}
    policy = policy_from_env(env)
    assert policy.precision == "double" and policy.identity_tol == 1e-9
    assert policy_from_env(env, identity_tol=1e-8).identity_tol == 1e-8


def test_policy_from_env_rejects_non_numbers() -> None:
    with pytest.raises(InvalidPolicy):
        policy_from_env({"DQM_TAIL_TOL": "small"})


def test_output_dir_precedence(tmp_path) -> None:
    assert output_dir(tmp_path / "a", {"DQM_OUTPUT_DIR": str(tmp_path / "b")}) == tmp_path / "a"
    assert output_dir(None, {"DQM_OUTPUT_DIR": str(tmp_path / "b")}) == tmp_path / "b"
    assert output_dir(None, {}).name == "reports"


def test_run_config_round_trip() -> None:
    config = RunConfig.create("delete", "racah", {"b": 1.5, "a": 0.1}, levels=(1, 2), flags=("unsafe", "special"))
    assert config.parameters == (("a", 0.1), ("b", 1.5))
    assert RunConfig.from_args(config.to_args()) == config
    verify = RunConfig.create("verify-all", tolerances={"tolerance": 1e-16, "unused": None}, seed=42)
    assert verify.to_args() == ["verify-all", "--tolerance", "1e-16", "--seed", "42"]
    assert RunConfig.from_args(verify.to_args()) == verify


# report writer

def test_to_jsonable_nulls_non_finite() -> None:
    payload = {"values": np.array([1.0, np.nan, np.inf]), "flag": np.bool_(True), 3: np.int64(2)}
    assert to_jsonable(payload) == {"values": [1.0, None, None], "flag": True, "3": 2}


def test_dumps_envelope() -> None:
    doc = json.loads(dumps("spectrum", {"eigenvalues": [0.0, 1.0]}))
    assert doc["schema"] == SCHEMA
    assert doc["kind"] == "spectrum"


def test_write_json_and_csv(tmp_path) -> None:
    report = {"eigenvalues": [0.0, 1.0], "closed_form": [0.0, 1.0], "residual": [0.0, 1e-17]}
    path = write_json(tmp_path, "spectrum-x", "spectrum", report)
    assert json.loads(path.read_text())["eigenvalues"] == [0.0, 1.0]
    csv = write_csv(tmp_path, "spectrum-x", spectrum_frame(report))
    lines = csv.read_text().splitlines()
    assert lines[0] == "n,energy,closed_form,residual"
    assert lines[2] == "1,1,1,1.0000000000000001e-17"
