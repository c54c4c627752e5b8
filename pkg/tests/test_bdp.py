import numpy as np
from scipy import stats
from dqm.core.numeric import NumericPolicy
from dqm.domain.errors import NonHermitianSystem, OutOfDomain
from dqm.infrastructure.computation_context import ComputationContext
from dqm.services.adler import deletion_set, stepwise_deletion
from dqm.services.bdp import BirthDeathProcess, chapman_kolmogorov, decay_rates, stationary_distribution, transition_kernel
from dqm.services.hamiltonian import build_system


def krawtchouk_process(krawtchouk, policy: NumericPolicy) -> BirthDeathProcess:
    return BirthDeathProcess.from_system(build_system(*krawtchouk, policy), "krawtchouk")


def test_rate_matrix_rows_vanish(policy: NumericPolicy, krawtchouk) -> None:
    L = krawtchouk_process(krawtchouk, policy).rate_matrix()
    assert np.allclose(L.sum(axis=1), 0.0)
    assert np.all(np.diag(L) <= 0)


def test_kernel_is_stochastic(ctx: ComputationContext, policy: NumericPolicy, krawtchouk) -> None:
    process = krawtchouk_process(krawtchouk, policy)
    kernel = transition_kernel(ctx, process, 0.5).unwrap()
    assert np.allclose(kernel.matrix.sum(axis=1), 1.0)
    assert kernel.spectral_residual < 1e-8
    assert np.allclose(transition_kernel(ctx, process, 0.0).unwrap().matrix, np.eye(process.size))
    assert not ctx.failed_checks()


def test_negative_time(ctx: ComputationContext, policy: NumericPolicy, krawtchouk) -> None:
    err = transition_kernel(ctx, krawtchouk_process(krawtchouk, policy), -1.0).unwrap_err()
    assert isinstance(err, OutOfDomain)


def test_stationary_is_binomial(ctx: ComputationContext, policy: NumericPolicy, krawtchouk) -> None:
    pi = stationary_distribution(ctx, krawtchouk_process(krawtchouk, policy)).unwrap()
    assert np.allclose(pi, stats.binom.pmf(np.arange(9), 8, 0.4))
    assert not ctx.failed_checks()


def test_chapman_kolmogorov(ctx: ComputationContext, policy: NumericPolicy, racah) -> None:
    process = BirthDeathProcess.from_system(build_system(*racah, policy), "racah")
    assert chapman_kolmogorov(ctx, process).unwrap() < 1e-8
    assert not ctx.failed_checks()


def test_decay_rate_matches_gap(ctx: ComputationContext, policy: NumericPolicy, krawtchouk) -> None:
    decay = decay_rates(ctx, krawtchouk_process(krawtchouk, policy), 0).unwrap()
    assert np.isclose(decay["leading_rate"], 1.0)
    assert abs(decay["fitted_rate"] - decay["leading_rate"]) < 1e-2
    assert not ctx.failed_checks()


def test_decay_state_out_of_range(ctx: ComputationContext, policy: NumericPolicy, krawtchouk) -> None:
    assert isinstance(decay_rates(ctx, krawtchouk_process(krawtchouk, policy), 9).unwrap_err(), OutOfDomain)


def test_non_positive_rates_refused(ctx: ComputationContext) -> None:
    process = BirthDeathProcess(np.array([1.0, -1.0, 0.0]), np.array([0.0, 1.0, 1.0]))
    assert isinstance(transition_kernel(ctx, process, 1.0).unwrap_err(), NonHermitianSystem)
    assert isinstance(stationary_distribution(ctx, process).unwrap_err(), NonHermitianSystem)


def test_process_of_deleted_system(ctx: ComputationContext, policy: NumericPolicy, dqqk) -> None:
    deleted = stepwise_deletion(*dqqk, deletion_set([1, 2]), policy)
    process = BirthDeathProcess.from_system(deleted, "dqqk D={1,2}")
    assert process.size == 2
    kernel = transition_kernel(ctx, process, 0.1).unwrap()
    assert np.allclose(kernel.matrix.sum(axis=1), 1.0)
    # the only decay mode is E(3) - E(0)
    assert np.isclose(decay_rates(ctx, process, 0).unwrap()["leading_rate"], 7.0)
    assert not ctx.failed_checks()
