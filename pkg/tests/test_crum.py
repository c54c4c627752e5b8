import dataclasses
import math
import numpy as np
import pytest
from dqm.domain.errors import NonPositivePotential, OutOfDomain
from dqm.infrastructure.computation_context import ComputationContext
from dqm.services.crum import (
    affine_check, chain_report, crum_chain, crum_determinant_eigenfunction, crum_polynomial_tables, crum_step,
    crum_step_values, initial_state, rodrigues_wavefunction, verify_shape_invariance,
)
from dqm.services.family_services import grid_for
from dqm.services.hamiltonian import apply_A


def test_two_steps_delete_two_levels(ctx: ComputationContext, krawtchouk) -> None:
    family, lam, grid = krawtchouk
    state = crum_chain(ctx, family, lam, grid, 2).unwrap()
    assert state.s == 2
    assert state.x_max == grid.x_max - 2
    assert math.isclose(state.energy_offset, 2.0, rel_tol=1e-9)
    assert min(state.phis) == 2
    assert len(state.history) == 2
    assert not ctx.failed_checks()


def test_chain_on_q_family(ctx: ComputationContext, dqqk) -> None:
    state = crum_chain(ctx, *dqqk, 2).unwrap()
    assert math.isclose(state.energy_offset, 3.0, rel_tol=1e-9)
    assert not ctx.failed_checks()


def test_single_step(ctx: ComputationContext, racah) -> None:
    family, lam, grid = racah
    start = initial_state(family, lam, grid, ctx.policy)
    after = crum_step(ctx, start).unwrap()
    assert after.s == 1
    assert np.all(after.B[:-1] > 0) and np.all(after.D[1:] > 0)
    assert not ctx.failed_checks()


def test_chain_report(ctx: ComputationContext, krawtchouk) -> None:
    report = chain_report(ctx, *krawtchouk, 3).unwrap()
    assert [step["s"] for step in report["steps"]] == [0, 1, 2, 3]
    assert all(step["max_residual"] < 1e-8 for step in report["steps"])


def test_too_many_steps(ctx: ComputationContext, krawtchouk) -> None:
    family, lam, grid = krawtchouk
    err = crum_chain(ctx, family, lam, grid, grid.x_max + 5).unwrap_err()
    assert isinstance(err, OutOfDomain)
    assert err.parameter == "s"


def test_shape_invariance(ctx: ComputationContext, krawtchouk, dqqk, racah) -> None:
    for system in (krawtchouk, dqqk, racah):
        assert verify_shape_invariance(ctx, *system).unwrap()["passed"]
    assert not ctx.failed_checks()


def test_shape_invariance_detects_perturbation(ctx: ComputationContext, krawtchouk) -> None:
    report = verify_shape_invariance(ctx, *krawtchouk, perturbation=0.1).unwrap()
    assert not report["passed"]
    assert ctx.failed_checks()


def test_determinant_formula(ctx: ComputationContext, krawtchouk) -> None:
    family, lam, grid = krawtchouk
    phi = crum_determinant_eigenfunction(ctx, family, lam, grid, 2, 4).unwrap()
    assert phi.shape == (grid.x_max - 1,)
    assert not ctx.failed_checks()
    assert isinstance(crum_determinant_eigenfunction(ctx, family, lam, grid, 3, 1).unwrap_err(), OutOfDomain)


def test_rodrigues(ctx: ComputationContext, krawtchouk, dqqk) -> None:
    for system in (krawtchouk, dqqk):
        assert rodrigues_wavefunction(ctx, *system, 2).unwrap().values.shape == (system[2].x_max + 1,)
    assert not ctx.failed_checks()


def test_polynomial_tables(ctx: ComputationContext, krawtchouk) -> None:
    family, lam, grid = krawtchouk
    assert affine_check(family, lam, grid, ctx.policy.dtype) < 1e-8
    tables = crum_polynomial_tables(ctx, family, lam, grid, 2, (3, 4)).unwrap()
    assert set(tables["polynomials"]) == {2, 3, 4}
    assert np.allclose(np.asarray(tables["polynomials"][2], dtype=np.float64), 1.0)
    assert not ctx.failed_checks()


def test_sign_flip_past_trusted_points_cuts_the_system(ctx: ComputationContext, krawtchouk) -> None:
    family, lam, grid = krawtchouk
    start = initial_state(family, lam, grid, ctx.policy)
    X = start.x_max
    phi1 = start.phis[1].copy()
    g = apply_A(start.B, start.D, phi1)
    phi1[X] += 2 * g[X - 1] / np.sqrt(start.D[X])
    tampered = dataclasses.replace(start, phis={**start.phis, 1: phi1})
    with pytest.raises(NonPositivePotential):
        crum_step_values(tampered)
    with pytest.raises(NonPositivePotential):
        crum_step_values(tampered, trusted=X)
    after = crum_step_values(tampered, trusted=2)
    assert after.x_max == X - 2
    assert np.all(after.B[:-1] > 0) and np.all(after.D[1:] > 0)
    assert all(len(v) == X - 1 for v in after.phis.values())


def test_truncated_q_families_run_the_crum_suite(ctx: ComputationContext, dlqj, daqc) -> None:
    for family, lam in (dlqj, daqc):
        grid = grid_for(ctx, family, lam).unwrap()
        assert verify_shape_invariance(ctx, family, lam, grid).is_ok
        state = crum_chain(ctx, family, lam, grid, 3).unwrap()
        assert state.s == 3
        assert state.x_max <= grid.x_max - 3
        assert np.all(state.B[:-1] > 0) and np.all(state.D[1:] > 0)
        for n in range(1, 4):
            assert rodrigues_wavefunction(ctx, family, lam, grid, n).is_ok
