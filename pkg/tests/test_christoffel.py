import math
import numpy as np
import pytest
from numpy.polynomial import Polynomial
from dqm.core.numeric import NumericPolicy
from dqm.domain.errors import NodeZero, PreconditionViolated, ZeroLeadingCoefficient
from dqm.infrastructure.computation_context import ComputationContext
from dqm.services.adler import adler_chain, deletion_set, polynomial_fast_path
from dqm.services.christoffel import (
    christoffel_cross_check, deformed_duality_check, deformed_weights, dual_polynomials, dual_reach, dual_recurrence,
    duality_check, elementary_christoffel, elementary_christoffel_step, multiple_christoffel, p_factor,
    run_dual_recurrence, weight_transformation_report,
)
from dqm.services.family_services import grid_for, grid_potentials, ground_state_values, lookup_family


@pytest.fixture
def dqqk_pair(ctx: ComputationContext, dqqk):
    family, lam, grid = dqqk
    return family, lam, grid, polynomial_fast_path(ctx, family, lam, grid, deletion_set([1, 2])).unwrap()


def test_p_factor(dqqk) -> None:
    family, lam, _ = dqqk
    assert math.isclose(p_factor(family, lam, 3, [1, 2]), 8.0)
    assert p_factor(family, lam, 0, [1, 2]) == 1.0


def test_deformed_weights(policy: NumericPolicy, dqqk_pair) -> None:
    family, lam, grid, ds = dqqk_pair
    weights = deformed_weights(family, lam, ds, policy)
    assert set(weights) == {0, 3}
    d0_sq = 1 / float(np.sum(ground_state_values(family, lam, grid.x_max, np.float64) ** 2))
    assert math.isclose(weights[0], 3 * d0_sq, rel_tol=1e-8)
    # divided by prod E(d)^2 = 9
    assert math.isclose(weights[0] / 9, d0_sq / 3, rel_tol=1e-8)


def test_deformed_duality(ctx: ComputationContext, dqqk_pair) -> None:
    family, lam, _, ds = dqqk_pair
    report = deformed_duality_check(ctx, family, lam, ds).unwrap()
    assert report["p"][0] == 1.0
    assert math.isclose(report["p"][3], 8.0)
    assert report["duality_deviation"] < 1e-8
    assert report["orthogonality_deviation"] < 1e-8
    assert not ctx.failed_checks()


def test_weight_transformation(ctx: ComputationContext, dqqk_pair) -> None:
    family, lam, _, ds = dqqk_pair
    report = weight_transformation_report(ctx, family, lam, ds).unwrap()
    assert report["positive"]
    assert report["factors"] == {0: 3.0, 3: 24.0}
    assert not ctx.failed_checks()


def test_deletion_containing_ground_level(ctx: ComputationContext, krawtchouk) -> None:
    family, lam, grid = krawtchouk
    ds = adler_chain(ctx, family, lam, grid, deletion_set([0, 1])).unwrap()
    assert isinstance(deformed_duality_check(ctx, family, lam, ds).unwrap_err(), PreconditionViolated)
    assert isinstance(christoffel_cross_check(ctx, family, lam, grid, ds).unwrap_err(), PreconditionViolated)


def test_cross_check_against_elementary_steps(ctx: ComputationContext, dqqk_pair, krawtchouk) -> None:
    family, lam, grid, ds = dqqk_pair
    assert christoffel_cross_check(ctx, family, lam, grid, ds).unwrap() < 1e-6
    k_family, k_lam, k_grid = krawtchouk
    k_ds = polynomial_fast_path(ctx, k_family, k_lam, k_grid, deletion_set([1, 2])).unwrap()
    assert christoffel_cross_check(ctx, k_family, k_lam, k_grid, k_ds).unwrap() < 1e-6
    assert not ctx.failed_checks()


def test_duality(ctx: ComputationContext, dqqk, racah, q_racah) -> None:
    for system in (dqqk, racah, q_racah):
        assert duality_check(ctx, *system).unwrap() < 1e-8
    assert not ctx.failed_checks()


def test_elementary_step() -> None:
    polys = [Polynomial([1.0]), Polynomial([0.0, 1.0]), Polynomial([0.0, 0.0, 1.0])]
    kernels = elementary_christoffel_step(polys, 2.0)
    assert len(kernels) == 2
    assert np.allclose(kernels[0].coef, [1.0])
    assert np.allclose(kernels[1].coef, [0.0, 1.0])
    assert len(multiple_christoffel(polys, [2.0, 3.0])) == 1


def test_node_at_zero_of_polynomial(ctx: ComputationContext) -> None:
    polys = [Polynomial([-1.0, 1.0]), Polynomial([0.0, 0.0, 1.0])]
    with pytest.raises(NodeZero):
        elementary_christoffel_step(polys, 1.0)
    assert isinstance(elementary_christoffel(ctx, polys, 1.0, 0).unwrap_err(), NodeZero)


def test_dual_recurrence_matches_polynomials(krawtchouk, policy: NumericPolicy) -> None:
    family, lam, grid = krawtchouk
    B, D = grid_potentials(family, lam, grid, policy)
    E = np.array([0.0, 1.5, 4.0])
    table = run_dual_recurrence(np.asarray(B, dtype=np.float64), np.asarray(D, dtype=np.float64), E, grid.x_max)
    polys = dual_polynomials(B, D, grid.x_max)
    assert np.allclose(table[:, 0], 1.0)
    for x in range(grid.x_max + 1):
        assert np.allclose(polys[x](E), table[x])


def test_dual_recurrence_needs_positive_b() -> None:
    with pytest.raises(ZeroLeadingCoefficient):
        run_dual_recurrence(np.array([0.0, 1.0]), np.array([0.0, 1.0]), np.array([1.0]), 1)


def test_dual_table_is_normalized(ctx: ComputationContext, krawtchouk) -> None:
    family, lam, grid = krawtchouk
    B, D = grid_potentials(family, lam, grid, ctx.policy)
    table = dual_recurrence(ctx, B, D, [0.0, 1.0, 2.0]).unwrap()
    assert table.x_max == grid.x_max
    assert not table.deformed
    assert np.allclose(np.asarray(table.values[:, 0], dtype=np.float64), 1.0)
    assert np.allclose(np.asarray(table.values[0], dtype=np.float64), 1.0)


def test_duality_on_truncated_grids(ctx: ComputationContext) -> None:
    for family_id in ("meixner", "charlier", "dual_alternative_q_charlier"):
        family = lookup_family(family_id).unwrap()
        lam = family.make_parameters()
        grid = grid_for(ctx, family, lam).unwrap()
        B, D = grid_potentials(family, lam, grid, ctx.policy)
        assert 0 < dual_reach(B, D, grid, ctx.policy) < (grid.x_max + 1) // 2
        assert duality_check(ctx, family, lam, grid).unwrap() < ctx.policy.identity_tol
    assert not ctx.failed_checks()
