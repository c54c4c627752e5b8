import numpy as np
import pytest
from dqm.domain.errors import InadmissibleDeletion, OutOfDomain
from dqm.infrastructure.computation_context import ComputationContext
from dqm.services.adler import (
    adler_chain, barred_system_casoratian, casoratian_deletion, deformed_degrees, deformed_polynomials, deletion_report,
    deletion_set, hermiticity_report, is_hermitian, norm_factors, permutation_invariance, polynomial_deletion,
    polynomial_fast_path, validate_deletion,
)


def test_admissible_sets() -> None:
    pair = validate_deletion([1, 2]).unwrap()
    assert pair.admissible and pair.mu == 0 and not pair.contains_zero
    single = validate_deletion([2]).unwrap()
    assert not single.admissible
    low = validate_deletion([0, 1, 2]).unwrap()
    assert low.admissible and low.mu == 3 and low.contains_zero
    assert validate_deletion([]).unwrap().mu == 0


def test_order_is_kept_but_levels_sorted() -> None:
    ds = deletion_set([4, 3])
    assert ds.levels == (3, 4)
    assert ds.applied_order() == (4, 3)
    assert ds.weight == 7 and ds.ell == 2


@pytest.mark.parametrize("levels", [[-1], [1, 1], [9]])
def test_bad_deletion_sets(levels: list[int]) -> None:
    assert isinstance(validate_deletion(levels, n_max=8).unwrap_err(), OutOfDomain)


def test_inadmissible_set_refused(ctx: ComputationContext, krawtchouk) -> None:
    err = adler_chain(ctx, *krawtchouk, deletion_set([2])).unwrap_err()
    assert isinstance(err, InadmissibleDeletion)


def test_dqqk_pair_deletion(ctx: ComputationContext, dqqk) -> None:
    report = deletion_report(ctx, *dqqk, deletion_set([1, 2])).unwrap()
    assert report["admissible"] and report["mu"] == 0
    assert np.allclose(report["spectrum_after"], [0.0, 7.0], atol=1e-9)
    assert report["expected_after"] == [0.0, 7.0]
    assert report["hermiticity"]["passed"]
    assert not ctx.failed_checks()


def test_stepwise_system(ctx: ComputationContext, krawtchouk) -> None:
    family, lam, grid = krawtchouk
    out = adler_chain(ctx, family, lam, grid, deletion_set([1, 2])).unwrap()
    assert out.x_max == grid.x_max - 2
    assert 1 not in out.phis and 2 not in out.phis
    assert is_hermitian(out)
    factors = norm_factors(family, lam, out)
    assert factors[0] == 2.0
    assert factors[3] == 2.0
    assert not ctx.failed_checks()


def test_deleting_lowest_levels_matches_shifted_ground(ctx: ComputationContext, krawtchouk) -> None:
    out = adler_chain(ctx, *krawtchouk, deletion_set([0, 1])).unwrap()
    assert out.mu == 2
    assert min(out.energies.values()) == 2.0
    assert not ctx.failed_checks()


def test_casoratian_and_polynomial_paths_agree(ctx: ComputationContext, krawtchouk, racah) -> None:
    for system in (krawtchouk, racah):
        ds = deletion_set([2, 3])
        barred = barred_system_casoratian(ctx, *system, ds).unwrap()
        fast = polynomial_fast_path(ctx, *system, ds).unwrap()
        assert barred.path != fast.path
        assert np.allclose(np.asarray(barred.B, dtype=np.float64), np.asarray(fast.B, dtype=np.float64))
    assert not ctx.failed_checks()


def test_order_of_deletion_irrelevant(ctx: ComputationContext, q_racah) -> None:
    for levels in ([1, 2], [2, 3]):
        assert permutation_invariance(ctx, *q_racah, deletion_set(levels)).unwrap() < 1e-8
    assert not ctx.failed_checks()


def test_deformed_degrees() -> None:
    ds = deletion_set([1, 2])
    assert deformed_degrees(ds, 0) == (2, 0, 0)
    assert deformed_degrees(ds, 3) == (2, 0, 3)


def test_deformed_polynomials(ctx: ComputationContext, krawtchouk) -> None:
    result = deformed_polynomials(ctx, *krawtchouk, deletion_set([1, 2]), levels=[0, 3]).unwrap()
    assert result["degrees"] == {"P": 2, "P_mu": 0, "P_0": 0, "P_3": 3}
    assert result["norm_factors"] == {0: 2.0, 3: 2.0}
    assert not ctx.failed_checks()


def test_unsafe_inadmissible_is_not_hermitian(ctx: ComputationContext, krawtchouk) -> None:
    out = adler_chain(ctx, *krawtchouk, deletion_set([2]), unsafe=True)
    if out.is_ok:
        assert not hermiticity_report(ctx, out.unwrap()).unwrap()["passed"]
        assert ctx.failed_checks()
    else:
        assert not isinstance(out.unwrap_err(), InadmissibleDeletion)


def test_unsafe_determinant_paths_build_signed_systems(ctx: ComputationContext, krawtchouk) -> None:
    family, lam, grid = krawtchouk
    single = deletion_set([2])
    with pytest.raises(InadmissibleDeletion):
        casoratian_deletion(family, lam, grid, single, ctx.policy)
    for build in (casoratian_deletion, polynomial_deletion):
        out = build(family, lam, grid, single, ctx.policy, unsafe=True)
        assert np.any(out.tables["gauge_sign"] < 0)
        assert not is_hermitian(out)
        assert all(np.all(np.isfinite(np.asarray(v, dtype=np.float64))) for v in out.phis.values())
    admissible = casoratian_deletion(family, lam, grid, deletion_set([1, 2]), ctx.policy)
    assert np.all(admissible.tables["gauge_sign"] > 0)
