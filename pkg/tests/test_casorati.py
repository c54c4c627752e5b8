import math
import numpy as np
import pytest
from dqm.domain.errors import DegreeMismatch, DomainExceeded, ZeroPrefactor
from dqm.infrastructure.computation_context import ComputationContext
from dqm.services.casorati import (
    SampledFunction, casoratian, casoratian_at, casoratian_of_polynomials, casoratian_table, check_degree,
    check_product_rule, check_wronskian_identity, degree_report, det, eta_closure_check, fitted_degree,
    random_identity_trials,
)


def test_det_long_double_matches_lapack() -> None:
    rng = np.random.default_rng(7)
    M = rng.uniform(-1, 1, (5, 5))
    assert math.isclose(float(det(M.astype(np.longdouble))), float(np.linalg.det(M)), rel_tol=1e-12)
    assert det(np.zeros((0, 0))) == 1
    assert det(np.array([[0.0, 1.0, 2.0, 3.0]] * 4, dtype=np.longdouble)) == 0


def test_casoratian_of_one_and_x() -> None:
    one = SampledFunction(np.ones(6), -2)
    x = SampledFunction(np.arange(-2.0, 4.0), -2)
    table = casoratian_table([one, x], -2, 2)
    assert np.all(table.values == 1.0)
    assert casoratian_at([], 0) == 1
    assert casoratian([one, x], 0).unwrap() == 1.0


def test_window_never_extrapolates() -> None:
    f = SampledFunction(np.arange(3.0))
    with pytest.raises(DomainExceeded):
        f.window(2, 2)
    assert isinstance(casoratian([f, f, f], 1).unwrap_err(), DomainExceeded)


def test_identities_on_fixed_tables() -> None:
    fs = [SampledFunction(np.array([1.0, 2.0, 4.0, 7.0, 3.0])), SampledFunction(np.array([0.5, -1.0, 2.0, 1.0, 0.0]))]
    g = SampledFunction(np.array([2.0, 3.0, 5.0, 1.5, 1.0]))
    h = SampledFunction(np.array([-1.0, 0.5, 1.0, 2.0, 4.0]))
    assert check_product_rule(g, fs, 0).unwrap() < 1e-12
    assert check_wronskian_identity(fs, g, h, 0).unwrap() < 1e-12


def test_random_trials_reproducible(ctx: ComputationContext) -> None:
    first = random_identity_trials(ctx, np.random.default_rng(42), 1000).unwrap()
    second = random_identity_trials(ctx, np.random.default_rng(42), 1000).unwrap()
    assert first == second
    assert first["trials"] == 1000
    assert not ctx.failed_checks()


def test_polynomial_casoratian_normalized(ctx: ComputationContext, krawtchouk) -> None:
    family, lam, grid = krawtchouk
    W, normalized = casoratian_of_polynomials(ctx, family, lam, (1, 2), grid.x_max - 1).unwrap()
    assert W.shape == normalized.shape == (grid.x_max,)
    assert math.isclose(float(normalized[0]), 1.0, rel_tol=1e-12)
    assert not ctx.failed_checks()


def test_degree_of_polynomial_casoratian(ctx: ComputationContext, krawtchouk) -> None:
    family, lam, grid = krawtchouk
    assert degree_report(ctx, family, lam, (1, 2), grid.x_max - 1).unwrap() == 2
    assert degree_report(ctx, family, lam, (2,), grid.x_max - 1).unwrap() == 2
    assert isinstance(degree_report(ctx, family, lam, (1, 1), 5).unwrap_err(), ZeroPrefactor)


def test_degree_fit() -> None:
    t = np.linspace(0, 1, 8)
    assert fitted_degree(t, 1 + t ** 3) == 3
    with pytest.raises(DegreeMismatch):
        check_degree(t, 1 + t ** 3, 2)
    with pytest.raises(DegreeMismatch):
        check_degree(t[:4], t[:4], 2)


def test_eta_closure(ctx: ComputationContext, dqqk, racah) -> None:
    for family, lam, grid in (dqqk, racah):
        for alpha in (1, 2):
            assert eta_closure_check(ctx, family, lam, alpha, 6).unwrap() < 1e-10
    assert not ctx.failed_checks()
