import numpy as np
import pytest
from dqm.core.numeric import NumericPolicy
from dqm.domain.errors import NegativePotential
from dqm.infrastructure.computation_context import ComputationContext
from dqm.services.family_services import grid_potentials, potentials
from dqm.services.hamiltonian import (
    JacobiSystem, apply_A, apply_A_dagger, build, difference_equation_check, eigensystem, factorize, ground_state,
    nondegenerate_check,
    orthogonality_check, similarity_transform, spectrum_report,
)


def test_dqqk_spectrum(ctx: ComputationContext, dqqk) -> None:
    report = spectrum_report(ctx, *dqqk).unwrap()
    assert np.allclose(report["eigenvalues"], [0.0, 1.0, 3.0, 7.0], atol=1e-10)
    assert report["closed_form"] == [0.0, 1.0, 3.0, 7.0]
    assert report["N"] == 3
    assert not ctx.failed_checks()


def test_krawtchouk_spectrum_is_linear(ctx: ComputationContext, krawtchouk) -> None:
    report = spectrum_report(ctx, *krawtchouk).unwrap()
    assert np.allclose(report["eigenvalues"], np.arange(9), atol=1e-10)


def test_hamiltonian_factorizes(ctx: ComputationContext, racah) -> None:
    system = build(ctx, *racah).unwrap()
    A, A_dag = factorize(ctx, system).unwrap()
    assert np.allclose(A_dag @ A, system.matrix())
    es = eigensystem(ctx, system).unwrap()
    assert es.values[0] == 0.0
    assert not ctx.failed_checks()


def test_ground_state_annihilated(ctx: ComputationContext, q_racah) -> None:
    phi0 = ground_state(ctx, *q_racah).unwrap()
    assert phi0.positive
    assert not ctx.failed_checks()


def test_similarity_transform(ctx: ComputationContext, dqqk) -> None:
    system = build(ctx, *dqqk).unwrap()
    phi0 = ground_state(ctx, *dqqk).unwrap()
    Ht = similarity_transform(ctx, system, phi0).unwrap()
    assert np.allclose(np.asarray(Ht, dtype=np.float64).sum(axis=1), 0.0)
    assert not ctx.failed_checks()


def test_orthogonality_and_difference_equation(ctx: ComputationContext, dqqk, racah) -> None:
    for system in (dqqk, racah):
        assert orthogonality_check(ctx, *system).unwrap().passed
        for n in (1, 2):
            assert difference_equation_check(ctx, *system, n).unwrap().passed


def test_truncated_orthogonality(ctx: ComputationContext) -> None:
    from dqm.families.askey import Meixner
    from dqm.services.family_services import grid_for
    family = Meixner()
    lam = family.make_parameters()
    grid = grid_for(ctx, family, lam).unwrap()
    assert orthogonality_check(ctx, family, lam, grid).unwrap().passed
    report = spectrum_report(ctx, family, lam, grid).unwrap()
    assert report["compared_levels"] == 7
    assert not ctx.failed_checks()


def test_boundary_conditions(policy: NumericPolicy, krawtchouk) -> None:
    B, D = grid_potentials(*krawtchouk, policy)
    assert D[0] == 0 and B[-1] == 0
    assert np.all(B[:-1] > 0) and np.all(D[1:] > 0)


def test_negative_potential_is_reported(policy: NumericPolicy, dqqk) -> None:
    family, lam, grid = dqqk
    bad = family.make_parameters({"q": 0.5, "N": 3, "p": 4})
    with pytest.raises(NegativePotential):
        potentials(family, bad, grid, policy)


def test_operators_are_adjoint() -> None:
    B = np.array([2.0, 1.5, 0.0])
    D = np.array([0.0, 0.5, 1.0])
    u, v = np.array([1.0, -2.0, 0.5]), np.array([0.3, 0.1, -1.0])
    assert np.isclose(np.dot(apply_A(B, D, u), v), np.dot(u, apply_A_dagger(B, D, v)))


def test_jacobi_system_eigenvectors_have_positive_lead() -> None:
    system = JacobiSystem.from_potentials(np.array([1.0, 2.0, 0.0]), np.array([0.0, 1.0, 3.0]))
    es = system.eigensystem()
    assert np.all(es.vectors[0, :] > -1e-14)
    assert system.eigensystem() is es


def test_degenerate_spectrum_is_flagged(ctx: ComputationContext, krawtchouk) -> None:
    split = JacobiSystem.from_potentials(np.array([1.0, 0.0, 1.0, 0.0]), np.array([0.0, 1.0, 0.0, 1.0]))
    values = split.eigensystem().values
    assert np.allclose(values, [0.0, 0.0, 2.0, 2.0], atol=1e-12)
    assert not nondegenerate_check(ctx, "split", values).passed
    assert nondegenerate_check(ctx, "split", values[1:3]).passed
    spectrum_report(ctx, *krawtchouk).unwrap()
    gaps = [c for c in ctx.checks if c.name == "krawtchouk: spectrum non-degenerate"]
    assert len(gaps) == 1 and gaps[0].passed
