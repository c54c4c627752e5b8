"""The full invariant suite over the catalog defaults.

Every family runs the spectral, shape invariance, duality, Crum and
deforming polynomial checks; the finite families listed in BATTERY_FAMILIES
also run the deletion battery, the dual Christoffel checks and the birth and
death process checks. Service errors are recorded per case and the suite
continues with the next one.
"""
import logging
from typing import Iterable, Sequence
import numpy as np
from dqm.core.numeric import NumericPolicy
from dqm.core.params import GridSpec, ParameterSet
from dqm.core.result import Result
from dqm.core.resultify import q, resultify
from dqm.domain.errors import DqmError, UnknownFamily
from dqm.families.base import FamilySpec
from dqm.families.catalog import FamilyCatalog, default_catalog
from dqm.infrastructure.computation_context import ComputationContext
from dqm.infrastructure.uow import UnitOfWork
from dqm.services.adler import (
    adler_chain, barred_system_casoratian, deformed_polynomials, permutation_invariance, polynomial_fast_path,
    tracked_levels, validate_deletion,
)
from dqm.services.bdp import BirthDeathProcess, chapman_kolmogorov, decay_rates, stationary_distribution, transition_kernel
from dqm.services.casorati import eta_closure_check, random_identity_trials
from dqm.services.christoffel import christoffel_cross_check, deformed_duality_check, duality_check, weight_transformation_report
from dqm.services.crum import crum_chain, rodrigues_wavefunction, verify_shape_invariance
from dqm.services.family_services import grid_for, leading_coefficient, phi0_closed_form_check, shift_factors
from dqm.services.hamiltonian import build, orthogonality_check, spectrum_report
from dqm.services.special_deletion import (
    build_special, modified_polynomials, shift_operator_checks, special_norms, xi_ell, xi_recurrence_check,
)
from dqm.use_cases.common import attach_checks


logger = logging.getLogger(__name__)

DEFAULT_SEED = 0
CASORATI_TRIALS = 1000
CRUM_STEPS = 3
SHIFT_LEVELS = 3
XI_ELLS = (1, 2, 3, 4)
SPECIAL_ELLS = (2, 4)
ZERO_COUNT_SPAN = 6
BATTERY_FAMILIES = ("krawtchouk", "racah", "q_racah")
BATTERY_SETS: tuple[tuple[int, ...], ...] = ((1, 2), (2, 3), (1, 2, 3, 4))
ADMISSIBILITY_CASES: tuple[tuple[tuple[int, ...], bool, int], ...] = (
    ((1, 2), True, 0), ((2,), False, 0), ((0, 1, 2), True, 3), ((2, 3), True, 0), ((1, 2, 3), False, 0),
)
BDP_MAX_SIZE = 10
KERNEL_TIMES = (0.1, 1.0)


@resultify
def family_suite(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec) -> dict:
    q(spectrum_report(ctx, family, lam, grid))
    q(orthogonality_check(ctx, family, lam, grid))
    q(duality_check(ctx, family, lam, grid))
    q(verify_shape_invariance(ctx, family, lam, grid))
    q(eta_closure_check(ctx, family, lam, 1, min(grid.x_max, 20)))
    q(leading_coefficient(ctx, family, lam, 1))
    steps = min(CRUM_STEPS, grid.x_max)
    q(crum_chain(ctx, family, lam, grid, steps))
    for n in range(1, min(SHIFT_LEVELS, grid.x_max) + 1):
        q(rodrigues_wavefunction(ctx, family, lam, grid, n))
        q(shift_factors(ctx, family, lam, n, grid))
    if family.phi0_sq(np.arange(1.0), lam).is_some:
        q(phi0_closed_form_check(ctx, family, lam, grid))
    return {"family": family.id, "finite": grid.finite, "x_max": grid.x_max, "crum_steps": steps}


@resultify
def xi_suite(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec) -> dict:
    hi = grid.x_max
    ells = [ell for ell in XI_ELLS if ell < hi]
    for ell in ells:
        q(xi_ell(ctx, family, lam, ell, hi))
        if ell + 1 in ells:
            q(xi_recurrence_check(ctx, family, lam, ell, hi))
    built = []
    for ell in SPECIAL_ELLS:
        if grid.x_max - ell < 1:
            continue
        q(Result.collect(modified_polynomials(ctx, family, lam, grid, ell, n)
                         for n in range(ell + 1, min(ell + ZERO_COUNT_SPAN, grid.x_max) + 1)))
        if grid.finite:
            q(build_special(ctx, family, lam, grid, ell))
            q(shift_operator_checks(ctx, family, lam, grid, ell, ell + 1))
            q(special_norms(ctx, family, lam, grid, ell, ell + 1))
            built.append(ell)
    return {"family": family.id, "special": built}


@resultify
def deletion_suite(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec,
                   levels: Sequence[int]) -> dict:
    ds = q(validate_deletion(levels, grid.x_max))
    deleted = q(adler_chain(ctx, family, lam, grid, ds))
    q(barred_system_casoratian(ctx, family, lam, grid, ds))
    polynomial = q(polynomial_fast_path(ctx, family, lam, grid, ds))
    q(permutation_invariance(ctx, family, lam, grid, ds))
    surviving = [n for n in tracked_levels(grid, ds) if n not in ds.levels][:SHIFT_LEVELS * 2]
    q(deformed_polynomials(ctx, family, lam, grid, ds, surviving))
    q(deformed_duality_check(ctx, family, lam, polynomial))
    q(weight_transformation_report(ctx, family, lam, polynomial))
    q(christoffel_cross_check(ctx, family, lam, grid, polynomial))
    if ds.levels == tuple(range(1, ds.ell + 1)):
        q(build_special(ctx, family, lam, grid, ds.ell))
    if ds.levels == BATTERY_SETS[0] and deleted.x_max + 1 <= BDP_MAX_SIZE:
        q(process_suite(ctx, BirthDeathProcess.from_system(deleted, f"{family.id} D={list(ds.levels)}")))
    return {"family": family.id, "D": list(ds.levels)}


@resultify
def process_suite(ctx: ComputationContext, process: BirthDeathProcess) -> dict:
    for t in KERNEL_TIMES:
        q(transition_kernel(ctx, process, t))
    q(chapman_kolmogorov(ctx, process))
    q(stationary_distribution(ctx, process))
    return q(decay_rates(ctx, process))


def admissibility_suite(ctx: ComputationContext) -> None:
    for levels, admissible, mu in ADMISSIBILITY_CASES:
        ds = validate_deletion(levels).unwrap()
        wrong = ds.admissible != admissible or (admissible and ds.mu != mu)
        ctx.check(f"D={list(levels)} admissible={admissible}" + (f" mu={mu}" if admissible else ""),
                  1.0 if wrong else 0.0, 0.5)


class VerifyAll(UnitOfWork[dict, DqmError]):
    def __init__(self, policy: NumericPolicy | None = None, catalog: FamilyCatalog | None = None):
        super().__init__(policy)
        self._catalog = catalog or default_catalog()

    def execute(self, seed: int = DEFAULT_SEED, tolerance: float | None = None,
                families: Iterable[str] | None = None) -> Result[dict, DqmError]:
        def use_case(ctx: ComputationContext) -> Result[dict, DqmError]:
            errors: list[str] = []
            cases: dict[str, int] = {}

            def attempt(section: str, label: str, result: Result) -> None:
                cases[section] = cases.get(section, 0) + 1
                if result.is_err:
                    logger.warning("%s %s: %s", section, label, result.unwrap_err())
                    errors.append(f"{section} {label}: {result.describe_err()}")

            chosen = list(families) if families else self._catalog.ids()
            for family_id in chosen:
                family = q(self._catalog.lookup(family_id).ok_or(UnknownFamily(family_id)))
                lam = family.make_parameters()
                grid_res = grid_for(ctx, family, lam)
                if grid_res.is_err:
                    attempt("grid", family_id, grid_res)
                    continue
                grid = grid_res.unwrap()
                attempt("family", family_id, family_suite(ctx, family, lam, grid))
                attempt("xi", family_id, xi_suite(ctx, family, lam, grid))
                if family_id in BATTERY_FAMILIES and grid.finite:
                    for levels in BATTERY_SETS:
                        if max(levels) < grid.x_max:
                            attempt("deletion", f"{family_id} D={list(levels)}",
                                    deletion_suite(ctx, family, lam, grid, levels))
                if grid.finite and grid.x_max + 1 <= BDP_MAX_SIZE:
                    attempt("bdp", family_id, build(ctx, family, lam, grid).and_then(
                        lambda system: process_suite(ctx, BirthDeathProcess.from_system(system, family_id))))

            admissibility_suite(ctx)
            rng = np.random.default_rng(seed)
            attempt("casorati", f"seed={seed}", random_identity_trials(ctx, rng, CASORATI_TRIALS))

            report = attach_checks(ctx, {"seed": seed, "tolerance": tolerance, "families": chosen, "cases": cases},
                                   tolerance)
            report["errors"] = errors
            report["failed"] = report["failed"] + errors
            report["passed"] = not report["failed"]
            logger.debug("verify-all: %d checks, %d failed, %d errors", len(report["checks"]),
                         len(report["failed"]) - len(errors), len(errors))
            return Result.ok(report)
        return self._run(use_case)
