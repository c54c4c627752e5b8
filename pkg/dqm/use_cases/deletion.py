import logging
from typing import Iterable, Mapping
from dqm.core.result import Result
from dqm.core.resultify import q
from dqm.domain.errors import DqmError, InadmissibleDeletion, OutOfDomain
from dqm.domain.models import DeletionSet
from dqm.infrastructure.computation_context import ComputationContext
from dqm.infrastructure.uow import UnitOfWork
from dqm.services.adler import (
    barred_system_casoratian, deformed_polynomials, deletion_report, permutation_invariance, polynomial_fast_path,
    tracked_levels, validate_deletion,
)
from dqm.services.christoffel import christoffel_cross_check, deformed_duality_check, weight_transformation_report
from dqm.services.special_deletion import special_report
from dqm.use_cases.common import attach_checks, resolve_system


logger = logging.getLogger(__name__)

PERMUTATION_LIMIT = 24
DEFORMED_LEVELS = 6


def christoffel_applies(ds: DeletionSet) -> bool:
    """Dual Christoffel relations need mu = 0, i.e. an admissible set without the ground state."""
    return ds.admissible and bool(ds.levels) and not ds.contains_zero


class ValidateDeletion(UnitOfWork[DeletionSet, DqmError]):
    def execute(self, levels: Iterable[int]) -> Result[DeletionSet, DqmError]:
        def use_case(ctx: ComputationContext) -> Result[DeletionSet, DqmError]:
            return validate_deletion(levels)
        return self._run(use_case)


class Deletion(UnitOfWork[dict, DqmError]):
    def execute(self, family_id: str, overrides: Mapping[str, float] | None, levels: Iterable[int],
                special: bool = False, unsafe: bool = False) -> Result[dict, DqmError]:
        def use_case(ctx: ComputationContext) -> Result[dict, DqmError]:
            family, lam, grid = resolve_system(ctx, family_id, overrides)
            ds = q(validate_deletion(levels, grid.x_max))
            if not ds.admissible and not unsafe:
                return Result.err(InadmissibleDeletion(ds.levels))
            if special and ds.levels != tuple(range(1, ds.ell + 1)):
                return Result.err(OutOfDomain("D", "the deforming polynomial path needs D = {1, ..., l}"))

            report = q(deletion_report(ctx, family, lam, grid, ds, unsafe))
            if not report["hermiticity"]["passed"]:
                logger.warning("%s D=%s: deleted system is not hermitian", family.id, list(ds.levels))
                return Result.ok(attach_checks(ctx, report))

            paths: dict[str, object] = {}
            if ds.admissible:
                q(barred_system_casoratian(ctx, family, lam, grid, ds))
                polynomial = q(polynomial_fast_path(ctx, family, lam, grid, ds))
                paths["permutation_deviation"] = q(permutation_invariance(ctx, family, lam, grid, ds, PERMUTATION_LIMIT))
                surviving = [n for n in tracked_levels(grid, ds) if n not in ds.levels][:DEFORMED_LEVELS]
                deformed = q(deformed_polynomials(ctx, family, lam, grid, ds, surviving))
                paths["deformed_degrees"] = deformed["degrees"]
                if christoffel_applies(ds):
                    christoffel = {
                        "duality": q(deformed_duality_check(ctx, family, lam, polynomial)),
                        "weights": q(weight_transformation_report(ctx, family, lam, polynomial)),
                    }
                    if grid.finite:
                        christoffel["elementary_chain_deviation"] = q(
                            christoffel_cross_check(ctx, family, lam, grid, polynomial))
                    report["christoffel"] = christoffel
            report["paths"] = paths

            if special:
                report["special"] = q(special_report(ctx, family, lam, grid, ds.ell))
            return Result.ok(attach_checks(ctx, report))
        return self._run(use_case)
