from typing import Mapping
from dqm.core.result import Result
from dqm.core.resultify import q
from dqm.domain.errors import DqmError
from dqm.infrastructure.computation_context import ComputationContext
from dqm.infrastructure.uow import UnitOfWork
from dqm.services.hamiltonian import difference_equation_check, orthogonality_check, spectrum_report
from dqm.use_cases.common import attach_checks, resolve_system


class Spectrum(UnitOfWork[dict, DqmError]):
    def execute(self, family_id: str, overrides: Mapping[str, float] | None = None) -> Result[dict, DqmError]:
        def use_case(ctx: ComputationContext) -> Result[dict, DqmError]:
            family, lam, grid = resolve_system(ctx, family_id, overrides)
            report = q(spectrum_report(ctx, family, lam, grid))
            q(orthogonality_check(ctx, family, lam, grid))
            if grid.x_max >= 1:
                q(difference_equation_check(ctx, family, lam, grid, 1))
            return Result.ok(attach_checks(ctx, report))
        return self._run(use_case)
