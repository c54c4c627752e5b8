from typing import Mapping
import numpy as np
from dqm.core.result import Result
from dqm.core.resultify import q
from dqm.domain.errors import DqmError
from dqm.infrastructure.computation_context import ComputationContext
from dqm.infrastructure.uow import UnitOfWork
from dqm.services.christoffel import dual_reach, dual_recurrence, duality_check
from dqm.services.crum import tracked_levels
from dqm.services.family_services import energies, grid_potentials
from dqm.use_cases.common import attach_checks, resolve_system


class DualTableReport(UnitOfWork[dict, DqmError]):
    """Q_x(E(n)) from the dual recurrence, with the duality checks of the system."""

    def execute(self, family_id: str, overrides: Mapping[str, float] | None = None) -> Result[dict, DqmError]:
        def use_case(ctx: ComputationContext) -> Result[dict, DqmError]:
            family, lam, grid = resolve_system(ctx, family_id, overrides)
            B, D = q(ctx.run(lambda policy: grid_potentials(family, lam, grid, policy)))
            x_hi = grid.x_max if grid.finite else dual_reach(B, D, grid, ctx.policy)
            E = energies(family, lam, tracked_levels(grid), ctx.dtype)
            table = q(dual_recurrence(ctx, B[:x_hi + 1], D[:x_hi + 1], E))
            deviation = q(duality_check(ctx, family, lam, grid))
            report = {
                "family": family.id,
                "parameters": lam.describe(),
                "finite": grid.finite,
                "energies": np.asarray(table.energies, dtype=np.float64),
                "values": np.asarray(table.values, dtype=np.float64),
                "duality_deviation": deviation,
            }
            return Result.ok(attach_checks(ctx, report))
        return self._run(use_case)
