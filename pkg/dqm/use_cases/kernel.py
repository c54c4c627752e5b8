from typing import Iterable, Mapping
from dqm.core.result import Result
from dqm.core.resultify import q
from dqm.domain.errors import DqmError, InadmissibleDeletion, NonHermitianSystem
from dqm.infrastructure.computation_context import ComputationContext
from dqm.infrastructure.uow import UnitOfWork
from dqm.services.adler import adler_chain, is_hermitian, validate_deletion
from dqm.services.bdp import BirthDeathProcess, chapman_kolmogorov, decay_rates, stationary_distribution, transition_kernel
from dqm.services.hamiltonian import build
from dqm.use_cases.common import attach_checks, resolve_system


class TransitionKernelReport(UnitOfWork[dict, DqmError]):
    """Birth and death process of the original or of a deleted system."""

    def execute(self, family_id: str, overrides: Mapping[str, float] | None, t: float,
                levels: Iterable[int] = (), x: int = 0) -> Result[dict, DqmError]:
        def use_case(ctx: ComputationContext) -> Result[dict, DqmError]:
            family, lam, grid = resolve_system(ctx, family_id, overrides)
            ds = q(validate_deletion(levels, grid.x_max))
            if not ds.admissible:
                return Result.err(InadmissibleDeletion(ds.levels))
            if ds.levels:
                deleted = q(adler_chain(ctx, family, lam, grid, ds))
                if not is_hermitian(deleted):
                    return Result.err(NonHermitianSystem(f"D={list(ds.levels)} gives sign-indefinite rates"))
                process = BirthDeathProcess.from_system(deleted, f"{family.id} D={list(ds.levels)}")
            else:
                process = BirthDeathProcess.from_system(q(build(ctx, family, lam, grid)), family.id)
            kernel = q(transition_kernel(ctx, process, t))
            report = {
                "family": family.id,
                "parameters": lam.describe(),
                "D": list(ds.levels),
                "t": kernel.t,
                "spectral_residual": kernel.spectral_residual,
                "chapman_kolmogorov": q(chapman_kolmogorov(ctx, process)),
                "stationary": q(stationary_distribution(ctx, process)),
                "decay": q(decay_rates(ctx, process, x)),
                "kernel": kernel.matrix,
            }
            return Result.ok(attach_checks(ctx, report))
        return self._run(use_case)
