import logging
from dataclasses import replace
from typing import Mapping
from dqm.core.params import GridSpec, ParameterSet
from dqm.core.resultify import q
from dqm.families.base import FamilySpec
from dqm.infrastructure.computation_context import ComputationContext
from dqm.services.family_services import grid_for, lookup_family, parse_parameters, validate_parameters


logger = logging.getLogger(__name__)


def resolve_system(ctx: ComputationContext, family_id: str,
                   overrides: Mapping[str, float] | None = None) -> tuple[FamilySpec, ParameterSet, GridSpec]:
    family = q(lookup_family(family_id))
    lam = q(parse_parameters(family, overrides))
    q(validate_parameters(ctx, family.id, lam))
    grid = q(grid_for(ctx, family, lam))
    logger.debug("%s %s on %s grid x_max=%d", family.id, lam.describe(), "finite" if grid.finite else "truncated",
                 grid.x_max)
    return family, lam, grid


def attach_checks(ctx: ComputationContext, report: dict, tolerance: float | None = None) -> dict:
    """Check log of the run; `tolerance` re-grades every check against one value."""
    checks = [c if tolerance is None else replace(c, tolerance=tolerance) for c in ctx.checks]
    failed = [c.name for c in checks if not c.passed]
    return {**report, "checks": [c.to_dict() for c in checks], "failed": failed, "passed": not failed}
