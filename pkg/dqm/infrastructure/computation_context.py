import logging
from typing import Callable, List, TypeVar
import numpy as np
from dqm.core.numeric import NumericPolicy
from dqm.core.result import Result
from dqm.domain.errors import ConvergenceFailure, DqmError
from dqm.domain.models import CheckReport


T = TypeVar("T")

logger = logging.getLogger(__name__)


class ComputationContext:
    """Numeric policy plus the log of identity checks made while a report is computed."""

    def __init__(self, policy: NumericPolicy | None = None):
        self.policy = policy or NumericPolicy()
        self.checks: List[CheckReport] = []

    @property
    def dtype(self) -> type:
        return self.policy.dtype

    def check(self, name: str, deviation: float, tolerance: float | None = None, detail: str = "") -> CheckReport:
        report = CheckReport(name, float(deviation), self.policy.identity_tol if tolerance is None else tolerance, detail)
        self.checks.append(report)
        if not report.passed:
            logger.debug("check %s failed: deviation %.3e > %.3e %s", name, report.deviation, report.tolerance, detail)
        return report

    def failed_checks(self) -> List[CheckReport]:
        return [c for c in self.checks if not c.passed]

    def run(self, op: Callable[[NumericPolicy], T]) -> Result[T, DqmError]:
        try:
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                return Result.ok(op(self.policy))
        except DqmError as e:
            return Result.err(e)
        except np.linalg.LinAlgError as e:
            return Result.err(ConvergenceFailure("linalg", str(e)))
