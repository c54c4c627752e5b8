import logging
from typing import Callable, Generic, TypeVar
from dqm.core.numeric import NumericPolicy
from dqm.core.result import Result
from dqm.core.resultify import Panic
from dqm.infrastructure.computation_context import ComputationContext


T = TypeVar("T")
E = TypeVar("E")

logger = logging.getLogger(__name__)


class Computation(Generic[T, E]):
    def __init__(self, ctx: ComputationContext):
        self.ctx = ctx

    def execute(self, use_case: Callable[[ComputationContext], Result[T, E]]) -> Result[T, E]:
        try:
            result = use_case(self.ctx)
            if result.is_err:
                logger.debug("use case failed: %s", result.unwrap_err())
            return result
        except Panic as e:
            return Result.err(e.err)
        except Exception as e:
            logger.debug("use case raised", exc_info=True)
            return Result.err(e)
        finally:
            failed = self.ctx.failed_checks()
            if failed:
                logger.debug("%d of %d checks failed", len(failed), len(self.ctx.checks))


class UnitOfWork(Generic[T, E]):
    def __init__(self, policy: NumericPolicy | None = None):
        self._policy = policy or NumericPolicy()

    def _run(self, fn: Callable[[ComputationContext], Result[T, E]]) -> Result[T, E]:
        return Computation(ComputationContext(self._policy)).execute(fn)
