import functools
import logging
from typing import TypeVar, Callable, Any, Generic
from dqm.core.result import Result
from dqm.domain.errors import DqmError


T = TypeVar("T")
E = TypeVar("E")

logger = logging.getLogger(__name__)


class Panic(Generic[E], Exception):
    def __init__(self, err: E) -> None:
        super().__init__(str(err))
        self.err = err


def q(result: Result[T, E]) -> T:
    if result.is_err:
        raise Panic(result.unwrap_err())
    return result.unwrap()


def resultify(fn: Callable[..., T]) -> Callable[..., Result[T, E]]:
    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any) -> Result[T, E]:
        try:
            value = fn(*args, **kwargs)
            return Result.ok(value)
        except Panic as e:
            return Result.err(e.err)
    return wrapper


def returns_result(fn: Callable[..., T]) -> Callable[..., Result[T, DqmError]]:
    """Like resultify, but numerical errors raised deep inside a kernel also end up in Err."""
    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any) -> Result[T, DqmError]:
        try:
            return Result.ok(fn(*args, **kwargs))
        except Panic as e:
            return Result.err(e.err)
        except DqmError as e:
            logger.debug("%s failed: %s", fn.__name__, e)
            return Result.err(e)
    return wrapper
