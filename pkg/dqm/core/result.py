from dataclasses import dataclass
from typing import Callable, Generic, Iterable, TypeVar

T = TypeVar("T")
E = TypeVar("E")
T2 = TypeVar("T2")


@dataclass(frozen=True, slots=True)
class Result(Generic[T, E]):
    """Value of a computation, or the error that stopped it.

    Errors are usually DqmError instances; `unwrap` re-raises them as they are so
    a failed kernel surfaces with its own type.
    """
    _payload: object
    _failed: bool = False

    @staticmethod
    def ok(value: T) -> "Result[T, E]":
        return Result(value)

    @staticmethod
    def err(error: E) -> "Result[T, E]":
        return Result(error, True)

    @staticmethod
    def collect(results: Iterable["Result[T, E]"]) -> "Result[list[T], E]":
        """All values, or the first error in iteration order."""
        values = []
        for result in results:
            if result._failed:
                return Result.err(result._payload)  # type: ignore[arg-type]
            values.append(result._payload)
        return Result.ok(values)  # type: ignore[arg-type]

    @property
    def is_ok(self) -> bool:
        return not self._failed

    @property
    def is_err(self) -> bool:
        return self._failed

    def unwrap(self) -> T:
        if self._failed:
            if isinstance(self._payload, Exception):
                raise self._payload
            raise RuntimeError(f"called unwrap on Err: {self._payload}")
        return self._payload  # type: ignore[return-value]

    def unwrap_err(self) -> E:
        if not self._failed:
            raise RuntimeError("called unwrap_err on Ok")
        return self._payload  # type: ignore[return-value]

    def unwrap_or(self, default: T) -> T:
        return default if self._failed else self._payload  # type: ignore[return-value]

    def map(self, fn: Callable[[T], T2]) -> "Result[T2, E]":
        return self if self._failed else Result.ok(fn(self._payload))  # type: ignore

    def and_then(self, fn: Callable[[T], "Result[T2, E]"]) -> "Result[T2, E]":
        return self if self._failed else fn(self._payload)  # type: ignore

    def describe_err(self) -> str:
        """'ErrorType: message' for logs and report error lists."""
        err = self.unwrap_err()
        return f"{type(err).__name__}: {err}"
