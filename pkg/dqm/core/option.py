from dataclasses import dataclass
from typing import Any, Callable, Generic, Iterable, TypeVar
from dqm.core.result import Result


T = TypeVar("T")
E = TypeVar("E")

_absent = object()


@dataclass(frozen=True, slots=True)
class Option(Generic[T]):
    """A closed form a family may or may not supply (phi_0^2, d_n^2), or a catalog hit."""
    _value: Any = _absent

    @staticmethod
    def some(value: T) -> "Option[T]":
        return Option(value)

    @staticmethod
    def none() -> "Option[T]":
        return Option()

    @staticmethod
    def from_nullable(value: T | None) -> "Option[T]":
        return Option.none() if value is None else Option.some(value)

    @staticmethod
    def all(options: Iterable["Option[T]"]) -> "Option[list[T]]":
        """Every value, or none as soon as one closed form is missing."""
        values = []
        for option in options:
            if option.is_none:
                return Option.none()
            values.append(option._value)
        return Option.some(values)

    @property
    def is_some(self) -> bool:
        return self._value is not _absent

    @property
    def is_none(self) -> bool:
        return self._value is _absent

    def unwrap(self) -> T:
        if self.is_none:
            raise RuntimeError("called unwrap on None")
        return self._value

    def unwrap_or_else(self, fallback: Callable[[], T]) -> T:
        """The closed form, or the numerical fallback computed on demand."""
        return self._value if self.is_some else fallback()

    def ok_or(self, err: E) -> Result[T, E]:
        return Result.ok(self._value) if self.is_some else Result.err(err)
