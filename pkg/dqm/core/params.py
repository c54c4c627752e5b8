"""Parameter sets with exact shifts and grid descriptions.

q-type entries are kept as (sign, exponent) pairs, and a ParameterSet stores
how many times it has been shifted instead of the shifted values. Repeated
shifts therefore compose exactly: shift(shift(l, 2), 1) == shift(l, 3).
"""
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Union
import numpy as np


@dataclass(frozen=True)
class QPower:
    """sign * q**exponent"""
    exponent: float
    sign: float = 1.0

    @staticmethod
    def from_value(value: float, q: float) -> "QPower":
        if value == 0:
            raise ValueError("a q-power cannot represent 0")
        return QPower(exponent=math.log(abs(value)) / math.log(q), sign=math.copysign(1.0, value))

    def value(self, q: object, steps: float = 0.0) -> object:
        return self.sign * q ** (self.exponent + steps)


Entry = Union[float, QPower]


def _frozen(mapping: Mapping) -> Mapping:
    return MappingProxyType(dict(mapping))


@dataclass(frozen=True)
class ParameterSet:
    """Parameters lambda of a family, with shift delta.

    `q` (when present) is the base of all QPower entries and is never shifted.
    """
    entries: Mapping[str, Entry]
    shift: Mapping[str, float]
    q: float | None = None
    steps: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", _frozen(self.entries))
        object.__setattr__(self, "shift", _frozen({k: self.shift.get(k, 0.0) for k in self.entries}))
        if self.q is not None and not 0 < self.q < 1:
            raise ValueError(f"q={self.q} must lie strictly in (0, 1)")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ParameterSet):
            return NotImplemented
        return (dict(self.entries) == dict(other.entries) and dict(self.shift) == dict(other.shift)
                and self.q == other.q and self.steps == other.steps)

    def __hash__(self) -> int:
        return hash((tuple(sorted(self.entries.items())), self.q, self.steps))

    def shifted(self, s: int) -> "ParameterSet":
        return ParameterSet(self.entries, self.shift, self.q, self.steps + s)

    def resolve(self, dtype: type = np.float64) -> dict[str, object]:
        """Numerical values of lambda + steps * delta."""
        values: dict[str, object] = {}
        if self.q is not None:
            values["q"] = dtype(self.q)
        for name, entry in self.entries.items():
            delta = self.shift[name] * self.steps
            if isinstance(entry, QPower):
                values[name] = dtype(entry.sign) * dtype(self.q) ** (dtype(entry.exponent) + dtype(delta))
            else:
                values[name] = dtype(entry) + dtype(delta)
        return values

    def value(self, name: str) -> float:
        return float(self.resolve(np.float64)[name])

    def exponent(self, name: str) -> float:
        """Exponent (or plain value) of an entry after shifting."""
        entry = self.entries[name]
        base = entry.exponent if isinstance(entry, QPower) else entry
        return base + self.shift[name] * self.steps

    def materialized(self) -> "ParameterSet":
        """Same values with steps folded into the entries."""
        entries: dict[str, Entry] = {}
        for name, entry in self.entries.items():
            delta = self.shift[name] * self.steps
            if isinstance(entry, QPower):
                entries[name] = QPower(entry.exponent + delta, entry.sign)
            else:
                entries[name] = entry + delta
        return ParameterSet(entries, self.shift, self.q, 0)

    def negated(self, names: tuple[str, ...]) -> "ParameterSet":
        """Twist: negate the listed entries (exponents for q-powers)."""
        base = self.materialized()
        entries = dict(base.entries)
        for name in names:
            entry = entries[name]
            entries[name] = QPower(-entry.exponent, entry.sign) if isinstance(entry, QPower) else -entry
        return ParameterSet(entries, self.shift, self.q, 0)

    def with_entries(self, **changes: Entry) -> "ParameterSet":
        base = self.materialized()
        entries = dict(base.entries)
        entries.update(changes)
        return ParameterSet(entries, self.shift, self.q, 0)

    def describe(self) -> dict[str, float]:
        out = {name: float(v) for name, v in self.resolve(np.float64).items()}
        return out


def shift_parameters(lam: ParameterSet, s: int) -> ParameterSet:
    if s < 0:
        raise ValueError("shift count must be non-negative")
    return lam.shifted(s)


@dataclass(frozen=True)
class GridSpec:
    """x = 0..x_max. Truncated grids stand in for infinite ones and close with B(x_max) = 0."""
    x_max: int
    finite: bool = True
    declared_infinite: bool = False
    meta: Mapping[str, object] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.x_max < 0:
            raise ValueError("x_max must be non-negative")

    @staticmethod
    def finite_grid(N: int) -> "GridSpec":
        return GridSpec(x_max=int(N), finite=True)

    @staticmethod
    def truncated(cutoff: int, **meta: object) -> "GridSpec":
        if cutoff < 8:
            raise ValueError("truncated grids need a cutoff of at least 8")
        return GridSpec(x_max=int(cutoff), finite=False, declared_infinite=True, meta=meta)

    @property
    def n_max(self) -> int:
        return self.x_max

    @property
    def size(self) -> int:
        return self.x_max + 1

    def reduced(self, by: int) -> "GridSpec":
        return GridSpec(self.x_max - by, self.finite, self.declared_infinite, self.meta)
