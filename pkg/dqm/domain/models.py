from dataclasses import dataclass, field
from typing import Mapping
import numpy as np


@dataclass(frozen=True)
class CheckReport:
    name: str
    deviation: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.deviation)) and self.deviation <= self.tolerance

    def to_dict(self) -> dict:
        return {"name": self.name, "deviation": self.deviation, "tolerance": self.tolerance,
                "passed": self.passed, "detail": self.detail}


@dataclass(frozen=True)
class FamilyInfo:
    id: str
    title: str
    finite: bool
    parameters: tuple[str, ...]
    defaults: Mapping[str, float]
    constraints: tuple[str, ...]
    xi_implemented: bool
    appendices: tuple[str, ...]
    twist: str = ""
    xi_formula: str = ""
    most_generic: bool = False
    structure_functions: Mapping[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "id": self.id, "title": self.title, "finite": self.finite,
            "parameters": list(self.parameters), "defaults": dict(self.defaults),
            "constraints": list(self.constraints), "xi_implemented": self.xi_implemented,
            "appendices": list(self.appendices), "twist": self.twist, "xi_formula": self.xi_formula,
            "most_generic": self.most_generic, "structure_functions": dict(self.structure_functions),
        }


@dataclass(frozen=True)
class PotentialPair:
    """B and D sampled on the integer points x_lo..x_hi."""
    x_lo: int
    B: np.ndarray
    D: np.ndarray

    @property
    def x_hi(self) -> int:
        return self.x_lo + len(self.B) - 1

    def at(self, x: int) -> tuple[float, float]:
        i = x - self.x_lo
        return self.B[i], self.D[i]

    def window(self, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
        i, j = lo - self.x_lo, hi - self.x_lo + 1
        return self.B[i:j], self.D[i:j]


@dataclass(frozen=True)
class PolynomialTable:
    """values[i, x] = P_{levels[i]}(eta(x)) on x = x_lo..x_lo+width-1."""
    levels: tuple[int, ...]
    x_lo: int
    values: np.ndarray
    normalized: bool

    def row(self, n: int) -> np.ndarray:
        return self.values[self.levels.index(n)]


@dataclass(frozen=True)
class WaveFunction:
    values: np.ndarray
    log_values: np.ndarray | None = None

    @property
    def positive(self) -> bool:
        return bool(np.all(self.values > 0))


@dataclass(frozen=True)
class Eigensystem:
    values: np.ndarray
    vectors: np.ndarray  # columns


@dataclass(frozen=True)
class CrumChainState:
    s: int
    B: np.ndarray
    D: np.ndarray
    phis: Mapping[int, np.ndarray]
    energy_offset: float
    history: tuple[tuple[np.ndarray, np.ndarray], ...] = ()

    @property
    def x_max(self) -> int:
        return len(self.B) - 1


@dataclass(frozen=True)
class DeletionSet:
    levels: tuple[int, ...]
    admissible: bool
    mu: int
    contains_zero: bool
    order: tuple[int, ...] = ()

    @property
    def ell(self) -> int:
        return len(self.levels)

    @property
    def weight(self) -> int:
        return sum(self.levels)

    def applied_order(self) -> tuple[int, ...]:
        return self.order or self.levels


@dataclass(frozen=True)
class DeletedSystem:
    deletion: DeletionSet
    B: np.ndarray
    D: np.ndarray
    phis: Mapping[int, np.ndarray]
    energies: Mapping[int, float]
    mu: int
    path: str
    tables: Mapping[str, np.ndarray] = field(default_factory=dict)

    @property
    def x_max(self) -> int:
        return len(self.B) - 1

    @property
    def surviving(self) -> tuple[int, ...]:
        return tuple(sorted(self.phis))


@dataclass(frozen=True)
class DualTable:
    """values[x, j] = Q_x(energies[j])."""
    energies: np.ndarray
    values: np.ndarray
    deformed: bool = False

    @property
    def x_max(self) -> int:
        return self.values.shape[0] - 1


@dataclass(frozen=True)
class SpecialDeletedSystem:
    ell: int
    xi: np.ndarray  # on x = 0..x_max+1
    B: np.ndarray
    D: np.ndarray
    phi0: np.ndarray
    C: float
    polynomials: Mapping[int, np.ndarray]
    norms: Mapping[int, float]
    hermitian: bool

    @property
    def x_max(self) -> int:
        return len(self.B) - 1


@dataclass(frozen=True)
class TransitionKernel:
    t: float
    matrix: np.ndarray
    spectral_residual: float
