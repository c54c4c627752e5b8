from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import ClassVar, Literal, Mapping
import numpy as np
from dqm.core.option import Option
from dqm.core.params import GridSpec, ParameterSet, QPower
from dqm.domain.errors import MissingParameter, NotImplementedForFamily, OutOfDomain, UnknownParameter
from dqm.domain.models import FamilyInfo


@dataclass(frozen=True)
class ParameterDef:
    name: str
    default: float | None
    kind: Literal["real", "int", "q"] = "real"
    delta: float = 0.0


@dataclass(frozen=True)
class Constraint:
    parameter: str
    text: str
    holds: bool


def dtype_of(x: object) -> type:
    arr = np.asarray(x)
    return arr.dtype.type if np.issubdtype(arr.dtype, np.floating) else np.float64


class FamilySpec(ABC):
    """Closed-form data of one polynomial family.

    Evaluators take integer points as floating arrays (the working dtype is
    read from the argument) and a ParameterSet; shifted parameters are passed
    as lam.shifted(s).
    """
    id: ClassVar[str]
    title: ClassVar[str]
    finite: ClassVar[bool]
    parameters: ClassVar[tuple[ParameterDef, ...]]
    default_q: ClassVar[float | None] = None
    coverage: ClassVar[tuple[str, ...]] = ("deforming-polynomial-table",)
    twist_names: ClassVar[tuple[str, ...] | None] = None
    twist_text: ClassVar[str] = ""
    xi_formula: ClassVar[str] = ""
    most_generic: ClassVar[bool] = False
    structure_functions: ClassVar[Mapping[str, str]] = {}

    # parameters

    @property
    def is_q_family(self) -> bool:
        return self.default_q is not None

    def make_parameters(self, overrides: Mapping[str, float] | None = None) -> ParameterSet:
        overrides = dict(overrides or {})
        q = overrides.pop("q", self.default_q) if self.is_q_family else None
        known = {p.name for p in self.parameters}
        for name in overrides:
            if name not in known:
                raise UnknownParameter(self.id, name)
        entries: dict[str, float | QPower] = {}
        for p in self.parameters:
            value = overrides.get(p.name, p.default)
            if value is None:
                raise MissingParameter(self.id, p.name)
            if p.kind == "q":
                if value == 0:
                    raise OutOfDomain(p.name, f"{p.name} != 0")
                entries[p.name] = QPower.from_value(float(value), float(q))
            elif p.kind == "int":
                if float(value) != int(value):
                    raise OutOfDomain(p.name, f"{p.name} is a non-negative integer")
                entries[p.name] = float(int(value))
            else:
                entries[p.name] = float(value)
        if q is not None and not 0 < float(q) < 1:
            raise OutOfDomain("q", "0 < q < 1")
        return ParameterSet(entries, {p.name: p.delta for p in self.parameters},
                            None if q is None else float(q))

    def values(self, lam: ParameterSet, like: object = None) -> dict:
        return lam.resolve(dtype_of(like) if like is not None else np.float64)

    @abstractmethod
    def constraints(self, lam: ParameterSet) -> list[Constraint]:
        ...

    def kappa(self, lam: ParameterSet) -> float:
        return 1.0

    def size(self, lam: ParameterSet) -> int:
        """N for finite families."""
        return int(round(lam.exponent("N")))

    def grid(self, lam: ParameterSet) -> GridSpec:
        if not self.finite:
            raise ValueError(f"{self.id} is infinite, choose a cutoff")
        return GridSpec.finite_grid(self.size(lam))

    # closed forms

    @abstractmethod
    def B(self, x: np.ndarray, lam: ParameterSet) -> np.ndarray:
        ...

    @abstractmethod
    def D(self, x: np.ndarray, lam: ParameterSet) -> np.ndarray:
        ...

    @abstractmethod
    def energy(self, n: object, lam: ParameterSet) -> np.ndarray:
        ...

    @abstractmethod
    def eta(self, x: np.ndarray, lam: ParameterSet) -> np.ndarray:
        ...

    def varphi(self, x: np.ndarray, lam: ParameterSet) -> np.ndarray:
        x = np.asarray(x)
        one = np.ones_like(x)
        return (self.eta(x + 1, lam) - self.eta(x, lam)) / self.eta(one, lam)

    @abstractmethod
    def polynomial(self, n: int, x: np.ndarray, lam: ParameterSet) -> np.ndarray:
        """P_n(eta(x)) from its hypergeometric form, P_n(0) = 1."""

    def phi0_sq(self, x: np.ndarray, lam: ParameterSet) -> Option[np.ndarray]:
        return Option.none()

    def d_sq(self, n: int, lam: ParameterSet) -> Option[float]:
        return Option.none()

    def twist(self, lam: ParameterSet) -> ParameterSet:
        if self.twist_names is None:
            raise NotImplementedForFamily(self.id, "twist")
        return lam.negated(self.twist_names)

    def xi(self, ell: int, x: np.ndarray, lam: ParameterSet) -> np.ndarray:
        """Deforming polynomial; the default uses P_ell(-x) at the twisted parameters."""
        x = np.asarray(x)
        if ell == 0:
            return np.ones_like(x)
        if self.twist_names is None:
            raise NotImplementedForFamily(self.id, "xi")
        return self.polynomial(ell, -x, self.twist(lam.shifted(ell - 1)))

    @property
    def has_xi(self) -> bool:
        return self.twist_names is not None or type(self).xi is not FamilySpec.xi

    def info(self) -> FamilyInfo:
        lam_defaults = {p.name: p.default for p in self.parameters}
        if self.is_q_family:
            lam_defaults = {"q": self.default_q, **lam_defaults}
        texts = tuple(c.text for c in self.constraints(self.make_parameters()))
        return FamilyInfo(
            id=self.id, title=self.title, finite=self.finite,
            parameters=tuple(lam_defaults), defaults=lam_defaults, constraints=texts,
            xi_implemented=self.has_xi, appendices=self.coverage, twist=self.twist_text,
            xi_formula=self.xi_formula, most_generic=self.most_generic,
            structure_functions=dict(self.structure_functions),
        )
