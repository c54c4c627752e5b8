import json
import logging
from dataclasses import dataclass
from importlib.metadata import entry_points
import numpy as np
from dqm.core.option import Option
from dqm.domain.errors import NotImplementedForFamily
from dqm.families.askey import Charlier, Hahn, Krawtchouk, Meixner, Racah
from dqm.families.base import FamilySpec
from dqm.families.qfamilies import DualAlternativeQCharlier, DualLittleQJacobi, DualQuantumQKrawtchouk, QRacah


logger = logging.getLogger(__name__)

BUILTIN_FAMILIES: tuple[type[FamilySpec], ...] = (
    Krawtchouk, Hahn, Racah, QRacah, Meixner, Charlier,
    DualQuantumQKrawtchouk, DualLittleQJacobi, DualAlternativeQCharlier,
)


@dataclass(frozen=True)
class XiStub:
    """A family whose deforming polynomial is recorded as a formula only."""
    id: str
    title: str
    xi_formula: str

    def xi(self, ell: int, x: np.ndarray, lam: object = None) -> np.ndarray:
        raise NotImplementedForFamily(self.id, "xi")

    def to_dict(self) -> dict:
        return {"id": self.id, "title": self.title, "xi_formula": self.xi_formula,
                "xi_implemented": False, "appendices": ["deforming-polynomial-table"]}


XI_STUBS: tuple[XiStub, ...] = (
    XiStub("dual_hahn", "dual Hahn", "P_l(-x; t(lambda + (l-1) delta) + (0, 2, 0)), t(lambda) = -lambda"),
    XiStub("q_hahn", "q-Hahn",
           "P_l(x - N + l - 1; t(lambda + (l-1) delta)) (-1)^l a^l q^(l(l-1)/2) (b;q)_l / (a;q)_l, "
           "t(lambda) = -(b, a, N)"),
    XiStub("dual_q_hahn", "dual q-Hahn",
           "3phi2(q^-l, q^x, a^-1 b^-1 q^(-x+2-l); a^-1 q^(-l+1), q^(N-l+1) | q; b q^N)"),
    XiStub("quantum_q_krawtchouk", "quantum q-Krawtchouk",
           "3phi2(q^-l, 0, q^(-x+N-l+1); p^-1 q^-l, q^(N-l+1) | q; q) (pq;q)_l"),
    XiStub("q_krawtchouk", "q-Krawtchouk",
           "P_l(x - N + l - 1; t(lambda + (l-1) delta) + (-2, 0)) (-1)^l q^(l^2) p^l"),
    XiStub("dual_q_krawtchouk", "dual q-Krawtchouk",
           "3phi1(q^-l, q^x, c^-1 q^(-x+N-l+1); q^(N-l+1) | q; c q^l)"),
    XiStub("affine_q_krawtchouk", "affine q-Krawtchouk",
           "2phi1(q^-l, q^(-x+N-l+1); q^(N-l+1) | q; p^-1) (-1)^l p^l q^(l(l+1)/2) / (pq;q)_l"),
    XiStub("alternative_q_hahn", "alternative q-Hahn",
           "P_l(x - N + l - 1; t(lambda + (l-1) delta)) (-1)^l q^(-l(l-1)/2) (a;q)_l / (a^l (b;q)_l)"),
    XiStub("alternative_q_krawtchouk", "alternative q-Krawtchouk",
           "P_l(x - N + l - 1; t(lambda + (l-1) delta) + (-2, 0)) (-1)^l p^-l q^(-l^2)"),
    XiStub("alternative_affine_q_krawtchouk", "alternative affine q-Krawtchouk",
           "2phi1(q^-l, q^(-x+N-l+1); q^(N-l+1) | q; p q^(x+l+1)) / (pq;q)_l"),
    XiStub("little_q_jacobi", "little q-Jacobi",
           "P_l(x + b' + l; t(lambda + (l-1) delta) - (2, 2)) a^-l b^-l q^(-l(l+1)), b = q^b'"),
    XiStub("q_meixner", "q-Meixner", "2phi1(q^-l, q^x; b^-1 q^-l | q; -b^-1 c^-1 q^(1-x))"),
    XiStub("little_q_laguerre", "little q-Laguerre/Wall",
           "1phi1(q^-l; a^-1 q^-l | q; a^-1 q^x) (-1)^l a^-l q^(-l(l+1)/2) (aq;q)_l"),
    XiStub("al_salam_carlitz_ii", "Al-Salam-Carlitz II", "2phi1(q^-l, q^x; 0 | q; a^-1 q^(1-x))"),
    XiStub("alternative_q_charlier", "alternative q-Charlier",
           "2phi0(q^-l, -a^-1 q^-l; - | q; -a q^(x+2l)) (-a)^-l q^(-l^2)"),
    XiStub("q_charlier", "q-Charlier", "2phi0(q^-l, q^x; - | q; -a^-1 q^(l+1-x))"),
)


def load_family_plugins() -> dict[str, FamilySpec]:
    plugins: dict[str, FamilySpec] = {}

    for entry_point in entry_points(group="dqm.families"):
        family_class = entry_point.load()

        if not (isinstance(family_class, type) and issubclass(family_class, FamilySpec)):
            raise TypeError(f"{entry_point.name} is not a valid FamilySpec")
        instance = family_class()
        if instance.id in plugins:
            raise ValueError(f"Duplicate family id: {instance.id}")
        plugins[instance.id] = instance

    return plugins


class FamilyCatalog:
    def __init__(self, families: dict[str, FamilySpec], stubs: tuple[XiStub, ...] = XI_STUBS):
        self._families = dict(families)
        self._stubs = {s.id: s for s in stubs}

    @staticmethod
    def default(with_plugins: bool = True) -> "FamilyCatalog":
        families = {cls.id: cls() for cls in BUILTIN_FAMILIES}
        if with_plugins:
            try:
                plugins = load_family_plugins()
            except (TypeError, ValueError, ImportError) as e:
                logger.warning("ignoring family plugins: %s", e)
                plugins = {}
            # installed copies of the built-ins register under the same ids
            families.update({k: v for k, v in plugins.items() if k not in families})
        return FamilyCatalog(families)

    def ids(self) -> list[str]:
        return list(self._families)

    def lookup(self, family_id: str) -> Option[FamilySpec]:
        return Option.from_nullable(self._families.get(family_id))

    def lookup_stub(self, family_id: str) -> Option[XiStub]:
        return Option.from_nullable(self._stubs.get(family_id))

    def catalog_list(self) -> list[dict]:
        return [f.info().to_dict() for f in self._families.values()]

    def stubs(self) -> list[XiStub]:
        return list(self._stubs.values())

    def export_catalog(self) -> str:
        return json.dumps({
            "schema": "dqm-report/1",
            "kind": "catalog",
            "families": self.catalog_list(),
            "stubs": [s.to_dict() for s in self._stubs.values()],
        }, indent=2)


_default: FamilyCatalog | None = None


def default_catalog() -> FamilyCatalog:
    global _default
    if _default is None:
        _default = FamilyCatalog.default()
    return _default
