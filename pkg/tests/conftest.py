from pathlib import Path
import pytest
from dqm.core.numeric import NumericPolicy
from dqm.core.params import GridSpec, ParameterSet
from dqm.families.askey import Krawtchouk, Racah
from dqm.families.base import FamilySpec
from dqm.families.qfamilies import DualAlternativeQCharlier, DualLittleQJacobi, DualQuantumQKrawtchouk, QRacah
from dqm.infrastructure.computation_context import ComputationContext


System = tuple[FamilySpec, ParameterSet, GridSpec]


@pytest.fixture
def policy() -> NumericPolicy:
    return NumericPolicy()


@pytest.fixture
def ctx(policy: NumericPolicy) -> ComputationContext:
    return ComputationContext(policy)


@pytest.fixture
def dqqk() -> System:
    """Spectrum {0, 1, 3, 7}."""
    family = DualQuantumQKrawtchouk()
    lam = family.make_parameters({"q": 0.5, "N": 3, "p": 10})
    return family, lam, family.grid(lam)


@pytest.fixture
def krawtchouk() -> System:
    family = Krawtchouk()
    lam = family.make_parameters()
    return family, lam, family.grid(lam)


@pytest.fixture
def racah() -> System:
    family = Racah()
    lam = family.make_parameters()
    return family, lam, family.grid(lam)


@pytest.fixture
def q_racah() -> System:
    family = QRacah()
    lam = family.make_parameters()
    return family, lam, family.grid(lam)


@pytest.fixture
def dlqj() -> tuple[FamilySpec, ParameterSet]:
    family = DualLittleQJacobi()
    return family, family.make_parameters()


@pytest.fixture
def daqc() -> tuple[FamilySpec, ParameterSet]:
    family = DualAlternativeQCharlier()
    return family, family.make_parameters({"q": 0.5, "a": 1.0})


@pytest.fixture
def output_dir(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Path:
    out = tmp_path / "reports"
    monkeypatch.setenv("DQM_OUTPUT_DIR", str(out))
    for name in ("DQM_PRECISION", "DQM_IDENTITY_TOL", "DQM_POSITIVITY_TOL", "DQM_TAIL_TOL"):
        monkeypatch.delenv(name, raising=False)
    return out
