import json
import logging
import math
from pathlib import Path
from typing import Any
import numpy as np
import pandas as pd


SCHEMA = "dqm-report/1"
CSV_FLOAT_FORMAT = "%.17g"
SPECTRUM_COLUMNS = ["n", "energy", "closed_form", "residual"]

logger = logging.getLogger(__name__)


def to_jsonable(value: Any) -> Any:
    """numpy scalars and arrays to plain values; nan and inf become None."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def envelope(kind: str, payload: dict) -> dict:
    return {"schema": SCHEMA, "kind": kind, **to_jsonable(payload)}


def dumps(kind: str, payload: dict) -> str:
    return json.dumps(envelope(kind, payload), indent=2, allow_nan=False)


def write_json(directory: Path, name: str, kind: str, payload: dict) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{name}.json"
    path.write_text(dumps(kind, payload) + "\n", encoding="utf-8")
    logger.debug("wrote %s", path)
    return path


def spectrum_frame(report: dict) -> pd.DataFrame:
    values = report["eigenvalues"]
    return pd.DataFrame({
        "n": range(len(values)),
        "energy": values,
        "closed_form": report["closed_form"],
        "residual": report["residual"],
    }, columns=SPECTRUM_COLUMNS)


def kernel_frame(matrix: np.ndarray) -> pd.DataFrame:
    """Long format x, y, p."""
    matrix = np.asarray(matrix, dtype=np.float64)
    x, y = np.indices(matrix.shape)
    return pd.DataFrame({"x": x.ravel(), "y": y.ravel(), "p": matrix.ravel()})


def dual_frame(report: dict) -> pd.DataFrame:
    """Rows x, one column per energy E(n), values Q_x(E(n))."""
    values = np.asarray(report["values"], dtype=np.float64)
    columns = [format(float(e), ".17g") for e in report["energies"]]
    frame = pd.DataFrame(values, columns=columns)
    frame.insert(0, "x", range(len(frame)))
    return frame


def write_csv(directory: Path, name: str, frame: pd.DataFrame) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{name}.csv"
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    logger.debug("wrote %s", path)
    return path
