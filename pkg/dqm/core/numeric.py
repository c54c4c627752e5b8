from dataclasses import dataclass, replace
from typing import Literal
import numpy as np
from dqm.domain.errors import InvalidPolicy


Precision = Literal["extended", "double"]

_DTYPES = {"extended": np.longdouble, "double": np.float64}


@dataclass(frozen=True)
class NumericPolicy:
    precision: Precision = "extended"
    identity_tol: float = 1e-10
    positivity_tol: float = 1e-12
    tail_tol: float = 1e-14

    def __post_init__(self) -> None:
        if self.precision not in _DTYPES:
            raise InvalidPolicy(f"unknown precision {self.precision}")
        for name in ("identity_tol", "positivity_tol", "tail_tol"):
            if not getattr(self, name) > 0:
                raise InvalidPolicy(f"{name} must be strictly positive")
        if self.identity_tol < self.eps * 1e3:
            raise InvalidPolicy(
                f"identity_tol {self.identity_tol:g} is below 1e3 * eps ({self.eps * 1e3:g})")

    @property
    def dtype(self) -> type:
        return _DTYPES[self.precision]

    @property
    def eps(self) -> float:
        return float(np.finfo(_DTYPES[self.precision]).eps)

    @property
    def significand_bits(self) -> int:
        return int(np.finfo(self.dtype).nmant) + 1

    def with_overrides(self, **changes: object) -> "NumericPolicy":
        cleaned = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **cleaned)

    def arange(self, lo: int, hi: int) -> np.ndarray:
        """Integer points lo..hi inclusive in working precision."""
        return np.arange(lo, hi + 1).astype(self.dtype)

    def asarray(self, values: object) -> np.ndarray:
        return np.asarray(values, dtype=self.dtype)


def max_abs(values: np.ndarray) -> float:
    arr = np.asarray(values)
    if arr.size == 0:
        return 0.0
    return float(np.max(np.abs(arr)))


def relative_deviation(actual: np.ndarray, expected: np.ndarray) -> float:
    """max |actual - expected| scaled by the larger of the two magnitudes."""
    actual = np.asarray(actual)
    expected = np.asarray(expected)
    diff = max_abs(actual - expected)
    if diff == 0.0:
        return 0.0
    scale = max(max_abs(actual), max_abs(expected))
    return diff / scale if scale > 0 else diff


def eigen_residual(applied: np.ndarray, energy: float, vector: np.ndarray, operator_scale: float) -> float:
    """max |H v - E v| over max|v| times the larger of |E| and the size of H.

    Scaling by the vector keeps zero-energy equations (H phi_0 = 0) meaningful.
    """
    vector = np.asarray(vector)
    diff = max_abs(np.asarray(applied) - energy * vector)
    if diff == 0.0:
        return 0.0
    scale = max_abs(vector) * max(abs(float(energy)), float(operator_scale))
    return diff / scale if scale > 0 else diff


def pointwise_relative_deviation(actual: np.ndarray, expected: np.ndarray, floor: float = 0.0) -> float:
    """max over points of |a - e| / max(|a|, |e|, floor)."""
    actual = np.asarray(actual)
    expected = np.asarray(expected)
    if actual.size == 0:
        return 0.0
    scale = np.maximum(np.maximum(np.abs(actual), np.abs(expected)), floor)
    diff = np.abs(actual - expected)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(diff == 0, 0, diff / np.where(scale == 0, 1, scale))
    return float(np.max(ratio))


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))
