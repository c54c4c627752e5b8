"""Terminating (basic) hypergeometric sums, evaluated term by term in the dtype of the arguments.

The r-phi-s convention carries the factor ((-1)^k q^{k(k-1)/2})^{1+s-r}, so a
zero lower parameter simply contributes (0;q)_k = 1.
"""
from typing import Sequence
import numpy as np


def _broadcast(values: Sequence[object], z: object) -> tuple[list[np.ndarray], np.ndarray]:
    arrays = np.broadcast_arrays(*[np.asarray(v) for v in values], np.asarray(z))
    return list(arrays[:-1]), arrays[-1]


def qpochhammer(a: object, q: object, k: int) -> np.ndarray:
    out = np.ones_like(np.asarray(a))
    for j in range(k):
        out = out * (1 - a * q ** j)
    return out


def qpochhammer_inf(a: object, q: object, tol: float = 1e-18, max_terms: int = 10000) -> object:
    out = 1
    term = a
    for _ in range(max_terms):
        out = out * (1 - term)
        if abs(term) < tol:
            break
        term = term * q
    return out


def hyper(upper: Sequence[object], lower: Sequence[object], z: object, terms: int) -> np.ndarray:
    """sum_{k=0}^{terms} prod (a)_k / prod (b)_k * z^k / k!"""
    ups, zz = _broadcast(upper, z)
    lows = [np.asarray(b) for b in lower]
    term = np.ones_like(zz)
    total = np.ones_like(zz)
    for k in range(terms):
        num = np.ones_like(zz)
        for a in ups:
            num = num * (a + k)
        den = np.ones_like(zz) * (k + 1)
        for b in lows:
            den = den * (b + k)
        term = term * num / den * zz
        total = total + term
    return total


def qhyper(upper: Sequence[object], lower: Sequence[object], q: object, z: object, terms: int) -> np.ndarray:
    """Basic hypergeometric r-phi-s summed up to k = terms."""
    ups, zz = _broadcast(upper, z)
    lows = [np.asarray(b) for b in lower]
    power = 1 + len(lows) - len(ups)
    term = np.ones_like(zz)
    total = np.ones_like(zz)
    for k in range(terms):
        qk = q ** k
        num = np.ones_like(zz)
        for a in ups:
            num = num * (1 - a * qk)
        den = np.ones_like(zz) * (1 - q ** (k + 1))
        for b in lows:
            den = den * (1 - b * qk)
        extra = (-qk) ** power if power >= 0 else 1 / (-qk) ** (-power)
        term = term * num / den * zz * extra
        total = total + term
    return total
