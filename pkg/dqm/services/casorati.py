"""Casorati determinants W[f_1, ..., f_m](x) = det(f_k(x + j - 1)) and the identities they satisfy."""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence
import numpy as np
from numpy.polynomial import Polynomial
from dqm.core.numeric import NumericPolicy, pointwise_relative_deviation, relative_deviation
from dqm.core.params import ParameterSet
from dqm.core.result import Result
from dqm.core.resultify import returns_result
from dqm.domain.errors import CasoratiError, DegreeMismatch, DomainExceeded, DqmError, ZeroPrefactor
from dqm.families.base import FamilySpec
from dqm.infrastructure.computation_context import ComputationContext
from dqm.services.family_services import polynomial_values, sample


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SampledFunction:
    """Values on the integer points x_lo..x_hi; nothing is extrapolated."""
    values: np.ndarray
    x_lo: int = 0
    provenance: str = "table"

    @staticmethod
    def from_closed_form(fn: Callable[[np.ndarray], np.ndarray], lo: int, hi: int, dtype: type = np.float64,
                         name: str = "f") -> "SampledFunction":
        return SampledFunction(sample(fn, lo, hi, dtype, name), lo, "closed-form")

    @property
    def x_hi(self) -> int:
        return self.x_lo + len(self.values) - 1

    def window(self, x: int, m: int) -> np.ndarray:
        if x < self.x_lo or x + m - 1 > self.x_hi:
            raise DomainExceeded(x if x < self.x_lo else x + m - 1, self.x_lo, self.x_hi)
        i = x - self.x_lo
        return self.values[i:i + m]

    def at(self, x: int) -> object:
        return self.window(x, 1)[0]

    def times(self, other: "SampledFunction") -> "SampledFunction":
        lo, hi = max(self.x_lo, other.x_lo), min(self.x_hi, other.x_hi)
        return SampledFunction(self.window(lo, hi - lo + 1) * other.window(lo, hi - lo + 1), lo, "product")


# determinants

def det(M: np.ndarray) -> object:
    """Determinant in the dtype of M: closed form for m <= 3, LU with partial pivoting beyond."""
    m = M.shape[0]
    if m == 0:
        return M.dtype.type(1)
    if m == 1:
        return M[0, 0]
    if m == 2:
        return M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    if m == 3:
        return (M[0, 0] * (M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1])
                - M[0, 1] * (M[1, 0] * M[2, 2] - M[1, 2] * M[2, 0])
                + M[0, 2] * (M[1, 0] * M[2, 1] - M[1, 1] * M[2, 0]))
    if M.dtype == np.float64:
        return np.linalg.det(M)
    # LAPACK has no long double path
    U = M.copy()
    sign = M.dtype.type(1)
    for k in range(m):
        p = k + int(np.argmax(np.abs(U[k:, k])))
        if U[p, k] == 0:
            return M.dtype.type(0)
        if p != k:
            U[[k, p]] = U[[p, k]]
            sign = -sign
        U[k + 1:, k:] -= np.outer(U[k + 1:, k] / U[k, k], U[k, k:])
    return sign * np.prod(np.diag(U))


def casorati_matrix(fs: Sequence[SampledFunction], x: int) -> np.ndarray:
    m = len(fs)
    if m == 0:
        return np.zeros((0, 0))
    return np.column_stack([f.window(x, m) for f in fs])


def casoratian_at(fs: Sequence[SampledFunction], x: int) -> object:
    if not fs:
        return np.float64(1)
    return det(casorati_matrix(fs, x))


def casoratian_table(fs: Sequence[SampledFunction], lo: int, hi: int) -> SampledFunction:
    dtype = fs[0].values.dtype if fs else np.float64
    values = np.array([casoratian_at(fs, x) for x in range(lo, hi + 1)], dtype=dtype)
    return SampledFunction(values, lo, "casoratian")


@returns_result
def casoratian(fs: Sequence[SampledFunction], x: int) -> object:
    return casoratian_at(fs, x)


def _relative(lhs: object, rhs: object) -> float:
    lhs, rhs = float(lhs), float(rhs)
    scale = max(abs(lhs), abs(rhs))
    return 0.0 if scale == 0 else abs(lhs - rhs) / scale


@returns_result
def check_product_rule(g: SampledFunction, fs: Sequence[SampledFunction], x: int) -> float:
    """W[g f_1, ..., g f_n](x) against prod_k g(x+k) W[f_1, ..., f_n](x)."""
    lhs = casoratian_at([g.times(f) for f in fs], x)
    rhs = np.prod(g.window(x, len(fs))) * casoratian_at(fs, x)
    return _relative(lhs, rhs)


@returns_result
def check_wronskian_identity(fs: Sequence[SampledFunction], g: SampledFunction, h: SampledFunction, x: int) -> float:
    """W[W[f, g], W[f, h]](x) against W[f](x+1) W[f, g, h](x)."""
    fs = list(fs)
    wg = casoratian_table(fs + [g], x, x + 1)
    wh = casoratian_table(fs + [h], x, x + 1)
    lhs = casoratian_at([wg, wh], x)
    rhs = casoratian_at(fs, x + 1) * casoratian_at(fs + [g, h], x)
    return _relative(lhs, rhs)


def random_identity_trials(ctx: ComputationContext, rng: np.random.Generator, trials: int = 1000,
                           max_order: int = 4, tol: float = 1e-12) -> Result[dict, DqmError]:
    """Both Casoratian identities on random tables; the rng alone fixes the draws."""
    def op(policy: NumericPolicy) -> dict:
        dtype = policy.dtype
        worst = {"product": 0.0, "nested": 0.0}
        for _ in range(trials):
            m = int(rng.integers(1, max_order + 1))
            x = int(rng.integers(-3, 4))

            def draw(low: float = -1.0) -> SampledFunction:
                return SampledFunction(rng.uniform(low, 2.0, m + 3).astype(dtype), x, "random")

            fs = [draw() for _ in range(m)]
            worst["product"] = max(worst["product"], check_product_rule(draw(0.5), fs, x).unwrap())
            worst["nested"] = max(worst["nested"], check_wronskian_identity(fs, draw(), draw(), x).unwrap())
        ctx.check(f"W[g f_1..g f_m] = prod g W[f_1..f_m] ({trials} random trials)", worst["product"], tol)
        ctx.check(f"W[W[f,g], W[f,h]] = W[f](x+1) W[f,g,h] ({trials} random trials)", worst["nested"], tol)
        return {"trials": trials, "product_rule": worst["product"], "nested_casoratian": worst["nested"]}
    return ctx.run(op)


# auxiliary functions of the sinusoidal coordinate

def varphi_ell_values(family: FamilySpec, lam: ParameterSet, ell: int, x: np.ndarray) -> np.ndarray:
    """prod_{0<=j<k<=ell-1} (eta(x+k) - eta(x+j)) / eta(k-j)"""
    x = np.asarray(x)
    out = np.ones_like(x)
    for k in range(ell):
        for j in range(k):
            out = out * (family.eta(x + k, lam) - family.eta(x + j, lam)) / family.eta(np.ones_like(x) * (k - j), lam)
    return out


def varphi_ell(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, ell: int, x: np.ndarray) -> Result[np.ndarray, DqmError]:
    def op(policy: NumericPolicy) -> np.ndarray:
        xs = np.asarray(x).astype(policy.dtype)
        values = varphi_ell_values(family, lam, ell, xs)
        product = np.ones_like(xs)
        for k in range(ell):
            for j in range(k):
                product = product * family.varphi(xs + j, lam.shifted(k - j - 1))
        ctx.check(f"{family.id}: varphi_{ell} as product of varphi", pointwise_relative_deviation(values, product))
        return values
    return ctx.run(op)


def eta_closure_check(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, alpha: int, x_hi: int,
                      tol: float = 1e-10) -> Result[float, DqmError]:
    """eta(x+a) + eta(x-a) is linear and eta(x+a) eta(x-a) quadratic in eta(x)."""
    def op(policy: NumericPolicy) -> float:
        x = np.arange(alpha, x_hi + 1, dtype=float)
        eta = family.eta(x, lam)
        up, down = family.eta(x + alpha, lam), family.eta(x - alpha, lam)
        worst = 0.0
        for name, values, degree in (("eta+eta", up + down, 1), ("eta*eta", up * down, 2)):
            fit = Polynomial.fit(eta, values, degree)
            dev = relative_deviation(fit(eta), values)
            ctx.check(f"{family.id}: {name} closure (alpha={alpha})", dev, tol)
            worst = max(worst, dev)
        return worst
    return ctx.run(op)


# casoratians of polynomials

def polynomial_functions(family: FamilySpec, lam: ParameterSet, levels: Sequence[int], lo: int, hi: int,
                         dtype: type) -> list[SampledFunction]:
    return [SampledFunction(polynomial_values(family, lam, n, lo, hi, dtype), lo, "closed-form") for n in levels]


def wp_prefactor(family: FamilySpec, lam: ParameterSet, levels: Sequence[int]) -> float:
    """(-1)^{m choose 2} kappa^{-(m choose 3)} prod_{j<k} (E(n_k) - E(n_j)) / B(0; lambda + (j-1) delta)"""
    m = len(levels)
    kappa = float(family.kappa(lam))
    out = (-1.0) ** math.comb(m, 2) * kappa ** (-math.comb(m, 3))
    E = [float(family.energy(float(n), lam)) for n in levels]
    for k in range(m):
        for j in range(k):
            out *= (E[k] - E[j]) / float(family.B(0.0, lam.shifted(j)))
    if out == 0:
        raise ZeroPrefactor(tuple(levels))
    return out


def polynomial_casoratian(family: FamilySpec, lam: ParameterSet, levels: Sequence[int], lo: int, hi: int,
                          dtype: type) -> tuple[np.ndarray, np.ndarray]:
    """W[P_{n_1}, ..., P_{n_m}](x) and the normalized P_{(n_1..n_m)}(x) on x = lo..hi."""
    if len(set(levels)) != len(levels):
        raise ZeroPrefactor(tuple(levels))
    m = len(levels)
    fs = polynomial_functions(family, lam, levels, lo, hi + max(m - 1, 0), dtype)
    W = casoratian_table(fs, lo, hi).values
    x = np.arange(lo, hi + 1).astype(dtype)
    normalized = W / (dtype(wp_prefactor(family, lam, levels)) * varphi_ell_values(family, lam, m, x))
    return W, normalized


def casoratian_of_polynomials(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, levels: Sequence[int],
                              x_hi: int) -> Result[tuple[np.ndarray, np.ndarray], DqmError]:
    def op(policy: NumericPolicy) -> tuple[np.ndarray, np.ndarray]:
        W, normalized = polynomial_casoratian(family, lam, levels, 0, x_hi, policy.dtype)
        ctx.check(f"{family.id}: P_{tuple(levels)}(0) = 1", abs(float(normalized[0]) - 1))
        return W, normalized
    return ctx.run(op)


def fitted_degree(t: np.ndarray, values: np.ndarray, tol: float = 1e-7) -> int:
    """Smallest degree whose least-squares fit reproduces the samples; -1 if none with 3 spare points."""
    t = np.asarray(t, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    scale = max(float(np.max(np.abs(values))), 1e-300)
    for degree in range(0, len(t) - 2):
        fit = Polynomial.fit(t, values, degree)
        if float(np.max(np.abs(fit(t) - values))) <= tol * scale:
            return degree
    return -1


def check_degree(t: np.ndarray, values: np.ndarray, expected: int, tol: float = 1e-7) -> int:
    if len(t) < expected + 3:
        raise DegreeMismatch(expected, -1)
    fitted = fitted_degree(t, values, tol)
    if fitted != expected:
        raise DegreeMismatch(expected, fitted)
    return fitted


def degree_report(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, levels: Sequence[int],
                  x_hi: int) -> Result[int, CasoratiError]:
    """Degree of P_{(n_1..n_m)} in eta(x; lambda + (m-1) delta) is sum n_k - m(m-1)/2."""
    def op(policy: NumericPolicy) -> int:
        m = len(levels)
        _, normalized = polynomial_casoratian(family, lam, levels, 0, x_hi, policy.dtype)
        t = family.eta(np.arange(x_hi + 1, dtype=float), lam.shifted(max(m - 1, 0)))
        return check_degree(t, normalized, sum(levels) - m * (m - 1) // 2)
    return ctx.run(op)
