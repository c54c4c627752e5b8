"""Family-level operations: parameter validation, sampling of closed forms, polynomial tables."""
import logging
import math
from typing import Iterable, Mapping
import numpy as np
from numpy.polynomial import Polynomial
from dqm.core.numeric import NumericPolicy, pointwise_relative_deviation, relative_deviation
from dqm.core.params import GridSpec, ParameterSet
from dqm.core.result import Result
from dqm.domain.errors import (
    DqmError, EvaluationSingularity, NegativePotential, NotImplementedForFamily, OutOfDomain,
    ParameterError, TruncationFailure, UnknownFamily,
)
from dqm.domain.models import PolynomialTable, PotentialPair
from dqm.families.base import FamilySpec
from dqm.families.catalog import default_catalog
from dqm.infrastructure.computation_context import ComputationContext


logger = logging.getLogger(__name__)

CUTOFF_MIN = 8
CUTOFF_LIMIT = 400


def lookup_family(family_id: str) -> Result[FamilySpec, UnknownFamily]:
    return default_catalog().lookup(family_id).ok_or(UnknownFamily(family_id))


def parse_parameters(family: FamilySpec, overrides: Mapping[str, float] | None = None) -> Result[ParameterSet, ParameterError]:
    try:
        return Result.ok(family.make_parameters(overrides))
    except ParameterError as e:
        return Result.err(e)
    except ValueError as e:
        return Result.err(OutOfDomain("q", str(e)))


def validate_parameters(ctx: ComputationContext, family_id: str, lam: ParameterSet,
                        grid: GridSpec | None = None) -> Result[ParameterSet, ParameterError]:
    def op(policy: NumericPolicy) -> ParameterSet:
        family = lookup_family(family_id).unwrap()
        for c in family.constraints(lam):
            if not c.holds:
                raise OutOfDomain(c.parameter, c.text)
        if grid is not None and family.finite and grid.x_max != family.size(lam):
            raise OutOfDomain("N", f"grid x_max={grid.x_max} must equal N={family.size(lam)}")
        return lam
    return ctx.run(op)


# sampling

def sample(fn, lo: int, hi: int, dtype: type, quantity: str,
           required: tuple[int, int] | None = None) -> np.ndarray:
    """Evaluate a closed form on x = lo..hi, reporting the first pole.

    With `required`, only poles inside that range are errors; the rest read as nan.
    """
    x = np.arange(lo, hi + 1).astype(dtype)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        values = np.asarray(fn(x), dtype=dtype) * np.ones_like(x)
    if required is not None:
        outside = (x < required[0]) | (x > required[1])
        values[outside & ~np.isfinite(values)] = np.nan
        bad = np.flatnonzero(~np.isfinite(values) & ~outside)
    else:
        bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise EvaluationSingularity(quantity, lo + int(bad[0]))
    return values


def potentials(family: FamilySpec, lam: ParameterSet, grid: GridSpec, policy: NumericPolicy,
               lo: int = -1, extra: int = 1) -> PotentialPair:
    """B and D on [lo, x_max + extra], positivity verified on the grid.

    Poles outside [0, x_max] are kept as nan.
    """
    hi = grid.x_max + extra
    inside = (0, grid.x_max)
    B = sample(lambda x: family.B(x, lam), lo, hi, policy.dtype, "B", inside)
    D = sample(lambda x: family.D(x, lam), lo, hi, policy.dtype, "D", inside)
    pair = PotentialPair(lo, B, D)
    b, d = pair.window(0, grid.x_max)
    tol = policy.positivity_tol
    if abs(d[0]) > tol:
        raise NegativePotential("D", 0, float(d[0]))
    d[0] = 0
    if grid.finite:
        if abs(b[-1]) > tol * max(1.0, float(np.max(np.abs(b)))):
            raise NegativePotential("B", grid.x_max, float(b[-1]))
        b[-1] = 0
    for name, values, start in (("B", b[:-1], 0), ("D", d[1:], 1)):
        below = np.flatnonzero(~(values > 0))
        if below.size:
            x = start + int(below[0])
            raise NegativePotential(name, x, float(values[below[0]]))
    return pair


def grid_potentials(family: FamilySpec, lam: ParameterSet, grid: GridSpec, policy: NumericPolicy) -> tuple[np.ndarray, np.ndarray]:
    """B, D on [0, x_max]; truncated grids close with B(x_max) = 0."""
    b, d = potentials(family, lam, grid, policy, lo=0, extra=0).window(0, grid.x_max)
    b = b.copy()
    b[-1] = 0
    return b, d.copy()


def eval_potentials(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec,
                    ell_max: int = 0) -> Result[PotentialPair, DqmError]:
    return ctx.run(lambda policy: potentials(family, lam, grid, policy, lo=-1, extra=ell_max + 1))


def eval_energy(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, n: int) -> Result[float, DqmError]:
    return ctx.run(lambda policy: policy.dtype(family.energy(policy.dtype(n), lam)))


def eval_sinusoidal(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, x: int, s: int = 0) -> Result[float, DqmError]:
    return ctx.run(lambda policy: policy.dtype(family.eta(policy.dtype(x), lam.shifted(s))))


def energies(family: FamilySpec, lam: ParameterSet, levels: Iterable[int], dtype: type) -> np.ndarray:
    return np.asarray(family.energy(np.asarray(list(levels)).astype(dtype), lam), dtype=dtype)


def polynomial_values(family: FamilySpec, lam: ParameterSet, n: int, lo: int, hi: int, dtype: type) -> np.ndarray:
    """P_n(eta(x)) from the hypergeometric form on x = lo..hi (extended points included)."""
    return sample(lambda x: family.polynomial(n, x, lam), lo, hi, dtype, f"P_{n}")


def ground_state_log(B: np.ndarray, D: np.ndarray) -> np.ndarray:
    """log phi_0 from phi_0(x)^2 = prod_{y<x} B(y)/D(y+1)."""
    steps = 0.5 * (np.log(B[:-1]) - np.log(D[1:]))
    return np.concatenate([[B.dtype.type(0)], np.cumsum(steps)])


def ground_state_values(family: FamilySpec, lam: ParameterSet, hi: int, dtype: type) -> np.ndarray:
    """phi_0 on 0..hi from the B/D product, zero past a vanishing B (finite families)."""
    B = sample(lambda x: family.B(x, lam), 0, hi, dtype, "B")
    D = sample(lambda x: family.D(x, lam), 0, hi, dtype, "D")
    out = np.ones(hi + 1, dtype=dtype)
    for x in range(1, hi + 1):
        if out[x - 1] == 0 or B[x - 1] == 0:
            out[x] = 0
        else:
            out[x] = out[x - 1] * np.sqrt(B[x - 1] / D[x])
    return out


def eigenfunction_values(family: FamilySpec, lam: ParameterSet, n: int, hi: int, dtype: type) -> np.ndarray:
    """phi_n = phi_0 P_n on 0..hi."""
    phi0 = ground_state_values(family, lam, hi, dtype)
    return phi0 * polynomial_values(family, lam, n, 0, hi, dtype)


# truncation

def choose_cutoff(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, monitored: int = 6,
                  limit: int = CUTOFF_LIMIT) -> Result[GridSpec, TruncationFailure]:
    def op(policy: NumericPolicy) -> GridSpec:
        if family.finite:
            return family.grid(lam)
        dtype = policy.dtype
        B = sample(lambda x: family.B(x, lam), 0, limit, dtype, "B")
        D = sample(lambda x: family.D(x, lam), 0, limit, dtype, "D")
        log_w0 = 2 * ground_state_log(B, D)
        x = np.arange(limit + 1).astype(dtype)
        worst = np.zeros(limit + 1, dtype=dtype)
        for n in range(monitored + 1):
            with np.errstate(all="ignore"):
                p = np.asarray(family.polynomial(n, x, lam), dtype=dtype)
                log_w = log_w0 + 2 * np.log(np.abs(p))
                log_total = np.logaddexp.accumulate(log_w)
                ratio = np.exp(log_w - log_total)
            # overflowing samples never qualify
            worst = np.maximum(worst, np.where(np.isnan(ratio), 1, ratio))
        ok = np.flatnonzero((worst < policy.tail_tol) & (np.arange(limit + 1) >= CUTOFF_MIN))
        if not ok.size:
            raise TruncationFailure(family.id, limit)
        cutoff = int(ok[0])
        logger.debug("%s: truncating at x=%d (tail %.3e)", family.id, cutoff, float(worst[cutoff]))
        return GridSpec.truncated(cutoff, tail=float(worst[cutoff]), monitored=monitored)
    return ctx.run(op)


def grid_for(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet) -> Result[GridSpec, DqmError]:
    if family.finite:
        return ctx.run(lambda policy: family.grid(lam))
    return choose_cutoff(ctx, family, lam)


# polynomial tables

def polynomial_table(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, levels: Iterable[int],
                     grid: GridSpec) -> Result[PolynomialTable, DqmError]:
    """Rows P_n(eta(x)) on the grid, computed through duality and checked against the series."""
    levels = tuple(levels)

    def op(policy: NumericPolicy) -> PolynomialTable:
        from dqm.services.christoffel import run_dual_recurrence
        dtype = policy.dtype
        B = sample(lambda x: family.B(x, lam), 0, grid.x_max, dtype, "B")
        D = sample(lambda x: family.D(x, lam), 0, grid.x_max, dtype, "D")
        E = energies(family, lam, levels, dtype)
        table = run_dual_recurrence(B, D, E, grid.x_max).T.copy()
        series = np.vstack([polynomial_values(family, lam, n, 0, grid.x_max, dtype) for n in levels])
        ctx.check(f"{family.id}: recurrence vs series", pointwise_relative_deviation(table, series, floor=1.0))
        ctx.check(f"{family.id}: P_n(0) = 1", float(np.max(np.abs(table[:, 0] - 1))) if levels else 0.0)
        return PolynomialTable(levels, 0, table, normalized=True)
    return ctx.run(op)


# shift structure

def closed_leading_coefficient(family: FamilySpec, lam: ParameterSet, n: int) -> float:
    """c_n = (-1)^n kappa^{-n(n-1)/2} prod_j (E(n) - E(j)) / (eta(j+1) B(0; lambda + j delta))"""
    kappa = float(family.kappa(lam))
    eta = np.array([family.eta(float(j), lam) for j in range(1, n + 1)], dtype=float)
    En = float(family.energy(float(n), lam))
    c = (-1) ** n * kappa ** (-n * (n - 1) / 2) / float(np.prod(eta))
    for j in range(n):
        c *= (En - float(family.energy(float(j), lam))) / float(family.B(0.0, lam.shifted(j)))
    return c


def leading_coefficient(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, n: int) -> Result[float, DqmError]:
    """c_n of P_n(eta) = c_n eta^n + ..., closed product cross-checked with a fit in eta."""
    def op(policy: NumericPolicy) -> float:
        eta = np.array([family.eta(float(j), lam) for j in range(1, n + 1)], dtype=float)
        c = closed_leading_coefficient(family, lam, n)
        x = np.arange(n + 3, dtype=float)
        fit = Polynomial.fit(family.eta(x, lam), family.polynomial(n, x, lam), n).convert()
        ctx.check(f"{family.id}: leading coefficient c_{n}", abs(fit.coef[-1] - c) / abs(c), 1e-6)
        if n == 1:
            relation = float(family.B(0.0, lam)) / float(family.energy(1.0, lam)) + 1 / (c * eta[0])
            ctx.check(f"{family.id}: B(0)/E(1) = -1/(c_1 eta(1))", abs(relation))
        return c
    return ctx.run(op)


def forward_shift(family: FamilySpec, lam: ParameterSet, values: np.ndarray, x_lo: int) -> np.ndarray:
    """F(lambda) = B(0) phi(x)^-1 (1 - e^d) applied to samples on x_lo..; one point shorter."""
    x = np.arange(x_lo, x_lo + len(values) - 1).astype(values.dtype)
    return family.B(np.zeros(1, dtype=values.dtype), lam)[0] / family.varphi(x, lam) * (values[:-1] - values[1:])


def backward_shift(family: FamilySpec, lam: ParameterSet, values: np.ndarray, x_lo: int) -> np.ndarray:
    """B(lambda) = B(0)^-1 (B(x) - D(x) e^-d) phi(x) applied to samples on x_lo..; one point shorter."""
    x = np.arange(x_lo + 1, x_lo + len(values)).astype(values.dtype)
    b0 = family.B(np.zeros(1, dtype=values.dtype), lam)[0]
    return (family.B(x, lam) * family.varphi(x, lam) * values[1:]
            - family.D(x, lam) * family.varphi(x - 1, lam) * values[:-1]) / b0


def shift_factors(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, n: int,
                  grid: GridSpec) -> Result[tuple[float, float], DqmError]:
    """(f_n, b_{n-1}) read off the forward and backward shift relations, with both relations checked."""
    def op(policy: NumericPolicy) -> tuple[float, float]:
        dtype = policy.dtype
        hi = grid.x_max
        p_n = polynomial_values(family, lam, n, 0, hi + 1, dtype)
        p_shift = polynomial_values(family, lam.shifted(1), n - 1, -1, hi, dtype)
        f_n = family.B(dtype(0), lam) * (1 - p_n[1])
        b_prev = backward_shift(family, lam, p_shift[:2], -1)[0]
        forward = forward_shift(family, lam, p_n, 0)
        ctx.check(f"{family.id}: F P_{n} = f_{n} P_{n - 1}(lambda+delta)",
                  relative_deviation(forward, f_n * p_shift[1:]))
        backward = backward_shift(family, lam, p_shift, -1)
        ctx.check(f"{family.id}: B P_{n - 1}(lambda+delta) = b_{n - 1} P_{n}",
                  relative_deviation(backward, b_prev * p_n[:-1]))
        energy = family.energy(dtype(n), lam)
        ctx.check(f"{family.id}: f_{n} b_{n - 1} = E({n})", abs(f_n * b_prev - energy) / abs(energy))
        return float(f_n), float(b_prev)
    return ctx.run(op)


def phi0_closed_form_check(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet,
                           grid: GridSpec) -> Result[float, NotImplementedForFamily]:
    def op(policy: NumericPolicy) -> float:
        closed = family.phi0_sq(np.arange(grid.x_max + 1), lam)
        if closed.is_none:
            raise NotImplementedForFamily(family.id, "phi0_sq")
        product = ground_state_values(family, lam, grid.x_max, np.float64) ** 2
        return ctx.check(f"{family.id}: phi_0^2 closed form", pointwise_relative_deviation(closed.unwrap(), product),
                         1e-9).deviation
    return ctx.run(op)


def norm_factor(family: FamilySpec, lam: ParameterSet, n: int, deleted: Iterable[int]) -> float:
    """prod_j (E(n) - E(d_j))"""
    En = float(family.energy(float(n), lam))
    return math.prod(En - float(family.energy(float(d), lam)) for d in deleted)
