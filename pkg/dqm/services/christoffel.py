"""Dual polynomials Q_x(E) and the dual Christoffel transformation induced by level deletion.

The dual recurrence reads B(x)(Q_x - Q_{x+1}) + D(x)(Q_x - Q_{x-1}) = E Q_x with
Q_0 = 1 and Q_{-1} = 0, so that P_n(eta(x)) = Q_x(E(n)). Deleting an admissible set
D not containing 0 multiplies the dual weights d_n^2 by prod_j (E(n) - E(d_j)), the
Christoffel transformation of the dual measure with nodes E(d_j).
"""
import logging
import math
from typing import Sequence
import numpy as np
from numpy.polynomial import Polynomial
from dqm.core.numeric import NumericPolicy, max_abs, pointwise_relative_deviation, relative_deviation
from dqm.core.option import Option
from dqm.core.params import GridSpec, ParameterSet
from dqm.core.result import Result
from dqm.domain.errors import DqmError, NodeZero, PreconditionViolated, ZeroLeadingCoefficient
from dqm.domain.models import CheckReport, DeletedSystem, DualTable
from dqm.families.base import FamilySpec
from dqm.infrastructure.computation_context import ComputationContext
from dqm.services.crum import comparable, tracked_levels
from dqm.services.family_services import energies, grid_potentials, ground_state_log, ground_state_values, polynomial_values


logger = logging.getLogger(__name__)


def run_dual_recurrence(B: np.ndarray, D: np.ndarray, E: np.ndarray, x_hi: int) -> np.ndarray:
    """values[x, j] = Q_x(E[j]) for x = 0..x_hi."""
    E = np.asarray(E)
    Q = np.zeros((x_hi + 1, len(E)), dtype=np.result_type(B.dtype, E.dtype))
    Q[0] = 1
    previous = np.zeros(len(E), dtype=Q.dtype)
    for x in range(x_hi):
        if B[x] == 0:
            raise ZeroLeadingCoefficient(x)
        Q[x + 1] = Q[x] + (D[x] * (Q[x] - previous) - E * Q[x]) / B[x]
        previous = Q[x]
    return Q


def dual_recurrence(ctx: ComputationContext, B: np.ndarray, D: np.ndarray, E: Sequence[float],
                    deformed: bool = False) -> Result[DualTable, DqmError]:
    def op(policy: NumericPolicy) -> DualTable:
        e = np.asarray(E, dtype=policy.dtype)
        values = run_dual_recurrence(np.asarray(B, dtype=policy.dtype), np.asarray(D, dtype=policy.dtype), e, len(B) - 1)
        return DualTable(e, values, deformed)
    return ctx.run(op)


def dual_polynomials(B: np.ndarray, D: np.ndarray, x_hi: int) -> list[Polynomial]:
    """Q_0..Q_{x_hi} as polynomials in E (float64 coefficients)."""
    E = Polynomial([0.0, 1.0])
    Q = [Polynomial([1.0])]
    previous = Polynomial([0.0])
    for x in range(x_hi):
        if B[x] == 0:
            raise ZeroLeadingCoefficient(x)
        b, d = float(B[x]), float(D[x])
        Q.append(Q[x] + (d * (Q[x] - previous) - E * Q[x]) / b)
        previous = Q[x]
    return Q


def dual_reach(B: np.ndarray, D: np.ndarray, grid: GridSpec, policy: NumericPolicy) -> int:
    """Largest x the forward dual recurrence is compared up to on a truncated grid."""
    log_w = 2 * ground_state_log(B, D)
    floor = float(np.max(log_w)) + 0.5 * math.log(policy.identity_tol)
    kept = np.flatnonzero(log_w[:comparable(grid, grid.x_max + 1)] >= floor)
    return int(kept[-1]) if kept.size else 0


def duality_check(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec) -> Result[float, DqmError]:
    """max |P_n(eta(x)) - Q_x(E(n))| over the grid, plus the dual orthogonality relation.

    On truncated grids only x in the lower half with phi_0(x)^2 above sqrt(identity_tol)
    of its maximum are compared; the recurrence in x loses the rest to rounding.
    """
    def op(policy: NumericPolicy) -> float:
        dtype = policy.dtype
        B, D = grid_potentials(family, lam, grid, policy)
        levels = tracked_levels(grid)
        x_hi = grid.x_max if grid.finite else dual_reach(B, D, grid, policy)
        E = energies(family, lam, levels, dtype)
        Q = run_dual_recurrence(B, D, E, x_hi)
        P = np.vstack([polynomial_values(family, lam, n, 0, x_hi, dtype) for n in levels]).T
        deviation = pointwise_relative_deviation(Q, P, floor=1.0)
        ctx.check(f"{family.id}: P_n(eta(x)) = Q_x(E(n))", deviation)
        if grid.finite:
            _dual_orthogonality(ctx, family, lam, B, D, grid, policy)
        return deviation
    return ctx.run(op)


def norms_squared(family: FamilySpec, lam: ParameterSet, w: np.ndarray, P: np.ndarray) -> np.ndarray:
    """d_n^2 from the closed form when available, otherwise 1 / sum_x phi_0^2 P_n^2."""
    closed = Option.all(family.d_sq(n, lam) for n in range(P.shape[0]))
    if closed.is_some:
        return np.array(closed.unwrap(), dtype=P.dtype)
    return 1 / ((P * P) @ w)


def _dual_orthogonality(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, B: np.ndarray,
                        D: np.ndarray, grid: GridSpec, policy: NumericPolicy) -> CheckReport:
    dtype = policy.dtype
    w = np.exp(2 * ground_state_log(B, D))
    P = np.vstack([polynomial_values(family, lam, n, 0, grid.x_max, dtype) for n in range(grid.x_max + 1)])
    d2 = norms_squared(family, lam, w, P)
    gram = (P.T * d2) @ P
    return ctx.check(f"{family.id}: sum_n d_n^2 Q_x Q_y = delta / phi_0(x)^2",
                     relative_deviation(gram * w[:, None], np.eye(grid.x_max + 1)), 1e-8)


# elementary christoffel transformation

def elementary_christoffel_step(polys: Sequence[Polynomial], a: float, tol: float = 1e-12) -> list[Polynomial]:
    """(P_{n+1} - A_n P_n) / (E - a) with A_n = P_{n+1}(a) / P_n(a), for every consecutive pair."""
    out = []
    for n in range(len(polys) - 1):
        pa = polys[n](a)
        scale = max(float(np.max(np.abs(polys[n].coef))), 1.0) * max(abs(a), 1.0) ** n
        if abs(pa) <= tol * scale:
            raise NodeZero(a, n)
        numerator = polys[n + 1] - (polys[n + 1](a) / pa) * polys[n]
        quotient, _ = divmod(numerator, Polynomial([-a, 1.0]))
        out.append(quotient)
    return out


def elementary_christoffel(ctx: ComputationContext, polys: Sequence[Polynomial], a: float, n: int) -> Result[Polynomial, DqmError]:
    """Kernel polynomial of degree n built from P_n and P_{n+1} at the node a."""
    def op(policy: NumericPolicy) -> Polynomial:
        return elementary_christoffel_step(polys[n:n + 2], a)[0]
    return ctx.run(op)


def multiple_christoffel(polys: Sequence[Polynomial], nodes: Sequence[float]) -> list[Polynomial]:
    out = list(polys)
    for a in nodes:
        out = elementary_christoffel_step(out, a)
    return out


# deformed duality

def _require_mu_zero(deleted: Sequence[int]) -> None:
    if 0 in deleted:
        raise PreconditionViolated("the deleted levels must not contain 0")
    if len(deleted) % 2:
        raise PreconditionViolated("the number of deleted levels must be even")


def p_factor(family: FamilySpec, lam: ParameterSet, n: int, deleted: Sequence[int]) -> float:
    """p_n = (-1)^l prod_j (E(n) - E(d_j)) / E(d_j)"""
    En = float(family.energy(float(n), lam))
    out = (-1.0) ** len(deleted)
    for d in deleted:
        Ed = float(family.energy(float(d), lam))
        out *= (En - Ed) / Ed
    return out


def deformed_dual_table(ds: DeletedSystem, E: np.ndarray) -> np.ndarray:
    return run_dual_recurrence(ds.B, ds.D, np.asarray(E, dtype=ds.B.dtype), ds.x_max)


def deformed_duality_check(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet,
                           ds: DeletedSystem) -> Result[dict, DqmError]:
    def op(policy: NumericPolicy) -> dict:
        deleted = ds.deletion.levels
        _require_mu_zero(deleted)
        surviving = ds.surviving
        dtype = ds.B.dtype.type
        E = np.array([ds.energies[n] for n in surviving], dtype=ds.B.dtype)
        Q = deformed_dual_table(ds, E)
        ctx.check("Q_x(0) = 1", max_abs(run_dual_recurrence(ds.B, ds.D, np.zeros(1, dtype=ds.B.dtype), ds.x_max) - 1))
        phi0 = ds.phis[0]
        p = {}
        worst = 0.0
        for j, n in enumerate(surviving):
            ratio = ds.phis[n] / phi0
            p[n] = p_factor(family, lam, n, deleted)
            worst = max(worst, pointwise_relative_deviation(ratio, dtype(p[n]) * Q[:, j], floor=1.0))
        ctx.check("P_n / P_0 = p_n Q_x(E(n))", worst, 1e-8)
        report = {"p": p, "duality_deviation": worst}
        if ds.x_max + 1 == len(surviving):
            report["orthogonality_deviation"] = _deformed_orthogonality(ctx, family, lam, ds, Q, policy)
        else:
            logger.debug("deformed dual orthogonality skipped: truncated grid")
        return report
    return ctx.run(op)


def deformed_weights(family: FamilySpec, lam: ParameterSet, ds: DeletedSystem, policy: NumericPolicy) -> dict[int, float]:
    """d_n^2 prod_j (E(n) - E(d_j)) for the surviving levels."""
    N = ds.x_max + ds.deletion.ell
    dtype = policy.dtype
    levels = range(N + 1)
    w = ground_state_values(family, lam, N, dtype) ** 2
    P = np.vstack([polynomial_values(family, lam, n, 0, N, dtype) for n in levels])
    d2 = norms_squared(family, lam, w, P)
    return {n: float(d2[n]) * math.prod(float(ds.energies[n] - family.energy(float(d), lam)) for d in ds.deletion.levels)
            for n in ds.surviving}


def _deformed_orthogonality(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, ds: DeletedSystem,
                            Q: np.ndarray, policy: NumericPolicy) -> float:
    """sum_{n not in D} d_n^2 prod (E(n) - E(d_j)) Q_x Q_y = prod E(d_j)^2 / phibar_0(x)^2 delta_xy"""
    weights = deformed_weights(family, lam, ds, policy)
    w = np.array([weights[n] for n in ds.surviving], dtype=Q.dtype)
    gram = (Q * w) @ Q.T
    prod_e = math.prod(float(family.energy(float(d), lam)) ** 2 for d in ds.deletion.levels)
    expected = np.diag(prod_e / ds.phis[0].astype(np.float64) ** 2)
    deviation = relative_deviation(np.asarray(gram, dtype=np.float64) / np.sqrt(np.outer(np.diag(expected), np.diag(expected))),
                                   np.eye(len(w)))
    ctx.check("deformed dual orthogonality", deviation, 1e-8)
    return deviation


def weight_transformation_report(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet,
                                 ds: DeletedSystem) -> Result[dict, DqmError]:
    def op(policy: NumericPolicy) -> dict:
        weights = deformed_weights(family, lam, ds, policy)
        factors = {n: math.prod(float(ds.energies[n] - family.energy(float(d), lam)) for d in ds.deletion.levels)
                   for n in ds.surviving}
        positive = all(v > 0 for v in weights.values())
        ctx.check("deformed dual weights positive", 0.0 if positive else 1.0, 0.5)
        report = {"weights": weights, "factors": factors, "positive": positive}
        if ds.deletion.levels and 0 not in ds.deletion.levels and ds.deletion.ell % 2 == 0 \
                and ds.x_max + 1 == len(ds.surviving):
            Q = deformed_dual_table(ds, np.array([ds.energies[n] for n in ds.surviving], dtype=ds.B.dtype))
            report["orthogonality_deviation"] = _deformed_orthogonality(ctx, family, lam, ds, Q, policy)
        return report
    return ctx.run(op)


def christoffel_cross_check(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec,
                            ds: DeletedSystem, samples: int = 7) -> Result[float, DqmError]:
    """Successive elementary transformations at E(d_j), normalized at E = 0, against the deformed recurrence."""
    def op(policy: NumericPolicy) -> float:
        _require_mu_zero(ds.deletion.levels)
        B, D = grid_potentials(family, lam, grid, policy)
        polys = dual_polynomials(B, D, grid.x_max)
        nodes = [float(family.energy(float(d), lam)) for d in ds.deletion.levels]
        kernels = multiple_christoffel(polys, nodes)
        E_max = float(family.energy(float(grid.x_max), lam))
        E = np.linspace(0.0, E_max, samples)
        Q = np.asarray(run_dual_recurrence(ds.B, ds.D, E.astype(ds.B.dtype), ds.x_max), dtype=np.float64)
        worst = 0.0
        for x, k in enumerate(kernels[:ds.x_max + 1]):
            values = k(E) / k(0.0)
            worst = max(worst, pointwise_relative_deviation(values, Q[x], floor=1.0))
        ctx.check("multiple elementary Christoffel = deformed recurrence", worst, 1e-6)
        return worst
    return ctx.run(op)
