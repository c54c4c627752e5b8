"""Deletion of the lowest excited block D = {1, ..., l}.

Everything about the deleted system is expressed through the deforming
polynomial xi_l(x), a polynomial of degree l in eta(x; lambda + (l-1) delta):

    B_l(x) = kappa^l B(x; lambda + l delta) xi_l(x) / xi_l(x+1)
    D_l(x) = kappa^l D(x; lambda + l delta) xi_l(x+1) / xi_l(x)

Odd l generally gives a non-positive system; it is only built on request.
"""
import logging
import numpy as np
from dqm.core.numeric import NumericPolicy, eigen_residual, max_abs, relative_deviation
from dqm.core.params import GridSpec, ParameterSet
from dqm.core.result import Result
from dqm.domain.errors import DqmError, NotImplementedForFamily, OutOfDomain, PositivityFailure
from dqm.domain.models import SpecialDeletedSystem
from dqm.families.base import FamilySpec
from dqm.families.catalog import XiStub
from dqm.infrastructure.computation_context import ComputationContext
from dqm.services.adler import casoratian_deletion, deletion_set, tracked_levels
from dqm.services.casorati import polynomial_casoratian
from dqm.services.crum import comparable
from dqm.services.family_services import (
    eigenfunction_values, ground_state_values, polynomial_values, sample,
)
from dqm.services.hamiltonian import (
    JacobiSystem, apply_A, apply_A_dagger, factor_matrices, nondegenerate_check, similarity_norm,
)


logger = logging.getLogger(__name__)

NORM_TOL = 1e-8
ZERO_COUNT_MAX_ELL = 4
GENERIC_AGREEMENT = "deforming polynomial form = Casoratian deletion"


# deforming polynomial

def xi_casoratian(family: FamilySpec, lam: ParameterSet, ell: int, hi: int, dtype: type) -> np.ndarray:
    """xi_l = P_(1, ..., l), the normalized Casoratian of P_1..P_l, on x = 0..hi."""
    if ell == 0:
        return np.ones(hi + 1, dtype=dtype)
    return polynomial_casoratian(family, lam, list(range(1, ell + 1)), 0, hi, dtype)[1]


def xi_values(family: FamilySpec | XiStub, lam: ParameterSet, ell: int, hi: int, dtype: type) -> np.ndarray:
    """Closed form where the family has one, the Casoratian definition otherwise."""
    if not isinstance(family, FamilySpec):
        raise NotImplementedForFamily(family.id, "xi")
    if family.has_xi:
        return sample(lambda x: family.xi(ell, x, lam), 0, hi, dtype, f"xi_{ell}")
    return xi_casoratian(family, lam, ell, hi, dtype)


def xi_ell(ctx: ComputationContext, family: FamilySpec | XiStub, lam: ParameterSet, ell: int,
           hi: int) -> Result[np.ndarray, DqmError]:
    def op(policy: NumericPolicy) -> np.ndarray:
        values = xi_values(family, lam, ell, hi, policy.dtype)
        ctx.check(f"{family.id}: xi_{ell}(0) = 1", abs(float(values[0]) - 1))
        if family.has_xi and ell > 0:
            definition = xi_casoratian(family, lam, ell, hi, policy.dtype)
            ctx.check(f"{family.id}: xi_{ell} closed form = Casoratian of P_1..P_{ell}",
                      relative_deviation(values, definition), NORM_TOL)
        return values
    return ctx.run(op)


def _shifted_potentials(family: FamilySpec, lam: ParameterSet, hi: int, dtype: type) -> tuple[np.ndarray, np.ndarray]:
    B = sample(lambda x: family.B(x, lam), 0, hi, dtype, "B")
    D = sample(lambda x: family.D(x, lam), 0, hi, dtype, "D")
    D[0] = 0
    return B, D


def _varphi_pair(family: FamilySpec, lam: ParameterSet, hi: int, dtype: type) -> tuple[np.ndarray, np.ndarray]:
    """varphi(x) and varphi(x-1) on 0..hi; the x = 0 entry of the second always meets D(0) = 0."""
    vphi = sample(lambda x: family.varphi(x, lam), 0, hi, dtype, "varphi")
    return vphi, np.concatenate([[dtype(0)], vphi[:-1]])


def xi_recurrence_check(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, ell: int,
                        hi: int) -> Result[float, DqmError]:
    """B(0; lambda+l delta) xi_{l+1}(x) = B varphi xi_l(x) - D varphi(x-1) xi_l(x+1), all at lambda + l delta."""
    def op(policy: NumericPolicy) -> float:
        dtype = policy.dtype
        lam_l = lam.shifted(ell)
        xi = xi_values(family, lam, ell, hi + 1, dtype)
        xi_next = xi_values(family, lam, ell + 1, hi, dtype)
        B, D = _shifted_potentials(family, lam_l, hi, dtype)
        vphi, vphi_m = _varphi_pair(family, lam_l, hi, dtype)
        lhs = B[0] * xi_next
        rhs = B * vphi * xi[:-1] - D * vphi_m * xi[1:]
        deviation = relative_deviation(lhs, rhs)
        ctx.check(f"{family.id}: xi_{ell + 1} from the xi_{ell} recurrence", deviation, NORM_TOL)
        relation = modified_polynomial_casoratian(family, lam, ell, ell + 1, hi, dtype)
        ctx.check(f"{family.id}: xi_{ell + 1} = P_({ell},{ell + 1})", relative_deviation(relation, xi_next), NORM_TOL)
        return deviation
    return ctx.run(op)


# modified polynomials

def modified_polynomial_values(family: FamilySpec, lam: ParameterSet, ell: int, n: int, hi: int,
                               dtype: type) -> np.ndarray:
    """P_(l,n) on 0..hi from xi_l and P_{n-l-1}(lambda + (l+1) delta); zero for n = 1..l."""
    if n == 0:
        return np.ones(hi + 1, dtype=dtype)
    if n <= ell:
        return np.zeros(hi + 1, dtype=dtype)
    lam_l = lam.shifted(ell)
    xi = xi_values(family, lam, ell, hi + 1, dtype)
    B, D = _shifted_potentials(family, lam_l, hi, dtype)
    vphi, vphi_m = _varphi_pair(family, lam_l, hi, dtype)
    p = polynomial_values(family, lam.shifted(ell + 1), n - ell - 1, 0, hi, dtype)
    p_m = np.concatenate([[dtype(0)], p[:-1]])
    return (B * xi[:-1] * vphi * p - D * xi[1:] * vphi_m * p_m) / B[0]


def modified_polynomial_casoratian(family: FamilySpec, lam: ParameterSet, ell: int, n: int, hi: int,
                                   dtype: type) -> np.ndarray:
    """P_(1, ..., l, n), the Casoratian definition."""
    if n == 0:
        return np.ones(hi + 1, dtype=dtype)
    if n <= ell:
        return np.zeros(hi + 1, dtype=dtype)
    return polynomial_casoratian(family, lam, list(range(1, ell + 1)) + [n], 0, hi, dtype)[1]


def sign_changes(values: np.ndarray, tol: float) -> int:
    """Sign changes along the grid, ignoring entries below tol * max |values|."""
    values = np.asarray(values, dtype=np.float64)
    kept = values[np.abs(values) > tol * max_abs(values)]
    return int(np.count_nonzero(np.diff(np.sign(kept)) != 0))


def _reduced_size(grid: GridSpec, ell: int) -> int:
    if ell < 0:
        raise OutOfDomain("l", "l >= 0")
    x_bar = grid.x_max - ell
    if x_bar < 1:
        raise OutOfDomain("l", f"l < x_max = {grid.x_max}")
    return x_bar


def modified_polynomials(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec, ell: int,
                         n: int) -> Result[np.ndarray, DqmError]:
    """P_(l,n) on the reduced grid, checked against its Casoratian definition."""
    def op(policy: NumericPolicy) -> np.ndarray:
        dtype = policy.dtype
        x_bar = _reduced_size(grid, ell)
        values = modified_polynomial_values(family, lam, ell, n, x_bar, dtype)
        if 1 <= n <= ell:
            return values
        name = f"{family.id}: P_({ell},{n})"
        ctx.check(f"{name}(0) = 1", abs(float(values[0]) - 1))
        ctx.check(f"{name} = Casoratian definition",
                  relative_deviation(values, modified_polynomial_casoratian(family, lam, ell, n, x_bar, dtype)),
                  NORM_TOL)
        if n > ell and ell % 2 == 0 and ell <= ZERO_COUNT_MAX_ELL:
            if grid.finite:
                count = sign_changes(values, policy.eps * 1e3)
                ctx.check(f"{name} has {n - ell} zeros on the grid", abs(count - (n - ell)), 0.0,
                          detail=f"{count} sign changes")
            else:
                count = sign_changes(values[:comparable(grid, len(values))], policy.eps * 1e3)
                ctx.check(f"{name} has at most {n - ell} zeros below the cutoff", max(count - (n - ell), 0), 0.0,
                          detail=f"{count} sign changes")
        return values
    return ctx.run(op)


# the deleted system

def special_constant(family: FamilySpec, lam: ParameterSet, ell: int, dtype: type = np.float64) -> object:
    """C(l) = sqrt(B(0; lambda+l delta)) (-1)^l kappa^{-l(l-1)/4} prod_j E(j) / sqrt(B(0; lambda+(j-1) delta))"""
    zero = dtype(0)
    kappa = dtype(family.kappa(lam))
    C = np.sqrt(dtype(family.B(zero, lam.shifted(ell)))) * dtype((-1) ** ell) * kappa ** (-dtype(ell * (ell - 1)) / 4)
    for j in range(1, ell + 1):
        C = C * dtype(family.energy(dtype(j), lam)) / np.sqrt(dtype(family.B(zero, lam.shifted(j - 1))))
    return C


def _d_sq(family: FamilySpec, lam: ParameterSet, n: int, grid: GridSpec, dtype: type) -> object:
    """d_n^2 from the closed form, or from the sum over the grid."""
    def summed() -> object:
        return 1 / np.sum(eigenfunction_values(family, lam, n, grid.x_max, dtype) ** 2)
    return dtype(family.d_sq(n, lam).unwrap_or_else(summed))


def closed_special_norm(family: FamilySpec, lam: ParameterSet, grid: GridSpec, ell: int, n: int,
                        dtype: type = np.float64) -> object:
    """d_{l,n}^2 = d_n^2 prod_{j=1..l} (E(n) - E(j)) / E(j)^2"""
    En = dtype(family.energy(dtype(n), lam))
    out = _d_sq(family, lam, n, grid, dtype)
    for j in range(1, ell + 1):
        Ej = dtype(family.energy(dtype(j), lam))
        out = out * (En - Ej) / Ej ** 2
    return out


def special_levels(grid: GridSpec, ell: int) -> list[int]:
    """0 and the surviving levels above the deleted block."""
    if ell == 0:
        return tracked_levels(grid, deletion_set(()))
    return [n for n in tracked_levels(grid, deletion_set(range(1, ell + 1))) if n == 0 or n > ell]


def build_special_system(family: FamilySpec, lam: ParameterSet, grid: GridSpec, ell: int, policy: NumericPolicy,
                         allow_odd: bool = False) -> SpecialDeletedSystem:
    dtype = policy.dtype
    x_bar = _reduced_size(grid, ell)
    xi = xi_values(family, lam, ell, x_bar + 1, dtype)
    margin = float(np.min(xi))
    hermitian = margin > 0 and ell % 2 == 0
    if (ell % 2 == 1 and not allow_odd) or (ell % 2 == 0 and not hermitian):
        raise PositivityFailure(ell, margin)
    lam_l = lam.shifted(ell)
    kappa_l = dtype(family.kappa(lam)) ** ell
    B_l, D_l = _shifted_potentials(family, lam_l, x_bar, dtype)
    B = kappa_l * B_l * xi[:-1] / xi[1:]
    D = kappa_l * D_l * xi[1:] / xi[:-1]
    B[-1] = 0
    C = special_constant(family, lam, ell, dtype)
    phi0 = (C / np.sqrt(B_l[0]) * ground_state_values(family, lam_l, x_bar, dtype)
            / np.sqrt(np.abs(xi[:-1] * xi[1:])))
    levels = special_levels(grid, ell)
    polynomials = {n: modified_polynomial_values(family, lam, ell, n, x_bar, dtype) for n in levels}
    norms = {n: closed_special_norm(family, lam, grid, ell, n, dtype) for n in levels}
    logger.debug("%s: l=%d deleted system on 0..%d, xi margin %.3e", family.id, ell, x_bar, margin)
    return SpecialDeletedSystem(ell, xi, B, D, phi0, C, polynomials, norms, hermitian)


def special_eigenfunction(family: FamilySpec, lam: ParameterSet, sds: SpecialDeletedSystem, n: int) -> np.ndarray:
    """phi_{l,n} = phi_{l,0} (-1)^l prod_j (E(n) - E(j)) / E(j) P_(l,n)"""
    dtype = sds.phi0.dtype.type
    En = dtype(family.energy(dtype(n), lam))
    factor = dtype((-1) ** sds.ell)
    for j in range(1, sds.ell + 1):
        Ej = dtype(family.energy(dtype(j), lam))
        factor = factor * (En - Ej) / Ej
    return sds.phi0 * factor * sds.polynomials[n]


def _energies(family: FamilySpec, lam: ParameterSet, sds: SpecialDeletedSystem) -> dict[int, float]:
    return {n: float(family.energy(float(n), lam)) for n in sds.polynomials}


def _up_to_sign(actual: np.ndarray, expected: np.ndarray) -> float:
    return min(relative_deviation(actual, expected), relative_deviation(actual, -expected))


def _system_checks(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec,
                   sds: SpecialDeletedSystem, policy: NumericPolicy) -> None:
    dtype, x_bar, ell = policy.dtype, sds.x_max, sds.ell
    name = f"{family.id} l={ell}"
    energies = _energies(family, lam, sds)
    sys = JacobiSystem.from_potentials(sds.B, sds.D, zero_tol=policy.identity_tol)
    top = comparable(grid, x_bar + 1)
    for n in sds.polynomials:
        v = special_eigenfunction(family, lam, sds, n)
        ctx.check(f"{name}: H_l phi_(l,{n}) = E({n}) phi_(l,{n})",
                  eigen_residual(sys.apply(v.copy())[:top], dtype(energies[n]), v[:top], sys.norm), NORM_TOL)
        P = modified_polynomial_values(family, lam, ell, n, x_bar + 1, dtype)
        P_m = np.concatenate([P[:1], P[:x_bar]])
        similarity = sds.B * (P[:-1] - P[1:]) + sds.D * (P[:-1] - P_m)
        rows = x_bar + 1 if grid.finite else x_bar
        ctx.check(f"{name}: H~_l P_(l,{n}) = E({n}) P_(l,{n})",
                  eigen_residual(similarity[:rows], dtype(energies[n]), P[:rows], similarity_norm(sds.B, sds.D)), NORM_TOL)
    expected = np.array(sorted(energies.values()))
    values = sys.eigensystem().values
    count = len(expected) if grid.finite else min(len(expected), sys.dim // 2)
    residual = np.abs(values[:count] - expected[:count]) / np.maximum(np.abs(expected[:count]), 1.0)
    ctx.check(f"{name}: spectrum = E(0), E(n > l)", float(np.max(residual)) if count else 0.0, NORM_TOL)
    nondegenerate_check(ctx, name, values, None if grid.finite else count)
    levels = list(sds.polynomials)
    rows = np.vstack([sds.polynomials[n] for n in levels])
    weight = sds.phi0 ** 2
    gram = (rows * weight) @ rows.T
    d = np.sqrt(np.array([sds.norms[n] for n in levels], dtype=dtype))
    normalized = gram * np.outer(d, d)
    if grid.finite:
        deviation = max_abs(normalized - np.eye(len(levels)))
    else:
        deviation = max_abs(np.diag(normalized) - 1)
    ctx.check(f"{name}: sum phi_(l,0)^2 P_(l,n) P_(l,m) = delta_nm / d_(l,n)^2", deviation, NORM_TOL)


def _compare_with_adler(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec,
                        sds: SpecialDeletedSystem, policy: NumericPolicy) -> float:
    ds = deletion_set(range(1, sds.ell + 1))
    generic = casoratian_deletion(family, lam, grid, ds, policy)
    worst = max(relative_deviation(sds.B, generic.B), relative_deviation(sds.D, generic.D))
    for n, v in generic.phis.items():
        if n in sds.polynomials:
            worst = max(worst, _up_to_sign(special_eigenfunction(family, lam, sds, n), v))
    ctx.check(f"{family.id} l={sds.ell}: {GENERIC_AGREEMENT} of D={list(ds.levels)}",
              worst, NORM_TOL)
    return worst


def build_special(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec, ell: int,
                  allow_odd: bool = False) -> Result[SpecialDeletedSystem, DqmError]:
    def op(policy: NumericPolicy) -> SpecialDeletedSystem:
        sds = build_special_system(family, lam, grid, ell, policy, allow_odd)
        name = f"{family.id} l={ell}"
        x_bar, lam_l = sds.x_max, lam.shifted(ell)
        ctx.check(f"{name}: xi_l(0) = 1", abs(float(sds.xi[0]) - 1))
        ctx.check(f"{name}: D_l(0) = 0", abs(float(family.D(policy.dtype(0), lam_l))))
        if grid.finite:
            natural = float(family.B(policy.dtype(x_bar), lam_l))
            ctx.check(f"{name}: B_l(x_max) = 0", abs(natural) / max(max_abs(sds.B), 1.0))
        if not sds.hermitian:
            logger.warning("%s: l=%d is odd, the system is not hermitian; spectral checks skipped", family.id, ell)
            return sds
        for n, P in sds.polynomials.items():
            ctx.check(f"{name}: P_(l,{n})(0) = 1", abs(float(P[0]) - 1))
        _system_checks(ctx, family, lam, grid, sds, policy)
        if ell > 0:
            _compare_with_adler(ctx, family, lam, grid, sds, policy)
        return sds
    return ctx.run(op)


# shift operators and norms

def shift_operator_checks(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec, ell: int,
                          n: int) -> Result[dict, DqmError]:
    """A_l maps phi_(l,0) P_(l,n) to f_(l,n) phi_{n-l-1}(lambda + (l+1) delta), and A_l A_l^dagger is shape invariant."""
    def op(policy: NumericPolicy) -> dict:
        if n <= ell:
            raise OutOfDomain("n", f"n >= l + 1 = {ell + 1}")
        dtype = policy.dtype
        sds = build_special_system(family, lam, grid, ell, policy)
        if n not in sds.polynomials:
            raise OutOfDomain("n", f"n <= {max(sds.polynomials)}")
        x_bar, name = sds.x_max, f"{family.id} l={ell}"
        lam_l, lam_up = lam.shifted(ell), lam.shifted(ell + 1)
        zero = dtype(0)
        kappa = dtype(family.kappa(lam))
        En = dtype(family.energy(dtype(n), lam))
        f_n = dtype(family.B(zero, lam)) * (1 - polynomial_values(family, lam, n, 1, 1, dtype)[0])
        b_prev = En / f_n
        scale = kappa ** (-dtype(ell) / 2) * sds.C / dtype(family.B(zero, lam_l))
        f_ln, b_ln = f_n * scale, b_prev / scale
        phi = sds.phi0 * sds.polynomials[n]
        phi_up = eigenfunction_values(family, lam_up, n - ell - 1, x_bar, dtype)
        reports = [
            ctx.check(f"{name}: A_l phi_(l,0) P_(l,{n}) = f_(l,{n}) phi_{n - ell - 1}(lambda+(l+1)delta)",
                      relative_deviation(apply_A(sds.B, sds.D, phi)[:x_bar], f_ln * phi_up[:x_bar]), NORM_TOL),
        ]
        top = x_bar + 1 if grid.finite else x_bar
        reports.append(ctx.check(
            f"{name}: A_l^dagger phi_{n - ell - 1}(lambda+(l+1)delta) = b_(l,{n - 1}) phi_(l,0) P_(l,{n})",
            relative_deviation(apply_A_dagger(sds.B, sds.D, phi_up)[:top], b_ln * phi[:top]), NORM_TOL))
        reports.append(ctx.check(f"{name}: f_(l,{n}) b_(l,{n - 1}) = E({n})", abs(float((f_ln * b_ln - En) / En))))
        relation = (kappa ** (ell + 1) * dtype(family.energy(dtype(n - ell - 1), lam_up))
                    + dtype(family.energy(dtype(ell + 1), lam)))
        reports.append(ctx.check(f"{name}: E({n}) = kappa^(l+1) E({n - ell - 1}; lambda+(l+1)delta) + E(l+1)",
                                 abs(float((relation - En) / En))))
        A, A_dag = factor_matrices(sds.B, sds.D, policy.positivity_tol)
        partner = (A @ A_dag)[:x_bar, :x_bar]
        B_up, D_up = _shifted_potentials(family, lam_up, x_bar - 1, dtype)
        shape = np.diag(kappa ** (ell + 1) * (B_up + D_up) + dtype(family.energy(dtype(ell + 1), lam)))
        if x_bar > 1:
            off = kappa ** (ell + 1) * np.sqrt(B_up[:-1] * D_up[1:])
            shape = shape - np.diag(off, 1) - np.diag(off, -1)
        reports.append(ctx.check(f"{name}: A_l A_l^dagger = kappa^(l+1) H(lambda+(l+1)delta) + E(l+1)",
                                 relative_deviation(partner, shape), NORM_TOL))
        return {
            "ell": ell,
            "n": n,
            "f": float(f_ln),
            "b": float(b_ln),
            "energy": float(En),
            "checks": [r.to_dict() for r in reports],
            "passed": all(r.passed for r in reports),
        }
    return ctx.run(op)


def special_norms(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec, ell: int,
                  n: int) -> Result[float, DqmError]:
    """d_(l,n)^2, cross-checked by summing phi_(l,0)^2 P_(l,n)^2 when l is even."""
    def op(policy: NumericPolicy) -> float:
        if 1 <= n <= ell:
            raise OutOfDomain("n", f"n = 0 or n >= {ell + 1}")
        dtype = policy.dtype
        closed = closed_special_norm(family, lam, grid, ell, n, dtype)
        if ell % 2 == 0:
            x_bar = _reduced_size(grid, ell)
            sds = build_special_system(family, lam, grid, ell, policy)
            P = modified_polynomial_values(family, lam, ell, n, x_bar, dtype)
            direct = np.sum(sds.phi0 ** 2 * P ** 2)
            ctx.check(f"{family.id} l={ell}: d_(l,{n})^2 sum phi_(l,0)^2 P_(l,{n})^2 = 1",
                      abs(float(closed * direct) - 1), NORM_TOL)
        return float(closed)
    return ctx.run(op)


def special_report(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec, ell: int,
                   allow_odd: bool = False) -> Result[dict, DqmError]:
    def op(policy: NumericPolicy) -> dict:
        sds = build_special(ctx, family, lam, grid, ell, allow_odd).unwrap()
        agreement = [c.deviation for c in ctx.checks if GENERIC_AGREEMENT in c.name]
        energies = _energies(family, lam, sds)
        expected = sorted(energies.values())
        after: list[float] = []
        residual = float("nan")
        if sds.hermitian:
            after = JacobiSystem.from_potentials(sds.B, sds.D).eigensystem().values.tolist()
            count = len(expected) if grid.finite else min(len(expected), len(after) // 2)
            residual = float(np.max(np.abs(np.array(after[:count]) - np.array(expected[:count])))) if count else 0.0
        return {
            "family": family.id,
            "parameters": lam.describe(),
            "D": list(range(1, ell + 1)),
            "admissible": ell % 2 == 0,
            "mu": 0,
            "path": "deforming-polynomial",
            "ell": ell,
            "C_l_lambda": float(sds.C),
            "xi_positivity_margin": float(np.min(sds.xi)),
            "generic_agreement": max(agreement) if agreement else None,
            "hermitian": sds.hermitian,
            "reason": "" if sds.hermitian else f"odd l={ell}: d_(l,0)^2 is negative and the weight is not positive",
            "spectrum_after": after,
            "expected_after": expected,
            "max_residual": residual,
            "norms": [{"n": n, "d_sq": float(d)} for n, d in sds.norms.items()],
            "B": np.asarray(sds.B, dtype=np.float64).tolist(),
            "D_potential": np.asarray(sds.D, dtype=np.float64).tolist(),
        }
    return ctx.run(op)
