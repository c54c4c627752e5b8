"""Crum chains: repeated deletion of the ground state by H^[s+1] = A^[s] A^[s]^dagger + E(s).

States are immutable snapshots; every step re-derives B^[s+1], D^[s+1] from the
new ground state phi^[s+1]_{s+1} and keeps the history of earlier potentials for
the determinant formulas.
"""
import logging
from typing import Iterable
import numpy as np
from numpy.polynomial import Polynomial
from dqm.core.numeric import NumericPolicy, cosine_similarity, max_abs, relative_deviation
from dqm.core.params import GridSpec, ParameterSet
from dqm.core.result import Result
from dqm.domain.errors import AffineCheckFailed, DqmError, NonPositivePotential, OutOfDomain, ZeroDenominator
from dqm.domain.models import CrumChainState, WaveFunction
from dqm.families.base import FamilySpec
from dqm.infrastructure.computation_context import ComputationContext
from dqm.services.casorati import SampledFunction, casoratian_table
from dqm.services.family_services import (
    closed_leading_coefficient, eigenfunction_values, energies, grid_potentials, ground_state_values,
    polynomial_values, sample,
)
from dqm.services.hamiltonian import JacobiSystem, apply_A, apply_A_dagger, build_system, eigenvector_alignment, factor_matrices


logger = logging.getLogger(__name__)

NORM_TOL = 1e-8
TAIL_NOISE = 1e-13


def tracked_levels(grid: GridSpec) -> range:
    if grid.finite:
        return range(grid.x_max + 1)
    return range(min(grid.x_max, int(grid.meta.get("monitored", 6))) + 1)


def comparable(grid: GridSpec, size: int) -> int:
    """Points free of truncation effects: all of them on finite grids, the lower half otherwise."""
    return size if grid.finite else size // 2


def trusted_points(grid: GridSpec) -> int | None:
    """Where a Crum step may cut a truncated system; None on finite grids."""
    return None if grid.finite else comparable(grid, grid.x_max + 1)


def initial_state(family: FamilySpec, lam: ParameterSet, grid: GridSpec, policy: NumericPolicy,
                  levels: Iterable[int] | None = None) -> CrumChainState:
    """Closed-form phi_n on finite grids; on truncated grids the eigenvectors of the truncated H, scaled to them."""
    B, D = grid_potentials(family, lam, grid, policy)
    levels = tracked_levels(grid) if levels is None else levels
    phis = {n: eigenfunction_values(family, lam, n, grid.x_max, policy.dtype) for n in levels}
    if not grid.finite:
        es = JacobiSystem.from_potentials(B, D, zero_tol=policy.identity_tol).eigensystem()
        for n, closed in phis.items():
            vector = es.vectors[:, n].astype(policy.dtype)
            phis[n] = vector * np.dot(vector, closed)
    return CrumChainState(0, B, D, phis, float(family.energy(0.0, lam)))


def _empty(state: CrumChainState) -> CrumChainState:
    return CrumChainState(state.s + 1, state.B[:0], state.D[:0], {}, state.energy_offset,
                          state.history + ((state.B, state.D),))


def crum_step_values(state: CrumChainState, trusted: int | None = None) -> CrumChainState:
    """One Crum step on raw arrays; raises NonPositivePotential on a sign flip of the new ground state.

    With `trusted` (truncated grids), the new system ends at the first x >= trusted where
    the new ground state changes sign or drops to rounding level.
    """
    B, D, s, X = state.B, state.D, state.s, state.x_max
    if X <= 0:
        return _empty(state)
    if s + 1 not in state.phis:
        raise OutOfDomain("s", f"level {s + 1} is not tracked on this grid")
    phis = {n: apply_A(B, D, v)[:X] for n, v in state.phis.items() if n > s}
    g = phis[s + 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = g[1:] / g[:-1]
    bad = np.flatnonzero(~(np.isfinite(ratio) & (ratio > 0)))
    if trusted is not None:
        noise = np.flatnonzero(np.abs(g[1:]) < TAIL_NOISE * max_abs(g))
        edge = np.concatenate([bad, noise])
        edge = edge[edge >= trusted]
        if edge.size:
            size = int(edge.min()) + 1
            logger.debug("crum step %d -> %d: truncated tail cut at x=%d", s, s + 1, size - 1)
            phis = {n: v[:size] for n, v in phis.items()}
            ratio = ratio[:size - 1]
            bad = bad[bad < size - 1]
    if bad.size:
        raise NonPositivePotential(s + 1, int(bad[0]), float(ratio[bad[0]]))
    size = len(ratio) + 1
    p = B[1:] * D[1:]
    root = np.sqrt(np.clip(p[:size - 1], 0, None))
    B_new = np.zeros(size, dtype=B.dtype)
    D_new = np.zeros(size, dtype=D.dtype)
    B_new[:-1] = root * ratio
    D_new[1:] = root / ratio
    for name, values, start in (("B", B_new[:-1], 0), ("D", D_new[1:], 1)):
        below = np.flatnonzero(~(values > 0))
        if below.size:
            raise NonPositivePotential(s + 1, start + int(below[0]), float(values[below[0]]))
    v = state.phis[s + 1]
    Av = apply_A(B, D, v)
    gap = float(np.dot(Av, Av) / np.dot(v, v))
    margin = min(float(np.min(B_new[:-1])) if size > 1 else np.inf, float(np.min(D_new[1:])) if size > 1 else np.inf)
    logger.debug("crum step %d -> %d: x_max=%d, positivity margin %.3e", s, s + 1, size - 1, margin)
    return CrumChainState(s + 1, B_new, D_new, phis, state.energy_offset + gap, state.history + ((B, D),))


def _step_checks(ctx: ComputationContext, before: CrumChainState, after: CrumChainState) -> None:
    X = before.x_max
    if X <= 0:
        return
    m = after.x_max + 1
    rows = X if m == X else m - 1
    A, _ = factor_matrices(before.B, before.D, ctx.policy.positivity_tol)
    A = A[:X]
    H0 = JacobiSystem.from_potentials(before.B, before.D, before.energy_offset).matrix()
    H1 = JacobiSystem.from_potentials(after.B, after.D, after.energy_offset).matrix()
    scale = max(max_abs(H0), 1.0) * max(max_abs(A), 1.0)
    ctx.check(f"crum step {after.s}: A H^[{before.s}] = H^[{after.s}] A",
              max_abs((A @ H0)[:rows] - (H1 @ A[:m])[:rows]) / scale)
    AAt = A @ A.T + before.energy_offset * np.eye(X)
    ctx.check(f"crum step {after.s}: H^[{after.s}] = A A^dagger + E({before.s})",
              max_abs(AAt[:rows, :rows] - H1[:rows, :rows]) / max(max_abs(H1), 1.0))
    ground = after.phis[after.s]
    annihilated = apply_A(after.B, after.D, ground)
    ctx.check(f"crum step {after.s}: A^[{after.s}] phi_{after.s} = 0", max_abs(annihilated) / max_abs(ground))
    sys = JacobiSystem.from_potentials(after.B, after.D, after.energy_offset)
    for n, v in after.phis.items():
        Hv = sys.apply(v.copy())
        E = np.dot(v, Hv) / np.dot(v, v)
        ctx.check(f"crum step {after.s}: H phi_{n} = E phi_{n}", max_abs(Hv - E * v) / max(max_abs(Hv), max_abs(v)), NORM_TOL)
    for n, v in after.phis.items():
        back = apply_A_dagger(before.B, before.D, np.pad(v, (0, X + 1 - len(v)))) / (_rayleigh(before, n) - before.energy_offset)
        ctx.check(f"crum step {after.s}: inverse step recovers phi_{n}", relative_deviation(back, before.phis[n]), NORM_TOL)


def _rayleigh(state: CrumChainState, n: int) -> float:
    v = state.phis[n]
    Hv = JacobiSystem.from_potentials(state.B, state.D, state.energy_offset).apply(v.copy())
    return float(np.dot(v, Hv) / np.dot(v, v))


def crum_step(ctx: ComputationContext, state: CrumChainState) -> Result[CrumChainState, DqmError]:
    def op(policy: NumericPolicy) -> CrumChainState:
        after = crum_step_values(state)
        _step_checks(ctx, state, after)
        return after
    return ctx.run(op)


def _chain(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec, s: int,
           policy: NumericPolicy, levels: Iterable[int] | None = None) -> tuple[CrumChainState, dict[int, float]]:
    if s < 0 or s > grid.x_max + 1:
        raise OutOfDomain("s", f"0 <= s <= {grid.x_max + 1}")
    state = initial_state(family, lam, grid, policy, levels)
    if s > max(state.phis) + (1 if grid.finite else 0):
        raise OutOfDomain("s", f"at most {max(state.phis)} steps on a truncated grid")
    inverse_norms = {n: float(np.dot(v, v)) for n, v in state.phis.items()}
    for _ in range(s):
        after = crum_step_values(state, trusted_points(grid))
        _step_checks(ctx, state, after)
        state = after
    return state, inverse_norms


def crum_chain(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec, s: int,
               levels: Iterable[int] | None = None) -> Result[CrumChainState, DqmError]:
    """s Crum steps, with iso-spectrality and the norm identity checked on the result."""
    def op(policy: NumericPolicy) -> CrumChainState:
        state, inverse_norms = _chain(ctx, family, lam, grid, s, policy, levels)
        if state.x_max < 0:
            return state
        E = {n: float(family.energy(float(n), lam)) for n in state.phis}
        E_low = [float(family.energy(float(j), lam)) for j in range(s)]
        ctx.check(f"{family.id}: E offset of H^[{s}] = E({s})",
                  abs(state.energy_offset - float(family.energy(float(s), lam))) / max(1.0, abs(state.energy_offset)), NORM_TOL)
        es = JacobiSystem.from_potentials(state.B, state.D, state.energy_offset).eigensystem()
        count = state.x_max + 1 if grid.finite else min(len(state.phis), state.x_max + 1)
        expected = energies(family, lam, range(s, s + count), np.float64)
        residual = np.abs(es.values[:count] - expected) / np.maximum(np.abs(expected), 1.0)
        ctx.check(f"{family.id}: spectrum of H^[{s}] = {{E(n)}}_{{n>={s}}}", float(np.max(residual)), NORM_TOL)
        for n, v in state.phis.items():
            factor = np.prod([E[n] - e for e in E_low]) if E_low else 1.0
            ctx.check(f"{family.id}: (phi^[{s}]_{n}, phi^[{s}]_{n}) = {factor:.6g}/d_{n}^2",
                      abs(float(np.dot(v, v)) - factor * inverse_norms[n]) / (factor * inverse_norms[n]), NORM_TOL)
        vectors = np.vstack(list(state.phis.values()))
        gram = vectors @ vectors.T
        diag = np.sqrt(np.diag(gram))
        ctx.check(f"{family.id}: phi^[{s}]_n mutually orthogonal", max_abs(gram / np.outer(diag, diag) - np.eye(len(diag))), NORM_TOL)
        if state.x_max >= 1:
            A, A_dag = factor_matrices(state.B, state.D, policy.positivity_tol)
            smallest = float(np.linalg.svd(np.asarray(A_dag[:, :-1], dtype=np.float64), compute_uv=False).min())
            ctx.check(f"{family.id}: A^[{s}]^dagger has no zero mode", 0.0 if smallest > policy.positivity_tol else 1.0,
                      detail=f"smallest singular value {smallest:.3e}")
        return state
    return ctx.run(op)


def chain_report(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec, s: int) -> Result[dict, DqmError]:
    """Per-step spectra, residuals and positivity margins."""
    def op(policy: NumericPolicy) -> dict:
        state = initial_state(family, lam, grid, policy)
        steps = []
        for k in range(s + 1):
            if state.x_max < 0:
                break
            es = JacobiSystem.from_potentials(state.B, state.D, state.energy_offset).eigensystem()
            count = state.x_max + 1 if grid.finite else min(max(len(state.phis), 1), state.x_max + 1)
            expected = energies(family, lam, range(k, k + count), np.float64)
            inner_B, inner_D = state.B[:-1], state.D[1:]
            steps.append({
                "s": k,
                "x_max": state.x_max,
                "eigenvalues": es.values[:count].tolist(),
                "expected": expected.tolist(),
                "max_residual": float(np.max(np.abs(es.values[:count] - expected))),
                "B_margin": float(np.min(inner_B)) if inner_B.size else None,
                "D_margin": float(np.min(inner_D)) if inner_D.size else None,
            })
            if k < s:
                after = crum_step_values(state, trusted_points(grid))
                _step_checks(ctx, state, after)
                state = after
        return {"family": family.id, "parameters": lam.describe(), "steps": steps}
    return ctx.run(op)


# determinant formulas

def crum_determinant_eigenfunction(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec,
                                   s: int, n: int) -> Result[np.ndarray, DqmError]:
    """phi^[s]_n on [0, x_max - s] from W[phi_0..phi_{s-1}, phi_n], both prefactor forms, against the chain."""
    def op(policy: NumericPolicy) -> np.ndarray:
        if n < s:
            raise OutOfDomain("n", f"n >= s = {s}")
        dtype, X = policy.dtype, grid.x_max
        phi_n = eigenfunction_values(family, lam, n, X, dtype)
        if s == 0:
            return phi_n
        lower = [SampledFunction(eigenfunction_values(family, lam, k, X, dtype)) for k in range(s)]
        num = casoratian_table(lower + [SampledFunction(phi_n)], 0, X - s).values
        den_B = casoratian_table(lower, 1, X - s + 1).values
        den_D = casoratian_table(lower, 0, X - s).values
        for den in (den_B, den_D):
            zero = np.flatnonzero(~(np.abs(den) > 0))
            if zero.size:
                raise ZeroDenominator(int(zero[0]))
        state, _ = _chain(ctx, family, lam, grid, s, policy, levels=sorted(set(range(s + 1)) | {n}))
        x = np.arange(X - s + 1)
        pref_B = np.ones(X - s + 1, dtype=dtype)
        pref_D = np.ones(X - s + 1, dtype=dtype)
        for k, (Bk, Dk) in enumerate(state.history):
            pref_B = pref_B * np.sqrt(Bk[x])
            pref_D = pref_D * np.sqrt(Dk[x + s - k])
        sign = dtype((-1) ** s)
        via_B = sign * pref_B * num / den_B
        via_D = sign * pref_D * num / den_D
        ctx.check(f"{family.id}: phi^[{s}]_{n} B-form = D-form", relative_deviation(via_B, via_D))
        ctx.check(f"{family.id}: phi^[{s}]_{n} determinant = chain", relative_deviation(via_B, state.phis[n]), NORM_TOL)
        return via_B
    return ctx.run(op)


# shape invariance

def _closed(family: FamilySpec, lam: ParameterSet, lo: int, hi: int, dtype: type) -> tuple[np.ndarray, np.ndarray]:
    B = sample(lambda x: family.B(x, lam), lo, hi, dtype, "B")
    D = sample(lambda x: family.D(x, lam), lo, hi, dtype, "D")
    return B, D


def verify_shape_invariance(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec,
                            perturbation: float = 0.0) -> Result[dict, DqmError]:
    """B^[1] = kappa B(lambda+delta), D^[1] = kappa D(lambda+delta), the two potential conditions and the energy sum.

    `perturbation` is added to B(x; lambda) before the conditions are evaluated.
    """
    def op(policy: NumericPolicy) -> dict:
        dtype, X = policy.dtype, grid.x_max
        kappa = dtype(family.kappa(lam))
        up = lam.shifted(1)
        results: dict[str, float] = {}

        state = crum_step_values(initial_state(family, lam, grid, policy, levels=(0, 1)), trusted_points(grid))
        B_up, D_up = _closed(family, up, 0, X, dtype)
        top = comparable(grid, X)
        results["B^[1] = kappa B(lambda+delta)"] = relative_deviation(state.B[:top], kappa * B_up[:top])
        results["D^[1] = kappa D(lambda+delta)"] = relative_deviation(state.D[1:top], kappa * D_up[1:top])

        B, D = _closed(family, lam, 0, X, dtype)
        B = B + dtype(perturbation)
        lhs1 = B[1:] * D[1:]
        rhs1 = kappa ** 2 * B_up[:X] * D_up[1:]
        results["B(x+1)D(x+1) = kappa^2 B(x; lambda+delta) D(x+1; lambda+delta)"] = \
            max_abs(lhs1 - rhs1) / max(1.0, max_abs(rhs1))
        E1 = dtype(family.energy(dtype(1), lam))
        lhs2 = B[:X] + D[1:]
        rhs2 = kappa * (B_up[:X] + D_up[:X]) + E1
        results["B(x) + D(x+1) = kappa (B + D)(x; lambda+delta) + E(1)"] = max_abs(lhs2 - rhs2) / max(1.0, max_abs(rhs2))

        n_top = min(X, 10)
        summed = [sum(float(family.kappa(lam)) ** k * float(family.energy(1.0, lam.shifted(k))) for k in range(n))
                  for n in range(n_top + 1)]
        closed = [float(family.energy(float(n), lam)) for n in range(n_top + 1)]
        results["E(n) = sum_s kappa^s E(1; lambda + s delta)"] = relative_deviation(np.array(summed), np.array(closed))

        reports = [ctx.check(f"{family.id}: {name}", dev) for name, dev in results.items()]
        return {
            "family": family.id,
            "kappa": float(kappa),
            "perturbation": perturbation,
            "checks": {r.name: r.deviation for r in reports},
            "passed": all(r.passed for r in reports),
        }
    return ctx.run(op)


def rodrigues_wavefunction(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec,
                           n: int) -> Result[WaveFunction, DqmError]:
    """A(lambda)^dagger ... A(lambda+(n-1)delta)^dagger phi_0(lambda + n delta), compared with the eigensolver."""
    def op(policy: NumericPolicy) -> WaveFunction:
        dtype, X = policy.dtype, grid.x_max
        if n > X:
            raise OutOfDomain("n", f"n <= {X}")
        v = ground_state_values(family, lam.shifted(n), X - n, dtype)
        for k in reversed(range(n)):
            Bk, Dk = _closed(family, lam.shifted(k), 0, X - k, dtype)
            Dk[0] = 0
            v = apply_A_dagger(Bk, Dk, np.append(v, dtype(0)))
        es = build_system(family, lam, grid, policy).eigensystem()
        ctx.check(f"{family.id}: Rodrigues phi_{n} parallel to eigenvector {n}",
                  eigenvector_alignment(np.asarray(v, dtype=np.float64), es.vectors[:, n]), NORM_TOL)
        if n >= 1:
            _shift_relations(ctx, family, lam, grid, n, policy)
        return WaveFunction(v)
    return ctx.run(op)


def _shift_relations(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec, n: int,
                     policy: NumericPolicy) -> None:
    dtype, X = policy.dtype, grid.x_max
    B, D = grid_potentials(family, lam, grid, policy)
    b0 = B[0]
    f_n = b0 * (1 - polynomial_values(family, lam, n, 1, 1, dtype)[0])
    b_prev = dtype(family.energy(dtype(n), lam)) / f_n
    phi_n = eigenfunction_values(family, lam, n, X, dtype)
    phi_up = eigenfunction_values(family, lam.shifted(1), n - 1, X - 1, dtype)
    lhs = apply_A(B, D, phi_n)[:X]
    ctx.check(f"{family.id}: A phi_{n} = f_{n}/sqrt(B(0)) phi_{n - 1}(lambda+delta)",
              relative_deviation(lhs, f_n / np.sqrt(b0) * phi_up), NORM_TOL)
    back = apply_A_dagger(B, D, np.append(phi_up, dtype(0)))
    top = X + 1 if grid.finite else X
    ctx.check(f"{family.id}: A^dagger phi_{n - 1}(lambda+delta) = sqrt(B(0)) b_{n - 1} phi_{n}",
              relative_deviation(back[:top], np.sqrt(b0) * b_prev * phi_n[:top]), NORM_TOL)


# polynomial simplifications

def eta_sum(family: FamilySpec, lam: ParameterSet, s: int, lo: int, hi: int, dtype: type) -> np.ndarray:
    """eta^[s](x) = sum_{k<=s} eta(x+k) on x = lo..hi"""
    x = np.arange(lo, hi + 1).astype(dtype)
    return sum(family.eta(x + k, lam) for k in range(s + 1))


def affine_check(family: FamilySpec, lam: ParameterSet, grid: GridSpec, dtype: type, tol: float = NORM_TOL) -> float:
    """phi_1/phi_0 = a + b eta(x); raises AffineCheckFailed otherwise."""
    x = np.arange(grid.x_max + 1, dtype=float)
    eta = family.eta(x, lam)
    ratio = np.asarray(polynomial_values(family, lam, 1, 0, grid.x_max, dtype), dtype=np.float64)
    fit = Polynomial.fit(eta, ratio, 1)
    deviation = relative_deviation(fit(eta), ratio)
    if deviation > tol:
        raise AffineCheckFailed(deviation)
    return deviation


def crum_polynomial_tables(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec, s: int,
                           levels: Iterable[int]) -> Result[dict, DqmError]:
    """P^[s]_n by divided differences in eta^[s-1], with B^[k], D^[k] from eta ratios, all against the chain."""
    levels = sorted(set(levels) | {s})

    def op(policy: NumericPolicy) -> dict:
        dtype, X = policy.dtype, grid.x_max
        if s > X:
            raise OutOfDomain("s", f"s <= {X}")
        affine_check(family, lam, grid, dtype)
        c = [dtype(closed_leading_coefficient(family, lam, k)) for k in range(s + 1)]
        tables = {n: polynomial_values(family, lam, n, 0, X, dtype) for n in levels}
        etas = {0: eta_sum(family, lam, 0, 0, X, dtype)}
        B, D = grid_potentials(family, lam, grid, policy)
        state, _ = _chain(ctx, family, lam, grid, s, policy, levels=sorted(set(range(s + 1)) | set(levels)))
        for k in range(1, s + 1):
            eta_prev = eta_sum(family, lam, k - 1, 0, X - k + 2, dtype)
            step = eta_prev[:-1] - eta_prev[1:]
            d = step[:X - k + 1]
            tables = {n: c[k - 1] / c[k] * (v[:-1] - v[1:]) / d for n, v in tables.items() if n >= k}
            etas[k] = eta_sum(family, lam, k, 0, X - k, dtype)
            B_next = np.zeros(X - k + 1, dtype=dtype)
            D_next = np.zeros(X - k + 1, dtype=dtype)
            B_next[:] = B[1:] * step[1:X - k + 2] / step[:X - k + 1]
            D_next[1:] = D[1:-1] * step[:X - k] / step[1:X - k + 1]
            B, D = B_next, D_next
            B_chain, D_chain = state.history[k] if k < s else (state.B, state.D)
            top = comparable(grid, len(B))
            ctx.check(f"{family.id}: B^[{k}] from eta ratios = chain", relative_deviation(B[:top], B_chain[:top]))
            ctx.check(f"{family.id}: D^[{k}] from eta ratios = chain", relative_deviation(D[:top], D_chain[:top]))
        ctx.check(f"{family.id}: P^[{s}]_{s} = 1", max_abs(tables[s] - 1))
        ground = state.phis[s]
        for n, v in tables.items():
            ctx.check(f"{family.id}: phi^[{s}]_{n} = phi^[{s}]_{s} P^[{s}]_{n}", relative_deviation(ground * v, state.phis[n]), NORM_TOL)
            reference = polynomial_values(family, lam.shifted(s), n - s, 0, X - s, dtype)
            ctx.check(f"{family.id}: P^[{s}]_{n} proportional to P_{n - s}(lambda + {s} delta)",
                      1 - abs(cosine_similarity(np.asarray(v, dtype=np.float64), np.asarray(reference, dtype=np.float64))),
                      NORM_TOL)
        return {"s": s, "eta": etas, "polynomials": tables, "B": B, "D": D}
    return ctx.run(op)
