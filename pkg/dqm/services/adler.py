"""Krein-Adler deletion of an admissible level set D.

Three constructions of the deleted system are kept side by side:

  stepwise     successive Darboux steps in a gauge where the tridiagonal matrix
               has super-diagonal c(x) and sub-diagonal e(x); intermediate steps
               may be non-hermitian, so only signed products are used until the end
  casoratian   ratios of Casorati determinants of the eigenfunctions phi_n
  polynomial   the same ratios for the polynomial parts P_n(eta(x)), which also
               yield the deformed polynomials
"""
import itertools
import logging
from typing import Iterable, Sequence
import numpy as np
from dqm.core.numeric import NumericPolicy, eigen_residual, max_abs, relative_deviation
from dqm.core.params import GridSpec, ParameterSet
from dqm.core.result import Result
from dqm.core.resultify import returns_result
from dqm.domain.errors import (
    DqmError, InadmissibleDeletion, IntermediateBreakdown, NonHermitianSystem, OutOfDomain,
    ZeroDenominator,
)
from dqm.domain.models import CheckReport, DeletedSystem, DeletionSet
from dqm.families.base import FamilySpec
from dqm.infrastructure.computation_context import ComputationContext
from dqm.services.casorati import SampledFunction, casoratian_table, check_degree, varphi_ell_values
from dqm.services.crum import comparable, initial_state
from dqm.services.family_services import energies, ground_state_values, polynomial_values, sample
from dqm.services.hamiltonian import JacobiSystem, apply_similarity, build_system, nondegenerate_check, similarity_norm


logger = logging.getLogger(__name__)

NORM_TOL = 1e-8


# deletion sets

def deletion_set(levels: Iterable[int], n_max: int | None = None) -> DeletionSet:
    order = tuple(int(d) for d in levels)
    if any(d < 0 for d in order):
        raise OutOfDomain("D", "levels must be non-negative")
    if len(set(order)) != len(order):
        raise OutOfDomain("D", "levels must be distinct")
    if n_max is not None and order and max(order) > n_max:
        raise OutOfDomain("D", f"levels must not exceed n_max={n_max}")
    sorted_levels = tuple(sorted(order))
    top = max(sorted_levels, default=-1) + 1
    admissible = all(np.prod([m - d for d in sorted_levels]) >= 0 for m in range(top + 1))
    mu = next(m for m in itertools.count() if m not in sorted_levels)
    return DeletionSet(sorted_levels, admissible, mu, 0 in sorted_levels, order)


@returns_result
def validate_deletion(levels: Iterable[int], n_max: int | None = None) -> DeletionSet:
    """Admissibility: prod_j (m - d_j) >= 0 for every non-negative integer m."""
    return deletion_set(levels, n_max)


def _require_admissible(ds: DeletionSet, unsafe: bool) -> None:
    if not ds.admissible and not unsafe:
        raise InadmissibleDeletion(ds.levels)


def _reduced_size(grid: GridSpec, ds: DeletionSet) -> int:
    x_bar = grid.x_max - ds.ell
    if x_bar < 0:
        raise OutOfDomain("D", f"cannot delete {ds.ell} levels from a grid with x_max={grid.x_max}")
    return x_bar


def tracked_levels(grid: GridSpec, ds: DeletionSet) -> list[int]:
    """All levels on finite grids; a contiguous low block covering D on truncated ones."""
    if grid.finite:
        return list(range(grid.x_max + 1))
    top = max(int(grid.meta.get("monitored", 6)), max(ds.levels, default=0) + 2, ds.mu + 1)
    return list(range(min(top, grid.x_max) + 1))


def _energy_map(family: FamilySpec, lam: ParameterSet, levels: Iterable[int]) -> dict[int, float]:
    return {n: float(family.energy(float(n), lam)) for n in levels}


# stepwise construction

def stepwise_deletion(family: FamilySpec, lam: ParameterSet, grid: GridSpec, ds: DeletionSet, policy: NumericPolicy,
                      unsafe: bool = False) -> DeletedSystem:
    _require_admissible(ds, unsafe)
    x_bar = _reduced_size(grid, ds)
    levels = tracked_levels(grid, ds)
    state = initial_state(family, lam, grid, policy, levels)
    dtype = policy.dtype
    B, D = state.B, state.D
    root = np.sqrt(B[:-1] * D[1:])
    c = np.append(root, dtype(0))
    e = np.concatenate([[dtype(0)], root])
    v = dict(state.phis)
    tables: dict[str, np.ndarray] = {}
    for step, d in enumerate(ds.applied_order(), start=1):
        seed = v.pop(d)
        small = np.flatnonzero(np.abs(seed) <= policy.eps * max_abs(seed))
        if small.size:
            raise IntermediateBreakdown(step, int(small[0]))
        B_s = np.zeros_like(seed)
        D_s = np.zeros_like(seed)
        B_s[:-1] = c[:-1] * seed[1:] / seed[:-1]
        D_s[1:] = e[1:] * seed[:-1] / seed[1:]
        sigma = seed[:-1] / seed[1:]
        E_d = dtype(family.energy(dtype(d), lam))
        c = sigma * B_s[1:]
        e = e[:-1]
        v = {n: w[:-1] - sigma * w[1:] for n, w in v.items()}
        tables[f"B_step_{step}"] = B_s
        tables[f"D_step_{step}"] = D_s
        tables["a"] = B_s[:-1] + D_s[1:] + E_d
        logger.debug("deletion step %d (d=%d): min B %.3e, min D %.3e", step, d,
                     float(np.min(B_s[:-1])) if len(B_s) > 1 else np.nan,
                     float(np.min(D_s[1:])) if len(D_s) > 1 else np.nan)
    if "a" not in tables:
        tables["a"] = B + D
    seed = v[ds.mu]
    B_bar = np.zeros_like(seed)
    D_bar = np.zeros_like(seed)
    B_bar[:-1] = c[:-1] * seed[1:] / seed[:-1]
    D_bar[1:] = e[1:] * seed[:-1] / seed[1:]
    gauge_sq = np.ones(x_bar + 1, dtype=dtype)
    for step in range(1, ds.ell + 1):
        gauge_sq = gauge_sq * tables[f"B_step_{step}"][:x_bar + 1]
    tables["gauge_sign"] = np.sign(gauge_sq)
    gauge = np.sqrt(np.abs(gauge_sq))
    phis = {n: gauge * w for n, w in v.items()}
    return DeletedSystem(ds, B_bar, D_bar, phis, _energy_map(family, lam, phis), ds.mu, "stepwise", tables)


# casoratian constructions

def _check_denominator(values: np.ndarray, hi: int) -> None:
    zero = np.flatnonzero(~(np.abs(values[:hi + 1]) > 0))
    if zero.size:
        raise ZeroDenominator(int(zero[0]))


def _closed_potentials(family: FamilySpec, lam: ParameterSet, hi: int, dtype: type) -> tuple[np.ndarray, np.ndarray]:
    B = sample(lambda x: family.B(x, lam), 0, hi, dtype, "B")
    D = sample(lambda x: family.D(x, lam), 0, hi, dtype, "D")
    D[0] = 0
    return B, D


def _closed_phi(family: FamilySpec, lam: ParameterSet, grid: GridSpec, n: int, hi: int, dtype: type) -> np.ndarray:
    """phi_0 P_n on 0..hi; phi_0 vanishes past x_max on finite grids."""
    phi0 = ground_state_values(family, lam, hi, dtype)
    if grid.finite:
        phi0[grid.x_max + 1:] = 0
    return phi0 * polynomial_values(family, lam, n, 0, hi, dtype)


def casoratian_deletion(family: FamilySpec, lam: ParameterSet, grid: GridSpec, ds: DeletionSet, policy: NumericPolicy,
                        unsafe: bool = False) -> DeletedSystem:
    _require_admissible(ds, unsafe)
    dtype, X, ell, mu = policy.dtype, grid.x_max, ds.ell, ds.mu
    x_bar = _reduced_size(grid, ds)
    hi = X + 1
    levels = [n for n in tracked_levels(grid, ds) if n not in ds.levels]
    phis = {n: SampledFunction(_closed_phi(family, lam, grid, n, hi, dtype)) for n in set(levels) | set(ds.levels)}
    deleted = [phis[d] for d in ds.levels]
    W_D = casoratian_table(deleted, 0, x_bar + 1).values
    _check_denominator(W_D, x_bar + 1)
    W = {n: casoratian_table(deleted + [phis[n]], 0, x_bar + 1).values for n in levels}
    W_mu = W[mu]
    _check_denominator(W_mu, x_bar)
    B, D = _closed_potentials(family, lam, hi, dtype)
    x = np.arange(x_bar + 1)
    prod = np.ones(x_bar + 1, dtype=dtype)
    for k in range(1, ell + 1):
        prod = prod * B[x + k - 1] * D[x + k]
    ratio = W_D[1:] / W_D[:-1]
    if np.any(ratio < 0) and not unsafe:
        raise NonHermitianSystem("the Casoratian of the deleted eigenfunctions changes sign")
    prod_B = np.sqrt(prod) * ratio
    sign = dtype((-1) ** ell)
    bar = {n: sign * np.sqrt(np.abs(prod_B)) * W[n][:x_bar + 1] / W_D[1:] for n in levels}
    B_bar = np.zeros(x_bar + 1, dtype=dtype)
    D_bar = np.zeros(x_bar + 1, dtype=dtype)
    B_bar[:-1] = (np.sqrt(B[x[:-1] + ell] * D[x[:-1] + ell + 1]) * W_D[:x_bar] / W_D[1:x_bar + 1]
                  * W_mu[1:x_bar + 1] / W_mu[:x_bar])
    D_bar[1:] = (np.sqrt(B[x[1:] - 1] * D[x[1:]]) * W_D[2:x_bar + 2] / W_D[1:x_bar + 1]
                 * W_mu[:x_bar] / W_mu[1:x_bar + 1])
    tables = {"W_D": W_D, "W_mu": W_mu, "prod_B": prod_B,
              "prod_D": np.sqrt(prod) * W_D[:-1] / W_D[1:], "gauge_sign": np.sign(ratio)}
    return DeletedSystem(ds, B_bar, D_bar, bar, _energy_map(family, lam, bar), mu, "casoratian", tables)


def polynomial_deletion(family: FamilySpec, lam: ParameterSet, grid: GridSpec, ds: DeletionSet, policy: NumericPolicy,
                        unsafe: bool = False, hi: int | None = None) -> DeletedSystem:
    """Casoratians of P_n(eta(x)) instead of phi_n; tables carry the deformed polynomials on 0..hi."""
    _require_admissible(ds, unsafe)
    dtype, X, ell, mu = policy.dtype, grid.x_max, ds.ell, ds.mu
    x_bar = _reduced_size(grid, ds)
    hi = max(x_bar + 1, hi or 0)
    levels = [n for n in tracked_levels(grid, ds) if n not in ds.levels]
    polys = {n: SampledFunction(polynomial_values(family, lam, n, 0, hi + ell + 1, dtype))
             for n in set(levels) | set(ds.levels)}
    deleted = [polys[d] for d in ds.levels]
    W_D = casoratian_table(deleted, 0, hi).values
    _check_denominator(W_D, x_bar + 1)
    W = {n: casoratian_table(deleted + [polys[n]], 0, hi).values for n in levels}
    W_mu = W[mu]
    _check_denominator(W_mu, x_bar)
    B, D = _closed_potentials(family, lam, X + 1, dtype)
    phi0 = ground_state_values(family, lam, X, dtype)
    x = np.arange(x_bar + 1)
    prod = np.ones(x_bar + 1, dtype=dtype)
    for k in range(1, ell + 1):
        prod = prod * B[x + k - 1]
    ratio = W_D[1:x_bar + 2] / W_D[:x_bar + 1]
    if np.any(ratio < 0) and not unsafe:
        raise NonHermitianSystem("the Casoratian of the deleted polynomials changes sign")
    sign = dtype((-1) ** ell)
    bar = {n: sign * phi0[:x_bar + 1] * np.sqrt(np.abs(prod * ratio)) * W[n][:x_bar + 1] / W_D[1:x_bar + 2] for n in levels}
    B_bar = np.zeros(x_bar + 1, dtype=dtype)
    D_bar = np.zeros(x_bar + 1, dtype=dtype)
    B_bar[:-1] = B[x[:-1] + ell] * W_D[:x_bar] / W_D[1:x_bar + 1] * W_mu[1:x_bar + 1] / W_mu[:x_bar]
    D_bar[1:] = D[x[1:]] * W_D[2:x_bar + 2] / W_D[1:x_bar + 1] * W_mu[:x_bar] / W_mu[1:x_bar + 1]
    t = np.arange(hi + 1).astype(dtype)
    deformed = W_D / varphi_ell_values(family, lam, ell, t)
    varphi_next = varphi_ell_values(family, lam, ell + 1, t)
    tables: dict[str, np.ndarray] = {
        "W_D": W_D, "W_mu": W_mu, "P": deformed, "P_mu": W_mu / varphi_next,
        "prod_B": prod * ratio, "prod_D": np.ones(x_bar + 1, dtype=dtype), "gauge_sign": np.sign(ratio),
    }
    for k in range(1, ell + 1):
        tables["prod_D"] = tables["prod_D"] * D[x + k]
    tables["prod_D"] = tables["prod_D"] / ratio
    for n in levels:
        tables[f"P_{n}"] = W[n] / varphi_next
    tables["psi"] = bar[mu] / tables["P_mu"][:x_bar + 1]
    return DeletedSystem(ds, B_bar, D_bar, bar, _energy_map(family, lam, bar), mu, "polynomial", tables)


# checks on a deleted system

def _inverse_norms(family: FamilySpec, lam: ParameterSet, grid: GridSpec, ds: DeletionSet, policy: NumericPolicy) -> dict[int, float]:
    state = initial_state(family, lam, grid, policy, tracked_levels(grid, ds))
    return {n: float(np.dot(v, v)) for n, v in state.phis.items()}


def norm_factors(family: FamilySpec, lam: ParameterSet, ds: DeletedSystem) -> dict[int, float]:
    """prod_j (E(n) - E(d_j)) for the surviving levels."""
    E_d = [float(family.energy(float(d), lam)) for d in ds.deletion.levels]
    return {n: float(np.prod([ds.energies[n] - e for e in E_d])) if E_d else 1.0 for n in ds.surviving}


def is_hermitian(ds: DeletedSystem) -> bool:
    products = ds.B[:-1] * ds.D[1:]
    real = bool(np.all(ds.tables.get("gauge_sign", np.ones(1)) > 0))
    return bool(np.all(products > 0)) and real


def _system(ds: DeletedSystem) -> JacobiSystem:
    return JacobiSystem.from_potentials(ds.B, ds.D, ds.energies[ds.mu])


def deletion_checks(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec,
                    ds: DeletedSystem, policy: NumericPolicy) -> None:
    """Eigen-equations, spectrum and the norm identity of a deleted system."""
    name = f"{family.id} D={list(ds.deletion.levels)} [{ds.path}]"
    margin_B = float(np.min(ds.B[:-1])) if ds.x_max > 0 else np.inf
    margin_D = float(np.min(ds.D[1:])) if ds.x_max > 0 else np.inf
    ctx.check(f"{name}: B, D positive", 0.0 if min(margin_B, margin_D) > 0 else 1.0,
              detail=f"min B {margin_B:.3e}, min D {margin_D:.3e}")
    if "a" in ds.tables:
        a = ds.tables["a"]
        ctx.check(f"{name}: B + D + E(mu) = diagonal", relative_deviation(ds.B + ds.D + ds.energies[ds.mu], a))
    if not is_hermitian(ds):
        ctx.check(f"{name}: hermitian", 1.0, detail="negative B(x) D(x+1) product")
        return
    sys = _system(ds)
    for n, v in ds.phis.items():
        Hv = sys.apply(v.copy())
        top = comparable(grid, len(v))
        ctx.check(f"{name}: H phi_{n} = E({n}) phi_{n}",
                  eigen_residual(Hv[:top], ds.energies[n], v[:top], sys.norm), NORM_TOL)
    es = sys.eigensystem()
    expected = np.array(sorted(ds.energies.values()))
    count = len(expected) if grid.finite else min(len(expected), sys.dim)
    residual = np.abs(es.values[:count] - expected[:count]) / np.maximum(np.abs(expected[:count]), 1.0)
    ctx.check(f"{name}: spectrum = E(n), n not in D", float(np.max(residual)) if count else 0.0, NORM_TOL)
    nondegenerate_check(ctx, name, es.values, None if grid.finite else count)
    inverse = _inverse_norms(family, lam, grid, ds.deletion, policy)
    for n, factor in norm_factors(family, lam, ds).items():
        norm = float(np.dot(ds.phis[n], ds.phis[n]))
        ctx.check(f"{name}: (phi_{n}, phi_{n}) = {factor:.6g}/d_{n}^2",
                  abs(norm - factor * inverse[n]) / abs(factor * inverse[n]), NORM_TOL)


def adler_chain(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec, ds: DeletionSet,
                unsafe: bool = False) -> Result[DeletedSystem, DqmError]:
    def op(policy: NumericPolicy) -> DeletedSystem:
        out = stepwise_deletion(family, lam, grid, ds, policy, unsafe)
        deletion_checks(ctx, family, lam, grid, out, policy)
        return out
    return ctx.run(op)


def _compare(ctx: ComputationContext, grid: GridSpec, label: str, left: DeletedSystem, right: DeletedSystem,
             tol: float = NORM_TOL) -> float:
    top = comparable(grid, left.x_max + 1)
    worst = max(relative_deviation(left.B[:top], right.B[:top]), relative_deviation(left.D[:top], right.D[:top]))
    for n in left.phis:
        if n in right.phis:
            worst = max(worst, relative_deviation(left.phis[n][:top], right.phis[n][:top]))
    ctx.check(label, worst, tol)
    return worst


def product_identity_checks(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec,
                            stepwise: DeletedSystem, determinant: DeletedSystem) -> list[CheckReport]:
    """prod_k B_{d_1..d_k}(x) and prod_k D_{d_1..d_k}(x+l+1-k) against their determinant forms."""
    ell, x_bar = stepwise.deletion.ell, stepwise.x_max
    x = np.arange(x_bar + 1)
    prod_B = np.ones(x_bar + 1, dtype=stepwise.B.dtype)
    prod_D = np.ones(x_bar + 1, dtype=stepwise.B.dtype)
    for k in range(1, ell + 1):
        prod_B = prod_B * stepwise.tables[f"B_step_{k}"][x]
        prod_D = prod_D * stepwise.tables[f"D_step_{k}"][x + ell + 1 - k]
    top = comparable(grid, x_bar + 1)
    kind = "P" if determinant.path == "polynomial" else "phi"
    return [
        ctx.check(f"{family.id}: prod B_(d1..dk) = W[{kind}_D](x+1)/W[{kind}_D](x) form",
                  relative_deviation(prod_B[:top], determinant.tables["prod_B"][:top])),
        ctx.check(f"{family.id}: prod D_(d1..dk) = W[{kind}_D](x)/W[{kind}_D](x+1) form",
                  relative_deviation(prod_D[:top], determinant.tables["prod_D"][:top])),
    ]


def barred_system_casoratian(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec,
                             ds: DeletionSet, unsafe: bool = False) -> Result[DeletedSystem, DqmError]:
    """Barred system from Casorati determinants, cross-checked against the stepwise construction."""
    def op(policy: NumericPolicy) -> DeletedSystem:
        out = casoratian_deletion(family, lam, grid, ds, policy, unsafe)
        stepwise = stepwise_deletion(family, lam, grid, ds, policy, unsafe)
        _compare(ctx, grid, f"{family.id}: determinant = stepwise barred system", out, stepwise)
        product_identity_checks(ctx, family, lam, grid, stepwise, out)
        top = comparable(grid, out.x_max)
        ctx.check(f"{family.id}: B(x) D(x+1) determinant = stepwise",
                  relative_deviation((out.B[:-1] * out.D[1:])[:top], (stepwise.B[:-1] * stepwise.D[1:])[:top]))
        deletion_checks(ctx, family, lam, grid, out, policy)
        return out
    return ctx.run(op)


def permutation_invariance(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec,
                           ds: DeletionSet, limit: int = 24) -> Result[float, DqmError]:
    """max deviation of (B, D) over orderings of D in the stepwise construction."""
    def op(policy: NumericPolicy) -> float:
        reference = stepwise_deletion(family, lam, grid, ds, policy)
        worst = 0.0
        for order in itertools.islice(itertools.permutations(ds.levels), limit):
            other = stepwise_deletion(family, lam, grid, deletion_set(order), policy)
            worst = max(worst, relative_deviation(other.B, reference.B), relative_deviation(other.D, reference.D))
        ctx.check(f"{family.id}: barred system independent of the order of D={list(ds.levels)}", worst)
        return worst
    return ctx.run(op)


# polynomial simplifications

def polynomial_fast_path(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec,
                         ds: DeletionSet, unsafe: bool = False) -> Result[DeletedSystem, DqmError]:
    def op(policy: NumericPolicy) -> DeletedSystem:
        out = polynomial_deletion(family, lam, grid, ds, policy, unsafe)
        determinant = casoratian_deletion(family, lam, grid, ds, policy, unsafe)
        _compare(ctx, grid, f"{family.id}: polynomial = determinant barred system", out, determinant)
        x_bar, ell, mu = out.x_max, ds.ell, ds.mu
        W_mu = out.tables["W_mu"][:x_bar + 1]
        ground = out.phis[mu]
        worst = 0.0
        for n, v in out.phis.items():
            ratio = out.tables[f"P_{n}"][:x_bar + 1] / out.tables["P_mu"][:x_bar + 1]
            worst = max(worst, relative_deviation(v, ground * ratio))
        ctx.check(f"{family.id}: phi_n = phi_mu W[P_D, P_n]/W[P_D, P_mu]", worst)
        dtype = policy.dtype
        B, _ = _closed_potentials(family, lam, grid.x_max + 1, dtype)
        t = np.arange(x_bar + 2).astype(dtype)
        P, P_mu = out.tables["P"], out.tables["P_mu"]
        vp_l, vp_n = varphi_ell_values(family, lam, ell, t), varphi_ell_values(family, lam, ell + 1, t)
        x = np.arange(x_bar)
        via_deformed = (B[x + ell] * P[x] / P[x + 1] * P_mu[x + 1] / P_mu[x]
                        * vp_l[x] / vp_l[x + 1] * vp_n[x + 1] / vp_n[x])
        ctx.check(f"{family.id}: B from deformed polynomials = B from Casoratians", relative_deviation(via_deformed, out.B[:-1]))
        for label, values, hi in (("W[P_D]", out.tables["W_D"], x_bar + 1), ("W[P_D, P_mu]", W_mu, x_bar)):
            signs = np.sign(values[:hi + 1])
            ctx.check(f"{family.id}: {label} sign definite on the grid", 0.0 if np.all(signs == signs[0]) else 1.0)
        stepwise = stepwise_deletion(family, lam, grid, ds, policy, unsafe)
        product_identity_checks(ctx, family, lam, grid, stepwise, out)
        return out
    return ctx.run(op)


def deformed_degrees(ds: DeletionSet, n: int) -> tuple[int, int, int]:
    """Degrees of P (in eta_{l-1}), P_mu and P_n (in eta_l)."""
    weight, ell = ds.weight, ds.ell
    return weight - ell * (ell - 1) // 2, weight + ds.mu - ell * (ell + 1) // 2, weight + n - ell * (ell + 1) // 2


def deformed_polynomials(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec,
                         ds: DeletionSet, levels: Sequence[int] | None = None) -> Result[dict, DqmError]:
    """Deformed polynomials with their degrees, the deformed weight and the orthogonality of P_n."""
    def op(policy: NumericPolicy) -> dict:
        dtype = policy.dtype
        surviving = [n for n in tracked_levels(grid, ds) if n not in ds.levels]
        chosen = list(surviving if levels is None else [n for n in levels if n in surviving])
        top_degree = max([deformed_degrees(ds, n)[2] for n in chosen] + [deformed_degrees(ds, 0)[0]])
        out = polynomial_deletion(family, lam, grid, ds, policy, hi=top_degree + 4)
        hi = len(out.tables["P"]) - 1
        x = np.arange(hi + 1).astype(dtype)
        eta_prev = family.eta(x, lam.shifted(max(ds.ell - 1, 0)))
        eta_next = family.eta(x, lam.shifted(ds.ell))
        deg_P, deg_mu, _ = deformed_degrees(ds, 0)
        degrees = {"P": check_degree(eta_prev, out.tables["P"], deg_P),
                   "P_mu": check_degree(eta_next, out.tables["P_mu"], deg_mu)}
        for n in chosen:
            degrees[f"P_{n}"] = check_degree(eta_next, out.tables[f"P_{n}"], deformed_degrees(ds, n)[2])
        x_bar = out.x_max
        psi = out.tables["psi"]
        factors = norm_factors(family, lam, out)
        inverse = _inverse_norms(family, lam, grid, ds, policy)
        rows = np.vstack([out.tables[f"P_{n}"][:x_bar + 1] for n in chosen])
        gram = (rows * psi ** 2) @ rows.T
        expected = np.diag([factors[n] * inverse[n] for n in chosen])
        scale = np.sqrt(np.outer(np.diag(expected), np.diag(expected)))
        ctx.check(f"{family.id}: sum psi^2 P_n P_m = prod(E(n)-E(d))/d_n^2",
                  max_abs((gram - expected) / scale) if grid.finite else max_abs(np.diag(gram - expected) / np.diag(scale)),
                  NORM_TOL)
        B, D, mu = out.B, out.D, ds.mu
        for n in chosen:
            f = out.tables[f"P_{n}"][:x_bar + 1] / out.tables["P_mu"][:x_bar + 1]
            lhs = apply_similarity(B, D, f) + dtype(out.energies[mu]) * f
            top = comparable(grid, x_bar + 1)
            op_scale = similarity_norm(B, D) + abs(float(out.energies[mu]))
            ctx.check(f"{family.id}: deformed H~ (P_{n}/P_mu) = E({n}) (P_{n}/P_mu)",
                      eigen_residual(lhs[:top], dtype(out.energies[n]), f[:top], op_scale), NORM_TOL)
        return {
            "deletion": list(ds.levels),
            "mu": mu,
            "degrees": degrees,
            "deformed": out.tables["P"][:x_bar + 2],
            "deformed_mu": out.tables["P_mu"][:x_bar + 1],
            "deformed_n": {n: out.tables[f"P_{n}"][:x_bar + 1] for n in chosen},
            "weight": psi,
            "norm_factors": {n: factors[n] for n in chosen},
        }
    return ctx.run(op)


# hermiticity

def hermiticity_report(ctx: ComputationContext, ds: DeletedSystem) -> Result[dict, DqmError]:
    """H-bar as an explicit matrix with signed off-diagonal products; symmetric iff every product is positive."""
    def op(policy: NumericPolicy) -> dict:
        products = np.asarray(ds.B[:-1] * ds.D[1:], dtype=np.float64)
        root = np.sqrt(np.abs(products))
        H = np.diag(np.asarray(ds.B + ds.D, dtype=np.float64) + ds.energies[ds.mu])
        if ds.x_max > 0:
            H = H - np.diag(root, 1) - np.diag(np.sign(products) * root, -1)
        asymmetry = max_abs(H - H.T)
        real = bool(np.all(ds.tables.get("gauge_sign", np.ones(1)) > 0)) and all(
            bool(np.all(np.isfinite(v))) for v in ds.phis.values())
        margin = float(np.min(products)) if products.size else None
        report = ctx.check(f"D={list(ds.deletion.levels)}: H-bar hermitian", asymmetry,
                           detail=f"min B(x)D(x+1) {margin}")
        negative = [int(x) for x in np.flatnonzero(products <= 0)]
        return {
            "asymmetry": asymmetry,
            "product_margin": margin,
            "negative_products_at": negative,
            "B_margin": float(np.min(ds.B[:-1])) if ds.x_max > 0 else None,
            "D_margin": float(np.min(ds.D[1:])) if ds.x_max > 0 else None,
            "real_eigenfunctions": real,
            "passed": report.passed and not negative and real,
        }
    return ctx.run(op)


def deletion_report(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec,
                    ds: DeletionSet, unsafe: bool = False) -> Result[dict, DqmError]:
    def op(policy: NumericPolicy) -> dict:
        out = adler_chain(ctx, family, lam, grid, ds, unsafe).unwrap()
        before = build_system(family, lam, grid, policy).eigensystem().values
        hermiticity = hermiticity_report(ctx, out).unwrap()
        after: list[float] = []
        residual = float("nan")
        expected = np.array(sorted(out.energies.values()))
        if hermiticity["passed"]:
            after = _system(out).eigensystem().values.tolist()
            count = len(expected) if grid.finite else min(len(expected), len(after))
            residual = float(np.max(np.abs(np.array(after[:count]) - expected[:count]))) if count else 0.0
        return {
            "family": family.id,
            "parameters": lam.describe(),
            "D": list(ds.levels),
            "admissible": ds.admissible,
            "mu": ds.mu,
            "path": out.path,
            "spectrum_before": before.tolist(),
            "spectrum_after": after,
            "expected_after": expected.tolist(),
            "max_residual": residual,
            "hermiticity": hermiticity,
            "norm_factors": [{"n": n, "factor": f} for n, f in norm_factors(family, lam, out).items()],
            "B": np.asarray(out.B, dtype=np.float64).tolist(),
            "D_potential": np.asarray(out.D, dtype=np.float64).tolist(),
        }
    return ctx.run(op)
