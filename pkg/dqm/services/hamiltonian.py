"""Jacobi-matrix Hamiltonians H = A^dagger A built from birth and death rates B, D."""
import logging
import threading
import numpy as np
from scipy.linalg import eigh_tridiagonal
from dqm.core.numeric import NumericPolicy, cosine_similarity, eigen_residual, max_abs, relative_deviation
from dqm.core.option import Option
from dqm.core.params import GridSpec, ParameterSet
from dqm.core.result import Result
from dqm.domain.errors import ConvergenceFailure, DqmError, NegativePotential
from dqm.domain.models import CheckReport, Eigensystem, WaveFunction
from dqm.families.base import FamilySpec
from dqm.infrastructure.computation_context import ComputationContext
from dqm.services.family_services import energies, grid_potentials, ground_state_log, polynomial_values


logger = logging.getLogger(__name__)

DENSE_FALLBACK_DIM = 64


class JacobiSystem:
    """Real symmetric tridiagonal H on x = 0..x_max.

    The eigensystem is solved once on first access (thread safe) in float64,
    since LAPACK has no extended precision routines.
    """

    def __init__(self, diag: np.ndarray, offdiag: np.ndarray, B: np.ndarray | None = None,
                 D: np.ndarray | None = None, zero_tol: float = 1e-10):
        self.diag = np.asarray(diag)
        self.offdiag = np.asarray(offdiag)
        self.B = B
        self.D = D
        self.zero_tol = zero_tol
        self._lock = threading.Lock()
        self._eigensystem: Eigensystem | None = None

    @staticmethod
    def from_potentials(B: np.ndarray, D: np.ndarray, offset: float = 0.0, zero_tol: float = 1e-10) -> "JacobiSystem":
        B, D = np.asarray(B), np.asarray(D)
        return JacobiSystem(B + D + offset, -np.sqrt(B[:-1] * D[1:]), B, D, zero_tol)

    @property
    def dim(self) -> int:
        return len(self.diag)

    @property
    def x_max(self) -> int:
        return self.dim - 1

    @property
    def norm(self) -> float:
        """Maximum absolute row sum."""
        rows = np.abs(np.asarray(self.diag, dtype=np.float64))
        off = np.abs(np.asarray(self.offdiag, dtype=np.float64))
        rows[:-1] += off
        rows[1:] += off
        return float(np.max(rows)) if rows.size else 0.0

    def matrix(self) -> np.ndarray:
        H = np.diag(self.diag)
        if self.dim > 1:
            H = H + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)
        return H

    def apply(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        out[:-1] += self.offdiag * v[1:]
        out[1:] += self.offdiag * v[:-1]
        return out

    def eigensystem(self) -> Eigensystem:
        if self._eigensystem is None:
            with self._lock:
                if self._eigensystem is None:
                    self._eigensystem = self._solve()
        return self._eigensystem

    def _solve(self) -> Eigensystem:
        d = np.asarray(self.diag, dtype=np.float64)
        e = np.asarray(self.offdiag, dtype=np.float64)
        if self.dim == 1:
            values, vectors = d.copy(), np.ones((1, 1))
        else:
            try:
                values, vectors = eigh_tridiagonal(d, e, check_finite=True)
            except (np.linalg.LinAlgError, ValueError) as err:
                if self.dim > DENSE_FALLBACK_DIM:
                    raise ConvergenceFailure("eigh_tridiagonal", f"dim={self.dim}: {err}") from err
                logger.debug("tridiagonal solver failed (%s), dense fallback", err)
                try:
                    values, vectors = np.linalg.eigh(np.asarray(self.matrix(), dtype=np.float64))
                except np.linalg.LinAlgError as dense_err:
                    raise ConvergenceFailure("eigh", str(dense_err)) from dense_err
        order = np.argsort(values)
        values, vectors = values[order], vectors[:, order]
        values = np.where(np.abs(values) <= self.zero_tol, 0.0, values)
        # fix signs so that v(0) >= 0, or the first nonzero entry is positive
        for k in range(vectors.shape[1]):
            nz = np.flatnonzero(np.abs(vectors[:, k]) > 1e-14)
            if nz.size and vectors[nz[0], k] < 0:
                vectors[:, k] = -vectors[:, k]
        return Eigensystem(values, vectors)


def build_system(family: FamilySpec, lam: ParameterSet, grid: GridSpec, policy: NumericPolicy) -> JacobiSystem:
    B, D = grid_potentials(family, lam, grid, policy)
    return JacobiSystem.from_potentials(B, D, zero_tol=policy.identity_tol)


def build(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec) -> Result[JacobiSystem, DqmError]:
    return ctx.run(lambda policy: build_system(family, lam, grid, policy))


# factorization

def signed_sqrt_potentials(B: np.ndarray, D: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    for name, values in (("B", B), ("D", D)):
        bad = np.flatnonzero(values < -tol)
        if bad.size:
            raise NegativePotential(name, int(bad[0]), float(values[bad[0]]))
    return np.sqrt(np.clip(B, 0, None)), np.sqrt(np.clip(D, 0, None))


def apply_A(B: np.ndarray, D: np.ndarray, v: np.ndarray) -> np.ndarray:
    """(A v)(x) = sqrt(B(x)) v(x) - sqrt(D(x+1)) v(x+1), with v(x_max+1) = 0."""
    sB, sD = np.sqrt(np.clip(B, 0, None)), np.sqrt(np.clip(D, 0, None))
    out = sB * v
    out[:-1] -= sD[1:] * v[1:]
    return out


def apply_A_dagger(B: np.ndarray, D: np.ndarray, v: np.ndarray) -> np.ndarray:
    """(A^dagger v)(x) = sqrt(B(x)) v(x) - sqrt(D(x)) v(x-1), with v(-1) = 0."""
    sB, sD = np.sqrt(np.clip(B, 0, None)), np.sqrt(np.clip(D, 0, None))
    out = sB * v
    out[1:] -= sD[1:] * v[:-1]
    return out


def factor_matrices(B: np.ndarray, D: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    sB, sD = signed_sqrt_potentials(B, D, tol)
    A = np.diag(sB)
    if len(B) > 1:
        A = A - np.diag(sD[1:], 1)
    return A, A.T.copy()


def factorize(ctx: ComputationContext, sys: JacobiSystem) -> Result[tuple[np.ndarray, np.ndarray], DqmError]:
    def op(policy: NumericPolicy) -> tuple[np.ndarray, np.ndarray]:
        A, A_dag = factor_matrices(sys.B, sys.D, policy.positivity_tol)
        H = sys.matrix()
        ctx.check("H = A^dagger A", max_abs(A_dag @ A - H) / max(max_abs(H), 1.0))
        return A, A_dag
    return ctx.run(op)


# ground state and eigensystem

def ground_state(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec) -> Result[WaveFunction, DqmError]:
    def op(policy: NumericPolicy) -> WaveFunction:
        B, D = grid_potentials(family, lam, grid, policy)
        log_phi = ground_state_log(B, D)
        phi = np.exp(log_phi)
        residual = apply_A(B, D, phi)
        ctx.check(f"{family.id}: A phi_0 = 0", max_abs(residual) / max_abs(phi))
        return WaveFunction(phi, log_phi)
    return ctx.run(op)


def eigensystem(ctx: ComputationContext, sys: JacobiSystem) -> Result[Eigensystem, DqmError]:
    def op(policy: NumericPolicy) -> Eigensystem:
        es = sys.eigensystem()
        gram = es.vectors.T @ es.vectors
        ctx.check("eigenvectors orthonormal", max_abs(gram - np.eye(sys.dim)))
        if sys.dim and es.values[0] < -policy.identity_tol * max(1.0, max_abs(es.values)):
            ctx.check("H positive semi-definite", float(-es.values[0]))
        return es
    return ctx.run(op)


def similarity_matrix(B: np.ndarray, D: np.ndarray) -> np.ndarray:
    """phi_0^-1 H phi_0: diagonal B + D, super-diagonal -B(x), sub-diagonal -D(x)."""
    H = np.diag(B + D)
    if len(B) > 1:
        H = H - np.diag(B[:-1], 1) - np.diag(D[1:], -1)
    return H


def apply_similarity(B: np.ndarray, D: np.ndarray, f: np.ndarray) -> np.ndarray:
    """B(x)(f(x) - f(x+1)) + D(x)(f(x) - f(x-1)) on the grid."""
    out = (B + D) * f
    out[:-1] -= B[:-1] * f[1:]
    out[1:] -= D[1:] * f[:-1]
    return out


def similarity_norm(B: np.ndarray, D: np.ndarray) -> float:
    """Maximum absolute row sum of the operator in apply_similarity."""
    return 2 * max_abs(np.asarray(B) + np.asarray(D))


def similarity_transform(ctx: ComputationContext, sys: JacobiSystem, phi0: WaveFunction) -> Result[np.ndarray, DqmError]:
    """Matrix of H~ = phi_0^-1 H phi_0, checked against the explicit conjugation."""
    def op(policy: NumericPolicy) -> np.ndarray:
        Ht = similarity_matrix(sys.B, sys.D)
        conj = (sys.matrix() * phi0.values[None, :]) / phi0.values[:, None]
        ctx.check("phi_0^-1 H phi_0 = H~", relative_deviation(Ht, conj))
        return Ht
    return ctx.run(op)


# reports

def nondegenerate_check(ctx: ComputationContext, name: str, values: np.ndarray, levels: int | None = None) -> CheckReport:
    """E_(k+1) - E_k > positivity_tol over the lowest `levels` eigenvalues."""
    values = np.sort(np.asarray(values, dtype=np.float64))[:levels]
    gap = float(np.min(np.diff(values))) if len(values) > 1 else np.inf
    return ctx.check(f"{name}: spectrum non-degenerate", 0.0 if gap > ctx.policy.positivity_tol else 1.0,
                     detail=f"smallest gap {gap:.3e}")


def spectrum_report(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec) -> Result[dict, DqmError]:
    def op(policy: NumericPolicy) -> dict:
        sys = build_system(family, lam, grid, policy)
        es = sys.eigensystem()
        n = np.arange(sys.dim)
        closed = np.asarray(energies(family, lam, n, np.float64), dtype=np.float64)
        values = es.values
        levels = sys.dim
        if not grid.finite:
            # only low levels are insensitive to the truncation
            levels = min(sys.dim, 1 + int(grid.meta.get("monitored", 6)))
        residual = np.abs(values[:levels] - closed[:levels])
        scale = np.maximum(np.abs(closed[:levels]), 1.0)
        ctx.check(f"{family.id}: spectrum = E(n)", float(np.max(residual / scale)), 1e-8)
        nondegenerate_check(ctx, family.id, values, levels)
        factorize(ctx, sys).unwrap()
        return {
            "family": family.id,
            "parameters": lam.describe(),
            "N": sys.x_max,
            "finite": grid.finite,
            "eigenvalues": values.tolist(),
            "closed_form": closed.tolist(),
            "residual": (np.abs(values - closed)).tolist(),
            "compared_levels": levels,
            "max_residual": float(np.max(residual)),
        }
    return ctx.run(op)


def orthogonality_check(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec,
                        n_max: int | None = None) -> Result[CheckReport, DqmError]:
    """sum_x phi_0^2 P_n P_m = delta_nm / d_n^2, closed-form d_n^2 when the family has one."""
    def op(policy: NumericPolicy) -> CheckReport:
        dtype = policy.dtype
        B, D = grid_potentials(family, lam, grid, policy)
        w = np.exp(2 * ground_state_log(B, D))
        default_top = grid.x_max if grid.finite else min(grid.x_max, int(grid.meta.get("monitored", 6)))
        top = default_top if n_max is None else min(n_max, grid.x_max)
        P = np.vstack([polynomial_values(family, lam, n, 0, grid.x_max, dtype) for n in range(top + 1)])
        gram = (P * w) @ P.T
        diag = np.diag(gram).copy()
        off = gram / np.sqrt(np.outer(diag, diag)) - np.eye(top + 1)
        deviation = max_abs(off)
        closed = Option.all(family.d_sq(n, lam) for n in range(top + 1))
        if closed.is_some:
            inv = 1 / np.array(closed.unwrap(), dtype=np.float64)
            deviation = max(deviation, relative_deviation(diag.astype(np.float64), inv))
        return ctx.check(f"{family.id}: orthogonality", deviation, 1e-8)
    return ctx.run(op)


def difference_equation_check(ctx: ComputationContext, family: FamilySpec, lam: ParameterSet, grid: GridSpec,
                              n: int) -> Result[CheckReport, DqmError]:
    """H~ P_n = E(n) P_n on the grid."""
    def op(policy: NumericPolicy) -> CheckReport:
        B, D = grid_potentials(family, lam, grid, policy)
        P = polynomial_values(family, lam, n, 0, grid.x_max, policy.dtype)
        lhs = apply_similarity(B, D, P)
        energy = family.energy(policy.dtype(n), lam)
        hi = grid.x_max if grid.finite else grid.x_max - 1
        return ctx.check(f"{family.id}: H~ P_{n} = E({n}) P_{n}",
                         eigen_residual(lhs[:hi + 1], energy, P[:hi + 1], similarity_norm(B, D)))
    return ctx.run(op)


def eigenvector_alignment(vector: np.ndarray, reference: np.ndarray) -> float:
    """1 - |cos| between two vectors."""
    return 1 - abs(cosine_similarity(vector, reference))
