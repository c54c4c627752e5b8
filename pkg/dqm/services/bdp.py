"""Birth and death processes generated by a positive Jacobi system.

With birth rate B(x) and death rate D(x) the rate matrix is L = -H~, where
H~ = phi_0^-1 (H - E_ground) phi_0; its rows sum to zero because B(x_max) = 0
and D(0) = 0. The transition kernel p(x, y; t) = exp(t L)(x, y) has the
spectral form

    p(x, y; t) = sum_n exp(-t (E_n - E_ground)) phi_n(x) phi_n(y) phi_0(y) / phi_0(x)

with normalized eigenvectors phi_n of the symmetric H. Both forms are computed
and compared; the stationary distribution is phi_0(y)^2.
"""
import logging
from dataclasses import dataclass
from typing import Iterable, Protocol
import numpy as np
from scipy.linalg import expm
from dqm.core.numeric import NumericPolicy, max_abs
from dqm.core.result import Result
from dqm.domain.errors import DqmError, NonHermitianSystem, OutOfDomain
from dqm.domain.models import Eigensystem, TransitionKernel
from dqm.infrastructure.computation_context import ComputationContext
from dqm.services.hamiltonian import JacobiSystem, similarity_matrix


logger = logging.getLogger(__name__)

KERNEL_TOL = 1e-8
RATE_TOL = 1e-2
CHAPMAN_KOLMOGOROV_TIMES = (0.1, 0.5)


class HasRates(Protocol):
    B: np.ndarray
    D: np.ndarray


@dataclass(frozen=True)
class BirthDeathProcess:
    birth: np.ndarray
    death: np.ndarray
    label: str = "process"

    @staticmethod
    def from_system(system: HasRates, label: str = "process") -> "BirthDeathProcess":
        """Rates from anything carrying B and D on the grid (a Jacobi system or a deleted system)."""
        B = np.asarray(system.B, dtype=np.float64).copy()
        D = np.asarray(system.D, dtype=np.float64).copy()
        B[-1] = 0
        D[0] = 0
        return BirthDeathProcess(B, D, label)

    @property
    def size(self) -> int:
        return len(self.birth)

    def rate_matrix(self) -> np.ndarray:
        return -similarity_matrix(self.birth, self.death)

    def symmetric(self) -> JacobiSystem:
        return JacobiSystem.from_potentials(self.birth, self.death)


def _require_positive(process: BirthDeathProcess) -> None:
    for name, values in (("birth", process.birth[:-1]), ("death", process.death[1:])):
        bad = np.flatnonzero(~(values > 0))
        if bad.size:
            x = int(bad[0]) + (1 if name == "death" else 0)
            raise NonHermitianSystem(f"{name} rate at x={x} is {float(values[bad[0]]):.3e}")


def _spectral_kernel(es: Eigensystem, t: float) -> np.ndarray:
    values = es.values - es.values[0]
    V = es.vectors
    ground = np.abs(V[:, 0])
    return (V * np.exp(-t * values)) @ V.T * ground[None, :] / ground[:, None]


def _kernel_checks(ctx: ComputationContext, process: BirthDeathProcess, t: float, P: np.ndarray) -> None:
    name = f"{process.label} t={t:g}"
    ctx.check(f"{name}: rows of p(x, y; t) sum to 1", max_abs(P.sum(axis=1) - 1), KERNEL_TOL)
    outside = max(0.0, float(-np.min(P)) - 1e-10, float(np.max(P)) - 1 - 1e-10)
    ctx.check(f"{name}: p(x, y; t) in [0, 1]", outside, 0.0)


def transition_kernel(ctx: ComputationContext, process: BirthDeathProcess, t: float) -> Result[TransitionKernel, DqmError]:
    """exp(t L) by scaling and squaring, with the spectral expansion as a cross-check."""
    def op(policy: NumericPolicy) -> TransitionKernel:
        if t < 0:
            raise OutOfDomain("t", "t >= 0")
        _require_positive(process)
        P = expm(t * process.rate_matrix())
        spectral = _spectral_kernel(process.symmetric().eigensystem(), t)
        residual = max_abs(P - spectral)
        ctx.check(f"{process.label} t={t:g}: exp(-t H~) = spectral expansion", residual, KERNEL_TOL)
        _kernel_checks(ctx, process, t, P)
        return TransitionKernel(float(t), P, residual)
    return ctx.run(op)


def chapman_kolmogorov(ctx: ComputationContext, process: BirthDeathProcess,
                       times: Iterable[float] = CHAPMAN_KOLMOGOROV_TIMES) -> Result[float, DqmError]:
    """max over t, s of |p(t) p(s) - p(t + s)|."""
    def op(policy: NumericPolicy) -> float:
        _require_positive(process)
        L = process.rate_matrix()
        times_ = list(times)
        kernels = {t: expm(t * L) for t in times_}
        worst = 0.0
        for t in times_:
            for s in times_:
                worst = max(worst, max_abs(kernels[t] @ kernels[s] - expm((t + s) * L)))
        ctx.check(f"{process.label}: p(t) p(s) = p(t + s)", worst, KERNEL_TOL)
        return worst
    return ctx.run(op)


def stationary_distribution(ctx: ComputationContext, process: BirthDeathProcess) -> Result[np.ndarray, DqmError]:
    """pi(y) = phi_0(y)^2 / sum phi_0^2, in detailed balance pi(x) B(x) = pi(x+1) D(x+1)."""
    def op(policy: NumericPolicy) -> np.ndarray:
        _require_positive(process)
        ground = process.symmetric().eigensystem().vectors[:, 0]
        pi = ground ** 2 / np.sum(ground ** 2)
        flow = pi[:-1] * process.birth[:-1]
        ctx.check(f"{process.label}: detailed balance", max_abs(flow - pi[1:] * process.death[1:]) / max(max_abs(flow), 1e-300),
                  KERNEL_TOL)
        ctx.check(f"{process.label}: pi L = 0", max_abs(pi @ process.rate_matrix()) / max(max_abs(process.birth), 1.0),
                  KERNEL_TOL)
        return pi
    return ctx.run(op)


def decay_rates(ctx: ComputationContext, process: BirthDeathProcess, x: int = 0, samples: int = 12) -> Result[dict, DqmError]:
    """Leading decay rate of p(x, x; t) - pi(x), fitted from the kernel and compared with the spectrum.

    The fit window starts late enough for the next decay mode to be
    negligible; the expected rate is the lowest excitation whose eigenvector
    does not vanish at x.
    """
    def op(policy: NumericPolicy) -> dict:
        if not 0 <= x < process.size:
            raise OutOfDomain("x", f"0 <= x < {process.size}")
        _require_positive(process)
        es = process.symmetric().eigensystem()
        rates = es.values - es.values[0]
        weights = es.vectors[x, :] ** 2
        modes = [k for k in range(1, process.size) if weights[k] > 1e-12 * np.sum(weights)]
        if not modes:
            raise OutOfDomain("x", "no decaying mode is visible from this state")
        leading = float(rates[modes[0]])
        gap = float(rates[modes[1]] - rates[modes[0]]) if len(modes) > 1 else leading
        t_lo = min(9 / gap, 16 / leading)
        times = np.linspace(t_lo, t_lo + 2 / leading, samples)
        pi = es.vectors[x, 0] ** 2 / np.sum(es.vectors[:, 0] ** 2)
        L = process.rate_matrix()
        excess = np.array([expm(t * L)[x, x] for t in times]) - pi
        slope, _ = np.polyfit(times, np.log(np.abs(excess)), 1)
        fitted = float(-slope)
        ctx.check(f"{process.label}: leading decay rate from p({x},{x};t)", abs(fitted - leading) / leading, RATE_TOL,
                  detail=f"fitted {fitted:.6g}, spectrum {leading:.6g}")
        logger.debug("%s: decay rate %.6g (expected %.6g) on t in [%.3g, %.3g]", process.label, fitted, leading,
                     times[0], times[-1])
        return {
            "label": process.label,
            "x": x,
            "fitted_rate": fitted,
            "leading_rate": leading,
            "decay_rates": [float(rates[k]) for k in modes],
            "times": times.tolist(),
        }
    return ctx.run(op)
