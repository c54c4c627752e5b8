"""q-families: q-Racah and the three dual families with supplementary data."""
import numpy as np
from dqm.core.option import Option
from dqm.families.base import Constraint, FamilySpec, ParameterDef
from dqm.families.series import qhyper, qpochhammer, qpochhammer_inf


def _qpoch_table(a: float, q: float, x: np.ndarray) -> np.ndarray:
    """(a;q)_x for each integer x (float64)."""
    x = np.asarray(x, dtype=int)
    top = int(x.max()) if x.size else 0
    cumulative = np.cumprod(np.concatenate([[1.0], 1 - a * q ** np.arange(top)]))
    return cumulative[x]


class QRacah(FamilySpec):
    id = "q_racah"
    title = "q-Racah"
    finite = True
    most_generic = True
    default_q = 0.7
    parameters = (ParameterDef("N", 5, "int", -1.0), ParameterDef("b", 0.05, "q", 1.0),
                  ParameterDef("c", 0.6, "q", 1.0), ParameterDef("d", 0.5, "q", 1.0))
    twist_names = ("N", "b", "c", "d")
    twist_text = "t(lambda) = -lambda"
    xi_formula = "xi_l(x) = P_l(-x; t(lambda + (l-1) delta))"

    @staticmethod
    def _abcd(v):
        return v["q"] ** (-v["N"]), v["b"], v["c"], v["d"]

    def _dtilde(self, v):
        a, b, c, d = self._abcd(v)
        return a * b * c / (d * v["q"])

    def constraints(self, lam):
        v = lam.resolve()
        q, N = v["q"], v["N"]
        a, b, c, d = self._abcd(v)
        return [Constraint("N", "N >= 1", N >= 1),
                Constraint("d", "0 < d < 1", 0 < d < 1),
                Constraint("b", "b < d q^N", b < d * q ** N),
                Constraint("c", "c > d q", c > d * q),
                Constraint("c", "b c < d q", b * c < d * q)]

    def kappa(self, lam):
        return 1 / lam.q

    def B(self, x, lam):
        v = self.values(lam, x)
        q = v["q"]
        a, b, c, d = self._abcd(v)
        qx = q ** x
        return -((1 - a * qx) * (1 - b * qx) * (1 - c * qx) * (1 - d * qx)
                 / ((1 - d * qx * qx) * (1 - d * q * qx * qx)))

    def D(self, x, lam):
        v = self.values(lam, x)
        q = v["q"]
        a, b, c, d = self._abcd(v)
        qx = q ** x
        dt = self._dtilde(v)
        return -(dt * (1 - d * qx / a) * (1 - d * qx / b) * (1 - d * qx / c) * (1 - qx)
                 / ((1 - d * qx * qx / q) * (1 - d * qx * qx)))

    def energy(self, n, lam):
        v = self.values(lam, n)
        q = v["q"]
        return (q ** (-np.asarray(n)) - 1) * (1 - self._dtilde(v) * q ** np.asarray(n))

    def eta(self, x, lam):
        v = self.values(lam, x)
        q, d = v["q"], v["d"]
        return (q ** (-np.asarray(x)) - 1) * (1 - d * q ** np.asarray(x))

    def varphi(self, x, lam):
        v = self.values(lam, x)
        q, d = v["q"], v["d"]
        return (q ** (-np.asarray(x)) - d * q ** (np.asarray(x) + 1)) / (1 - d * q)

    def polynomial(self, n, x, lam):
        v = self.values(lam, x)
        q = v["q"]
        a, b, c, d = self._abcd(v)
        x = np.asarray(x)
        return qhyper([q ** -n, self._dtilde(v) * q ** n, q ** -x, d * q ** x], [a, b, c], q, q, n)


class DualQuantumQKrawtchouk(FamilySpec):
    id = "dual_quantum_q_krawtchouk"
    title = "dual quantum q-Krawtchouk"
    finite = True
    default_q = 0.5
    coverage = ("deforming-polynomial-table", "supplementary-dual-data")
    parameters = (ParameterDef("p", 10.0), ParameterDef("N", 3, "int", -1.0))
    xi_formula = "xi_l(x) = 2phi1(q^-l, q^x; q^(N-l+1) | q; p q^(N+1))"
    structure_functions = {
        "R1": "(q^-1/2 - q^1/2)^2 z', z' = z + 1",
        "R0": "(q^-1/2 - q^1/2)^2 z'^2",
        "R-1": "(q^-1/2 - q^1/2)^2 (-z'^2 + p^-1 (1 + p + q^(-N-1)) z' - p^-1 q^-N (1 + q^-1))",
    }

    def constraints(self, lam):
        v = lam.resolve()
        q, N, p = v["q"], v["N"], v["p"]
        return [Constraint("N", "N >= 1", N >= 1),
                Constraint("p", "p > q^-N", p > q ** (-N))]

    def kappa(self, lam):
        return 1 / lam.q

    def B(self, x, lam):
        v = self.values(lam, x)
        q, N, p = v["q"], v["N"], v["p"]
        return q ** (-np.asarray(x) - N - 1) * (1 - q ** (N - np.asarray(x))) / p

    def D(self, x, lam):
        v = self.values(lam, x)
        q, p = v["q"], v["p"]
        qmx = q ** (-np.asarray(x))
        return (qmx - 1) * (1 - qmx / p)

    def energy(self, n, lam):
        q = self.values(lam, n)["q"]
        return q ** (-np.asarray(n)) - 1

    def eta(self, x, lam):
        q = self.values(lam, x)["q"]
        return 1 - q ** np.asarray(x)

    def varphi(self, x, lam):
        q = self.values(lam, x)["q"]
        return q ** np.asarray(x)

    def polynomial(self, n, x, lam):
        v = self.values(lam, x)
        q, N, p = v["q"], v["N"], v["p"]
        x = np.asarray(x)
        return qhyper([q ** -n, q ** -x], [q ** -N], q, p * q ** (x + 1), n)

    def xi(self, ell, x, lam):
        v = self.values(lam, x)
        q, N, p = v["q"], v["N"], v["p"]
        x = np.asarray(x)
        return qhyper([q ** -ell, q ** x], [q ** (N - ell + 1)], q, p * q ** (N + 1) * np.ones_like(x), ell)

    def phi0_sq(self, x, lam):
        q, N, p = lam.q, lam.value("N"), lam.value("p")
        x = np.asarray(x, dtype=int)
        Ni = int(round(N))
        qq = _qpoch_table(q, q, np.arange(Ni + 1))
        inside = x <= Ni
        xs = np.where(inside, x, 0)
        values = (qq[Ni] / (qq[xs] * qq[Ni - xs]) * p ** (-xs) * q ** (-N * xs)
                  / np.array([qpochhammer(q ** (-k) / p, q, int(k)) for k in xs]))
        return Option.some(np.where(inside, values, 0.0))

    def d_sq(self, n, lam):
        q, N, p = lam.q, lam.value("N"), lam.value("p")
        Ni = int(round(N))
        qq = _qpoch_table(q, q, np.arange(Ni + 1))
        a = q ** (-N) / p
        return Option.some(float(qq[Ni] / (qq[n] * qq[Ni - n]) * p ** (-n) * q ** (n * (n - 1 - N))
                                 / qpochhammer(a, q, n) * qpochhammer(a, q, Ni)))


class DualLittleQJacobi(FamilySpec):
    id = "dual_little_q_jacobi"
    title = "dual little q-Jacobi"
    finite = False
    default_q = 0.5
    coverage = ("deforming-polynomial-table", "supplementary-dual-data")
    parameters = (ParameterDef("a", 0.5), ParameterDef("b", 0.5, "q", 1.0))
    xi_formula = "xi_l(x) = 3phi2(q^-l, q^x, a^-1 b^-1 q^(-x-l); b^-1 q^-l, 0 | q; q)"
    structure_functions = {
        "R1": "(q^-1/2 - q^1/2)^2 z', z' = z - 1",
        "R0": "(q^-1/2 - q^1/2)^2 z'^2",
        "R-1": "(q^-1/2 - q^1/2)^2 ((1 + a b q) z'^2 + (1 + a) z')",
    }

    def constraints(self, lam):
        v = lam.resolve()
        q, a, b = v["q"], v["a"], v["b"]
        return [Constraint("a", "0 < a < q^-1", 0 < a < 1 / q),
                Constraint("b", "b < q^-1", b < 1 / q)]

    def kappa(self, lam):
        return lam.q

    def B(self, x, lam):
        v = self.values(lam, x)
        q, a, b = v["q"], v["a"], v["b"]
        qx = q ** np.asarray(x)
        return (a * q * qx * qx * (1 - b * q * qx) * (1 - a * b * q * qx)
                / ((1 - a * b * q * qx * qx) * (1 - a * b * q * q * qx * qx)))

    def D(self, x, lam):
        v = self.values(lam, x)
        q, a, b = v["q"], v["a"], v["b"]
        qx = q ** np.asarray(x)
        return (1 - qx) * (1 - a * qx) / ((1 - a * b * qx * qx) * (1 - a * b * q * qx * qx))

    def energy(self, n, lam):
        q = self.values(lam, n)["q"]
        return 1 - q ** np.asarray(n)

    def eta(self, x, lam):
        v = self.values(lam, x)
        q, a, b = v["q"], v["a"], v["b"]
        return (q ** (-np.asarray(x)) - 1) * (1 - a * b * q ** (np.asarray(x) + 1))

    def varphi(self, x, lam):
        v = self.values(lam, x)
        q, a, b = v["q"], v["a"], v["b"]
        x = np.asarray(x)
        return (q ** (-x) - a * b * q ** (x + 2)) / (1 - a * b * q * q)

    def polynomial(self, n, x, lam):
        v = self.values(lam, x)
        q, a, b = v["q"], v["a"], v["b"]
        x = np.asarray(x)
        return qhyper([q ** -n, q ** -x, a * b * q ** (x + 1)], [b * q], q, q ** n / a * np.ones_like(x), n)

    def xi(self, ell, x, lam):
        v = self.values(lam, x)
        q, a, b = v["q"], v["a"], v["b"]
        x = np.asarray(x)
        return qhyper([q ** -ell, q ** x, q ** (-x - ell) / (a * b)], [q ** (-ell) / b, 0], q,
                      q * np.ones_like(x), ell)

    def phi0_sq(self, x, lam):
        q, a, b = lam.q, lam.value("a"), lam.value("b")
        x = np.asarray(x, dtype=int)
        return Option.some(
            _qpoch_table(b * q, q, x) * _qpoch_table(a * b * q, q, x) * a ** x * q ** (x * x)
            / (_qpoch_table(q, q, x) * _qpoch_table(a * q, q, x))
            * (1 - a * b * q ** (2 * x + 1)) / (1 - a * b * q))

    def d_sq(self, n, lam):
        q, a, b = lam.q, lam.value("a"), lam.value("b")
        return Option.some(float(qpochhammer(b * q, q, n) / qpochhammer(q, q, n) * (a * q) ** n
                                 * qpochhammer_inf(a * q, q) / qpochhammer_inf(a * b * q * q, q)))


class DualAlternativeQCharlier(FamilySpec):
    id = "dual_alternative_q_charlier"
    title = "dual alternative q-Charlier"
    finite = False
    default_q = 0.5
    coverage = ("deforming-polynomial-table", "supplementary-dual-data")
    parameters = (ParameterDef("a", 1.0, "q", 1.0),)
    xi_formula = "xi_l(x) = 3phi2(q^-l, q^x, -a^-1 q^(1-x-l); 0, 0 | q; q)"
    structure_functions = {
        "R1": "(q^-1/2 - q^1/2)^2 z', z' = z - 1",
        "R0": "(q^-1/2 - q^1/2)^2 z'^2",
        "R-1": "(q^-1/2 - q^1/2)^2 ((1 - a) z'^2 + z')",
    }

    def constraints(self, lam):
        return [Constraint("a", "a > 0", lam.value("a") > 0)]

    def kappa(self, lam):
        return lam.q

    def B(self, x, lam):
        v = self.values(lam, x)
        q, a = v["q"], v["a"]
        qx = q ** np.asarray(x)
        return a * q * qx ** 3 * (1 + a * qx) / ((1 + a * qx * qx) * (1 + a * q * qx * qx))

    def D(self, x, lam):
        v = self.values(lam, x)
        q, a = v["q"], v["a"]
        qx = q ** np.asarray(x)
        return (1 - qx) / ((1 + a * qx * qx / q) * (1 + a * qx * qx))

    def energy(self, n, lam):
        q = self.values(lam, n)["q"]
        return 1 - q ** np.asarray(n)

    def eta(self, x, lam):
        v = self.values(lam, x)
        q, a = v["q"], v["a"]
        return (q ** (-np.asarray(x)) - 1) * (1 + a * q ** np.asarray(x))

    def varphi(self, x, lam):
        v = self.values(lam, x)
        q, a = v["q"], v["a"]
        x = np.asarray(x)
        return (q ** (-x) + a * q ** (x + 1)) / (1 + a * q)

    def polynomial(self, n, x, lam):
        v = self.values(lam, x)
        q, a = v["q"], v["a"]
        x = np.asarray(x)
        return qhyper([q ** -n, q ** -x, -a * q ** x], [], q, -(q ** n) / a * np.ones_like(x), n)

    def xi(self, ell, x, lam):
        v = self.values(lam, x)
        q, a = v["q"], v["a"]
        x = np.asarray(x)
        return qhyper([q ** -ell, q ** x, -(q ** (1 - x - ell)) / a], [0, 0], q, q * np.ones_like(x), ell)

    def phi0_sq(self, x, lam):
        q, a = lam.q, lam.value("a")
        x = np.asarray(x, dtype=int)
        return Option.some(a ** x * q ** (x * (3 * x - 1) / 2) * _qpoch_table(-a, q, x)
                           / _qpoch_table(q, q, x) * (1 + a * q ** (2 * x)) / (1 + a))

    def d_sq(self, n, lam):
        q, a = lam.q, lam.value("a")
        return Option.some(float(a ** n * q ** (n * (n + 1) / 2) / qpochhammer(q, q, n)
                                 / qpochhammer_inf(-a * q, q)))
