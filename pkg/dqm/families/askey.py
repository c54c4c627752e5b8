"""Families with real parameters: Krawtchouk, Hahn, Racah (finite), Meixner, Charlier (infinite)."""
import numpy as np
from scipy import special
from dqm.core.option import Option
from dqm.core.params import ParameterSet
from dqm.families.base import Constraint, FamilySpec, ParameterDef
from dqm.families.series import hyper


class Krawtchouk(FamilySpec):
    id = "krawtchouk"
    title = "Krawtchouk"
    finite = True
    parameters = (ParameterDef("p", 0.4), ParameterDef("N", 8, "int", -1.0))
    twist_names = ("N",)
    twist_text = "t(p, N) = (p, -N)"
    xi_formula = "xi_l(x) = P_l(-x; t(lambda + (l-1) delta))"

    def constraints(self, lam: ParameterSet) -> list[Constraint]:
        v = lam.resolve()
        return [Constraint("p", "0 < p < 1", 0 < v["p"] < 1),
                Constraint("N", "N >= 1", v["N"] >= 1)]

    def B(self, x, lam):
        v = self.values(lam, x)
        return v["p"] * (v["N"] - x)

    def D(self, x, lam):
        v = self.values(lam, x)
        return (1 - v["p"]) * x

    def energy(self, n, lam):
        return np.asarray(n) * np.ones_like(self.values(lam, n)["p"])

    def eta(self, x, lam):
        return np.asarray(x) * 1

    def polynomial(self, n, x, lam):
        v = self.values(lam, x)
        return hyper([-n, -np.asarray(x)], [-v["N"]], 1 / v["p"], n)

    def phi0_sq(self, x, lam):
        p, N = lam.value("p"), lam.value("N")
        x = np.asarray(x, dtype=np.float64)
        return Option.some(special.comb(N, x) * (p / (1 - p)) ** x)

    def d_sq(self, n, lam):
        p, N = lam.value("p"), lam.value("N")
        return Option.some(float(special.comb(N, n) * (p / (1 - p)) ** n * (1 - p) ** N))


class Hahn(FamilySpec):
    id = "hahn"
    title = "Hahn"
    finite = True
    parameters = (ParameterDef("a", 1.5, "real", 1.0), ParameterDef("b", 2.0, "real", 1.0),
                  ParameterDef("N", 8, "int", -1.0))
    twist_names = ("a", "b", "N")
    twist_text = "t(lambda) = -lambda"
    xi_formula = "xi_l(x) = P_l(-x; t(lambda + (l-1) delta))"

    def constraints(self, lam):
        v = lam.resolve()
        return [Constraint("a", "a > 0", v["a"] > 0), Constraint("b", "b > 0", v["b"] > 0),
                Constraint("N", "N >= 1", v["N"] >= 1)]

    def B(self, x, lam):
        v = self.values(lam, x)
        return (x + v["a"]) * (v["N"] - x)

    def D(self, x, lam):
        v = self.values(lam, x)
        return x * (v["b"] + v["N"] - x)

    def energy(self, n, lam):
        v = self.values(lam, n)
        n = np.asarray(n)
        return n * (n + v["a"] + v["b"] - 1)

    def eta(self, x, lam):
        return np.asarray(x) * 1

    def polynomial(self, n, x, lam):
        v = self.values(lam, x)
        return hyper([-n, n + v["a"] + v["b"] - 1, -np.asarray(x)], [v["a"], -v["N"]], 1, n)

    def phi0_sq(self, x, lam):
        a, b, N = lam.value("a"), lam.value("b"), lam.value("N")
        x = np.asarray(x, dtype=np.float64)
        return Option.some(special.comb(N, x) * special.poch(a, x) * special.poch(b, N - x)
                           / special.poch(b, N))


class Racah(FamilySpec):
    id = "racah"
    title = "Racah"
    finite = True
    parameters = (ParameterDef("N", 6, "int", -1.0), ParameterDef("b", 8.0, "real", 1.0),
                  ParameterDef("c", 1.2, "real", 1.0), ParameterDef("d", 0.5, "real", 1.0))
    twist_names = ("N", "b", "c", "d")
    twist_text = "t(lambda) = -lambda"
    xi_formula = "xi_l(x) = P_l(-x; t(lambda + (l-1) delta))"

    @staticmethod
    def _abcd(v):
        return -v["N"], v["b"], v["c"], v["d"]

    def constraints(self, lam):
        v = lam.resolve()
        N, b, c, d = v["N"], v["b"], v["c"], v["d"]
        return [Constraint("N", "N >= 1", N >= 1), Constraint("d", "d > 0", d > 0),
                Constraint("b", "b > N + d", b > N + d),
                Constraint("c", "0 < c < 1 + d", 0 < c < 1 + d)]

    def B(self, x, lam):
        a, b, c, d = self._abcd(self.values(lam, x))
        return -(x + a) * (x + b) * (x + c) * (x + d) / ((2 * x + d) * (2 * x + d + 1))

    def D(self, x, lam):
        a, b, c, d = self._abcd(self.values(lam, x))
        return -(x + d - a) * (x + d - b) * (x + d - c) * x / ((2 * x + d - 1) * (2 * x + d))

    def _dtilde(self, v):
        a, b, c, d = self._abcd(v)
        return a + b + c - d - 1

    def energy(self, n, lam):
        v = self.values(lam, n)
        n = np.asarray(n)
        return n * (n + self._dtilde(v))

    def eta(self, x, lam):
        d = self.values(lam, x)["d"]
        return x * (x + d)

    def varphi(self, x, lam):
        d = self.values(lam, x)["d"]
        return (2 * x + d + 1) / (d + 1)

    def polynomial(self, n, x, lam):
        v = self.values(lam, x)
        a, b, c, d = self._abcd(v)
        x = np.asarray(x)
        return hyper([-n, n + self._dtilde(v), -x, x + d], [a, b, c], 1, n)


class Meixner(FamilySpec):
    id = "meixner"
    title = "Meixner"
    finite = False
    parameters = (ParameterDef("beta", 1.5, "real", 1.0), ParameterDef("c", 0.4))
    twist_names = ("beta",)
    twist_text = "t(beta, c) = (-beta, c)"
    xi_formula = "xi_l(x) = P_l(-x; t(lambda + (l-1) delta))"

    def constraints(self, lam):
        v = lam.resolve()
        return [Constraint("beta", "beta > 0", v["beta"] > 0),
                Constraint("c", "0 < c < 1", 0 < v["c"] < 1)]

    def B(self, x, lam):
        v = self.values(lam, x)
        return v["c"] * (x + v["beta"]) / (1 - v["c"])

    def D(self, x, lam):
        v = self.values(lam, x)
        return x / (1 - v["c"])

    def energy(self, n, lam):
        return np.asarray(n) * np.ones_like(self.values(lam, n)["c"])

    def eta(self, x, lam):
        return np.asarray(x) * 1

    def polynomial(self, n, x, lam):
        v = self.values(lam, x)
        return hyper([-n, -np.asarray(x)], [v["beta"]], 1 - 1 / v["c"], n)

    def phi0_sq(self, x, lam):
        beta, c = lam.value("beta"), lam.value("c")
        x = np.asarray(x, dtype=np.float64)
        return Option.some(special.poch(beta, x) * c ** x / special.factorial(x))

    def d_sq(self, n, lam):
        beta, c = lam.value("beta"), lam.value("c")
        return Option.some(float(special.poch(beta, n) * c ** n * (1 - c) ** beta / special.factorial(n)))


class Charlier(FamilySpec):
    id = "charlier"
    title = "Charlier"
    finite = False
    parameters = (ParameterDef("a", 1.5),)
    twist_names = ("a",)
    twist_text = "t(lambda) = -lambda"
    xi_formula = "xi_l(x) = P_l(-x; t(lambda + (l-1) delta))"

    def constraints(self, lam):
        return [Constraint("a", "a > 0", lam.value("a") > 0)]

    def B(self, x, lam):
        return self.values(lam, x)["a"] * np.ones_like(np.asarray(x))

    def D(self, x, lam):
        return np.asarray(x) * 1

    def energy(self, n, lam):
        return np.asarray(n) * np.ones_like(self.values(lam, n)["a"])

    def eta(self, x, lam):
        return np.asarray(x) * 1

    def polynomial(self, n, x, lam):
        a = self.values(lam, x)["a"]
        return hyper([-n, -np.asarray(x)], [], -1 / a, n)

    def phi0_sq(self, x, lam):
        a = lam.value("a")
        x = np.asarray(x, dtype=np.float64)
        return Option.some(a ** x / special.factorial(x))

    def d_sq(self, n, lam):
        a = lam.value("a")
        return Option.some(float(a ** n * np.exp(-a) / special.factorial(n)))
