from typing import Union


class DqmError(Exception):
    pass


# parameters and catalog

class ParameterError(DqmError):
    pass


class UnknownFamily(ParameterError):
    def __init__(self, family_id: str) -> None:
        super().__init__()
        self.family_id = family_id

    def __str__(self) -> str:
        return f"Unknown family {self.family_id}"


class MissingParameter(ParameterError):
    def __init__(self, family_id: str, parameter: str) -> None:
        super().__init__()
        self.family_id = family_id
        self.parameter = parameter

    def __str__(self) -> str:
        return f"Family {self.family_id} requires parameter {self.parameter}"


class UnknownParameter(ParameterError):
    def __init__(self, family_id: str, parameter: str) -> None:
        super().__init__()
        self.family_id = family_id
        self.parameter = parameter

    def __str__(self) -> str:
        return f"Family {self.family_id} has no parameter {self.parameter}"


class OutOfDomain(ParameterError):
    def __init__(self, parameter: str, constraint: str) -> None:
        super().__init__()
        self.parameter = parameter
        self.constraint = constraint

    def __str__(self) -> str:
        return f"Parameter {self.parameter} violates {self.constraint}"


class InvalidPolicy(ParameterError):
    def __init__(self, reason: str) -> None:
        super().__init__()
        self.reason = reason

    def __str__(self) -> str:
        return f"Invalid numeric policy: {self.reason}"


class TruncationFailure(ParameterError):
    def __init__(self, family_id: str, limit: int) -> None:
        super().__init__()
        self.family_id = family_id
        self.limit = limit

    def __str__(self) -> str:
        return f"No cutoff below {self.limit} reaches the tail tolerance for {self.family_id}"


# evaluation

class EvaluationError(DqmError):
    pass


class EvaluationSingularity(EvaluationError):
    def __init__(self, quantity: str, x: int) -> None:
        super().__init__()
        self.quantity = quantity
        self.x = x

    def __str__(self) -> str:
        return f"{self.quantity} has a pole at x={self.x}"


class NegativePotential(EvaluationError):
    def __init__(self, quantity: str, x: int, value: float) -> None:
        super().__init__()
        self.quantity = quantity
        self.x = x
        self.value = value

    def __str__(self) -> str:
        return f"{self.quantity}({self.x}) = {self.value:.3e} is negative"


class ConvergenceFailure(EvaluationError):
    def __init__(self, solver: str, detail: str) -> None:
        super().__init__()
        self.solver = solver
        self.detail = detail

    def __str__(self) -> str:
        return f"{self.solver} did not converge: {self.detail}"


class NotImplementedForFamily(EvaluationError):
    def __init__(self, family_id: str, quantity: str) -> None:
        super().__init__()
        self.family_id = family_id
        self.quantity = quantity

    def __str__(self) -> str:
        return f"{self.quantity} is catalogued but not implemented for {self.family_id}"


# casoratians

class CasoratiError(DqmError):
    pass


class DomainExceeded(CasoratiError):
    def __init__(self, x: int, lo: int, hi: int) -> None:
        super().__init__()
        self.x = x
        self.lo = lo
        self.hi = hi

    def __str__(self) -> str:
        return f"Sample at x={self.x} requested outside [{self.lo}, {self.hi}]"


class ZeroPrefactor(CasoratiError):
    def __init__(self, levels: tuple[int, ...]) -> None:
        super().__init__()
        self.levels = levels

    def __str__(self) -> str:
        return f"Casoratian prefactor vanishes for levels {self.levels}"


class ZeroDenominator(CasoratiError):
    def __init__(self, x: int) -> None:
        super().__init__()
        self.x = x

    def __str__(self) -> str:
        return f"Denominator Casoratian vanishes at x={self.x}"


class DegreeMismatch(CasoratiError):
    def __init__(self, expected: int, fitted: int) -> None:
        super().__init__()
        self.expected = expected
        self.fitted = fitted

    def __str__(self) -> str:
        return f"Expected polynomial degree {self.expected}, fitted {self.fitted}"


# crum and deletion

class DeletionError(DqmError):
    pass


class NonPositivePotential(DeletionError):
    def __init__(self, step: int, x: int, value: float) -> None:
        super().__init__()
        self.step = step
        self.x = x
        self.value = value

    def __str__(self) -> str:
        return f"Potential lost positivity at step {self.step}, x={self.x} (value {self.value:.3e})"


class AffineCheckFailed(DeletionError):
    def __init__(self, deviation: float) -> None:
        super().__init__()
        self.deviation = deviation

    def __str__(self) -> str:
        return f"phi_1/phi_0 is not affine in eta (deviation {self.deviation:.3e})"


class IntermediateBreakdown(DeletionError):
    def __init__(self, step: int, x: int) -> None:
        super().__init__()
        self.step = step
        self.x = x

    def __str__(self) -> str:
        return f"Eigenfunction vanishes at x={self.x} during deletion step {self.step}"


class InadmissibleDeletion(DeletionError):
    def __init__(self, levels: tuple[int, ...]) -> None:
        super().__init__()
        self.levels = levels

    def __str__(self) -> str:
        return (f"Deletion set {list(self.levels)} is not admissible: apart from a block starting "
                "at the ground level, deleted levels must form clusters of an even number of "
                "contiguous integers")


class PositivityFailure(DeletionError):
    def __init__(self, ell: int, margin: float) -> None:
        super().__init__()
        self.ell = ell
        self.margin = margin

    def __str__(self) -> str:
        return f"Deleted system for l={self.ell} is not positive (margin {self.margin:.3e})"


# christoffel

class ChristoffelError(DqmError):
    pass


class ZeroLeadingCoefficient(ChristoffelError):
    def __init__(self, x: int) -> None:
        super().__init__()
        self.x = x

    def __str__(self) -> str:
        return f"B({self.x}) vanishes before the boundary, recurrence cannot continue"


class PreconditionViolated(ChristoffelError):
    def __init__(self, reason: str) -> None:
        super().__init__()
        self.reason = reason

    def __str__(self) -> str:
        return f"Precondition violated: {self.reason}"


class NodeZero(ChristoffelError):
    def __init__(self, node: float, n: int) -> None:
        super().__init__()
        self.node = node
        self.n = n

    def __str__(self) -> str:
        return f"P_{self.n} vanishes at the node {self.node}"


# birth and death

class NonHermitianSystem(DqmError):
    def __init__(self, reason: str) -> None:
        super().__init__()
        self.reason = reason

    def __str__(self) -> str:
        return f"System is not hermitian: {self.reason}"


class VerificationFailed(DqmError):
    def __init__(self, failed: list[str]) -> None:
        super().__init__()
        self.failed = failed

    def __str__(self) -> str:
        return f"{len(self.failed)} check(s) failed: {', '.join(self.failed)}"


ReportError = Union[ParameterError, EvaluationError, CasoratiError, DeletionError,
                    ChristoffelError, NonHermitianSystem, VerificationFailed]
