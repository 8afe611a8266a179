# File: memctrl/exceptions.py

"""Error hierarchy for memctrl. Every failure raised by the package derives from MemctrlError."""

from typing import Any, Dict, List, Optional


class MemctrlError(Exception):
    """Base class for all memctrl errors"""


class InvalidArgument(MemctrlError, ValueError):
    """An argument is outside its admissible range"""


class DegenerateEigenvalue(MemctrlError):
    """Some lambda_n^2 vanishes, so the chosen root cannot be divided by"""

    def __init__(self, index: int, lambda_sq: float):
        self.index = index
        self.lambda_sq = lambda_sq
        super().__init__(f"lambda_{index}^2 = {lambda_sq:.3e} is degenerate")


class NoSolution(MemctrlError):
    """The Dirichlet lift problem is resonant"""


class GridMismatch(MemctrlError, ValueError):
    """Signals live on different time grids"""


class UnderResolved(MemctrlError):
    """The time step does not resolve the highest requested mode"""

    def __init__(self, index: int, h_lambda: float, limit: float):
        self.index = index
        self.h_lambda = h_lambda
        self.limit = limit
        super().__init__(
            f"mode {index}: h*|lambda| = {h_lambda:.3f} exceeds {limit}; refine the grid"
        )


class NoConvergence(MemctrlError, ArithmeticError):
    """Fixed-point iteration stopped before reaching its tolerance"""

    def __init__(self, iterations: int, distance: float, tol: float):
        self.iterations = iterations
        self.distance = distance
        self.tol = tol
        super().__init__(
            f"no convergence after {iterations} iterations (distance {distance:.3e} > tol {tol:.1e})"
        )


class ImaginaryLambda(MemctrlError):
    """Operation needs a real lambda_n"""


class MissingMode(MemctrlError):
    """A basis mode has no zeta table"""


class ClassMismatch(MemctrlError):
    """Target class and control order disagree"""


class IllConditioned(MemctrlError):
    """Gram system too ill-conditioned for the requested ridge"""

    def __init__(self, condition: float, limit: float):
        self.condition = condition
        self.limit = limit
        super().__init__(
            f"Gram condition estimate {condition:.3e} exceeds {limit:.1e}; raise ridge or lower n_modes"
        )


class ConstraintViolated(MemctrlError):
    """A generator fails one of the vanishing-moment functionals of its class"""

    def __init__(self, functional: str, value: float, tolerance: float):
        self.functional = functional
        self.value = value
        self.tolerance = tolerance
        super().__init__(f"{functional} = {value:.3e} (tolerance {tolerance:.1e})")


class ReachFailed(MemctrlError):
    """The synthesized control misses its target"""

    def __init__(self, report: Any, threshold: float):
        self.report = report
        self.threshold = threshold
        super().__init__(
            f"relative reach error {report.relative_error:.3e} exceeds {threshold:.1e}"
        )


class ExperimentInconclusive(MemctrlError):
    """Warning-level outcome: the experiment cannot deliver a verdict"""


class ObstructionVanishes(ExperimentInconclusive):
    """The obstruction functional is zero for the chosen generator"""

    def __init__(self, value: float):
        self.value = value
        super().__init__(f"obstruction value {value:.3e} vanishes; regularity verdict inconclusive")


class ConfigError(MemctrlError):
    """Experiment config could not be read or validated"""

    def __init__(self, message: str, diagnostics: Optional[List[Dict[str, Any]]] = None):
        self.diagnostics = diagnostics or []
        super().__init__(message)

    def render(self) -> str:
        lines = [str(self)]
        for item in self.diagnostics:
            where = item.get('field') or f"line {item.get('line')}, column {item.get('column')}"
            lines.append(f"  {where}: {item.get('message')}")
        return '\n'.join(lines)
