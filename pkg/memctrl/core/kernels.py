# memctrl/core/kernels.py

"""
Memory Kernels and Convolution Quadrature
The scalar memory kernel K with its antiderivatives K1, K2, uniform time
grids, sampled signals and the trapezoidal convolution algebra every
Volterra computation in the package goes through.
"""

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union
import logging
import math

import numpy as np
import pandas as pd
from scipy.integrate import cumulative_trapezoid

from .. import settings
from ..exceptions import GridMismatch, InvalidArgument

logger = logging.getLogger(__name__)


# =============================================================================
# CONSTANTS & CONFIGURATION
# =============================================================================

class KernelFamily(str, Enum):
    """Supported memory kernel families"""
    ZERO = "zero"
    CONSTANT = "constant"          # K(t) = k0
    EXPONENTIAL = "exponential"    # K(t) = k0 exp(-a t)
    TABULATED = "tabulated"        # samples (t, K(t)), linear interpolation


# =============================================================================
# DATA CLASSES
# =============================================================================

@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_j = j*h, j = 0..m on [0, T]"""
    T: float
    m: int

    def __post_init__(self):
        if not (self.T > 0 and math.isfinite(self.T)):
            raise InvalidArgument(f"T must be positive, got {self.T}")
        if self.m < settings.MIN_GRID_STEPS:
            raise InvalidArgument(f"m must be >= {settings.MIN_GRID_STEPS}, got {self.m}")

    @property
    def h(self) -> float:
        return self.T / self.m

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.m + 1)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights on the nodes"""
        w = np.full(self.m + 1, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    def refine(self, factor: int = 2) -> 'TimeGrid':
        return TimeGrid(self.T, self.m * factor)

    @classmethod
    def auto(cls, T: float, lambda_max: float) -> 'TimeGrid':
        """Resolution rule m = max(512, next_pow2(4*T*|lambda_N|))"""
        wanted = settings.AUTO_GRID_FACTOR * T * abs(lambda_max)
        m = 1 << max(0, math.ceil(math.log2(max(wanted, 1.0))))
        return cls(T, max(settings.AUTO_GRID_FLOOR, m))


@dataclass(frozen=True)
class Signal:
    """Complex samples on a TimeGrid"""
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.m + 1,):
            raise InvalidArgument(f"signal has {values.size} samples, grid needs {self.grid.m + 1}")
        object.__setattr__(self, 'values', values)

    # Constructors ------------------------------------------------------------

    @classmethod
    def from_function(cls, grid: TimeGrid, func) -> 'Signal':
        return cls(grid, func(grid.nodes))

    @classmethod
    def constant(cls, grid: TimeGrid, value: complex = 1.0) -> 'Signal':
        return cls(grid, np.full(grid.m + 1, value, dtype=complex))

    @classmethod
    def zeros(cls, grid: TimeGrid) -> 'Signal':
        return cls.constant(grid, 0.0)

    @classmethod
    def monomial(cls, grid: TimeGrid, power: int) -> 'Signal':
        return cls(grid, grid.nodes ** power)

    # Algebra -----------------------------------------------------------------

    def _check(self, other: 'Signal') -> None:
        if self.grid != other.grid:
            raise GridMismatch(f"grid (T={self.grid.T}, m={self.grid.m}) vs (T={other.grid.T}, m={other.grid.m})")

    def __add__(self, other: 'Signal') -> 'Signal':
        self._check(other)
        return Signal(self.grid, self.values + other.values)

    def __sub__(self, other: 'Signal') -> 'Signal':
        self._check(other)
        return Signal(self.grid, self.values - other.values)

    def __mul__(self, scalar: complex) -> 'Signal':
        return Signal(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> 'Signal':
        return Signal(self.grid, -self.values)

    def reversed(self) -> 'Signal':
        """s(T - t)"""
        return Signal(self.grid, self.values[::-1])

    # Quadrature --------------------------------------------------------------

    def integral(self) -> complex:
        return complex(np.dot(self.grid.weights, self.values))

    def inner(self, other: 'Signal') -> complex:
        """<self, other> = ∫ self * conj(other) with trapezoid weights"""
        self._check(other)
        return complex(np.dot(self.grid.weights, self.values * other.values.conj()))

    def norm(self) -> float:
        return math.sqrt(max(self.inner(self).real, 0.0))

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def cumulative(self) -> 'Signal':
        """t -> ∫_0^t s by the trapezoid rule"""
        return Signal(self.grid, cumulative_trapezoid(self.values, dx=self.grid.h, initial=0.0))


@dataclass(frozen=True)
class MemoryKernel:
    """Scalar memory kernel K with closed-form or numeric antiderivatives"""
    family: KernelFamily = KernelFamily.ZERO
    k0: float = 0.0
    a: float = 0.0
    table_t: Optional[Tuple[float, ...]] = None
    table_k: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.family == KernelFamily.TABULATED:
            if self.table_t is None or self.table_k is None or len(self.table_t) != len(self.table_k):
                raise InvalidArgument("tabulated kernel needs equal-length t and K columns")
            if len(self.table_t) < 2:
                raise InvalidArgument("tabulated kernel needs at least two samples")
            t = np.asarray(self.table_t)
            if t[0] != 0.0 or np.any(np.diff(t) <= 0):
                raise InvalidArgument("tabulated kernel times must start at 0 and increase")
            if not np.all(np.isfinite(self.table_k)):
                raise InvalidArgument("tabulated kernel has non-finite samples")

    # Constructors ------------------------------------------------------------

    @classmethod
    def zero(cls) -> 'MemoryKernel':
        return cls(KernelFamily.ZERO)

    @classmethod
    def constant(cls, k0: float) -> 'MemoryKernel':
        return cls(KernelFamily.CONSTANT, k0=k0)

    @classmethod
    def exponential(cls, k0: float, a: float) -> 'MemoryKernel':
        return cls(KernelFamily.EXPONENTIAL, k0=k0, a=a)

    @classmethod
    def tabulated(cls, t, values) -> 'MemoryKernel':
        return cls(KernelFamily.TABULATED,
                   table_t=tuple(float(x) for x in t),
                   table_k=tuple(float(x) for x in values))

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> 'MemoryKernel':
        """Two-column CSV (t, K(t)) with a header row"""
        frame = pd.read_csv(path)
        if frame.shape[1] != 2:
            raise InvalidArgument(f"{path}: expected two columns (t, K), found {frame.shape[1]}")
        logger.info(f"Loaded tabulated kernel from {path} ({len(frame)} samples)")
        return cls.tabulated(frame.iloc[:, 0].to_numpy(), frame.iloc[:, 1].to_numpy())

    # Evaluation --------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        if self.family == KernelFamily.ZERO:
            return True
        if self.family == KernelFamily.TABULATED:
            return not np.any(self.table_k)
        return self.k0 == 0.0

    def _tables(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        t = np.asarray(self.table_t)
        k = np.asarray(self.table_k)
        k1 = cumulative_trapezoid(k, t, initial=0.0)
        k2 = cumulative_trapezoid(k1, t, initial=0.0)
        return t, k, k1, k2

    def evaluate(self, t: np.ndarray, order: int = 0) -> np.ndarray:
        """K (order 0), K1 = ∫K (order 1) or K2 = ∫K1 (order 2) at times t"""
        t = np.asarray(t, dtype=float)
        if order not in (0, 1, 2):
            raise InvalidArgument(f"antiderivative order must be 0, 1 or 2, got {order}")

        if self.is_zero:
            return np.zeros_like(t)

        if self.family == KernelFamily.CONSTANT or (self.family == KernelFamily.EXPONENTIAL and self.a == 0.0):
            return self.k0 * t ** order / math.factorial(order)

        if self.family == KernelFamily.EXPONENTIAL:
            a = self.a
            decay = np.exp(-a * t)
            if order == 0:
                return self.k0 * decay
            if order == 1:
                return self.k0 * (1.0 - decay) / a
            return self.k0 * (t / a - (1.0 - decay) / a ** 2)

        table_t, *columns = self._tables()
        if t.size and t.max() > table_t[-1] * (1 + 1e-12):
            raise InvalidArgument(f"tabulated kernel covers [0, {table_t[-1]}], asked for t = {t.max()}")
        return np.interp(t, table_t, columns[order])

    def sample(self, grid: TimeGrid, order: int = 0) -> Signal:
        return Signal(grid, self.evaluate(grid.nodes, order))

    def sup_norm(self, T: float) -> float:
        t = np.linspace(0.0, T, 2049)
        return float(np.max(np.abs(self.evaluate(t))))

    def describe(self) -> str:
        if self.family == KernelFamily.ZERO:
            return "K = 0"
        if self.family == KernelFamily.CONSTANT:
            return f"K = {self.k0:g}"
        if self.family == KernelFamily.EXPONENTIAL:
            return f"K = {self.k0:g} exp(-{self.a:g} t)"
        return f"K tabulated ({len(self.table_t)} samples on [0, {self.table_t[-1]:g}])"

    def to_dict(self) -> Dict[str, Any]:
        data = {'family': self.family.value, 'description': self.describe()}
        if self.family in (KernelFamily.CONSTANT, KernelFamily.EXPONENTIAL):
            data['k0'] = self.k0
        if self.family == KernelFamily.EXPONENTIAL:
            data['a'] = self.a
        return data


# =============================================================================
# CONVOLUTION ALGEBRA
# =============================================================================

def convolve(a: Signal, b: Signal) -> Signal:
    """
    (a*b)(t_j) = ∫_0^{t_j} a(s) b(t_j - s) ds by the trapezoid rule.

    Direct O(m²) evaluation; (a*b)(0) = 0.
    """
    if a.grid != b.grid:
        raise GridMismatch(f"convolve: grid (T={a.grid.T}, m={a.grid.m}) vs (T={b.grid.T}, m={b.grid.m})")

    x, y = a.values, b.values
    n = x.size
    full = np.convolve(x, y)[:n]
    # endpoint halves of the trapezoid rule
    values = a.grid.h * (full - 0.5 * (x[0] * y + x * y[0]))
    values[0] = 0.0
    return Signal(a.grid, values)


def conv_power(a: Signal, r: int) -> Signal:
    """r-fold convolution power a^(*r)"""
    if r < 1:
        raise InvalidArgument(f"convolution power needs r >= 1, got {r}")
    result = a
    for _ in range(r - 1):
        result = convolve(a, result)
    return result


def convolve_at_end(a: Signal, b: Signal) -> complex:
    """(a*b)(T) only, O(m)"""
    if a.grid != b.grid:
        raise GridMismatch("convolve_at_end: grids differ")
    return complex(np.dot(a.grid.weights, a.values * b.values[::-1]))


def trig_signals(mode, grid: TimeGrid) -> Tuple[Signal, Signal, Signal]:
    """S_n = sin(lambda_n t), C_n = cos(lambda_n t), E_n = exp(i lambda_n t), complex throughout"""
    phase = mode.lam * grid.nodes
    return (Signal(grid, np.sin(phase)),
            Signal(grid, np.cos(phase)),
            Signal(grid, np.exp(1j * phase)))
