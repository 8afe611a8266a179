# memctrl/core/volterra.py

"""
Modal Memory Equation Solvers
zeta_n'' = -lambda_n² zeta_n + (K * zeta_n),  zeta_n(0) = 0, zeta_n'(0) = 1

Two independent solvers produce the same ZetaTable:
- timestep: Störmer-Verlet with the trapezoidal memory term
- picard: fixed-point iteration on the second-kind Volterra equations
    zeta  = S/lambda + (1/lambda) S * (K * zeta)
    zeta' = C        +            C * (K * zeta)
plus the convolution expansion of Z_n = zeta_n' + i lambda_n zeta_n and
the residual checks used by the tests and the convergence study.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple
import logging
import math

import numpy as np
import pandas as pd

from .. import settings
from ..exceptions import ImaginaryLambda, InvalidArgument, NoConvergence, UnderResolved
from ..utils.parallel import parallel_map
from .kernels import MemoryKernel, Signal, TimeGrid, convolve, trig_signals
from .spectral import ModalBasis, Mode

logger = logging.getLogger(__name__)


class SolverMethod(str, Enum):
    """How a ZetaTable was produced"""
    TIMESTEP = "timestep"
    PICARD = "picard"
    CLOSED_FORM = "closed_form"


MAX_EXPANSION_ORDER = 4


# =============================================================================
# DATA CLASSES
# =============================================================================

@dataclass(frozen=True)
class ZetaTable:
    """Sampled zeta_n, zeta_n' and Z_n for one mode"""
    mode: Mode
    grid: TimeGrid
    zeta: Signal
    dzeta: Signal
    method: SolverMethod
    iterations: int = 0

    @property
    def z(self) -> Signal:
        return self.dzeta + self.zeta * (1j * self.mode.lam)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            't': self.grid.nodes,
            're_zeta': self.zeta.values.real,
            'im_zeta': self.zeta.values.imag,
            're_dzeta': self.dzeta.values.real,
            'im_dzeta': self.dzeta.values.imag,
        })

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n': self.mode.index,
            'method': self.method.value,
            'iterations': self.iterations,
            'T': self.grid.T,
            'm': self.grid.m,
            'zeta_T_re': self.zeta.values[-1].real,
            'zeta_T_im': self.zeta.values[-1].imag,
        }


# =============================================================================
# STEPPING CORE
# =============================================================================

def check_resolution(mode: Mode, grid: TimeGrid) -> None:
    h_lambda = grid.h * abs(mode.lam)
    if h_lambda > settings.RESOLUTION_LIMIT:
        raise UnderResolved(mode.index, h_lambda, settings.RESOLUTION_LIMIT)


def march_memory_oscillator(
    lambda_sq: complex,
    grid: TimeGrid,
    kernel_values: Optional[np.ndarray] = None,
    forcing: Optional[np.ndarray] = None,
    x0: complex = 0.0,
    v0: complex = 0.0,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Velocity Verlet for x'' = -lambda_sq x + (K * x) + F(t).

    The memory integral at t_j uses the trapezoid rule on the already known
    samples x_0..x_j, so the scheme stays explicit. Returns (x, x').
    """
    m, h = grid.m, grid.h
    x = np.zeros(m + 1, dtype=complex)
    v = np.zeros(m + 1, dtype=complex)
    F = np.zeros(m + 1, dtype=complex) if forcing is None else np.asarray(forcing, dtype=complex)
    K = None if kernel_values is None or not np.any(kernel_values) else np.asarray(kernel_values, dtype=complex)

    x[0], v[0] = x0, v0
    acc = -lambda_sq * x0 + F[0]
    half_h2 = 0.5 * h * h

    for j in range(m):
        x[j + 1] = x[j] + h * v[j] + half_h2 * acc
        new_acc = -lambda_sq * x[j + 1] + F[j + 1]
        if K is not None:
            memory = np.dot(K[j:0:-1], x[1:j + 1]) + 0.5 * (K[j + 1] * x[0] + K[0] * x[j + 1])
            new_acc += h * memory
        v[j + 1] = v[j] + 0.5 * h * (acc + new_acc)
        acc = new_acc

    return x, v


# =============================================================================
# ZETA SOLVERS
# =============================================================================

def closed_form_zeta(mode: Mode, grid: TimeGrid) -> ZetaTable:
    """K = 0: zeta = sin(lambda t)/lambda, zeta' = cos(lambda t)"""
    S, C, _ = trig_signals(mode, grid)
    return ZetaTable(mode, grid, S * (1.0 / mode.lam), C, SolverMethod.CLOSED_FORM)


def solve_zeta_timestep(mode: Mode, kernel: MemoryKernel, grid: TimeGrid) -> ZetaTable:
    check_resolution(mode, grid)
    x, v = march_memory_oscillator(mode.lambda_sq, grid, kernel.evaluate(grid.nodes), v0=1.0)
    return ZetaTable(mode, grid, Signal(grid, x), Signal(grid, v), SolverMethod.TIMESTEP, iterations=grid.m)


def solve_zeta_picard(
    mode: Mode,
    kernel: MemoryKernel,
    grid: TimeGrid,
    max_iter: int = settings.PICARD_MAX_ITER,
    tol: float = settings.PICARD_TOL,
) -> ZetaTable:
    """
    Picard iteration for zeta starting from the memoryless solution.

    Stops when successive iterates are within tol in sup-norm; the
    iteration count includes the step that confirmed convergence.
    """
    if max_iter < 1:
        raise InvalidArgument(f"max_iter must be >= 1, got {max_iter}")
    check_resolution(mode, grid)

    S, C, _ = trig_signals(mode, grid)
    inv_lam = 1.0 / mode.lam
    base = S * inv_lam

    if kernel.is_zero:
        return ZetaTable(mode, grid, base, C, SolverMethod.PICARD, iterations=1)

    K = kernel.sample(grid)
    zeta = base
    distance = math.inf
    iterations = 0

    while iterations < max_iter:
        iterations += 1
        updated = base + convolve(S, convolve(K, zeta)) * inv_lam
        distance = (updated - zeta).sup()
        zeta = updated
        if distance < tol:
            break
    else:
        raise NoConvergence(iterations, distance, tol)

    dzeta = C + convolve(C, convolve(K, zeta))
    logger.debug(f"picard mode {mode.index}: {iterations} iterations, last step {distance:.2e}")
    return ZetaTable(mode, grid, zeta, dzeta, SolverMethod.PICARD, iterations=iterations)


def solve_zeta(mode: Mode, kernel: MemoryKernel, grid: TimeGrid,
               method: SolverMethod = SolverMethod.TIMESTEP) -> ZetaTable:
    if method == SolverMethod.PICARD:
        return solve_zeta_picard(mode, kernel, grid)
    if method == SolverMethod.CLOSED_FORM:
        if not kernel.is_zero:
            raise InvalidArgument("closed-form zeta exists only for K = 0")
        return closed_form_zeta(mode, grid)
    return solve_zeta_timestep(mode, kernel, grid)


def solve_zeta_all(basis: ModalBasis, kernel: MemoryKernel, grid: TimeGrid,
                   method: SolverMethod = SolverMethod.TIMESTEP) -> List[ZetaTable]:
    """One table per basis mode, in basis order"""
    for mode in basis:
        check_resolution(mode, grid)
    logger.info(f"Solving zeta for {len(basis)} modes ({method.value}, m={grid.m}, {kernel.describe()})")
    return parallel_map(lambda mode: solve_zeta(mode, kernel, grid, method), basis.modes)


# =============================================================================
# EXPANSION OF Z_n
# =============================================================================

def z_expansion(
    mode: Mode,
    kernel: MemoryKernel,
    grid: TimeGrid,
    order: int,
    table: Optional[ZetaTable] = None,
) -> Tuple[Signal, Signal]:
    """
    Expansion Z_n ≈ E_n + sum_{r=1..order} lambda_n^-r K^(*r) * S_n^(*r) * E_n and the
    scaled remainder lambda_n^(order+1) (Z_n - expansion).

    Z_n defaults to the Picard table, whose memory term carries the
    discretization error only relative to the (small) memory contribution.
    """
    if not mode.is_real:
        raise ImaginaryLambda(f"mode {mode.index} has lambda_sq = {mode.lambda_sq:.4g} < 0")
    if not 0 <= order <= MAX_EXPANSION_ORDER:
        raise InvalidArgument(f"expansion order must be in [0, {MAX_EXPANSION_ORDER}], got {order}")

    if table is None:
        table = solve_zeta_picard(mode, kernel, grid)

    S, _, E = trig_signals(mode, grid)
    expansion = E
    if order and not kernel.is_zero:
        KS = convolve(kernel.sample(grid), S)
        term = E
        for _ in range(order):
            term = convolve(KS, term) * (1.0 / mode.lam)
            expansion = expansion + term

    remainder = (table.z - expansion) * (mode.lam ** (order + 1))
    return expansion, remainder


def remainder_envelope_slope(mode: Mode, remainder: Signal) -> float:
    """sup |d/dt (exp(-i lambda t) P(t))| by centered differences"""
    grid = remainder.grid
    envelope = remainder.values * np.exp(-1j * mode.lam * grid.nodes)
    return float(np.max(np.abs(np.gradient(envelope, grid.h))))


# =============================================================================
# RESIDUAL CHECKS
# =============================================================================

def equation_defect(table: ZetaTable, kernel: MemoryKernel) -> float:
    """sup over [h, T-h] of |zeta'' + lambda² zeta - K * zeta| with centered second differences"""
    z = table.zeta.values
    h = table.grid.h
    second = (z[2:] - 2 * z[1:-1] + z[:-2]) / h ** 2
    memory = convolve(kernel.sample(table.grid), table.zeta).values[1:-1]
    return float(np.max(np.abs(second + table.mode.lambda_sq * z[1:-1] - memory)))


def fixed_point_residual(table: ZetaTable, kernel: MemoryKernel) -> float:
    """||Z - E - lambda^-1 K * S * Z||_inf"""
    S, _, E = trig_signals(table.mode, table.grid)
    Z = table.z
    if kernel.is_zero:
        return (Z - E).sup()
    KS = convolve(kernel.sample(table.grid), S)
    return (Z - E - convolve(KS, Z) * (1.0 / table.mode.lam)).sup()


def energy_drift(table: ZetaTable) -> float:
    """max | |zeta'|² + lambda²|zeta|² - 1 |, conserved when K = 0 and lambda real"""
    energy = np.abs(table.dzeta.values) ** 2 + table.mode.lambda_sq * np.abs(table.zeta.values) ** 2
    return float(np.max(np.abs(energy - 1.0)))


def derivative_identity_defect(table: ZetaTable, kernel: MemoryKernel) -> float:
    """sup over interior nodes of |Z' - (i lambda Z + K * zeta)| with centered differences"""
    Z = table.z.values
    h = table.grid.h
    dZ = (Z[2:] - Z[:-2]) / (2 * h)
    rhs = 1j * table.mode.lam * Z + convolve(kernel.sample(table.grid), table.zeta).values
    return float(np.max(np.abs(dZ - rhs[1:-1])))
