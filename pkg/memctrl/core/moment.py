# memctrl/core/moment.py

"""
Moment Problems for Boundary Steering
Builds the moment kernels of the L², H¹₀ and H²₀ control classes, projects
them onto the generator subspaces N1 / N2, assembles the Gram matrix of the
realified family and solves the truncated moment problem by minimum-norm
ridge-regularized normal equations.

Pairing convention: m_n = ∫_0^T p_n(r) g(T - r) dr. Kernels are stored
un-reversed; the pairing applies the time reversal.
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np
import pandas as pd
import scipy.linalg

from .. import settings
from ..exceptions import (
    ClassMismatch, GridMismatch, IllConditioned, InvalidArgument, MissingMode,
)
from ..utils.parallel import parallel_map
from .kernels import MemoryKernel, Signal, TimeGrid, convolve, convolve_at_end
from .spectral import CoeffState, ModalBasis, Mode
from .volterra import ZetaTable

logger = logging.getLogger(__name__)


# =============================================================================
# CONSTANTS & CONFIGURATION
# =============================================================================

class ControlClass(Enum):
    """Control classes: label, moment-kernel order, number of vanishing moments of g"""
    L2 = ('L2', 0, 0)
    H10 = ('H10', 1, 1)
    H20 = ('H20', 2, 2)
    H30 = ('H30', 3, 3)

    def __init__(self, label: str, order: int, constraints: int):
        self.label = label
        self.order = order
        self.constraints = constraints

    @classmethod
    def from_string(cls, value: str) -> 'ControlClass':
        for c in cls:
            if c.label.lower() == value.lower():
                return c
        raise InvalidArgument(f"unknown control class '{value}'")


class TargetClass(Enum):
    """Target smoothness classes and the weight powers of their normalized coefficients"""
    L2xHm1 = ('L2xHm1', 0)   # w_n = xi_n,            w_n' = lambda_n eta_n
    H10xL2 = ('H10xL2', 1)   # w_n = xi_n / lambda_n,  w_n' = eta_n
    H2xH10 = ('H2xH10', 2)   # w_n = xi_n / lambda_n², w_n' = eta_n / lambda_n

    def __init__(self, label: str, order: int):
        self.label = label
        self.order = order

    @classmethod
    def for_order(cls, order: int) -> 'TargetClass':
        for c in cls:
            if c.order == order:
                return c
        raise ClassMismatch(f"no target class for control order {order}")


@dataclass(frozen=True)
class MomentConvention:
    """
    How (xi, eta) become c = c_u + i c_v for one control order.

    c_u pairs with the velocity part of the kernel, c_v with the position
    part; each is (source sequence, sign).
    """
    velocity: Tuple[str, int]
    position: Tuple[str, int]
    k2_sign: int = -1


# 'derived' follows from the modal equation with forcing -trace*f and is the
# table the steer test validates; 'paper' is the printed one.
CONVENTIONS: Dict[str, Dict[int, MomentConvention]] = {
    'derived': {
        0: MomentConvention(velocity=('eta', -1), position=('xi', -1)),
        1: MomentConvention(velocity=('xi', 1), position=('eta', -1)),
        2: MomentConvention(velocity=('eta', 1), position=('xi', 1), k2_sign=-1),
    },
    'paper': {
        0: MomentConvention(velocity=('eta', 1), position=('xi', 1)),
        1: MomentConvention(velocity=('xi', -1), position=('eta', 1)),
        2: MomentConvention(velocity=('eta', -1), position=('xi', 1), k2_sign=1),
    },
}

DEFAULT_CONVENTION = 'derived'


def get_convention(name: str, order: int) -> MomentConvention:
    if name not in CONVENTIONS:
        raise InvalidArgument(f"unknown moment convention '{name}' (known: {sorted(CONVENTIONS)})")
    return CONVENTIONS[name][order]


# =============================================================================
# DATA CLASSES
# =============================================================================

@dataclass(frozen=True)
class TargetSpec:
    """Target pair (xi, eta) in the normalized coefficients of its class"""
    target_class: TargetClass
    xi: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=complex)
        eta = np.asarray(self.eta, dtype=complex)
        if xi.shape != eta.shape or xi.ndim != 1:
            raise InvalidArgument(f"xi and eta lengths differ: {xi.shape} vs {eta.shape}")
        if not (np.all(np.isfinite(xi)) and np.all(np.isfinite(eta))):
            raise InvalidArgument("target coefficients must be finite")
        object.__setattr__(self, 'xi', xi)
        object.__setattr__(self, 'eta', eta)

    def __len__(self) -> int:
        return len(self.xi)

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.xi) ** 2) + np.sum(np.abs(self.eta) ** 2)))

    @classmethod
    def zero(cls, target_class: TargetClass, n: int) -> 'TargetSpec':
        return cls(target_class, np.zeros(n), np.zeros(n))

    @classmethod
    def inverse_power(cls, target_class: TargetClass, n: int, power: float = 2.0,
                      component: str = 'xi') -> 'TargetSpec':
        """xi_n (or eta_n) = 1/n^power, the other sequence zero"""
        seq = 1.0 / np.arange(1, n + 1) ** power
        zeros = np.zeros(n)
        if component == 'xi':
            return cls(target_class, seq, zeros)
        if component == 'eta':
            return cls(target_class, zeros, seq)
        raise InvalidArgument(f"component must be 'xi' or 'eta', got '{component}'")

    @classmethod
    def random(cls, target_class: TargetClass, n: int, seed: int, decay: float = 1.5) -> 'TargetSpec':
        """Gaussian coefficients damped by n^-decay; reproducible for a fixed seed"""
        rng = np.random.default_rng(seed)
        damping = 1.0 / np.arange(1, n + 1) ** decay
        return cls(target_class, rng.standard_normal(n) * damping, rng.standard_normal(n) * damping)

    @classmethod
    def from_state(cls, target_class: TargetClass, state: CoeffState, basis: ModalBasis) -> 'TargetSpec':
        lam = basis.lambdas[:len(state)]
        j = target_class.order
        return cls(target_class, state.w * lam ** j, state.v * lam ** (j - 1))

    def to_state(self, basis: ModalBasis) -> CoeffState:
        lam = basis.lambdas[:len(self)]
        j = self.target_class.order
        return CoeffState(self.xi / lam ** j, self.eta / lam ** (j - 1))

    def aligned(self, basis: ModalBasis) -> 'TargetSpec':
        """
        Rotate xi_n by the phase of lambda_n^j and eta_n by that of
        lambda_n^(j-1), so real sequences describe a real final state.
        Modes with real lambda_n keep their coefficients.
        """
        lam = basis.lambdas[:len(self)]
        j = self.target_class.order
        xi_phase = np.array([_unit_phase(z) for z in lam ** j])
        eta_phase = np.array([_unit_phase(z) for z in lam ** (j - 1)])
        return TargetSpec(self.target_class, self.xi * xi_phase, self.eta * eta_phase)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'class': self.target_class.label,
            'xi': [[float(x.real), float(x.imag)] if x.imag else float(x.real) for x in self.xi],
            'eta': [[float(x.real), float(x.imag)] if x.imag else float(x.real) for x in self.eta],
            'norm': self.norm,
        }


@dataclass
class MomentKernelSet:
    """
    Per-mode kernels e_n = u_n + i v_n and their projections p_n = P e_n.

    u_n is the velocity part, v_n the position part. For order 0 the
    projected parts are the unprojected ones.
    """
    order: int
    grid: TimeGrid
    modes: Tuple[Mode, ...]
    u: List[Signal]
    v: List[Signal]
    pu: List[Signal]
    pv: List[Signal]
    convention: str = DEFAULT_CONVENTION

    def __len__(self) -> int:
        return len(self.modes)

    def e(self, i: int) -> Signal:
        return self.u[i] + self.v[i] * 1j

    def p(self, i: int) -> Signal:
        return self.pu[i] + self.pv[i] * 1j

    def phases(self, i: int) -> Tuple[complex, complex]:
        mode = self.modes[i]
        return _unit_phase(mode.psi), _unit_phase(mode.psi * mode.lam)

    def realified(self) -> np.ndarray:
        """Rows [u_1, v_1, u_2, v_2, ...] of the projected family, each divided by its constant phase"""
        rows = []
        for i in range(len(self)):
            phase_u, phase_v = self.phases(i)
            rows.append((self.pu[i].values / phase_u).real)
            rows.append((self.pv[i].values / phase_v).real)
        return np.array(rows)

    def complex_family(self) -> np.ndarray:
        return np.array([self.p(i).values for i in range(len(self))])

    def select(self, positions: Sequence[int]) -> 'MomentKernelSet':
        pick = list(positions)
        return MomentKernelSet(
            order=self.order,
            grid=self.grid,
            modes=tuple(self.modes[i] for i in pick),
            u=[self.u[i] for i in pick],
            v=[self.v[i] for i in pick],
            pu=[self.pu[i] for i in pick],
            pv=[self.pv[i] for i in pick],
            convention=self.convention,
        )

    def to_frame(self) -> pd.DataFrame:
        columns = {'t': self.grid.nodes}
        for i, mode in enumerate(self.modes):
            p = self.p(i).values
            columns[f'p{mode.index}_re'] = p.real
            columns[f'p{mode.index}_im'] = p.imag
        return pd.DataFrame(columns)


@dataclass
class MomentSystem:
    """Realified Gram system G beta = c for one kernel set and target"""
    kernel_set: MomentKernelSet
    gram: np.ndarray
    moments: np.ndarray          # complex c_n
    rhs: np.ndarray              # realified c
    beta: Optional[np.ndarray] = None
    residual: Optional[float] = None
    ridge: float = 0.0
    condition: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'order': self.kernel_set.order,
            'size': int(self.gram.shape[0]),
            'ridge': self.ridge,
            'condition': self.condition,
            'residual': self.residual,
            'rhs_norm': float(np.linalg.norm(self.rhs)),
        }


@dataclass
class RieszReport:
    """Empirical frame bounds and finite-defect analysis of a kernel family"""
    modes: List[int]
    eigenvalues: np.ndarray
    lower_bound: float
    upper_bound: float
    condition: float
    defect: int
    threshold: float
    removed: List[int] = field(default_factory=list)
    remaining_condition: Optional[float] = None
    remaining_well_conditioned: Optional[bool] = None

    @property
    def is_riesz(self) -> bool:
        return self.defect == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'modes': self.modes,
            'lower_bound': self.lower_bound,
            'upper_bound': self.upper_bound,
            'condition': self.condition,
            'defect': self.defect,
            'threshold': self.threshold,
            'is_riesz': self.is_riesz,
            'removed_modes': self.removed,
            'remaining_condition': self.remaining_condition,
            'remaining_well_conditioned': self.remaining_well_conditioned,
        }

    def spectrum_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'rank': np.arange(1, self.eigenvalues.size + 1), 'eigenvalue': self.eigenvalues})


# =============================================================================
# PROJECTIONS
# =============================================================================

def _unit_phase(z: complex) -> complex:
    z = complex(z)
    if abs(z.imag) <= 1e-12 * abs(z):
        return 1.0
    return z / abs(z)


@lru_cache(maxsize=32)
def _polynomial_frame(grid: TimeGrid, count: int) -> Tuple[np.ndarray, np.ndarray]:
    """Columns (t/T)^k, k < count, and the inverse of their weighted Gram matrix"""
    scaled = grid.nodes / grid.T
    B = np.vander(scaled, count, increasing=True)
    gram = B.T @ (grid.weights[:, None] * B)
    return B, np.linalg.inv(gram)


def _polynomial_coefficients(s: Signal, count: int) -> np.ndarray:
    B, inv_gram = _polynomial_frame(s.grid, count)
    return inv_gram @ (B.T @ (s.grid.weights * s.values))


def project_out_polynomials(s: Signal, count: int) -> Signal:
    """Orthogonal projection (trapezoid inner product) onto the complement of span{1, t, ..., t^(count-1)}"""
    if count == 0:
        return s
    B, _ = _polynomial_frame(s.grid, count)
    return Signal(s.grid, s.values - B @ _polynomial_coefficients(s, count))


def project_N1(s: Signal) -> Signal:
    """f - (1/T) ∫ f"""
    return project_out_polynomials(s, 1)


def project_N2(s: Signal) -> Signal:
    """f - t A_f - B_f; annihilates ∫ g and ∫ (T - r) g(r) dr"""
    return project_out_polynomials(s, 2)


def project_N3(s: Signal) -> Signal:
    """Three-constraint projector for H³ generators: ∫ (T - r)^k g(r) dr = 0, k = 0, 1, 2"""
    return project_out_polynomials(s, 3)


def linear_trend(s: Signal) -> Tuple[complex, complex]:
    """(A, B) with P2 s = s - t A - B"""
    c0, c1 = _polynomial_coefficients(s, 2)
    return complex(c1 / s.grid.T), complex(c0)


def constraint_values(g: Signal, count: int) -> List[complex]:
    """∫_0^T (T - r)^k g(r) dr for k < count"""
    lever = g.grid.T - g.grid.nodes
    return [complex(np.dot(g.grid.weights, lever ** k * g.values)) for k in range(count)]


def check_constraints(g: Signal, count: int, tolerance: float) -> List[Tuple[str, complex]]:
    """Functionals whose value exceeds tolerance * T^(k+1/2) ||g||"""
    scale = g.norm()
    violated = []
    for k, value in enumerate(constraint_values(g, count)):
        limit = tolerance * max(scale, 1e-300) * g.grid.T ** (k + 0.5)
        if abs(value) > limit:
            violated.append((f"∫(T-r)^{k} g(r) dr", value))
    return violated


# =============================================================================
# KERNEL CONSTRUCTION
# =============================================================================

def _mode_kernels(order: int, table: ZetaTable, K1: Optional[Signal], K2: Optional[Signal],
                  k2_sign: int) -> Tuple[Signal, Signal, Signal, Signal]:
    mode = table.mode
    psi, lam = mode.psi, mode.lam

    velocity = table.dzeta
    if order >= 1 and K1 is not None:
        velocity = velocity - convolve(K1, table.zeta)

    position = table.zeta
    if order == 2 and K2 is not None:
        position = position + convolve(K2, table.zeta) * k2_sign

    u = velocity * psi
    v = position * (psi * lam)

    if order == 1:
        return u, v, project_N1(u), project_N1(v)
    if order == 2:
        return u, v, project_N2(u), project_N2(v)
    return u, v, u, v


def build_kernel_set(order: int, basis: ModalBasis, zetas: Sequence[ZetaTable], kernel: MemoryKernel,
                     convention: str = DEFAULT_CONVENTION) -> MomentKernelSet:
    """
    Order 0: e_n = psi (zeta' + i lambda zeta)
    Order 1: e_n = psi [(zeta' - K1 * zeta) + i lambda zeta],                 p_n = P_N1 e_n
    Order 2: e_n = psi [(zeta' - K1 * zeta) + i lambda (zeta +/- K2 * zeta)], p_n = P_N2 e_n
    """
    if order not in (0, 1, 2):
        raise InvalidArgument(f"moment kernel order must be 0, 1 or 2, got {order}")
    if not zetas:
        raise MissingMode("no zeta tables supplied")

    grid = zetas[0].grid
    by_index = {}
    for table in zetas:
        if table.grid != grid:
            raise GridMismatch(f"zeta table for mode {table.mode.index} lives on another grid")
        by_index[table.mode.index] = table

    missing = [mode.index for mode in basis if mode.index not in by_index]
    if missing:
        raise MissingMode(f"no zeta table for modes {missing}")

    k2_sign = get_convention(convention, order).k2_sign
    K1 = None if kernel.is_zero else kernel.sample(grid, order=1)
    K2 = None if kernel.is_zero else kernel.sample(grid, order=2)

    tables = [by_index[mode.index] for mode in basis]
    parts = parallel_map(lambda table: _mode_kernels(order, table, K1, K2, k2_sign), tables)

    if order >= 1:
        for mode, (_, _, pu, pv) in zip(basis, parts):
            if check_constraints(pu, order, settings.PROJECTION_TOL) or check_constraints(pv, order, settings.PROJECTION_TOL):
                logger.warning(f"projected kernel of mode {mode.index} misses the N{order} conditions")

    logger.info(f"Built order-{order} kernel set: {len(basis)} modes, m={grid.m}, {kernel.describe()}")
    return MomentKernelSet(
        order=order,
        grid=grid,
        modes=tuple(basis.modes),
        u=[p[0] for p in parts],
        v=[p[1] for p in parts],
        pu=[p[2] for p in parts],
        pv=[p[3] for p in parts],
        convention=convention,
    )


# =============================================================================
# PAIRING, GRAM, TARGETS
# =============================================================================

def pair(kernel_set: MomentKernelSet, g: Signal) -> np.ndarray:
    """m_n = ∫_0^T p_n(r) g(T - r) dr"""
    if g.grid != kernel_set.grid:
        raise GridMismatch("generator and kernel set live on different grids")

    if kernel_set.order >= 1:
        violated = check_constraints(g, kernel_set.order, settings.CONSTRAINT_TOL)
        for name, value in violated:
            logger.warning(f"generator outside N{kernel_set.order}: {name} = {abs(value):.3e}")

    return np.array([convolve_at_end(kernel_set.p(i), g) for i in range(len(kernel_set))])


def pair_realified(kernel_set: MomentKernelSet, g: Signal) -> np.ndarray:
    if g.grid != kernel_set.grid:
        raise GridMismatch("generator and kernel set live on different grids")
    reversed_g = (kernel_set.grid.weights * g.values[::-1]).real
    return kernel_set.realified() @ reversed_g


def assemble_gram(kernel_set: MomentKernelSet, realified: bool = True) -> np.ndarray:
    """
    Gram matrix over [0, T] with trapezoid weights.

    realified=True: real symmetric 2N x 2N matrix of the family [u_1, v_1, ...].
    realified=False: Hermitian N x N matrix <p_n, p_m> of the complex family.
    """
    w = kernel_set.grid.weights
    if realified:
        R = kernel_set.realified()
        G = R @ (w[:, None] * R.T)
        return 0.5 * (G + G.T)
    F = kernel_set.complex_family()
    G = F @ (w[:, None] * F.conj().T)
    return 0.5 * (G + G.conj().T)


def split_moments(target: TargetSpec, order: int, convention: str = DEFAULT_CONVENTION) -> Tuple[np.ndarray, np.ndarray]:
    """(c_u, c_v) with c = c_u + i c_v"""
    if target.target_class.order != order:
        raise ClassMismatch(
            f"target class {target.target_class.label} does not match control order {order}"
        )
    rule = get_convention(convention, order)
    sources = {'xi': target.xi, 'eta': target.eta}
    c_u = rule.velocity[1] * sources[rule.velocity[0]]
    c_v = rule.position[1] * sources[rule.position[0]]
    return c_u, c_v


def target_to_moments(target: TargetSpec, order: int, convention: str = DEFAULT_CONVENTION) -> np.ndarray:
    c_u, c_v = split_moments(target, order, convention)
    return c_u + 1j * c_v


def build_moment_system(kernel_set: MomentKernelSet, target: TargetSpec) -> MomentSystem:
    if len(target) != len(kernel_set):
        raise InvalidArgument(f"target has {len(target)} modes, kernel set {len(kernel_set)}")

    c_u, c_v = split_moments(target, kernel_set.order, kernel_set.convention)
    rhs = []
    for i in range(len(kernel_set)):
        phase_u, phase_v = kernel_set.phases(i)
        rhs.extend([(c_u[i] / phase_u).real, (c_v[i] / phase_v).real])

    return MomentSystem(
        kernel_set=kernel_set,
        gram=assemble_gram(kernel_set),
        moments=c_u + 1j * c_v,
        rhs=np.array(rhs),
    )


# =============================================================================
# SOLVE
# =============================================================================

def solve_min_norm(system: MomentSystem, ridge: float = 0.0) -> Signal:
    """
    Minimum-norm real generator g with pair(g) ≈ c.

    Solves (G + ridge I) beta = c, sets g(T - r) = sum_k beta_k kappa_k(r)
    and records beta, the residual and the condition estimate on the system.
    """
    if ridge < 0:
        raise InvalidArgument(f"ridge must be >= 0, got {ridge}")

    kernel_set = system.kernel_set
    grid = kernel_set.grid
    size = system.gram.shape[0]
    system.ridge = ridge

    if not np.any(system.rhs):
        system.beta = np.zeros(size)
        system.residual = 0.0
        system.condition = None
        return Signal.zeros(grid)

    A = system.gram + ridge * np.eye(size)
    condition = float(np.linalg.cond(A))
    system.condition = condition
    if not np.isfinite(condition) or condition > settings.CONDITION_LIMIT:
        logger.error(f"Gram system rejected: condition {condition:.3e}")
        raise IllConditioned(condition, settings.CONDITION_LIMIT)

    beta = scipy.linalg.solve(A, system.rhs, assume_a='sym')
    combined = kernel_set.realified().T @ beta
    g = Signal(grid, combined[::-1])

    system.beta = beta
    system.residual = float(np.linalg.norm(pair_realified(kernel_set, g) - system.rhs))
    logger.info(f"Moment solve: size {size}, condition {condition:.3e}, residual {system.residual:.3e}")
    return g


# =============================================================================
# RIESZ DIAGNOSTICS
# =============================================================================

def riesz_diagnostics(kernel_set: MomentKernelSet, n_range: Optional[Tuple[int, int]] = None,
                      tol: float = settings.GRAM_DEFECT_TOL) -> RieszReport:
    """
    Frame bounds, condition and finite defect of the complex family {p_n}.

    A defect k > 0 triggers greedy removal of k members, each time the one
    with the largest component in the lowest eigenvector, and reports
    whether what is left is well conditioned.
    """
    positions = list(range(len(kernel_set)))
    if n_range is not None:
        first, last = n_range
        positions = [i for i, mode in enumerate(kernel_set.modes) if first <= mode.index <= last]
    if len(positions) < 4:
        raise InvalidArgument(f"Riesz diagnostics need at least 4 modes, got {len(positions)}")

    family = kernel_set.select(positions)
    G = assemble_gram(family, realified=False)
    eigenvalues = scipy.linalg.eigh(G, eigvals_only=True)

    upper = float(eigenvalues[-1])
    lower = float(eigenvalues[0])
    threshold = tol * upper
    defect = int(np.sum(eigenvalues < threshold))
    condition = upper / lower if lower > 0 else float('inf')

    report = RieszReport(
        modes=[mode.index for mode in family.modes],
        eigenvalues=eigenvalues,
        lower_bound=lower,
        upper_bound=upper,
        condition=condition,
        defect=defect,
        threshold=threshold,
    )

    if defect:
        keep = list(range(len(family)))
        for _ in range(defect):
            values, vectors = scipy.linalg.eigh(G[np.ix_(keep, keep)])
            drop = int(np.argmax(np.abs(vectors[:, 0])))
            report.removed.append(family.modes[keep[drop]].index)
            keep.pop(drop)

        remaining = scipy.linalg.eigh(G[np.ix_(keep, keep)], eigvals_only=True)
        report.remaining_condition = float(remaining[-1] / remaining[0]) if remaining[0] > 0 else float('inf')
        report.remaining_well_conditioned = bool(remaining[0] >= tol * remaining[-1])
        logger.info(f"Riesz defect {defect}: removed modes {report.removed}, "
                    f"remaining condition {report.remaining_condition:.3e}")

    return report
