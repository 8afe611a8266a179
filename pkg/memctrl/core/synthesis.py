# memctrl/core/synthesis.py

"""
Control Synthesis and Forward Simulation
Turns moment-problem generators g into boundary controls f applied at x = 0,
simulates the controlled system from rest by two independent methods and
runs the steering and regularity experiments.

Forcing convention: w_n'' = -lambda_n² w_n + (K * w_n) - trace_n f(t), so
w_n(T) = -trace_n (zeta_n * f)(T) and w_n'(T) = -trace_n (zeta_n' * f)(T).
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Tuple
import logging

import numpy as np
import pandas as pd

from .. import settings
from ..exceptions import (
    ClassMismatch, ConstraintViolated, GridMismatch, InvalidArgument,
    ObstructionVanishes, ReachFailed,
)
from ..utils.parallel import parallel_map
from .kernels import MemoryKernel, Signal, TimeGrid, convolve, convolve_at_end
from .moment import (
    DEFAULT_CONVENTION, ControlClass, TargetSpec,
    build_kernel_set, build_moment_system, check_constraints, project_N3, solve_min_norm,
)
from .spectral import (
    CoeffState, DecayFit, DomainTag, ModalBasis, TailVerdict,
    fit_decay_exponent, weighted_tail,
)
from .volterra import SolverMethod, ZetaTable, check_resolution, march_memory_oscillator, solve_zeta_all

logger = logging.getLogger(__name__)


TAIL_ORDERS = (1, 2, 3, 4)


# =============================================================================
# DATA CLASSES
# =============================================================================

@dataclass(frozen=True)
class ControlSignal:
    """Generator g and the control f = (polynomial kernel) * g it induces"""
    control_class: ControlClass
    g: Signal
    f: Signal

    def derivative(self) -> Signal:
        """f' computed from g with the same quadrature as f"""
        grid = self.g.grid
        if self.control_class == ControlClass.L2:
            raise InvalidArgument("L2 controls carry no derivative")
        if self.control_class == ControlClass.H10:
            return self.g
        if self.control_class == ControlClass.H20:
            return convolve(Signal.constant(grid), self.g)
        return convolve(Signal.monomial(grid, 1), self.g) * 2.0

    def endpoint_values(self) -> Dict[str, float]:
        values = {
            'f(0)': abs(self.f.values[0]),
            'f(T)': abs(self.f.values[-1]),
        }
        if self.control_class in (ControlClass.H20, ControlClass.H30):
            df = self.derivative()
            values["f'(0)"] = abs(df.values[0])
            values["f'(T)"] = abs(df.values[-1])
        return values

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            't': self.g.grid.nodes,
            'g': self.g.values.real,
            'f': self.f.values.real,
        })


@dataclass
class ReachReport:
    """Distance between the requested and the simulated final state"""
    target: TargetSpec
    achieved: TargetSpec
    target_state: CoeffState
    achieved_state: CoeffState
    weighted_errors: Dict[str, float]
    absolute_error: float
    relative_error: float
    moment: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'target_class': self.target.target_class.label,
            'weighted_errors': self.weighted_errors,
            'absolute_error': self.absolute_error,
            'relative_error': self.relative_error,
            'moment': self.moment,
        }

    def to_frame(self) -> pd.DataFrame:
        n = np.arange(1, len(self.target) + 1)
        return pd.DataFrame({
            'n': n,
            'xi_target_re': self.target.xi.real,
            'xi_target_im': self.target.xi.imag,
            'eta_target_re': self.target.eta.real,
            'eta_target_im': self.target.eta.imag,
            'xi_achieved_re': self.achieved.xi.real,
            'xi_achieved_im': self.achieved.xi.imag,
            'eta_achieved_re': self.achieved.eta.real,
            'eta_achieved_im': self.achieved.eta.imag,
            'w_T': self.achieved_state.w.real,
            'v_T': self.achieved_state.v.real,
        })


@dataclass
class RegularityReport:
    """Weighted tails of the final state produced by an H³ control"""
    kernel: str
    control_class: str
    obstruction: float
    state: CoeffState
    partial_sums: Dict[int, np.ndarray]
    fits: Dict[int, DecayFit]
    control: Optional['RegularityReport'] = None

    @property
    def verdicts(self) -> Dict[int, str]:
        return {k: fit.verdict.value for k, fit in self.fits.items()}

    @property
    def slopes(self) -> Dict[int, float]:
        return {k: fit.slope for k, fit in self.fits.items()}

    def expected_outcome(self) -> bool:
        """Divergent at k = 3 with memory (and a summable twin), summable without"""
        if self.control is None:
            return self.fits[3].verdict == TailVerdict.SUMMABLE
        return (self.fits[3].verdict == TailVerdict.DIVERGENT
                and self.control.fits[3].verdict == TailVerdict.SUMMABLE)

    def to_dict(self) -> Dict[str, Any]:
        data = {
            'kernel': self.kernel,
            'control_class': self.control_class,
            'obstruction': self.obstruction,
            'slopes': {f'k{k}': round(float(s), 6) for k, s in self.slopes.items()},
            'verdicts': {f'k{k}': v for k, v in self.verdicts.items()},
        }
        if self.control is not None:
            data['control'] = self.control.to_dict()
        return data

    def to_frame(self) -> pd.DataFrame:
        columns = {'N': np.arange(1, len(self.state) + 1)}
        for k, sums in self.partial_sums.items():
            columns[f'S{k}'] = sums
        if self.control is not None:
            for k, sums in self.control.partial_sums.items():
                columns[f'S{k}_control'] = sums
        return pd.DataFrame(columns)


# =============================================================================
# LIFTS
# =============================================================================

_LIFT_POWERS = {
    ControlClass.H10: 0,   # f = ∫_0^t g
    ControlClass.H20: 1,   # f = ∫_0^t (t - s) g(s) ds
    ControlClass.H30: 2,   # f = ∫_0^t (t - s)² g(s) ds
}


def lift_generator(g: Signal, control_class: ControlClass) -> ControlSignal:
    """f = t^k * g with the trapezoid convolution, after checking the class's vanishing moments"""
    if control_class == ControlClass.L2:
        return ControlSignal(control_class, g, g)

    violated = check_constraints(g, control_class.constraints, settings.CONSTRAINT_TOL)
    if violated:
        name, value = violated[0]
        logger.error(f"{control_class.label} lift rejected: {name} = {abs(value):.3e}")
        raise ConstraintViolated(name, abs(value), settings.CONSTRAINT_TOL)

    power = _LIFT_POWERS[control_class]
    f = convolve(Signal.monomial(g.grid, power), g)
    return ControlSignal(control_class, g, f)


# =============================================================================
# SIMULATORS
# =============================================================================

def simulate_modal(f: Signal, basis: ModalBasis, kernel: MemoryKernel, grid: TimeGrid) -> CoeffState:
    """Timestep every modal equation from rest and return (w_n(T), w_n'(T))"""
    if f.grid != grid:
        raise GridMismatch("control and simulation grid differ")
    for mode in basis:
        check_resolution(mode, grid)

    K = kernel.evaluate(grid.nodes) if not kernel.is_zero else None

    def final_state(mode):
        x, v = march_memory_oscillator(mode.lambda_sq, grid, K, forcing=-mode.trace * f.values)
        return x[-1], v[-1]

    finals = parallel_map(final_state, basis.modes)
    return CoeffState(np.array([w for w, _ in finals]), np.array([v for _, v in finals]))


def simulate_via_representation(f: Signal, zetas: Sequence[ZetaTable]) -> CoeffState:
    """w_n(T) = -trace_n (zeta_n * f)(T), w_n'(T) = -trace_n (zeta_n' * f)(T)"""
    w, v = [], []
    for table in zetas:
        if table.grid != f.grid:
            raise GridMismatch(f"zeta table for mode {table.mode.index} lives on another grid")
        trace = table.mode.trace
        w.append(-trace * convolve_at_end(table.zeta, f))
        v.append(-trace * convolve_at_end(table.dzeta, f))
    return CoeffState(np.array(w), np.array(v))


def reach_report(target: TargetSpec, achieved_state: CoeffState, basis: ModalBasis) -> ReachReport:
    achieved = TargetSpec.from_state(target.target_class, achieved_state, basis)
    d_xi = float(np.linalg.norm(achieved.xi - target.xi))
    d_eta = float(np.linalg.norm(achieved.eta - target.eta))
    absolute = float(np.hypot(d_xi, d_eta))
    relative = absolute / target.norm if target.norm > 0 else absolute

    return ReachReport(
        target=target,
        achieved=achieved,
        target_state=target.to_state(basis),
        achieved_state=achieved_state,
        weighted_errors={'xi': d_xi, 'eta': d_eta},
        absolute_error=absolute,
        relative_error=relative,
    )


# =============================================================================
# STEERING
# =============================================================================

def steer(
    target: TargetSpec,
    basis: ModalBasis,
    kernel: MemoryKernel,
    grid: TimeGrid,
    control_class: ControlClass,
    ridge: float = 0.0,
    convention: str = DEFAULT_CONVENTION,
    threshold: float = settings.REACH_TOL,
    zeta_method: SolverMethod = SolverMethod.TIMESTEP,
) -> Tuple[ControlSignal, ReachReport]:
    """
    Full pipeline: zetas -> kernel set -> projection -> Gram -> min-norm g
    -> lift to f -> independent modal simulation -> reach report.
    """
    if control_class == ControlClass.H30:
        raise ClassMismatch("steer supports L2, H10 and H20 controls")
    if target.target_class.order != control_class.order:
        raise ClassMismatch(
            f"target class {target.target_class.label} does not match control class {control_class.label}"
        )
    if len(target) != len(basis):
        raise InvalidArgument(f"target has {len(target)} modes, basis {len(basis)}")
    if basis.domain == DomainTag.INTERVAL and grid.T < settings.CRITICAL_TIME:
        raise InvalidArgument(f"T = {grid.T} is below the critical time {settings.CRITICAL_TIME} for Gamma = {{0}}")

    # Step 1: modal impulse responses
    zetas = solve_zeta_all(basis, kernel, grid, zeta_method)

    # Step 2: projected kernels and the realified Gram system
    kernel_set = build_kernel_set(control_class.order, basis, zetas, kernel, convention)
    system = build_moment_system(kernel_set, target)

    # Step 3: minimum-norm generator and its lift
    g = solve_min_norm(system, ridge)
    if system.residual > settings.RESIDUAL_TOL * max(float(np.linalg.norm(system.rhs)), 1.0):
        logger.warning(f"moment residual {system.residual:.3e} above {settings.RESIDUAL_TOL:g}")
    control = lift_generator(g, control_class)

    # Step 4: independent forward simulation
    state = simulate_modal(control.f, basis, kernel, grid)
    report = reach_report(target, state, basis)
    report.moment = system.to_dict()

    logger.info(f"Steer {control_class.label}: relative reach error {report.relative_error:.3e}")
    if report.relative_error > threshold:
        raise ReachFailed(report, threshold)
    return control, report


# =============================================================================
# REGULARITY AND OBSTRUCTION
# =============================================================================

class GeneratorShape(str, Enum):
    """Built-in H³ generators g1"""
    PERIODIC = "periodic"
    SINE = "sine"


def periodic_generator(grid: TimeGrid, cosine_weight: float = 0.01) -> Signal:
    """
    P3 of sin(wt) - 2 sin(2wt) + c (cos(wt) - 4 cos(2wt)) with w = 2π/T.

    Whole periods on [0, T], so g1 is periodic and already meets the three
    vanishing moments. For b = 0 and T = 2 the memoryless final positions
    sit on the two lowest modes and the k = 3 tail saturates at once; the
    memory term alone feeds a |lambda_n|^-3 tail of size √2 Obs.
    """
    omega = 2.0 * np.pi / grid.T
    t = grid.nodes
    raw = (np.sin(omega * t) - 2.0 * np.sin(2.0 * omega * t)
           + cosine_weight * (np.cos(omega * t) - 4.0 * np.cos(2.0 * omega * t)))
    return project_N3(Signal(grid, raw))


def sine_generator(grid: TimeGrid, frequency: float = 3.0) -> Signal:
    """P3 of sin(frequency π t / T)"""
    return project_N3(Signal(grid, np.sin(frequency * np.pi * grid.nodes / grid.T)))


def obstruction_value(kernel: MemoryKernel, g1: Signal) -> float:
    """∫_0^T (T - nu)² (K * g1)(nu) d nu"""
    if kernel.is_zero:
        return 0.0
    memory = convolve(kernel.sample(g1.grid), g1)
    lever = (g1.grid.T - g1.grid.nodes) ** 2
    return float(np.dot(g1.grid.weights, lever * memory.values).real)


def _obstruction_scale(kernel: MemoryKernel, g1: Signal) -> float:
    """Same functional with |K| and |g1|, the natural size of Obs"""
    absolute = convolve(Signal(g1.grid, np.abs(kernel.evaluate(g1.grid.nodes))), Signal(g1.grid, np.abs(g1.values)))
    lever = (g1.grid.T - g1.grid.nodes) ** 2
    return float(np.dot(g1.grid.weights, lever * absolute.values.real))


def cancel_obstruction(kernel: MemoryKernel, g1: Signal, correction: Signal) -> Signal:
    """g1 plus a multiple of P3(correction) chosen so that the obstruction vanishes"""
    direction = project_N3(correction)
    along = obstruction_value(kernel, direction)
    if abs(along) <= settings.OBSTRUCTION_TOL * max(_obstruction_scale(kernel, direction), 1e-300):
        raise InvalidArgument("correction does not move the obstruction functional")
    return g1 - direction * (obstruction_value(kernel, g1) / along)


def regularity_experiment(
    kernel: MemoryKernel,
    g0: float,
    g1: Signal,
    basis: ModalBasis,
    grid: TimeGrid,
    control_class: ControlClass = ControlClass.H30,
    with_control: bool = True,
) -> RegularityReport:
    """
    Apply f = g0 * ∫(t - s)² g1(s) ds at x = 0 and fit the growth of
    S_k(N) = sum_{n <= N} |lambda_n|^(2k) |w_n(T)|² for k = 1..4.

    With memory the K = 0 twin runs alongside as the control case.
    """
    if control_class != ControlClass.H30:
        raise ClassMismatch("the regularity experiment uses H30 controls")
    if g1.grid != grid:
        raise GridMismatch("g1 and simulation grid differ")

    obstruction = obstruction_value(kernel, g1)
    if not kernel.is_zero:
        scale = _obstruction_scale(kernel, g1)
        if abs(obstruction) <= settings.OBSTRUCTION_TOL * max(scale, 1e-300):
            logger.warning(f"Obstruction {obstruction:.3e} vanishes for {kernel.describe()}")
            raise ObstructionVanishes(obstruction)

    control = lift_generator(g1, control_class)
    f = control.f * g0
    state = simulate_modal(f, basis, kernel, grid)

    partial_sums, fits = {}, {}
    for k in TAIL_ORDERS:
        tail = weighted_tail(state, basis, k)
        partial_sums[k] = tail.partial_sums
        fits[k] = fit_decay_exponent(tail.partial_sums)

    report = RegularityReport(
        kernel=kernel.describe(),
        control_class=control_class.label,
        obstruction=obstruction,
        state=state,
        partial_sums=partial_sums,
        fits=fits,
    )
    logger.info(f"Regularity ({kernel.describe()}): Obs = {obstruction:.4e}, "
                f"k=3 slope {fits[3].slope:.3f} ({fits[3].verdict.value})")

    if with_control and not kernel.is_zero:
        report.control = regularity_experiment(MemoryKernel.zero(), g0, g1, basis, grid,
                                               control_class, with_control=False)
    return report
