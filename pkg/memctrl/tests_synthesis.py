# memctrl/tests_synthesis.py

"""
Test cases for control synthesis.
Tests lifts, both forward simulators, end-to-end steering, the obstruction
functional and the regularity experiment.
"""

import math
import unittest

import numpy as np

from .core.kernels import MemoryKernel, Signal, TimeGrid
from .core.moment import ControlClass, TargetClass, TargetSpec, constraint_values, project_N2
from .core.spectral import TailVerdict, build_interval_basis, fit_decay_exponent, weighted_tail
from .core.synthesis import (
    cancel_obstruction,
    lift_generator,
    obstruction_value,
    periodic_generator,
    regularity_experiment,
    simulate_modal,
    simulate_via_representation,
    sine_generator,
    steer,
)
from .core.volterra import SolverMethod, solve_zeta_all
from .exceptions import (
    ClassMismatch, ConstraintViolated, InvalidArgument, ObstructionVanishes, ReachFailed,
)


# =============================================================================
# MOCK DATA FIXTURES
# =============================================================================

def smooth_signal(grid, seed=3, terms=4):
    """Seeded sum of a few sines and cosines"""
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal(terms), rng.standard_normal(terms)
    tau = grid.nodes / grid.T

    def func(t):
        return sum(a[k] * np.sin((k + 1) * math.pi * tau) + b[k] * np.cos(k * math.pi * tau) for k in range(terms))

    return Signal.from_function(grid, func)


def steering_target(n_modes, control_class):
    return TargetSpec.inverse_power(TargetClass.for_order(control_class.order), n_modes, 2.0, 'xi')


def regularity_seed(grid):
    return periodic_generator(grid, cosine_weight=0.01)


# =============================================================================
# LIFT TESTS
# =============================================================================

class TestLiftGenerator(unittest.TestCase):
    """Test lift_generator"""

    def test_sine_generator(self):
        grid = TimeGrid(2.0, 2000)
        g = Signal.from_function(grid, lambda t: np.sin(2 * math.pi * t / 2.0))
        control = lift_generator(g, ControlClass.H10)
        expected = (2.0 / (2 * math.pi)) * (1 - np.cos(2 * math.pi * grid.nodes / 2.0))
        np.testing.assert_allclose(control.f.values.real, expected, atol=1e-5)
        self.assertLess(abs(control.f.values[-1]), 1e-12)

    def test_second_order_endpoints(self):
        grid = TimeGrid(2.0, 2000)
        g = project_N2(smooth_signal(grid))
        endpoints = lift_generator(g, ControlClass.H20).endpoint_values()
        for name, value in endpoints.items():
            self.assertLessEqual(value, 1e-8, msg=name)

    def test_third_order_endpoints(self):
        grid = TimeGrid(2.0, 2000)
        endpoints = lift_generator(regularity_seed(grid), ControlClass.H30).endpoint_values()
        for name, value in endpoints.items():
            self.assertLessEqual(value, 1e-8, msg=name)

    def test_constant_generator_rejected(self):
        with self.assertRaises(ConstraintViolated):
            lift_generator(Signal.constant(TimeGrid(2.0, 256)), ControlClass.H10)


# =============================================================================
# SIMULATOR TESTS
# =============================================================================

class TestSimulators(unittest.TestCase):
    """Test simulate_modal and simulate_via_representation"""

    def test_zero_control(self):
        grid = TimeGrid(2.0, 512)
        basis = build_interval_basis(0.0, 4)
        kernel = MemoryKernel.exponential(1.0, 1.0)
        f = Signal.zeros(grid)
        state = simulate_modal(f, basis, kernel, grid)
        np.testing.assert_array_equal(state.w, np.zeros(4))
        represented = simulate_via_representation(f, solve_zeta_all(basis, kernel, grid))
        np.testing.assert_array_equal(represented.v, np.zeros(4))

    def test_duhamel_single_mode(self):
        """w_1(2) = -√2 for f = sin(pi t)"""
        grid = TimeGrid(2.0, 2048)
        basis = build_interval_basis(0.0, 1)
        f = Signal.from_function(grid, lambda t: np.sin(math.pi * t))
        state = simulate_modal(f, basis, MemoryKernel.zero(), grid)
        self.assertAlmostEqual(state.w[0].real, -math.sqrt(2.0), delta=1e-3)

    def test_simulators_agree_with_memory(self):
        """Direct timestepping against Duhamel sums over Picard zeta tables"""
        T = 2.5
        grid = TimeGrid(T, 2048)
        basis = build_interval_basis(0.0, 16)
        f = Signal.from_function(
            grid, lambda t: np.sin(math.pi * t / T) ** 2 * (1 + 0.5 * np.cos(3 * math.pi * t / T))
        )
        for kernel in (MemoryKernel.exponential(1.0, 1.0), MemoryKernel.constant(1.0)):
            direct = simulate_modal(f, basis, kernel, grid)
            represented = simulate_via_representation(f, solve_zeta_all(basis, kernel, grid, SolverMethod.PICARD))
            scale = np.max(np.abs(np.concatenate([direct.w, direct.v])))
            self.assertLessEqual(np.max(np.abs(direct.w - represented.w)), 1e-3 * scale, msg=kernel.describe())
            self.assertLessEqual(np.max(np.abs(direct.v - represented.v)), 1e-3 * scale, msg=kernel.describe())

    def test_timestep_tables_agree_on_smooth_control(self):
        grid = TimeGrid(2.0, 2048)
        basis = build_interval_basis(0.0, 4)
        kernel = MemoryKernel.exponential(1.0, 1.0)
        f = smooth_signal(grid)
        direct = simulate_modal(f, basis, kernel, grid)
        represented = simulate_via_representation(f, solve_zeta_all(basis, kernel, grid))
        scale = np.max(np.abs(np.concatenate([direct.w, direct.v])))
        self.assertLessEqual(np.max(np.abs(direct.w - represented.w)), 1e-3 * scale)
        self.assertLessEqual(np.max(np.abs(direct.v - represented.v)), 1e-3 * scale)


# =============================================================================
# STEERING TESTS
# =============================================================================

class TestSteer(unittest.TestCase):
    """Test the end-to-end steering pipeline"""

    def setUp(self):
        self.basis = build_interval_basis(0.0, 12)
        self.grid = TimeGrid(2.5, 4096)

    def test_zero_target(self):
        target = TargetSpec.zero(TargetClass.H10xL2, 12)
        control, report = steer(target, self.basis, MemoryKernel.zero(), self.grid, ControlClass.H10)
        self.assertEqual(control.f.sup(), 0.0)
        self.assertEqual(report.relative_error, 0.0)

    def test_l2_steering_is_kernel_independent(self):
        target = steering_target(12, ControlClass.L2)
        for kernel in (MemoryKernel.zero(), MemoryKernel.exponential(0.5, 1.0)):
            _, report = steer(target, self.basis, kernel, self.grid, ControlClass.L2)
            self.assertLessEqual(report.relative_error, 1e-3, msg=kernel.describe())

    def test_h10_steering(self):
        target = steering_target(12, ControlClass.H10)
        for kernel in (MemoryKernel.zero(), MemoryKernel.exponential(0.5, 1.0)):
            control, report = steer(target, self.basis, kernel, self.grid, ControlClass.H10)
            self.assertLessEqual(report.relative_error, 1e-3, msg=kernel.describe())
            for name, value in control.endpoint_values().items():
                self.assertLessEqual(value, 1e-8, msg=name)
            tail = weighted_tail(report.achieved_state, self.basis, 1)
            self.assertEqual(fit_decay_exponent(tail.partial_sums).verdict, TailVerdict.SUMMABLE)

    def test_h20_steering(self):
        target = steering_target(12, ControlClass.H20)
        for kernel in (MemoryKernel.zero(), MemoryKernel.exponential(0.5, 1.0)):
            control, report = steer(target, self.basis, kernel, self.grid, ControlClass.H20)
            self.assertLessEqual(report.relative_error, 1e-3, msg=kernel.describe())
            for name, value in control.endpoint_values().items():
                self.assertLessEqual(value, 1e-8, msg=name)
            tail = weighted_tail(report.achieved_state, self.basis, 2)
            self.assertEqual(fit_decay_exponent(tail.partial_sums).verdict, TailVerdict.SUMMABLE)

    def test_steering_with_negative_eigenvalue(self):
        """b = 15 puts lambda_1 on the imaginary axis"""
        basis = build_interval_basis(15.0, 12)
        self.assertFalse(basis.modes[0].is_real)
        target = steering_target(12, ControlClass.H10).aligned(basis)
        self.assertAlmostEqual(abs(target.xi[0].imag), 1.0)
        np.testing.assert_allclose(target.to_state(basis).w.imag, 0.0, atol=1e-14)
        np.testing.assert_array_equal(target.xi[1:], steering_target(12, ControlClass.H10).xi[1:])

        _, report = steer(target, basis, MemoryKernel.zero(), self.grid, ControlClass.H10)
        self.assertLessEqual(report.relative_error, 1e-3)
        np.testing.assert_allclose(report.achieved_state.w.imag, 0.0, atol=1e-12)

    def test_grid_refinement_does_not_degrade(self):
        target = steering_target(12, ControlClass.H10)
        kernel = MemoryKernel.exponential(0.5, 1.0)
        _, coarse = steer(target, self.basis, kernel, self.grid, ControlClass.H10)
        _, fine = steer(target, self.basis, kernel, self.grid.refine(), ControlClass.H10)
        self.assertLessEqual(fine.relative_error, 2.0 * max(coarse.relative_error, 1e-12))

    def test_threshold_failure_carries_report(self):
        basis = build_interval_basis(0.0, 2)
        target = steering_target(2, ControlClass.L2)
        with self.assertRaises(ReachFailed) as ctx:
            steer(target, basis, MemoryKernel.zero(), TimeGrid(2.5, 512), ControlClass.L2, threshold=-1.0)
        self.assertIsNotNone(ctx.exception.report)

    def test_class_mismatch(self):
        target = steering_target(12, ControlClass.L2)
        with self.assertRaises(ClassMismatch):
            steer(target, self.basis, MemoryKernel.zero(), self.grid, ControlClass.H10)
        with self.assertRaises(ClassMismatch):
            steer(target, self.basis, MemoryKernel.zero(), self.grid, ControlClass.H30)

    def test_below_critical_time(self):
        target = steering_target(12, ControlClass.L2)
        with self.assertRaises(InvalidArgument):
            steer(target, self.basis, MemoryKernel.zero(), TimeGrid(1.5, 4096), ControlClass.L2)


# =============================================================================
# OBSTRUCTION & REGULARITY TESTS
# =============================================================================

class TestObstruction(unittest.TestCase):
    """Test obstruction_value and cancel_obstruction"""

    def test_memoryless(self):
        grid = TimeGrid(2.0, 512)
        self.assertEqual(obstruction_value(MemoryKernel.zero(), regularity_seed(grid)), 0.0)

    def test_constant_kernel_constant_generator(self):
        grid = TimeGrid(1.0, 1000)
        value = obstruction_value(MemoryKernel.constant(1.0), Signal.constant(grid))
        self.assertAlmostEqual(value, 1.0 / 12.0, delta=1e-6)

    def test_engineered_null(self):
        grid = TimeGrid(2.0, 1024)
        kernel = MemoryKernel.exponential(1.0, 1.0)
        correction = Signal.from_function(grid, lambda t: np.cos(math.pi * t / grid.T))
        g1 = cancel_obstruction(kernel, regularity_seed(grid), correction)
        self.assertLessEqual(abs(obstruction_value(kernel, g1)), 1e-8)
        for value in constraint_values(g1, 3):
            self.assertLess(abs(value), 1e-10)


class TestRegularityExperiment(unittest.TestCase):
    """Test regularity_experiment on the shared N = 48 setup"""

    @classmethod
    def setUpClass(cls):
        cls.grid = TimeGrid(2.0, 8192)
        cls.basis = build_interval_basis(0.0, 48)
        cls.kernel = MemoryKernel.exponential(1.0, 1.0)
        cls.g1 = regularity_seed(cls.grid)
        cls.report = regularity_experiment(cls.kernel, 1.0, cls.g1, cls.basis, cls.grid)

    def test_memory_breaks_third_order_regularity(self):
        self.assertGreaterEqual(self.report.slopes[3], 0.5)
        self.assertEqual(self.report.verdicts[3], 'divergent')
        self.assertNotEqual(self.report.obstruction, 0.0)

    def test_memoryless_twin_is_regular(self):
        twin = self.report.control
        self.assertIsNotNone(twin)
        self.assertLessEqual(twin.slopes[3], 0.05)
        self.assertEqual(twin.verdicts[3], 'summable')
        self.assertTrue(self.report.expected_outcome())

    def test_lower_orders_stay_summable(self):
        self.assertEqual(self.report.verdicts[1], 'summable')

    def test_memory_tail_matches_obstruction(self):
        """lambda_n³ (w_n - w_n⁰) settles at √2 |Obs|"""
        lam = self.basis.lambdas.real
        gap = lam ** 3 * np.abs(self.report.state.w - self.report.control.state.w)
        np.testing.assert_allclose(gap[15:], math.sqrt(2.0) * abs(self.report.obstruction), rtol=0.1)

    def test_sine_generator_tail_matches_obstruction(self):
        grid = TimeGrid(2.0, 4096)
        basis = build_interval_basis(0.0, 24)
        report = regularity_experiment(self.kernel, 1.0, sine_generator(grid, 3.0), basis, grid)
        self.assertGreater(abs(report.obstruction), 1e-3)
        gap = basis.lambdas.real ** 3 * np.abs(report.state.w - report.control.state.w)
        np.testing.assert_allclose(gap[15:], math.sqrt(2.0) * abs(report.obstruction), rtol=0.1)

    def test_vanishing_obstruction_is_inconclusive(self):
        correction = Signal.from_function(self.grid, lambda t: np.cos(math.pi * t / self.grid.T))
        g1 = cancel_obstruction(self.kernel, self.g1, correction)
        with self.assertRaises(ObstructionVanishes):
            regularity_experiment(self.kernel, 1.0, g1, self.basis.truncate(8), self.grid)

    def test_rejects_other_classes(self):
        with self.assertRaises(ClassMismatch):
            regularity_experiment(self.kernel, 1.0, self.g1, self.basis, self.grid, ControlClass.H20)


if __name__ == '__main__':
    unittest.main()
