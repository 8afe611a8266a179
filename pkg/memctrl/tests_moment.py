# memctrl/tests_moment.py

"""
Test cases for the moment problems.
Tests projections, kernel sets, pairing, Gram assembly, target conversion,
the minimum-norm solve and the Riesz diagnostics.
"""

import math
import unittest

import numpy as np

from .core.kernels import MemoryKernel, Signal, TimeGrid
from .core.moment import (
    ControlClass,
    TargetClass,
    TargetSpec,
    assemble_gram,
    build_kernel_set,
    build_moment_system,
    constraint_values,
    linear_trend,
    pair,
    project_N1,
    project_N2,
    project_N3,
    riesz_diagnostics,
    solve_min_norm,
    target_to_moments,
)
from .core.spectral import build_interval_basis
from .core.volterra import SolverMethod, solve_zeta_all
from .exceptions import ClassMismatch, GridMismatch, InvalidArgument, MissingMode


# =============================================================================
# MOCK DATA FIXTURES
# =============================================================================

def kernel_set_for(order, n_modes, T, m, kernel=None, method=SolverMethod.TIMESTEP, convention='derived'):
    kernel = kernel or MemoryKernel.zero()
    basis = build_interval_basis(0.0, n_modes)
    grid = TimeGrid(T, m)
    zetas = solve_zeta_all(basis, kernel, grid, method)
    return build_kernel_set(order, basis, zetas, kernel, convention)


def exp_kernel():
    return MemoryKernel.exponential(1.0, 1.0)


# =============================================================================
# PROJECTION TESTS
# =============================================================================

class TestProjections(unittest.TestCase):
    """Test project_N1, project_N2 and project_N3"""

    def setUp(self):
        self.grid = TimeGrid(1.0, 1000)
        self.t = self.grid.nodes

    def test_N1_removes_constants(self):
        self.assertLess(project_N1(Signal.constant(self.grid, 3.0)).sup(), 1e-12)

    def test_N1_centers_linear(self):
        result = project_N1(Signal.monomial(self.grid, 1))
        np.testing.assert_allclose(result.values.real, self.t - 0.5, atol=1e-12)

    def test_N1_keeps_zero_mean(self):
        s = Signal.from_function(self.grid, lambda t: np.sin(2 * math.pi * t))
        self.assertLess((project_N1(s) - s).sup(), 1e-12)

    def test_N2_trend_of_constant(self):
        one = Signal.constant(self.grid)
        A, B = linear_trend(one)
        self.assertAlmostEqual(A, 0.0, places=10)
        self.assertAlmostEqual(B, 1.0, places=10)
        self.assertLess(project_N2(one).sup(), 1e-10)

    def test_N2_trend_of_linear(self):
        t = Signal.monomial(self.grid, 1)
        A, B = linear_trend(t)
        self.assertAlmostEqual(A, 1.0, places=10)
        self.assertAlmostEqual(B, 0.0, places=10)
        self.assertLess(project_N2(t).sup(), 1e-10)

    def test_N2_of_square(self):
        """t² -> t² - t + 1/6 and both functionals vanish"""
        result = project_N2(Signal.monomial(self.grid, 2))
        np.testing.assert_allclose(result.values.real, self.t ** 2 - self.t + 1.0 / 6.0, atol=1e-5)
        for value in constraint_values(result, 2):
            self.assertLess(abs(value), 1e-12)

    def test_N3_annihilates_three_functionals(self):
        s = Signal.from_function(self.grid, lambda t: np.exp(t) * np.cos(5 * t))
        for value in constraint_values(project_N3(s), 3):
            self.assertLess(abs(value), 1e-12)

    def test_orthogonal_projectors(self):
        """Idempotent and self-adjoint in the trapezoid inner product"""
        rng = np.random.default_rng(11)
        a = Signal(self.grid, rng.standard_normal(self.grid.m + 1))
        b = Signal(self.grid, rng.standard_normal(self.grid.m + 1))
        for project in (project_N1, project_N2, project_N3):
            once = project(a)
            self.assertLess((project(once) - once).sup(), 1e-10, msg=project.__name__)
            self.assertAlmostEqual(once.inner(b), a.inner(project(b)), delta=1e-10, msg=project.__name__)


# =============================================================================
# KERNEL SET TESTS
# =============================================================================

class TestKernelSet(unittest.TestCase):
    """Test build_kernel_set"""

    def test_order_zero_exponentials(self):
        """K = 0: e_n = -√2 exp(i n pi t)"""
        ks = kernel_set_for(0, 3, 2.0, 2048)
        t = ks.grid.nodes
        for i, n in enumerate((1, 2, 3)):
            expected = -math.sqrt(2.0) * np.exp(1j * n * math.pi * t)
            self.assertLessEqual(np.max(np.abs(ks.e(i).values - expected)), 5e-4)

    def test_order_one_without_memory(self):
        zero = kernel_set_for(0, 3, 2.0, 1024)
        first = kernel_set_for(1, 3, 2.0, 1024)
        for i in range(3):
            np.testing.assert_allclose(first.e(i).values, zero.e(i).values)
            mean = first.e(i).integral() / first.grid.T
            np.testing.assert_allclose(first.p(i).values, first.e(i).values - mean, atol=1e-12)

    def test_order_two_projection_property(self):
        ks = kernel_set_for(2, 4, 2.0, 1024, kernel=exp_kernel())
        for i in range(len(ks)):
            for value in constraint_values(ks.p(i), 2):
                self.assertLess(abs(value), 1e-10)

    def test_rejects_order_three(self):
        with self.assertRaises(InvalidArgument):
            kernel_set_for(3, 2, 2.0, 256)

    def test_missing_mode(self):
        basis = build_interval_basis(0.0, 3)
        zetas = solve_zeta_all(basis.truncate(2), MemoryKernel.zero(), TimeGrid(2.0, 256))
        with self.assertRaises(MissingMode):
            build_kernel_set(0, basis, zetas, MemoryKernel.zero())


# =============================================================================
# PAIRING & GRAM TESTS
# =============================================================================

class TestPairingAndGram(unittest.TestCase):
    """Test pair and assemble_gram"""

    def test_exponential_orthogonality(self):
        """g(T - r) = exp(-i pi r) picks out the first mode"""
        ks = kernel_set_for(0, 4, 2.0, 2048, method=SolverMethod.CLOSED_FORM)
        g = Signal.from_function(ks.grid, lambda t: np.exp(-1j * math.pi * (2.0 - t)))
        moments = pair(ks, g)
        expected = np.array([-2.0 * math.sqrt(2.0), 0, 0, 0])
        np.testing.assert_allclose(moments, expected, atol=1e-3)

    def test_zero_generator(self):
        ks = kernel_set_for(1, 3, 2.0, 512, kernel=exp_kernel())
        np.testing.assert_array_equal(pair(ks, Signal.zeros(ks.grid)), np.zeros(3))

    def test_pairing_ignores_low_polynomials(self):
        """p_n integrate to zero against 1 (and t for order 2)"""
        for order, (c0, c1) in ((1, (0.7, 0.0)), (2, (0.7, -1.3))):
            ks = kernel_set_for(order, 4, 2.5, 1024, kernel=exp_kernel())
            g = project_N2(Signal.from_function(ks.grid, lambda t: np.sin(3 * t) + t ** 3))
            shifted = g + Signal.from_function(ks.grid, lambda t: c0 + c1 * t)
            base = pair(ks, g)
            np.testing.assert_allclose(pair(ks, shifted), base, atol=1e-10 * np.max(np.abs(base)),
                                       err_msg=f"order {order}")

    def test_pair_rejects_other_grid(self):
        ks = kernel_set_for(0, 2, 2.0, 512)
        with self.assertRaises(GridMismatch):
            pair(ks, Signal.zeros(TimeGrid(2.0, 256)))

    def test_gram_at_critical_time(self):
        ks = kernel_set_for(0, 8, 2.0, 2048, method=SolverMethod.CLOSED_FORM)
        real_gram = assemble_gram(ks)
        complex_gram = assemble_gram(ks, realified=False)
        np.testing.assert_allclose(np.diag(real_gram), 2.0, atol=1e-3)
        np.testing.assert_allclose(np.diag(complex_gram).real, 4.0, atol=1e-3)
        off = complex_gram - np.diag(np.diag(complex_gram))
        self.assertLessEqual(np.max(np.abs(off)), 1e-3 * 4.0)

    def test_gram_below_critical_time(self):
        """T = 1.5 loses controllability: the realified Gram is nearly singular"""
        ks = kernel_set_for(0, 16, 1.5, 2048, method=SolverMethod.CLOSED_FORM)
        eigenvalues = np.linalg.eigvalsh(assemble_gram(ks))
        self.assertLess(eigenvalues[0], 1e-3 * eigenvalues[-1])

    def test_single_mode_gram(self):
        ks = kernel_set_for(0, 1, 2.0, 512)
        gram = assemble_gram(ks)
        self.assertEqual(gram.shape, (2, 2))
        self.assertTrue(np.all(np.linalg.eigvalsh(gram) > 0))


# =============================================================================
# TARGET TESTS
# =============================================================================

class TestTargetToMoments(unittest.TestCase):
    """Test target_to_moments under both sign tables"""

    def setUp(self):
        self.delta = np.array([1.0, 0.0, 0.0])
        self.zeros = np.zeros(3)

    def test_zero_target(self):
        target = TargetSpec.zero(TargetClass.L2xHm1, 3)
        np.testing.assert_array_equal(target_to_moments(target, 0), np.zeros(3))

    def test_printed_convention_order_zero(self):
        target = TargetSpec(TargetClass.L2xHm1, self.delta, self.zeros)
        np.testing.assert_allclose(target_to_moments(target, 0, 'paper'), [1j, 0, 0])

    def test_printed_convention_order_one(self):
        target = TargetSpec(TargetClass.H10xL2, self.delta, self.zeros)
        np.testing.assert_allclose(target_to_moments(target, 1, 'paper'), [-1, 0, 0])

    def test_derived_convention(self):
        np.testing.assert_allclose(
            target_to_moments(TargetSpec(TargetClass.L2xHm1, self.delta, self.zeros), 0), [-1j, 0, 0])
        np.testing.assert_allclose(
            target_to_moments(TargetSpec(TargetClass.H10xL2, self.delta, self.zeros), 1), [1, 0, 0])

    def test_class_mismatch(self):
        target = TargetSpec.zero(TargetClass.H2xH10, 3)
        with self.assertRaises(ClassMismatch):
            target_to_moments(target, 1)

    def test_state_roundtrip_weights(self):
        basis = build_interval_basis(0.0, 3)
        target = TargetSpec(TargetClass.H10xL2, self.delta, self.delta)
        state = target.to_state(basis)
        self.assertAlmostEqual(state.w[0], 1.0 / math.pi)
        self.assertAlmostEqual(state.v[0], 1.0)

    def test_control_class_lookup(self):
        self.assertEqual(ControlClass.from_string('h20'), ControlClass.H20)
        with self.assertRaises(InvalidArgument):
            ControlClass.from_string('H4')


# =============================================================================
# SOLVE TESTS
# =============================================================================

class TestSolveMinNorm(unittest.TestCase):
    """Test solve_min_norm"""

    def test_zero_rhs(self):
        ks = kernel_set_for(0, 4, 2.0, 1024)
        system = build_moment_system(ks, TargetSpec.zero(TargetClass.L2xHm1, 4))
        g = solve_min_norm(system)
        self.assertEqual(g.sup(), 0.0)
        self.assertEqual(system.residual, 0.0)

    def test_biorthogonal_of_exponentials(self):
        """c = e_1 is recovered by re-pairing"""
        ks = kernel_set_for(0, 6, 2.0, 2048, method=SolverMethod.CLOSED_FORM)
        eta = np.zeros(6)
        eta[0] = -1.0
        system = build_moment_system(ks, TargetSpec(TargetClass.L2xHm1, np.zeros(6), eta))
        np.testing.assert_allclose(system.moments, [1, 0, 0, 0, 0, 0])

        g = solve_min_norm(system)
        self.assertLessEqual(system.residual, 1e-6)
        np.testing.assert_allclose(pair(ks, g), system.moments, atol=1e-6)

    def test_random_target_with_memory(self):
        ks = kernel_set_for(1, 8, 2.5, 2048, kernel=exp_kernel())
        target = TargetSpec.random(TargetClass.H10xL2, 8, seed=7)
        system = build_moment_system(ks, target)
        g = solve_min_norm(system, ridge=1e-10)
        self.assertLessEqual(system.residual, 1e-6 * np.linalg.norm(system.moments))
        self.assertLess(abs(g.integral()), 1e-10)

    def test_negative_ridge(self):
        ks = kernel_set_for(0, 2, 2.0, 256)
        system = build_moment_system(ks, TargetSpec.zero(TargetClass.L2xHm1, 2))
        with self.assertRaises(InvalidArgument):
            solve_min_norm(system, ridge=-1.0)


# =============================================================================
# RIESZ TESTS
# =============================================================================

class TestRieszDiagnostics(unittest.TestCase):
    """Test riesz_diagnostics"""

    def test_orthogonal_family(self):
        ks = kernel_set_for(0, 16, 2.0, 2048, method=SolverMethod.CLOSED_FORM)
        report = riesz_diagnostics(ks)
        self.assertEqual(report.defect, 0)
        self.assertTrue(report.is_riesz)
        self.assertLessEqual(report.condition, 1.05)

    def test_short_horizon_has_defect(self):
        ks = kernel_set_for(0, 16, 1.0, 2048, method=SolverMethod.CLOSED_FORM)
        report = riesz_diagnostics(ks)
        self.assertGreaterEqual(report.defect, 1)
        self.assertFalse(report.is_riesz)

    def test_duplicated_mode(self):
        """One repeated member: defect exactly 1, removal restores conditioning"""
        ks = kernel_set_for(0, 6, 2.0, 1024, method=SolverMethod.CLOSED_FORM)
        duplicated = ks.select([0, 1, 2, 3, 4, 5, 3])
        report = riesz_diagnostics(duplicated)
        self.assertEqual(report.defect, 1)
        self.assertEqual(report.removed, [4])
        self.assertTrue(report.remaining_well_conditioned)
        self.assertLessEqual(report.remaining_condition, 1.05)

    def test_n_range(self):
        ks = kernel_set_for(0, 8, 2.0, 1024, method=SolverMethod.CLOSED_FORM)
        report = riesz_diagnostics(ks, n_range=(3, 8))
        self.assertEqual(report.modes, [3, 4, 5, 6, 7, 8])

    def test_too_few_modes(self):
        ks = kernel_set_for(0, 3, 2.0, 512)
        with self.assertRaises(InvalidArgument):
            riesz_diagnostics(ks)


if __name__ == '__main__':
    unittest.main()
