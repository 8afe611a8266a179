# memctrl/tests_volterra.py

"""
Test cases for the modal memory solvers.
Tests the timestep and Picard solvers against closed forms, each other and a
numerically inverted Laplace transform, plus the Z_n expansion.
"""

import math
import unittest

import mpmath
import numpy as np

from .core.kernels import MemoryKernel, TimeGrid, trig_signals
from .core.spectral import Mode, build_interval_basis
from .core.volterra import (
    SolverMethod,
    closed_form_zeta,
    derivative_identity_defect,
    energy_drift,
    equation_defect,
    fixed_point_residual,
    remainder_envelope_slope,
    solve_zeta_all,
    solve_zeta_picard,
    solve_zeta_timestep,
    z_expansion,
)
from .exceptions import ImaginaryLambda, InvalidArgument, NoConvergence, UnderResolved


# =============================================================================
# MOCK DATA FIXTURES
# =============================================================================

def dirichlet_mode(n):
    return build_interval_basis(0.0, n).modes[n - 1]


def exp_kernel():
    return MemoryKernel.exponential(1.0, 1.0)


def laplace_zeta(lambda_sq, t):
    """zeta(t) by Talbot inversion of 1/(s² + lambda² - 1/(s+1))"""
    mpmath.mp.dps = 30
    value = mpmath.invertlaplace(lambda s: 1 / (s ** 2 + lambda_sq - 1 / (s + 1)), t, method='talbot')
    return float(value)


# =============================================================================
# TIMESTEP SOLVER TESTS
# =============================================================================

class TestTimestepSolver(unittest.TestCase):
    """Test solve_zeta_timestep"""

    def test_memoryless_sine(self):
        """K = 0 reproduces sin(pi t)/pi"""
        grid = TimeGrid(2.0, 512)
        table = solve_zeta_timestep(dirichlet_mode(1), MemoryKernel.zero(), grid)
        exact = np.sin(math.pi * grid.nodes) / math.pi
        self.assertLessEqual(np.max(np.abs(table.zeta.values - exact)), 2e-4)
        self.assertEqual(table.method, SolverMethod.TIMESTEP)
        self.assertLess(energy_drift(table), 1e-3)

    def test_imaginary_lambda_gives_sinh(self):
        grid = TimeGrid(1.0, 256)
        table = solve_zeta_timestep(Mode.build(1, -1.0, 1.0), MemoryKernel.zero(), grid)
        np.testing.assert_allclose(table.zeta.values.real, np.sinh(grid.nodes), atol=1e-4)

    def test_matches_picard_with_memory(self):
        grid = TimeGrid(2.0, 1024)
        mode = dirichlet_mode(1)
        stepped = solve_zeta_timestep(mode, exp_kernel(), grid)
        iterated = solve_zeta_picard(mode, exp_kernel(), grid)
        self.assertLessEqual((stepped.zeta - iterated.zeta).sup(), 5e-4)

    def test_matches_laplace_inversion(self):
        """Independent oracle at t = 1"""
        grid = TimeGrid(2.0, 1024)
        table = solve_zeta_timestep(dirichlet_mode(1), exp_kernel(), grid)
        oracle = laplace_zeta(math.pi ** 2, 1.0)
        self.assertAlmostEqual(table.zeta.values[512].real, oracle, delta=1e-4)

    def test_residual_checks_are_small(self):
        grid = TimeGrid(2.0, 1024)
        table = solve_zeta_timestep(dirichlet_mode(2), exp_kernel(), grid)
        self.assertLess(equation_defect(table, exp_kernel()), 1e-2)
        self.assertLess(fixed_point_residual(table, exp_kernel()), 1e-3)
        self.assertLess(derivative_identity_defect(table, exp_kernel()), 1e-2)

    def test_under_resolved(self):
        with self.assertRaises(UnderResolved) as ctx:
            solve_zeta_timestep(dirichlet_mode(16), exp_kernel(), TimeGrid(2.0, 64))
        self.assertEqual(ctx.exception.index, 16)


# =============================================================================
# PICARD SOLVER TESTS
# =============================================================================

class TestPicardSolver(unittest.TestCase):
    """Test solve_zeta_picard"""

    def test_memoryless_single_iteration(self):
        grid = TimeGrid(2.0, 256)
        table = solve_zeta_picard(dirichlet_mode(1), MemoryKernel.zero(), grid)
        self.assertEqual(table.iterations, 1)
        reference = closed_form_zeta(dirichlet_mode(1), grid)
        self.assertLess((table.zeta - reference.zeta).sup(), 1e-14)

    def test_exponential_kernel_converges_quickly(self):
        table = solve_zeta_picard(dirichlet_mode(1), exp_kernel(), TimeGrid(2.0, 512), tol=1e-10)
        self.assertLessEqual(table.iterations, 25)

    def test_constant_kernel_matches_timestep(self):
        grid = TimeGrid(4.0, 2048)
        mode = dirichlet_mode(2)
        kernel = MemoryKernel.constant(1.0)
        iterated = solve_zeta_picard(mode, kernel, grid)
        stepped = solve_zeta_timestep(mode, kernel, grid)
        self.assertLessEqual((iterated.zeta - stepped.zeta).sup(), 1e-3)

    def test_iteration_budget(self):
        with self.assertRaises(NoConvergence):
            solve_zeta_picard(dirichlet_mode(1), exp_kernel(), TimeGrid(2.0, 256), max_iter=1, tol=1e-14)

    def test_rejects_zero_budget(self):
        with self.assertRaises(InvalidArgument):
            solve_zeta_picard(dirichlet_mode(1), exp_kernel(), TimeGrid(2.0, 256), max_iter=0)


class TestSolveAll(unittest.TestCase):
    """Test solve_zeta_all"""

    def test_one_table_per_mode_in_order(self):
        basis = build_interval_basis(0.0, 4)
        tables = solve_zeta_all(basis, exp_kernel(), TimeGrid(2.0, 512))
        self.assertEqual([t.mode.index for t in tables], [1, 2, 3, 4])

    def test_solvers_agree_on_first_modes(self):
        grid = TimeGrid(2.0, 1024)
        basis = build_interval_basis(0.0, 8)
        stepped = solve_zeta_all(basis, exp_kernel(), grid, SolverMethod.TIMESTEP)
        iterated = solve_zeta_all(basis, exp_kernel(), grid, SolverMethod.PICARD)
        for a, b in zip(stepped, iterated):
            self.assertLessEqual((a.zeta - b.zeta).sup(), 5e-4, msg=f"n={a.mode.index}")

    def test_z_within_gronwall_bound(self):
        """sup |Z_n| <= 2 exp(T² sup|K|)"""
        grid = TimeGrid(2.0, 1024)
        bound = 2.0 * math.exp(grid.T ** 2 * 1.0)
        for b in (0.0, 15.0):
            for table in solve_zeta_all(build_interval_basis(b, 8), exp_kernel(), grid):
                self.assertLessEqual(table.z.sup(), bound, msg=f"b={b}, n={table.mode.index}")

    def test_resolution_checked_up_front(self):
        with self.assertRaises(UnderResolved):
            solve_zeta_all(build_interval_basis(0.0, 20), MemoryKernel.zero(), TimeGrid(2.0, 64))


# =============================================================================
# EXPANSION TESTS
# =============================================================================

class TestZExpansion(unittest.TestCase):
    """Test z_expansion"""

    def test_memoryless_expansion_is_exact(self):
        grid = TimeGrid(2.0, 512)
        mode = dirichlet_mode(1)
        _, _, E = trig_signals(mode, grid)
        for order in range(5):
            expansion, remainder = z_expansion(mode, MemoryKernel.zero(), grid, order)
            self.assertLess((expansion - E).sup(), 1e-12)
            self.assertLess(remainder.sup(), 1e-10)

    def test_order_zero_remainder_stays_bounded(self):
        """Consecutive ratios of sup|P_n| stay within [0.3, 3]"""
        grid = TimeGrid(2.0, 2048)
        sups = []
        for n in (4, 8, 16):
            _, remainder = z_expansion(dirichlet_mode(n), exp_kernel(), grid, 0)
            sups.append(remainder.sup())
        for coarse, fine in zip(sups, sups[1:]):
            self.assertTrue(0.3 <= fine / coarse <= 3.0, msg=f"sups {sups}")

    def test_order_zero_envelope_is_slow(self):
        """exp(-i lambda t) P_n(t) drifts no faster than T² sup|K|"""
        grid = TimeGrid(2.0, 2048)
        slopes = []
        for n in (4, 8, 16):
            mode = dirichlet_mode(n)
            _, remainder = z_expansion(mode, exp_kernel(), grid, 0)
            slopes.append(remainder_envelope_slope(mode, remainder))
        for slope in slopes:
            self.assertLessEqual(slope, grid.T ** 2 * 1.0)
        for coarse, fine in zip(slopes, slopes[1:]):
            self.assertTrue(0.3 <= fine / coarse <= 3.0, msg=f"slopes {slopes}")

    def test_first_order_correction_size(self):
        grid = TimeGrid(2.0, 2048)
        mode = dirichlet_mode(16)
        table = solve_zeta_picard(mode, exp_kernel(), grid)
        zeroth, _ = z_expansion(mode, exp_kernel(), grid, 0, table)
        first, _ = z_expansion(mode, exp_kernel(), grid, 1, table)
        bound = grid.T ** 2 * 1.0 / abs(mode.lam)
        self.assertLessEqual((first - zeroth).sup(), bound)

    def test_imaginary_lambda_rejected(self):
        with self.assertRaises(ImaginaryLambda):
            z_expansion(Mode.build(1, -1.0, 1.0), exp_kernel(), TimeGrid(1.0, 64), 0)

    def test_order_out_of_range(self):
        with self.assertRaises(InvalidArgument):
            z_expansion(dirichlet_mode(1), exp_kernel(), TimeGrid(1.0, 64), 5)


if __name__ == '__main__':
    unittest.main()
