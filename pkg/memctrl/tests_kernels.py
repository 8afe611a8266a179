# memctrl/tests_kernels.py

"""
Test cases for memory kernels and the trapezoidal convolution algebra.
"""

import math
import os
import tempfile
import unittest

import numpy as np
import pandas as pd

from .core.kernels import (
    KernelFamily,
    MemoryKernel,
    Signal,
    TimeGrid,
    conv_power,
    convolve,
    convolve_at_end,
    trig_signals,
)
from .core.spectral import Mode, build_interval_basis
from .exceptions import GridMismatch, InvalidArgument


# =============================================================================
# MOCK DATA FIXTURES
# =============================================================================

def unit_grid(m=100):
    return TimeGrid(1.0, m)


def write_kernel_csv(directory, t, values):
    path = os.path.join(directory, 'kernel.csv')
    pd.DataFrame({'t': t, 'K': values}).to_csv(path, index=False)
    return path


# =============================================================================
# GRID & SIGNAL TESTS
# =============================================================================

class TestTimeGrid(unittest.TestCase):
    """Test TimeGrid construction and the resolution rule"""

    def test_nodes_and_weights(self):
        grid = TimeGrid(2.0, 16)
        self.assertAlmostEqual(grid.h, 0.125)
        self.assertEqual(grid.nodes.size, 17)
        self.assertAlmostEqual(grid.weights.sum(), 2.0)

    def test_rejects_bad_horizon(self):
        with self.assertRaises(InvalidArgument):
            TimeGrid(-1.0, 64)
        with self.assertRaises(InvalidArgument):
            TimeGrid(1.0, 4)

    def test_auto_floor(self):
        self.assertEqual(TimeGrid.auto(2.0, math.pi).m, 512)

    def test_auto_power_of_two(self):
        """4 * 2 * 100 = 800 rounds up to 1024"""
        self.assertEqual(TimeGrid.auto(2.0, 100.0).m, 1024)

    def test_refine(self):
        self.assertEqual(TimeGrid(1.0, 64).refine().m, 128)


class TestSignal(unittest.TestCase):
    """Test Signal algebra and quadrature"""

    def test_integral_of_linear(self):
        s = Signal.monomial(unit_grid(), 1)
        self.assertAlmostEqual(s.integral().real, 0.5, places=14)

    def test_inner_conjugates_second_argument(self):
        grid = unit_grid()
        s = Signal.constant(grid, 1j)
        self.assertAlmostEqual(s.inner(s), 1.0 + 0j, places=14)

    def test_mismatched_grids(self):
        with self.assertRaises(GridMismatch):
            Signal.zeros(unit_grid(100)) + Signal.zeros(unit_grid(200))

    def test_wrong_sample_count(self):
        with self.assertRaises(InvalidArgument):
            Signal(unit_grid(100), np.zeros(5))

    def test_cumulative(self):
        s = Signal.constant(unit_grid(), 2.0).cumulative()
        np.testing.assert_allclose(s.values.real, 2.0 * s.grid.nodes, atol=1e-14)


# =============================================================================
# KERNEL TESTS
# =============================================================================

class TestMemoryKernel(unittest.TestCase):
    """Test MemoryKernel evaluation and antiderivatives"""

    def test_zero_kernel(self):
        kernel = MemoryKernel.zero()
        self.assertTrue(kernel.is_zero)
        np.testing.assert_array_equal(kernel.evaluate(np.linspace(0, 1, 5), 2), np.zeros(5))

    def test_constant_antiderivatives(self):
        kernel = MemoryKernel.constant(3.0)
        t = np.array([0.0, 1.0, 2.0])
        np.testing.assert_allclose(kernel.evaluate(t, 1), 3.0 * t)
        np.testing.assert_allclose(kernel.evaluate(t, 2), 1.5 * t ** 2)

    def test_exponential_antiderivatives_match_quadrature(self):
        kernel = MemoryKernel.exponential(1.0, 1.0)
        grid = TimeGrid(2.0, 4000)
        k1 = kernel.sample(grid).cumulative()
        k2 = k1.cumulative()
        np.testing.assert_allclose(kernel.evaluate(grid.nodes, 1), k1.values.real, atol=1e-6)
        np.testing.assert_allclose(kernel.evaluate(grid.nodes, 2), k2.values.real, atol=1e-6)

    def test_exponential_without_decay_is_constant(self):
        kernel = MemoryKernel.exponential(2.0, 0.0)
        self.assertAlmostEqual(float(kernel.evaluate(np.array([1.5]), 2)[0]), 2.25)

    def test_tabulated_from_csv(self):
        t = np.linspace(0.0, 3.0, 301)
        with tempfile.TemporaryDirectory() as tmp:
            kernel = MemoryKernel.from_csv(write_kernel_csv(tmp, t, np.exp(-t)))
        self.assertEqual(kernel.family, KernelFamily.TABULATED)
        self.assertAlmostEqual(float(kernel.evaluate(np.array([1.0]))[0]), math.exp(-1.0), places=4)
        self.assertAlmostEqual(float(kernel.evaluate(np.array([1.0]), 1)[0]), 1.0 - math.exp(-1.0), places=4)

    def test_tabulated_outside_range(self):
        kernel = MemoryKernel.tabulated([0.0, 1.0], [1.0, 1.0])
        with self.assertRaises(InvalidArgument):
            kernel.evaluate(np.array([2.0]))

    def test_tabulated_must_start_at_zero(self):
        with self.assertRaises(InvalidArgument):
            MemoryKernel.tabulated([0.5, 1.0], [1.0, 1.0])


# =============================================================================
# CONVOLUTION TESTS
# =============================================================================

class TestConvolve(unittest.TestCase):
    """Test convolve, conv_power and convolve_at_end"""

    def test_constants(self):
        """Trapezoid is exact for 1 * 1 = t"""
        grid = unit_grid(100)
        one = Signal.constant(grid)
        np.testing.assert_allclose(convolve(one, one).values.real, grid.nodes, atol=1e-13)

    def test_linear_against_constant(self):
        grid = unit_grid(100)
        result = convolve(Signal.monomial(grid, 1), Signal.constant(grid))
        self.assertAlmostEqual(result.values[-1].real, 0.5, delta=1e-14)

    def test_sine_against_exponential(self):
        grid = TimeGrid(1.0, 200)
        a = Signal.from_function(grid, lambda t: np.sin(math.pi * t))
        b = Signal.from_function(grid, lambda t: np.exp(-t))
        exact = math.pi * (1.0 + math.exp(-1.0)) / (1.0 + math.pi ** 2)
        self.assertAlmostEqual(convolve(a, b).values[-1].real, exact, delta=5e-5)
        self.assertAlmostEqual(convolve_at_end(a, b).real, convolve(a, b).values[-1].real, places=12)

    def test_commutative(self):
        grid = TimeGrid(1.5, 300)
        a = Signal.from_function(grid, lambda t: np.exp(-t) * np.cos(2 * t))
        b = Signal.from_function(grid, lambda t: 1 + t ** 2)
        np.testing.assert_allclose(convolve(a, b).values, convolve(b, a).values, atol=1e-13)

    def test_associative_to_quadrature_order(self):
        grid = TimeGrid(1.0, 1024)
        a = Signal.from_function(grid, lambda t: np.exp(-t))
        b = Signal.from_function(grid, lambda t: np.cos(3 * t))
        c = Signal.monomial(grid, 1)
        left = convolve(convolve(a, b), c)
        right = convolve(a, convolve(b, c))
        np.testing.assert_allclose(left.values, right.values, atol=1e-5)

    def test_second_order_convergence(self):
        """exp(-t) * sin(t) = (sin t - cos t + exp(-t)) / 2; halving h quarters the error"""
        errors = []
        for m in (128, 256, 512):
            grid = TimeGrid(2.0, m)
            a = Signal.from_function(grid, lambda t: np.exp(-t))
            b = Signal.from_function(grid, np.sin)
            exact = (math.sin(2.0) - math.cos(2.0) + math.exp(-2.0)) / 2
            errors.append(abs(convolve(a, b).values[-1].real - exact))
        for coarse, fine in zip(errors, errors[1:]):
            self.assertGreater(coarse / fine, 3.6)
            self.assertLess(coarse / fine, 4.4)

    def test_starts_at_zero(self):
        grid = unit_grid(32)
        self.assertEqual(convolve(Signal.constant(grid, 5.0), Signal.constant(grid, 2.0)).values[0], 0)

    def test_power_of_one(self):
        grid = TimeGrid(1.0, 400)
        one = Signal.constant(grid)
        np.testing.assert_allclose(conv_power(one, 2).values.real, grid.nodes, atol=1e-12)
        np.testing.assert_allclose(conv_power(one, 3).values.real, grid.nodes ** 2 / 2, atol=1e-3)

    def test_power_of_exponential(self):
        """Laplace oracle 1/(s+1)² gives t exp(-t)"""
        grid = TimeGrid(2.0, 400)
        kernel = MemoryKernel.exponential(1.0, 1.0).sample(grid)
        expected = grid.nodes * np.exp(-grid.nodes)
        np.testing.assert_allclose(conv_power(kernel, 2).values.real, expected, atol=1e-4)

    def test_power_rejects_zero(self):
        with self.assertRaises(InvalidArgument):
            conv_power(Signal.constant(unit_grid()), 0)


class TestTrigSignals(unittest.TestCase):
    """Test trig_signals"""

    def test_first_dirichlet_mode(self):
        mode = build_interval_basis(0.0, 1).modes[0]
        S, C, E = trig_signals(mode, TimeGrid(1.0, 16))
        self.assertAlmostEqual(S.values[8], 1.0, places=14)
        self.assertAlmostEqual(C.values[8], 0.0, places=14)
        self.assertAlmostEqual(E.values[8], 1j, places=14)

    def test_full_period(self):
        mode = build_interval_basis(0.0, 2).modes[1]
        _, _, E = trig_signals(mode, TimeGrid(1.0, 16))
        self.assertAlmostEqual(E.values[-1], 1.0, places=13)

    def test_imaginary_lambda_decays(self):
        mode = Mode.build(1, -1.0, 1.0)
        _, _, E = trig_signals(mode, TimeGrid(1.0, 16))
        self.assertAlmostEqual(E.values[-1], math.exp(-1.0), places=14)


if __name__ == '__main__':
    unittest.main()
