# memctrl/tests_spectral.py

"""
Test cases for the spectral layer.
Tests interval and synthetic bases, Dirichlet lift coefficients, weighted tails and decay fits.
"""

import math
import unittest

import numpy as np
from scipy.integrate import simpson

from .core.spectral import (
    CoeffState,
    DomainTag,
    TailVerdict,
    build_interval_basis,
    build_synthetic_basis,
    choose_root,
    dirichlet_lift_coeffs,
    fit_decay_exponent,
    lift_profile,
    weighted_tail,
)
from .exceptions import DegenerateEigenvalue, InvalidArgument, NoSolution


# =============================================================================
# MOCK DATA FIXTURES
# =============================================================================

def simpson_coefficient(profile, n, points=20001):
    """<u, phi_n> by composite Simpson on a fine grid"""
    x = np.linspace(0.0, 1.0, points)
    return simpson(profile(x) * math.sqrt(2.0) * np.sin(n * math.pi * x), x=x)


# =============================================================================
# BASIS TESTS
# =============================================================================

class TestIntervalBasis(unittest.TestCase):
    """Test build_interval_basis"""

    def test_dirichlet_spectrum(self):
        """b = 0 gives n²π² and psi = -√2"""
        basis = build_interval_basis(0.0, 3)
        np.testing.assert_allclose(basis.lambda_sq, [math.pi ** 2, 4 * math.pi ** 2, 9 * math.pi ** 2])
        np.testing.assert_allclose(basis.psis, [-math.sqrt(2.0)] * 3)
        self.assertEqual(basis.domain, DomainTag.INTERVAL)
        self.assertEqual(basis.indices, [1, 2, 3])

    def test_negative_lambda_sq_gets_imaginary_root(self):
        """b = 15 pushes the first mode below zero"""
        basis = build_interval_basis(15.0, 2)
        self.assertAlmostEqual(basis.lambda_sq[0], math.pi ** 2 - 15.0, places=12)
        self.assertAlmostEqual(basis.lambda_sq[1], 4 * math.pi ** 2 - 15.0, places=12)

        lam1 = basis.modes[0].lam
        self.assertAlmostEqual(lam1.real, 0.0, places=14)
        self.assertAlmostEqual(lam1.imag, math.sqrt(15.0 - math.pi ** 2), places=12)
        self.assertFalse(basis.modes[0].is_real)
        self.assertTrue(basis.modes[1].is_real)

    def test_zero_eigenvalue_is_degenerate(self):
        """b = π² makes lambda_1 vanish"""
        with self.assertRaises(DegenerateEigenvalue) as ctx:
            build_interval_basis(math.pi ** 2, 1)
        self.assertEqual(ctx.exception.index, 1)

    def test_rejects_empty_basis(self):
        with self.assertRaises(InvalidArgument):
            build_interval_basis(0.0, 0)

    def test_root_choice(self):
        """Imaginary part is never negative"""
        self.assertEqual(choose_root(4.0), 2.0)
        self.assertAlmostEqual(choose_root(-4.0), 2j)

    def test_truncate(self):
        basis = build_interval_basis(0.0, 6).truncate(2)
        self.assertEqual(len(basis), 2)


class TestSyntheticBasis(unittest.TestCase):
    """Test build_synthetic_basis"""

    def test_one_dimensional(self):
        basis = build_synthetic_basis(1, 2, [1.0, 1.0])
        np.testing.assert_allclose(basis.lambda_sq, [1.0, 4.0])

    def test_two_dimensional(self):
        basis = build_synthetic_basis(2, 4, [1.0] * 4)
        np.testing.assert_allclose(basis.lambda_sq, [1.0, 2.0, 3.0, 4.0])

    def test_three_dimensional(self):
        basis = build_synthetic_basis(3, 8, np.ones(8))
        self.assertAlmostEqual(basis.lambda_sq[-1], 4.0, places=12)
        self.assertEqual(basis.dimension, 3)

    def test_psi_profile_out_of_range(self):
        with self.assertRaises(InvalidArgument):
            build_synthetic_basis(2, 2, [1.0, 1e5])

    def test_bad_dimension(self):
        with self.assertRaises(InvalidArgument):
            build_synthetic_basis(4, 2, [1.0, 1.0])


# =============================================================================
# DIRICHLET LIFT TESTS
# =============================================================================

class TestDirichletLift(unittest.TestCase):
    """Test dirichlet_lift_coeffs against quadrature of the lift profile"""

    def test_pure_laplacian(self):
        """(1 - x) has coefficients √2/(nπ)"""
        basis = build_interval_basis(0.0, 5)
        coeffs = dirichlet_lift_coeffs(basis, 1.0)
        self.assertAlmostEqual(coeffs[0], 0.450158, places=6)
        np.testing.assert_allclose(coeffs, math.sqrt(2.0) / (np.arange(1, 6) * math.pi))

    def test_zero_boundary_value(self):
        basis = build_interval_basis(0.0, 4)
        np.testing.assert_array_equal(dirichlet_lift_coeffs(basis, 0.0), np.zeros(4))

    def test_positive_b_matches_quadrature(self):
        """b = 1: u = sin(1 - x)/sin(1)"""
        basis = build_interval_basis(1.0, 4)
        coeffs = dirichlet_lift_coeffs(basis, 1.0)
        for n in range(1, 5):
            oracle = simpson_coefficient(lambda x: lift_profile(1.0, 1.0, x), n)
            self.assertAlmostEqual(coeffs[n - 1], oracle, places=8)

    def test_negative_b_matches_quadrature(self):
        basis = build_interval_basis(-2.0, 3)
        coeffs = dirichlet_lift_coeffs(basis, 0.7)
        oracle = simpson_coefficient(lambda x: lift_profile(-2.0, 0.7, x), 2)
        self.assertAlmostEqual(coeffs[1], oracle, places=8)

    def test_lift_is_not_in_domain(self):
        """lambda_n² |c_n|² = 2 for every n: the lift misses H¹₀"""
        basis = build_interval_basis(0.0, 64)
        coeffs = dirichlet_lift_coeffs(basis, 1.0)
        state = CoeffState(coeffs, np.zeros(64))
        first = weighted_tail(state, basis, 1)
        np.testing.assert_allclose(first.partial_sums, 2.0 * np.arange(1, 65))
        self.assertEqual(fit_decay_exponent(first.partial_sums).verdict, TailVerdict.DIVERGENT)
        plain = weighted_tail(state, basis, 0)
        self.assertEqual(fit_decay_exponent(plain.partial_sums).verdict, TailVerdict.SUMMABLE)

    def test_resonant_b_has_no_lift(self):
        with self.assertRaises(NoSolution):
            lift_profile(4 * math.pi ** 2, 1.0, np.linspace(0, 1, 5))


# =============================================================================
# TAIL TESTS
# =============================================================================

class TestWeightedTail(unittest.TestCase):
    """Test weighted_tail"""

    def setUp(self):
        self.basis = build_interval_basis(0.0, 32)
        self.lam = np.abs(self.basis.lambdas)

    def test_bounded_tail(self):
        """w = 1/lambda², k = 1 gives entries 1/lambda with bounded sums"""
        state = CoeffState(1.0 / self.lam ** 2, np.zeros(32))
        tail = weighted_tail(state, self.basis, 1)
        np.testing.assert_allclose(tail.entries, 1.0 / self.lam)
        self.assertLess(tail.partial_sums[-1], 1.0 / 6.0)

    def test_linear_growth(self):
        """w = 1/lambda³, k = 3 gives S(N) = N"""
        state = CoeffState(1.0 / self.lam ** 3, np.zeros(32))
        tail = weighted_tail(state, self.basis, 3)
        np.testing.assert_allclose(tail.entries, np.ones(32))
        np.testing.assert_allclose(tail.partial_sums, np.arange(1, 33))

    def test_negative_k(self):
        with self.assertRaises(InvalidArgument):
            weighted_tail(CoeffState.zeros(3), self.basis, -1)


class TestDecayFit(unittest.TestCase):
    """Test fit_decay_exponent verdicts"""

    def setUp(self):
        self.n = np.arange(1, 65, dtype=float)

    def test_converging_sums(self):
        fit = fit_decay_exponent(1.0 - 1.0 / (self.n + 1.0))
        self.assertLessEqual(fit.slope, 0.05)
        self.assertEqual(fit.verdict, TailVerdict.SUMMABLE)

    def test_linear_sums(self):
        fit = fit_decay_exponent(self.n)
        self.assertAlmostEqual(fit.slope, 1.0, places=10)
        self.assertEqual(fit.verdict, TailVerdict.DIVERGENT)

    def test_logarithmic_sums(self):
        """log N sits between the two thresholds"""
        fit = fit_decay_exponent(np.log(self.n + 1.0))
        self.assertEqual(fit.verdict, TailVerdict.INCONCLUSIVE)
        self.assertEqual(fit.n_used, 32)

    def test_too_few_points(self):
        with self.assertRaises(InvalidArgument):
            fit_decay_exponent([1.0, 2.0, 3.0])


if __name__ == '__main__':
    unittest.main()
