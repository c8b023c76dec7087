import math
import unittest
import sys
import os

import numpy as np
from scipy.special import sici

# Add src to path
sys.path.append(os.path.join(os.path.dirname(__file__), '../src'))

from threshscatter.errors import DomainError
from threshscatter.quadrature import (compactified_rule, cos_integral, filon_exp, geometric_blocks, laguerre_rule,
                                      power_tail_exp, running_integral, simpson_weights, sin_integral,
                                      uniform_grid)


class TestFilon(unittest.TestCase):

    def test_constant_integrand_is_exact(self):
        """Filon treats e^{ikx} exactly, so f = 1 reproduces (e^{ikL} - 1)/(ik)."""
        x, dx = uniform_grid(3.0, 21)
        k = np.array([0.5, 7.0, 40.0])
        got = filon_exp(np.ones_like(x), dx, k)
        expected = (np.exp(1j * k * 3.0) - 1.0) / (1j * k)
        np.testing.assert_allclose(got, expected, rtol=1e-12)

    def test_quadratic_integrand_small_theta(self):
        """f = x^2 at tiny k goes through the series branch of the coefficients."""
        x, dx = uniform_grid(1.0, 11)
        k = 1e-4
        got = filon_exp(x * x, dx, k)[0]
        self.assertAlmostEqual(got.real, 1.0 / 3.0, places=8)
        self.assertAlmostEqual(got.imag, k / 4.0, places=10)

    def test_cos_and_sin_parts(self):
        x, dx = uniform_grid(math.pi, 201)
        self.assertAlmostEqual(cos_integral(np.ones_like(x), dx, 1.0)[0].real, 0.0, places=10)
        self.assertAlmostEqual(sin_integral(np.ones_like(x), dx, 1.0)[0].real, 2.0, places=10)

    def test_per_row_frequencies(self):
        x, dx = uniform_grid(1.0, 5)
        f = np.vstack([np.ones_like(x), 2.0 * np.ones_like(x)])
        got = filon_exp(f, dx, [0.0, 0.0])
        np.testing.assert_allclose(got, [1.0, 2.0], rtol=1e-14)

    def test_even_length_rejected(self):
        with self.assertRaises(DomainError):
            filon_exp(np.ones(4), 0.1, 1.0)

    def test_row_count_mismatch(self):
        with self.assertRaises(DomainError):
            filon_exp(np.ones((2, 5)), 0.1, [1.0, 2.0, 3.0])


class TestRules(unittest.TestCase):

    def test_uniform_grid_forces_odd_length(self):
        x, dx = uniform_grid(2.0, 10)
        self.assertEqual(x.size, 11)
        self.assertAlmostEqual(dx, 0.2)

    def test_simpson_exact_for_cubics(self):
        x, dx = uniform_grid(2.0, 9)
        w = simpson_weights(x.size, dx)
        self.assertAlmostEqual(float(w @ x ** 3), 4.0, places=12)
        with self.assertRaises(DomainError):
            simpson_weights(4, 0.1)

    def test_running_integral_keeps_imaginary_part(self):
        x = np.linspace(0.0, 2.0, 41)
        got = running_integral((1.0 + 3.0j) * x * x, x)
        np.testing.assert_allclose(got, (1.0 + 3.0j) * x ** 3 / 3.0, atol=1e-12)
        self.assertFalse(np.iscomplexobj(running_integral(x, x)))

    def test_geometric_blocks_tile_the_interval(self):
        blocks = geometric_blocks(9.0, 0.5, 8)
        edges = [(x[0], x[-1]) for x, _ in blocks]
        self.assertEqual(edges, [(0.0, 0.5), (0.5, 1.0), (1.0, 2.0), (2.0, 4.0), (4.0, 9.0)])
        for x, dx in blocks:
            self.assertEqual(x.size, 9)
            self.assertAlmostEqual(dx, x[1] - x[0], places=14)
        outer = geometric_blocks(24.0, 0.5, 9, start=5.0)
        self.assertEqual([(x[0], x[-1]) for x, _ in outer], [(5.0, 10.0), (10.0, 24.0)])
        with self.assertRaises(DomainError):
            geometric_blocks(1.0, 0.5, 9, start=1.0)

    def test_power_tail_matches_sine_cosine_integrals(self):
        """int_z^inf e^{ir}/r dr = -Ci(z) + i (pi/2 - Si(z))."""
        z = 100.0
        si, ci = sici(z)
        exact = -ci + 1j * (math.pi / 2 - si)
        got = power_tail_exp(1.0 / z, 1.0, z, 1.0)[0]
        self.assertLess(abs(got - exact) / abs(exact), 1e-9)
        # e^{ir}/r^2: one integration by parts back to the 1/r tail
        got2 = power_tail_exp(1.0 / z ** 2, 2.0, z, 1.0)[0]
        exact2 = np.exp(1j * z) / z + 1j * exact
        self.assertLess(abs(got2 - exact2) / abs(exact2), 1e-9)
        self.assertAlmostEqual(power_tail_exp(2.0, 3.0, 10.0, 0.0)[0].real, 10.0, places=12)
        with self.assertRaises(DomainError):
            power_tail_exp(1.0, 1.0, 10.0, 0.0)

    def test_laguerre_weights_sum_to_gamma(self):
        for alpha in (-0.5, 0.0, 1.5):
            _, w = laguerre_rule(40, alpha)
            self.assertAlmostEqual(float(w.sum()), math.gamma(alpha + 1.0), places=10)

    def test_compactified_rule_beta_integral(self):
        """int_0^inf (1+a)^{-s} a^{-1/2} da = B(1/2, s-1/2)."""
        for s in (2.5, 3.5, 4.5):
            _, w = compactified_rule(64, s)
            expected = math.gamma(0.5) * math.gamma(s - 0.5) / math.gamma(s)
            self.assertAlmostEqual(float(w.sum()), expected, places=10)

    def test_rules_are_read_only(self):
        x, _ = laguerre_rule(8, 0.0)
        with self.assertRaises(ValueError):
            x[0] = 1.0


if __name__ == '__main__':
    unittest.main()
